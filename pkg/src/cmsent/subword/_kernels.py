"""Skip-gram negative-sampling epoch kernels.

Two implementations of the same epoch loop: a numba-compiled scalar kernel
(default) and a pure-numpy row-operation fallback. Selection is driven by
the CMSENT_NO_NUMBA environment variable at import time. Both paths consume
an identical pseudo-random draw sequence (xorshift64*), so they walk the
same (center, context, negative) updates; floating-point rounding may differ
at the last-bit level between them.
"""
from __future__ import annotations

import math
import os

import numpy as np

_M64 = (1 << 64) - 1
_MULT = 2685821657736338717
_LR_FLOOR = 1e-4

NUMBA_ENABLED = os.environ.get("CMSENT_NO_NUMBA", "").lower() not in ("1", "true", "yes")
if NUMBA_ENABLED:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover
        NUMBA_ENABLED = False


def sgns_epoch_numpy(
    tokens,
    offsets,
    keep_prob,
    neg_table,
    ngram_ids,
    ngram_offsets,
    word_in,
    ngram_mat,
    ctx,
    window,
    negatives,
    lr0,
    processed_start,
    total_planned,
    rng_state,
):
    """One epoch over the corpus using numpy row operations."""
    state = int(rng_state)
    table_len = len(neg_table)
    loss_sum = 0.0
    n_pairs = 0
    processed = int(processed_start)
    kept = np.empty(int(np.max(np.diff(offsets), initial=0)), dtype=np.int64)

    for s in range(len(offsets) - 1):
        start, end = int(offsets[s]), int(offsets[s + 1])
        n_kept = 0
        for pos in range(start, end):
            w = int(tokens[pos])
            state ^= state >> 12
            state = (state ^ (state << 25)) & _M64
            state ^= state >> 27
            u = ((state * _MULT) & _M64) >> 32
            if u / 4294967296.0 < keep_prob[w]:
                kept[n_kept] = w
                n_kept += 1
        processed += end - start
        lr = lr0 * max(_LR_FLOOR, 1.0 - processed / total_planned)
        for i in range(n_kept):
            state ^= state >> 12
            state = (state ^ (state << 25)) & _M64
            state ^= state >> 27
            u = ((state * _MULT) & _M64) >> 32
            b = 1 + u % window
            c = int(kept[i])
            ids = ngram_ids[int(ngram_offsets[c]) : int(ngram_offsets[c + 1])]
            for j in range(max(0, i - b), min(n_kept, i + b + 1)):
                if j == i:
                    continue
                t = int(kept[j])
                h = word_in[c] + ngram_mat[ids].sum(axis=0)
                grad = np.zeros_like(h)
                for neg_i in range(negatives + 1):
                    if neg_i == 0:
                        target, label = t, 1.0
                    else:
                        state ^= state >> 12
                        state = (state ^ (state << 25)) & _M64
                        state ^= state >> 27
                        u = ((state * _MULT) & _M64) >> 32
                        target = int(neg_table[u % table_len])
                        if target == t:
                            continue
                        label = 0.0
                    score = float(np.dot(h, ctx[target]))
                    sig = 1.0 / (1.0 + math.exp(-score))
                    clipped = min(max(sig, 1e-12), 1.0 - 1e-12)
                    loss_sum += -math.log(clipped) if label == 1.0 else -math.log(1.0 - clipped)
                    g = np.float32((label - sig) * lr)
                    grad += g * ctx[target]
                    ctx[target] += g * h
                word_in[c] += grad
                np.add.at(ngram_mat, ids, grad)
                n_pairs += 1
    return loss_sum, n_pairs, processed, state


def _sgns_epoch_scalar(
    tokens,
    offsets,
    keep_prob,
    neg_table,
    ngram_ids,
    ngram_offsets,
    word_in,
    ngram_mat,
    ctx,
    window,
    negatives,
    lr0,
    processed_start,
    total_planned,
    rng_state,
):
    """Scalar-loop epoch kernel; compiled with numba when enabled."""
    state = np.uint64(rng_state)
    c12 = np.uint64(12)
    c25 = np.uint64(25)
    c27 = np.uint64(27)
    c32 = np.uint64(32)
    mult = np.uint64(_MULT)
    window_u = np.uint64(window)
    table_u = np.uint64(len(neg_table))
    dim = word_in.shape[1]
    h = np.empty(dim, dtype=np.float32)
    grad = np.empty(dim, dtype=np.float32)
    loss_sum = 0.0
    n_pairs = 0
    processed = processed_start

    max_len = 0
    for s in range(len(offsets) - 1):
        length = offsets[s + 1] - offsets[s]
        if length > max_len:
            max_len = length
    kept = np.empty(max_len, dtype=np.int64)

    for s in range(len(offsets) - 1):
        start, end = offsets[s], offsets[s + 1]
        n_kept = 0
        for pos in range(start, end):
            w = tokens[pos]
            state ^= state >> c12
            state ^= state << c25
            state ^= state >> c27
            u = (state * mult) >> c32
            if u / 4294967296.0 < keep_prob[w]:
                kept[n_kept] = w
                n_kept += 1
        processed += end - start
        frac = 1.0 - processed / total_planned
        if frac < _LR_FLOOR:
            frac = _LR_FLOOR
        lr = lr0 * frac
        for i in range(n_kept):
            state ^= state >> c12
            state ^= state << c25
            state ^= state >> c27
            u = (state * mult) >> c32
            b = np.int64(1 + u % window_u)
            c = kept[i]
            n0, n1 = ngram_offsets[c], ngram_offsets[c + 1]
            lo = i - b
            if lo < 0:
                lo = 0
            hi = i + b + 1
            if hi > n_kept:
                hi = n_kept
            for j in range(lo, hi):
                if j == i:
                    continue
                t = kept[j]
                for d in range(dim):
                    acc = word_in[c, d]
                    for k in range(n0, n1):
                        acc += ngram_mat[ngram_ids[k], d]
                    h[d] = acc
                    grad[d] = 0.0
                for neg_i in range(negatives + 1):
                    if neg_i == 0:
                        target = t
                        label = 1.0
                    else:
                        state ^= state >> c12
                        state ^= state << c25
                        state ^= state >> c27
                        u = (state * mult) >> c32
                        target = neg_table[u % table_u]
                        if target == t:
                            continue
                        label = 0.0
                    score = 0.0
                    for d in range(dim):
                        score += h[d] * ctx[target, d]
                    sig = 1.0 / (1.0 + math.exp(-score))
                    clipped = sig
                    if clipped < 1e-12:
                        clipped = 1e-12
                    elif clipped > 1.0 - 1e-12:
                        clipped = 1.0 - 1e-12
                    if label == 1.0:
                        loss_sum += -math.log(clipped)
                    else:
                        loss_sum += -math.log(1.0 - clipped)
                    g = np.float32((label - sig) * lr)
                    for d in range(dim):
                        grad[d] += g * ctx[target, d]
                        ctx[target, d] += g * h[d]
                for d in range(dim):
                    word_in[c, d] += grad[d]
                for k in range(n0, n1):
                    row = ngram_ids[k]
                    for d in range(dim):
                        ngram_mat[row, d] += grad[d]
                n_pairs += 1
    return loss_sum, n_pairs, processed, np.uint64(state)


if NUMBA_ENABLED:
    sgns_epoch_numba = njit(cache=True)(_sgns_epoch_scalar)
    sgns_epoch = sgns_epoch_numba
else:  # pragma: no cover - exercised via CMSENT_NO_NUMBA runs
    sgns_epoch_numba = None
    sgns_epoch = sgns_epoch_numpy
