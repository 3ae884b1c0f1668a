"""Benchmark the skip-gram epoch kernel: numba JIT vs pure-numpy fallback.

Both kernels consume the same pseudo-random draw sequence, so they perform
the same sequence of updates; this script times full training runs on a
synthetic corpus and checks that the resulting vectors agree.

Run: python3 benchmarks/bench_skipgram.py [--sentences N] [--epochs E] [--dim D]
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from cmsent.subword import _kernels
from cmsent.subword.ngrams import NGramConfig
from cmsent.subword.skipgram import SkipgramConfig, train_skipgram
from cmsent.synth import SynthConfig, gen_mono_corpus


def make_corpus(n_sentences: int, seed: int = 0) -> list[list[str]]:
    cfg = SynthConfig(vocab_size=300, n_sentences=n_sentences, seed=seed)
    return [ex.tokens for ex in gen_mono_corpus(cfg)]


def run(corpus, sg_cfg, ng_cfg, kernel):
    original = _kernels.sgns_epoch
    _kernels.sgns_epoch = kernel
    try:
        start = time.perf_counter()
        space = train_skipgram(corpus, sg_cfg, ng_cfg)
        elapsed = time.perf_counter() - start
    finally:
        _kernels.sgns_epoch = original
    return space, elapsed


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sentences", type=int, default=2000)
    parser.add_argument("--epochs", type=int, default=3)
    parser.add_argument("--dim", type=int, default=64)
    parser.add_argument("--seed", type=int, default=1)
    args = parser.parse_args()

    if not _kernels.NUMBA_ENABLED:
        parser.error("numba path disabled (CMSENT_NO_NUMBA is set); nothing to compare")

    corpus = make_corpus(args.sentences)
    sg_cfg = SkipgramConfig(
        dim=args.dim, epochs=args.epochs, min_count=2, seed=args.seed
    )
    ng_cfg = NGramConfig(n_min=3, n_max=5, buckets=100_000)
    tokens = sum(len(s) for s in corpus)
    print(f"corpus: {len(corpus)} sentences, {tokens} tokens; "
          f"dim={args.dim}, epochs={args.epochs}")

    # warm-up so JIT compilation is not billed to the timed run
    run(corpus[:50], SkipgramConfig(dim=8, epochs=1, min_count=1, seed=0),
        ng_cfg, _kernels.sgns_epoch_numba)

    space_nb, t_nb = run(corpus, sg_cfg, ng_cfg, _kernels.sgns_epoch_numba)
    print(f"numba kernel : {t_nb:8.3f} s")
    space_np, t_np = run(corpus, sg_cfg, ng_cfg, _kernels.sgns_epoch_numpy)
    print(f"numpy kernel : {t_np:8.3f} s")
    print(f"speedup      : {t_np / t_nb:8.2f}x")

    diff = float(np.max(np.abs(space_nb.base.matrix - space_np.base.matrix)))
    print(f"max |difference| between word matrices: {diff:.2e}")
    if diff > 1e-3:
        print("WARNING: kernels diverged more than expected")
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
