"""Skip-gram with negative sampling over a bilingual concatenated corpus.

The center-word input representation is the word vector plus the sum of its
hashed character n-gram vectors, so unseen words can still be synthesized
from n-grams alone (`oov_vector`).
"""
from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, field

import numpy as np

from ..embeddings import EmbeddingSpace, Vocabulary, load_embeddings, save_embeddings
from . import _kernels
from .ngrams import NGramConfig, extract_ngrams, hash_ngram

logger = logging.getLogger(__name__)

_NEG_TABLE_SIZE = 1 << 20
_UNIGRAM_POWER = 0.75


@dataclass
class SkipgramConfig:
    dim: int = 100
    window: int = 5
    negatives: int = 5
    epochs: int = 5
    initial_lr: float = 0.025
    min_count: int = 5
    subsample_t: float = 1e-4
    seed: int = 1
    oov_reduce: str = "sum"

    def __post_init__(self):
        for name in ("dim", "window", "negatives", "epochs"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.initial_lr <= 0:
            raise ValueError("initial_lr must be positive")
        if self.min_count < 1:
            raise ValueError("min_count must be >= 1")
        if self.oov_reduce not in ("sum", "mean"):
            raise ValueError("oov_reduce must be 'sum' or 'mean'")


@dataclass
class SubwordEmbeddingSpace:
    """Word-level input vectors plus the hashed n-gram bucket matrix."""

    base: EmbeddingSpace
    ngram_matrix: np.ndarray
    ngram_config: NGramConfig
    oov_reduce: str = "sum"
    epoch_losses: list[float] = field(default_factory=list)

    def __post_init__(self):
        self.ngram_matrix = np.asarray(self.ngram_matrix)
        if self.ngram_matrix.shape != (self.ngram_config.buckets, self.base.dim):
            raise ValueError("ngram matrix shape disagrees with config/base")
        if not np.all(np.isfinite(self.ngram_matrix)):
            raise ValueError("ngram matrix contains non-finite values")

    @property
    def dim(self) -> int:
        return self.base.dim


def _word_ngram_ids(token: str, cfg: NGramConfig) -> list[int]:
    return [hash_ngram(g, cfg.buckets) for g in extract_ngrams(token, cfg)]


def _build_vocab(corpus: list[list[str]], min_count: int):
    counts: dict[str, int] = {}
    for sentence in corpus:
        for token in sentence:
            counts[token] = counts.get(token, 0) + 1
    order: dict[str, int] = {}
    for sentence in corpus:
        for token in sentence:
            if token not in order:
                order[token] = len(order)
    kept = [t for t, c in counts.items() if c >= min_count]
    kept.sort(key=lambda t: (-counts[t], order[t]))
    return kept, np.array([counts[t] for t in kept], dtype=np.int64)


def _negative_table(counts: np.ndarray, size: int = _NEG_TABLE_SIZE) -> np.ndarray:
    weights = counts.astype(np.float64) ** _UNIGRAM_POWER
    cumulative = np.cumsum(weights)
    cumulative /= cumulative[-1]
    positions = (np.arange(size) + 0.5) / size
    return np.searchsorted(cumulative, positions).astype(np.int32)


def _keep_probs(counts: np.ndarray, subsample_t: float) -> np.ndarray:
    if subsample_t <= 0:
        return np.ones(len(counts), dtype=np.float64)
    freq = counts / counts.sum()
    ratio = subsample_t / freq
    return np.minimum(1.0, np.sqrt(ratio) + ratio)


def train_skipgram(
    corpus, cfg: SkipgramConfig, ngrams: NGramConfig | None = None
) -> SubwordEmbeddingSpace:
    """Train subword skip-gram embeddings over token-sequence `corpus`.

    `corpus` is any iterable of token lists; it is materialized once.
    Deterministic for a fixed seed (the training loop is single-threaded).
    """
    if ngrams is None:
        ngrams = NGramConfig()
    sentences = [list(s) for s in corpus if s]
    tokens_list, counts = _build_vocab(sentences, cfg.min_count)
    if not tokens_list:
        raise ValueError("empty vocabulary after min_count filtering")
    vocab = Vocabulary(tokens_list)

    encoded = []
    for sentence in sentences:
        ids = [vocab.index[t] for t in sentence if t in vocab.index]
        if ids:
            encoded.append(ids)
    flat = np.array([i for s in encoded for i in s], dtype=np.int32)
    offsets = np.zeros(len(encoded) + 1, dtype=np.int64)
    np.cumsum([len(s) for s in encoded], out=offsets[1:])

    ngram_offsets = np.zeros(len(vocab) + 1, dtype=np.int64)
    all_ids: list[int] = []
    for i, token in enumerate(tokens_list):
        ids = _word_ngram_ids(token, ngrams)
        all_ids.extend(ids)
        ngram_offsets[i + 1] = len(all_ids)
    ngram_ids = np.array(all_ids, dtype=np.int32)

    rng = np.random.default_rng(cfg.seed)
    bound = 1.0 / cfg.dim
    word_in = rng.uniform(-bound, bound, (len(vocab), cfg.dim)).astype(np.float32)
    ngram_mat = rng.uniform(-bound, bound, (ngrams.buckets, cfg.dim)).astype(np.float32)
    ctx = np.zeros((len(vocab), cfg.dim), dtype=np.float32)

    neg_table = _negative_table(counts)
    keep_prob = _keep_probs(counts, cfg.subsample_t)
    total_planned = max(1, int(flat.size) * cfg.epochs)
    state = np.uint64(rng.integers(1, 2**63))

    kernel = _kernels.sgns_epoch
    epoch_losses = []
    processed = 0
    for epoch in range(cfg.epochs):
        loss_sum, n_pairs, processed, state = kernel(
            flat,
            offsets,
            keep_prob,
            neg_table,
            ngram_ids,
            ngram_offsets,
            word_in,
            ngram_mat,
            ctx,
            cfg.window,
            cfg.negatives,
            cfg.initial_lr,
            processed,
            total_planned,
            state,
        )
        # numba hands the state back as a plain int; re-wrap so the next
        # dispatch does not try to squeeze values >= 2**63 into an int64
        state = np.uint64(state)
        mean_loss = loss_sum / max(1, n_pairs)
        epoch_losses.append(mean_loss)
        logger.info("epoch %d: %d pairs, mean pair loss %.4f", epoch + 1, n_pairs, mean_loss)

    base = EmbeddingSpace(vocab, word_in.astype(np.float64), name="skipgram")
    return SubwordEmbeddingSpace(
        base=base,
        ngram_matrix=ngram_mat.astype(np.float64),
        ngram_config=ngrams,
        oov_reduce=cfg.oov_reduce,
        epoch_losses=epoch_losses,
    )


def oov_vector(space: SubwordEmbeddingSpace, token: str) -> np.ndarray:
    """Vector for any token: trained representation if known, n-gram synthesis otherwise."""
    idx = space.base.vocab.index.get(token)
    if not token:
        return np.zeros(space.dim)
    ids = _word_ngram_ids(token, space.ngram_config)
    if idx is not None:
        return space.base.matrix[idx] + space.ngram_matrix[ids].sum(axis=0)
    if not ids:
        return np.zeros(space.dim)
    combined = space.ngram_matrix[ids].sum(axis=0)
    if space.oov_reduce == "mean":
        combined /= len(ids)
    return combined


def input_representation(space: SubwordEmbeddingSpace, token: str) -> np.ndarray:
    """Training-time input representation of an in-vocabulary token."""
    idx = space.base.vocab.index[token]
    ids = _word_ngram_ids(token, space.ngram_config)
    return space.base.matrix[idx] + space.ngram_matrix[ids].sum(axis=0)


def save_subword_space(space: SubwordEmbeddingSpace, directory) -> None:
    """Persist as two embedding-format files plus a metadata JSON."""
    os.makedirs(directory, exist_ok=True)
    save_embeddings(space.base, os.path.join(directory, "words.vec"))
    buckets = space.ngram_matrix.shape[0]
    bucket_vocab = Vocabulary([f"g{i}" for i in range(buckets)])
    save_embeddings(
        EmbeddingSpace(bucket_vocab, space.ngram_matrix, name="ngrams"),
        os.path.join(directory, "ngrams.vec"),
    )
    meta = {
        "n_min": space.ngram_config.n_min,
        "n_max": space.ngram_config.n_max,
        "buckets": buckets,
        "oov_reduce": space.oov_reduce,
    }
    with open(os.path.join(directory, "meta.json"), "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)


def load_subword_space(directory) -> SubwordEmbeddingSpace:
    with open(os.path.join(directory, "meta.json"), encoding="utf-8") as fh:
        meta = json.load(fh)
    base = load_embeddings(os.path.join(directory, "words.vec"))
    ngram_space = load_embeddings(os.path.join(directory, "ngrams.vec"))
    cfg = NGramConfig(n_min=meta["n_min"], n_max=meta["n_max"], buckets=meta["buckets"])
    return SubwordEmbeddingSpace(
        base=base,
        ngram_matrix=ngram_space.matrix,
        ngram_config=cfg,
        oov_reduce=meta["oov_reduce"],
    )
