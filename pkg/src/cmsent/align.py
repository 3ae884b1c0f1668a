"""Cross-lingual alignment of two embedding spaces.

Supervised path: orthogonal Procrustes from a bilingual dictionary.
Unsupervised path: adversarial training of a linear map against a
discriminator, followed by iterative refinement (CSLS dictionary induction
+ Procrustes). The two aligned spaces are merged into a single shared
space by averaging vectors of common tokens and appending the rest.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .embeddings import EmbeddingSpace, Vocabulary

logger = logging.getLogger(__name__)

CSLS_K = 10
VALIDATION_WORDS = 10_000


@dataclass
class LinearMap:
    """A d x d transformation; rows of the source space map as x @ W.T."""

    matrix: np.ndarray
    orthogonal: bool = False

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=np.float64)
        d = self.matrix.shape[0]
        if self.matrix.shape != (d, d):
            raise ValueError("map must be square")
        if self.orthogonal:
            drift = np.abs(self.matrix.T @ self.matrix - np.eye(d)).max()
            if drift > 1e-8:
                raise ValueError(f"orthogonal flag set but max drift is {drift:.3e}")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def apply(self, vectors: np.ndarray) -> np.ndarray:
        return vectors @ self.matrix.T


@dataclass
class BilingualDictionary:
    pairs: list[tuple[str, str]]

    def __post_init__(self):
        if len(set(self.pairs)) != len(self.pairs):
            raise ValueError("duplicate dictionary pairs")

    def __len__(self) -> int:
        return len(self.pairs)


@dataclass
class AdversarialConfig:
    discriminator_hidden: int = 2048
    discriminator_layers: int = 2
    smoothing: float = 0.2
    ortho_beta: float = 0.01
    steps: int = 10_000
    batch: int = 32
    lr: float = 0.1
    lr_decay: float = 0.95
    decay_every: int = 1000
    disc_steps: int = 2
    restarts: int = 1
    target_criterion: float | None = None
    vocab_top: int = 50_000
    seed: int = 1
    eval_every: int = 500

    def __post_init__(self):
        if not 0 <= self.smoothing < 0.5:
            raise ValueError("smoothing must be in [0, 0.5)")
        if self.ortho_beta <= 0:
            raise ValueError("ortho_beta must be positive")
        if self.disc_steps < 1 or self.restarts < 1:
            raise ValueError("disc_steps and restarts must be >= 1")


def load_dictionary(path) -> BilingualDictionary:
    """Read a TSV dictionary (src_token<TAB>tgt_token per line)."""
    pairs = []
    seen = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            src, tgt = line.split("\t")
            if (src, tgt) not in seen:
                seen.add((src, tgt))
                pairs.append((src, tgt))
    return BilingualDictionary(pairs)


def save_dictionary(dictionary: BilingualDictionary, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for src, tgt in dictionary.pairs:
            fh.write(f"{src}\t{tgt}\n")


def save_map(linear_map: LinearMap, path) -> None:
    """Persist a map in the embedding text format with row labels r0..r{d-1}."""
    from .embeddings import save_embeddings

    vocab = Vocabulary([f"r{i}" for i in range(linear_map.dim)])
    save_embeddings(EmbeddingSpace(vocab, linear_map.matrix, name="map"), path)


def load_map(path) -> LinearMap:
    from .embeddings import load_embeddings

    space = load_embeddings(path)
    matrix = space.matrix
    drift = np.abs(matrix.T @ matrix - np.eye(matrix.shape[0])).max()
    return LinearMap(matrix, orthogonal=bool(drift <= 1e-8))


def procrustes(
    src: EmbeddingSpace, tgt: EmbeddingSpace, dictionary: BilingualDictionary
) -> LinearMap:
    """Closed-form orthogonal map minimizing ||WX - Y||_F over the dictionary."""
    if src.dim != tgt.dim:
        raise ValueError(f"dimension mismatch: {src.dim} vs {tgt.dim}")
    xs, ys = [], []
    skipped = 0
    for s, t in dictionary.pairs:
        si = src.vocab.index.get(s)
        ti = tgt.vocab.index.get(t)
        if si is None or ti is None:
            skipped += 1
            continue
        xs.append(src.matrix[si])
        ys.append(tgt.matrix[ti])
    if skipped:
        logger.warning("procrustes: skipped %d unresolvable pairs", skipped)
    if len(xs) < 2:
        raise ValueError(f"only {len(xs)} usable dictionary pairs (need >= 2)")
    x = np.array(xs).T  # d x n
    y = np.array(ys).T
    u, _, vt = np.linalg.svd(y @ x.T)
    return LinearMap(u @ vt, orthogonal=True)


def _csls_matrix(mapped_src: np.ndarray, tgt: np.ndarray, k: int = CSLS_K) -> np.ndarray:
    """Pairwise CSLS scores between L2-normalized mapped source rows and target rows."""
    cos = mapped_src @ tgt.T
    k_t = min(k, tgt.shape[0])
    k_s = min(k, mapped_src.shape[0])
    # r_T(x): mean cosine of each mapped source vector to its k nearest targets
    r_t = np.sort(cos, axis=1)[:, -k_t:].mean(axis=1)
    # r_S(y): mean cosine of each target vector to its k nearest mapped sources
    r_s = np.sort(cos, axis=0)[-k_s:, :].mean(axis=0)
    return 2 * cos - r_t[:, None] - r_s[None, :]


def csls_score(
    x_mapped: np.ndarray,
    y: np.ndarray,
    src_neighbors_mean: float,
    tgt_neighbors_mean: float,
) -> float:
    """2 cos(x, y) - r_T(x) - r_S(y) for precomputed neighborhood means."""
    nx = np.linalg.norm(x_mapped)
    ny = np.linalg.norm(y)
    cos = float(x_mapped @ y / (nx * ny)) if nx > 0 and ny > 0 else 0.0
    return 2 * cos - src_neighbors_mean - tgt_neighbors_mean


def _normalized_rows(matrix: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(matrix, axis=1, keepdims=True)
    return matrix / np.where(norms == 0, 1.0, norms)


def validation_criterion(
    src: EmbeddingSpace, tgt: EmbeddingSpace, w: np.ndarray, top_n: int = VALIDATION_WORDS
) -> float:
    """Mean cosine between frequent source words and their CSLS-nearest targets."""
    n = min(top_n, len(src))
    mapped = _normalized_rows(src.matrix[:n] @ w.T)
    tgt_norm = _normalized_rows(tgt.matrix)
    scores = _csls_matrix(mapped, tgt_norm)
    nearest = scores.argmax(axis=1)
    cos = (mapped * tgt_norm[nearest]).sum(axis=1)
    return float(cos.mean())


def induce_dictionary(
    src: EmbeddingSpace,
    tgt: EmbeddingSpace,
    linear_map: LinearMap,
    top_n: int = 10_000,
    k: int = CSLS_K,
) -> BilingualDictionary:
    """Mutual CSLS nearest-neighbor pairs over the top_n most frequent source words."""
    if top_n > len(src):
        logger.warning("top_n %d exceeds |V|=%d; clamped", top_n, len(src))
        top_n = len(src)
    mapped = _normalized_rows(linear_map.apply(src.matrix[:top_n]))
    tgt_norm = _normalized_rows(tgt.matrix)
    scores = _csls_matrix(mapped, tgt_norm, k=k)
    fwd = scores.argmax(axis=1)
    bwd = scores.argmax(axis=0)
    pairs = []
    for i in range(top_n):
        j = fwd[i]
        if bwd[j] == i:
            pairs.append((src.vocab.tokens[i], tgt.vocab.tokens[j]))
    return BilingualDictionary(pairs)


def refine(
    src: EmbeddingSpace, tgt: EmbeddingSpace, w0: LinearMap, iterations: int = 5,
    top_n: int = 10_000,
) -> LinearMap:
    """Alternate CSLS dictionary induction and Procrustes from w0.

    Returns the iterate (including w0 itself) with the best validation
    criterion.
    """
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    best = w0
    best_score = validation_criterion(src, tgt, w0.matrix)
    current = w0
    for it in range(iterations):
        dictionary = induce_dictionary(src, tgt, current, top_n=top_n)
        if len(dictionary) < 2:
            raise ValueError("induced dictionary collapsed below 2 pairs")
        current = procrustes(src, tgt, dictionary)
        score = validation_criterion(src, tgt, current.matrix)
        logger.info("refine iteration %d: %d pairs, criterion %.4f", it + 1, len(dictionary), score)
        if score > best_score:
            best, best_score = current, score
    return best


def merge_spaces(a: EmbeddingSpace, b: EmbeddingSpace) -> EmbeddingSpace:
    """Union the vocabularies; common tokens average, the rest copy over."""
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    tokens = list(a.vocab.tokens)
    rows = [None] * len(tokens)
    for i, token in enumerate(a.vocab.tokens):
        j = b.vocab.index.get(token)
        if j is None:
            rows[i] = a.matrix[i]
        else:
            rows[i] = (a.matrix[i] + b.matrix[j]) / 2.0
    for j, token in enumerate(b.vocab.tokens):
        if token not in a.vocab.index:
            tokens.append(token)
            rows.append(b.matrix[j])
    return EmbeddingSpace(Vocabulary(tokens), np.vstack(rows), name="merged")


def _check_normalized(space: EmbeddingSpace, name: str) -> None:
    norms = np.linalg.norm(space.matrix, axis=1)
    if np.abs(norms - 1.0).max() > 1e-6:
        raise ValueError(f"{name} space must be length-normalized")


def _leaky_relu(x: np.ndarray, slope: float = 0.2) -> np.ndarray:
    # equivalent to where(x > 0, x, slope * x) for slope < 1, minus a branch
    return np.maximum(x, slope * x)


class _Discriminator:
    """2-layer leaky-rectifier perceptron with a sigmoid output, SGD-trained."""

    def __init__(self, dim: int, hidden: int, rng: np.random.Generator):
        def init(fan_in, fan_out):
            r = np.sqrt(6.0 / (fan_in + fan_out))
            return rng.uniform(-r, r, (fan_out, fan_in))

        self.w1 = init(dim, hidden)
        self.b1 = np.zeros(hidden)
        self.w2 = init(hidden, hidden)
        self.b2 = np.zeros(hidden)
        self.w3 = init(hidden, 1)
        self.b3 = np.zeros(1)

    def forward(self, x: np.ndarray):
        z1 = x @ self.w1.T + self.b1
        a1 = _leaky_relu(z1)
        z2 = a1 @ self.w2.T + self.b2
        a2 = _leaky_relu(z2)
        logit = (a2 @ self.w3.T + self.b3).ravel()
        prob = 1.0 / (1.0 + np.exp(-logit))
        return prob, (x, z1, a1, z2, a2)

    def backward(self, cache, dlogit: np.ndarray):
        """Gradients of the parameters and of the input given d loss / d logit."""
        x, z1, a1, z2, a2 = cache
        dlogit = dlogit[:, None]
        grads = {}
        grads["w3"] = dlogit.T @ a2
        grads["b3"] = dlogit.sum(axis=0)
        da2 = dlogit @ self.w3
        dz2 = da2 * np.where(z2 > 0, 1.0, 0.2)
        grads["w2"] = dz2.T @ a1
        grads["b2"] = dz2.sum(axis=0)
        da1 = dz2 @ self.w2
        dz1 = da1 * np.where(z1 > 0, 1.0, 0.2)
        grads["w1"] = dz1.T @ x
        grads["b1"] = dz1.sum(axis=0)
        dx = dz1 @ self.w1
        return grads, dx

    def sgd(self, grads: dict, lr: float) -> None:
        for name, grad in grads.items():
            param = getattr(self, name)
            param -= lr * grad


def _adversarial_attempt(
    src: EmbeddingSpace, tgt: EmbeddingSpace, cfg: AdversarialConfig, seed: int
) -> tuple[np.ndarray, float]:
    """One adversarial run from identity; returns (best W, best criterion)."""
    d = src.dim
    rng = np.random.default_rng(seed)
    n_src = min(cfg.vocab_top, len(src))
    n_tgt = min(cfg.vocab_top, len(tgt))

    w = np.eye(d)
    disc = _Discriminator(d, cfg.discriminator_hidden, rng)
    smoothing = cfg.smoothing
    best_w = w.copy()
    best_score = -np.inf

    # constant per-step tensors, hoisted out of the hot loop
    x = np.empty((2 * cfg.batch, d))
    disc_labels = np.concatenate(
        [np.full(cfg.batch, 1.0 - smoothing), np.full(cfg.batch, smoothing)]
    )
    map_labels = np.concatenate(
        [np.full(cfg.batch, smoothing), np.full(cfg.batch, 1.0 - smoothing)]
    )

    for step in range(cfg.steps):
        lr = cfg.lr * cfg.lr_decay ** (step // cfg.decay_every)

        # --- discriminator updates: mapped source -> label (1 - s), target -> s
        for _ in range(cfg.disc_steps):
            src_batch = src.matrix[rng.integers(0, n_src, cfg.batch)]
            np.matmul(src_batch, w.T, out=x[: cfg.batch])
            x[cfg.batch :] = tgt.matrix[rng.integers(0, n_tgt, cfg.batch)]
            prob, cache = disc.forward(x)
            dlogit = (prob - disc_labels) / x.shape[0]
            grads, _ = disc.backward(cache, dlogit)
            disc.sgd(grads, lr)

        # --- mapper update: fool the discriminator (reversed labels)
        src_batch = src.matrix[rng.integers(0, n_src, cfg.batch)]
        np.matmul(src_batch, w.T, out=x[: cfg.batch])
        x[cfg.batch :] = tgt.matrix[rng.integers(0, n_tgt, cfg.batch)]
        prob, cache = disc.forward(x)
        dlogit = (prob - map_labels) / x.shape[0]
        _, dx = disc.backward(cache, dlogit)
        dw = dx[: cfg.batch].T @ src_batch
        w -= lr * dw
        w = (1.0 + cfg.ortho_beta) * w - cfg.ortho_beta * (w @ w.T) @ w

        if (step + 1) % cfg.eval_every == 0 or step == cfg.steps - 1:
            score = validation_criterion(src, tgt, w)
            if score > best_score:
                best_score = score
                best_w = w.copy()
            logger.info("adversarial step %d: criterion %.4f (best %.4f)",
                        step + 1, score, best_score)
            if cfg.target_criterion is not None and best_score >= cfg.target_criterion:
                logger.info("criterion target %.4f reached; stopping attempt early",
                            cfg.target_criterion)
                break

    return best_w, best_score


def adversarial_align(
    src: EmbeddingSpace, tgt: EmbeddingSpace, cfg: AdversarialConfig
) -> LinearMap:
    """Learn W without supervision: a discriminator tries to tell mapped
    source vectors from target vectors while W is trained to confuse it.

    After every mapper update W is pulled back toward the orthogonal
    manifold with W <- (1 + beta) W - beta (W W^T) W. Adversarial training
    is bimodal in practice -- a run either finds the rotation or plateaus --
    so up to cfg.restarts independent runs are made and the snapshot with
    the best unsupervised validation criterion wins. When
    cfg.target_criterion is set, a run that reaches it ends the search.
    """
    if src.dim != tgt.dim:
        raise ValueError(f"dimension mismatch: {src.dim} vs {tgt.dim}")
    _check_normalized(src, "source")
    _check_normalized(tgt, "target")

    best_w = np.eye(src.dim)
    best_score = -np.inf
    for attempt in range(cfg.restarts):
        w, score = _adversarial_attempt(src, tgt, cfg, cfg.seed + 7919 * attempt)
        logger.info("adversarial restart %d/%d: criterion %.4f",
                    attempt + 1, cfg.restarts, score)
        if score > best_score:
            best_w, best_score = w, score
        if cfg.target_criterion is not None and best_score >= cfg.target_criterion:
            break

    return LinearMap(best_w, orthogonal=False)
