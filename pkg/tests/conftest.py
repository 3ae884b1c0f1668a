"""Shared fixtures and synthetic-instance helpers for the test suite."""
import numpy as np
import pytest

from cmsent.embeddings import EmbeddingSpace, Vocabulary, l2_normalize


def random_orthogonal(rng: np.random.Generator, d: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.normal(size=(d, d)))
    # fix signs so the factorization is unique (and q uniformly distributed)
    return q * np.sign(np.diag(r))


def planted_rotation_instance(seed: int, n: int = 50, d: int = 5, sigma: float = 0.0):
    """Source space, target space = rotation of source (+ optional noise), and Q."""
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n, d))
    q = random_orthogonal(rng, d)
    y = x @ q.T
    if sigma > 0:
        y = y + sigma * rng.normal(size=y.shape)
    tokens = [f"w{i}" for i in range(n)]
    src = EmbeddingSpace(Vocabulary(tokens), x, name="src")
    tgt = EmbeddingSpace(Vocabulary(list(tokens)), y, name="tgt")
    return src, tgt, q


def anisotropic_instance(seed: int, n: int = 1000, d: int = 50, sigma: float = 0.01):
    """L2-normalized anisotropic gaussian pair related by a planted rotation.

    An isotropic cloud is rotation-invariant in distribution, which makes the
    unsupervised alignment problem unidentifiable; the decaying spectrum is
    what gives the adversarial game a signal.
    """
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n, d)) * (1.0 / np.arange(1, d + 1) ** 0.5)
    q = random_orthogonal(rng, d)
    y = x @ q.T + sigma * rng.normal(size=(n, d))
    tokens = [f"w{i}" for i in range(n)]
    src = l2_normalize(EmbeddingSpace(Vocabulary(tokens), x, name="src"))
    tgt = l2_normalize(EmbeddingSpace(Vocabulary(list(tokens)), y, name="tgt"))
    return src, tgt, q


def precision_at_1(src: EmbeddingSpace, tgt: EmbeddingSpace, w: np.ndarray) -> float:
    """Fraction of source rows whose nearest mapped target is their own index."""
    mapped = src.matrix @ w.T
    norms = np.linalg.norm(mapped, axis=1, keepdims=True)
    mapped = mapped / np.where(norms == 0, 1.0, norms)
    tnorms = np.linalg.norm(tgt.matrix, axis=1, keepdims=True)
    t = tgt.matrix / np.where(tnorms == 0, 1.0, tnorms)
    nearest = (mapped @ t.T).argmax(axis=1)
    return float((nearest == np.arange(len(src))).mean())


@pytest.fixture
def tiny_space():
    return EmbeddingSpace(Vocabulary(["a", "b"]), np.array([[1.0, 0.0], [0.0, 1.0]]))
