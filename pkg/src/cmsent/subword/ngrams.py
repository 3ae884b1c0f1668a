"""Character n-gram extraction and hashing for subword vectors."""
from __future__ import annotations

from dataclasses import dataclass

_FNV_OFFSET = 2166136261
_FNV_PRIME = 16777619
_MASK32 = 0xFFFFFFFF


@dataclass
class NGramConfig:
    n_min: int = 3
    n_max: int = 6
    buckets: int = 2_000_000

    def __post_init__(self):
        if not 1 <= self.n_min <= self.n_max:
            raise ValueError("need 1 <= n_min <= n_max")
        if self.buckets < 1:
            raise ValueError("buckets must be positive")


def extract_ngrams(token: str, cfg: NGramConfig) -> list[str]:
    """All character n-grams of "<token>" with length in [n_min, n_max].

    The boundary-marked token itself is emitted only when its length falls
    within the range; longer tokens are represented by the word-level vector
    instead. Order is position-major.
    """
    if not token:
        raise ValueError("token must be non-empty")
    marked = f"<{token}>"
    grams = []
    for start in range(len(marked)):
        for n in range(cfg.n_min, cfg.n_max + 1):
            if start + n > len(marked):
                break
            grams.append(marked[start : start + n])
    return grams


def fnv1a_32(s: str) -> int:
    """FNV-1a 32-bit hash over the UTF-8 bytes of `s`."""
    h = _FNV_OFFSET
    for byte in s.encode("utf-8"):
        h = ((h ^ byte) * _FNV_PRIME) & _MASK32
    return h


def hash_ngram(s: str, buckets: int) -> int:
    """Deterministic bucket index in [0, buckets)."""
    return fnv1a_32(s) % buckets
