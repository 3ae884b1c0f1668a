"""Word embedding spaces: text-format IO, lookup, normalization.

The on-disk interchange format is the plain word2vec text format: a header
line "N D" followed by N lines of "token v1 ... vD", single-space separated.
Tokens may contain any non-whitespace characters.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

logger = logging.getLogger(__name__)


class EmbeddingFormatError(ValueError):
    """Raised when an embedding file violates the text format."""


@dataclass
class Vocabulary:
    """Ordered token list with a token -> contiguous index map."""

    tokens: list[str]
    index: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self):
        self.index = {tok: i for i, tok in enumerate(self.tokens)}
        if len(self.index) != len(self.tokens):
            raise ValueError("duplicate tokens in vocabulary")

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self.index


@dataclass
class EmbeddingSpace:
    """A vocabulary plus a |V| x dim real matrix, one row per token."""

    vocab: Vocabulary
    matrix: np.ndarray
    name: str = ""

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=np.float64)
        if self.matrix.ndim != 2:
            raise ValueError("embedding matrix must be 2-dimensional")
        if self.matrix.shape[0] != len(self.vocab):
            raise ValueError(
                f"matrix has {self.matrix.shape[0]} rows for "
                f"{len(self.vocab)} tokens"
            )
        if not np.all(np.isfinite(self.matrix)):
            raise ValueError("embedding matrix contains non-finite values")

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    def __len__(self) -> int:
        return len(self.vocab)


def load_embeddings(path, limit: int | None = None) -> EmbeddingSpace:
    """Load a text-format embedding file.

    Keeps the first occurrence of a duplicated token and logs how many
    duplicates were skipped. At most `limit` rows are read, in file order.
    """
    if limit is not None and limit <= 0:
        raise ValueError("limit must be positive")
    tokens: list[str] = []
    seen: set[str] = set()
    rows: list[np.ndarray] = []
    duplicates = 0
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise EmbeddingFormatError(f"{path}: malformed header {header!r}")
        try:
            n, dim = int(header[0]), int(header[1])
        except ValueError:
            raise EmbeddingFormatError(
                f"{path}: non-integer header {header!r}"
            ) from None
        if n < 0 or dim <= 0:
            raise EmbeddingFormatError(f"{path}: bad header values {n} {dim}")
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split(" ")
            if len(parts) != dim + 1:
                raise EmbeddingFormatError(
                    f"{path}:{lineno}: expected {dim + 1} fields, got {len(parts)}"
                )
            token = parts[0]
            if token in seen:
                duplicates += 1
                continue
            vec = np.array(parts[1:], dtype=np.float64)
            if not np.all(np.isfinite(vec)):
                raise EmbeddingFormatError(
                    f"{path}:{lineno}: non-finite value for token {token!r}"
                )
            seen.add(token)
            tokens.append(token)
            rows.append(vec)
            if limit is not None and len(tokens) >= limit:
                break
    if not tokens:
        raise EmbeddingFormatError(f"{path}: empty vocabulary")
    if duplicates:
        logger.warning("%s: skipped %d duplicate tokens", path, duplicates)
    return EmbeddingSpace(Vocabulary(tokens), np.vstack(rows), name=str(path))


def save_embeddings(space: EmbeddingSpace, path) -> None:
    """Write a space in the text format; round-trips to >= 6 significant digits."""
    if len(space) == 0:
        raise ValueError("refusing to write an empty embedding space")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(space)} {space.dim}\n")
        for token, row in zip(space.vocab.tokens, space.matrix):
            fh.write(token)
            fh.write(" ")
            fh.write(" ".join(repr(float(v)) for v in row))
            fh.write("\n")


def lookup(space: EmbeddingSpace, token: str) -> np.ndarray | None:
    """Row for `token`, or None when absent. Case-sensitive."""
    idx = space.vocab.index.get(token)
    if idx is None:
        return None
    return space.matrix[idx]


def l2_normalize(space: EmbeddingSpace) -> EmbeddingSpace:
    """Return a copy with every nonzero row scaled to unit Euclidean norm."""
    norms = np.linalg.norm(space.matrix, axis=1, keepdims=True)
    safe = np.where(norms == 0.0, 1.0, norms)
    return EmbeddingSpace(space.vocab, space.matrix / safe, name=space.name)
