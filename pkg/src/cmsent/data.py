"""Dataset ingestion, tweet tokenization, and split construction.

Datasets arrive as UTF-8 TSV files with three columns: id, label, text.
Labels form the closed set {negative, neutral, positive}.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

Label = str
LABELS: tuple[Label, ...] = ("negative", "neutral", "positive")
ORIGINS = ("en", "es", "cm", "unknown")


class DatasetError(ValueError):
    """Raised for malformed dataset files."""


def _load_emoticons() -> list[str]:
    text = (
        resources.files("cmsent.resources").joinpath("emoticons.txt").read_text("utf-8")
    )
    emoticons = [
        line.strip()
        for line in text.splitlines()
        if line.strip() and not line.startswith("#")
    ]
    # longest first so ":-)" wins over ":-"-less prefixes like ":)"
    return sorted(set(emoticons), key=len, reverse=True)


EMOTICONS = _load_emoticons()

_URL_RE = r"(?:[A-Za-z][A-Za-z0-9+.-]*://\S+|www\.\S+)"
_EMOTICON_RE = "|".join(re.escape(e) for e in EMOTICONS)
_TOKEN_RE = re.compile(
    rf"(?P<url>{_URL_RE})"
    rf"|(?P<emoticon>{_EMOTICON_RE})"
    r"|(?P<tag>[@#]\w+)"
    r"|(?P<word>\w+(?:'\w+)*)"
    r"|(?P<punct>\S)",
    re.UNICODE,
)


def tokenize_tweet(text: str) -> list[str]:
    """Tokenize a tweet.

    URLs collapse to the single token "<url>"; @mentions and #hashtags stay
    whole; emoticons from the fixed inventory are kept intact (and keep
    their case); everything else is lowercased with punctuation split off.
    """
    tokens = []
    for m in _TOKEN_RE.finditer(text):
        if m.lastgroup == "url":
            tokens.append("<url>")
        elif m.lastgroup == "emoticon":
            tokens.append(m.group())
        else:
            tokens.append(m.group().lower())
    return tokens


@dataclass
class LabeledExample:
    id: str
    raw_text: str
    label: Label
    origin: str = "unknown"
    tokens: list[str] = field(default=None)

    def __post_init__(self):
        if self.label not in LABELS:
            raise DatasetError(f"unknown label {self.label!r}")
        if self.origin not in ORIGINS:
            raise DatasetError(f"unknown origin {self.origin!r}")
        if self.tokens is None:
            self.tokens = tokenize_tweet(self.raw_text)


@dataclass
class DatasetSplit:
    train: list[LabeledExample]
    validation: list[LabeledExample]
    test: list[LabeledExample] = field(default_factory=list)

    def __post_init__(self):
        seen_per_part = [
            {ex.id for ex in part} for part in (self.train, self.validation, self.test)
        ]
        for i in range(3):
            for j in range(i + 1, 3):
                overlap = seen_per_part[i] & seen_per_part[j]
                if overlap:
                    raise DatasetError(f"splits share ids: {sorted(overlap)[:5]}")


def load_dataset(path, origin: str = "unknown") -> list[LabeledExample]:
    """Read a three-column TSV (id, label, text) into labeled examples."""
    examples = []
    with open(path, encoding="utf-8") as fh:
        for row_idx, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            cols = line.split("\t")
            if len(cols) != 3:
                raise DatasetError(
                    f"{path}: row {row_idx}: expected 3 columns, got {len(cols)}"
                )
            ex_id, label, text = cols
            if label not in LABELS:
                raise DatasetError(f"{path}: row {row_idx}: unknown label {label!r}")
            examples.append(LabeledExample(id=ex_id, raw_text=text, label=label, origin=origin))
    return examples


def save_dataset(examples: list[LabeledExample], path) -> None:
    """Write examples back out as the three-column TSV."""
    with open(path, "w", encoding="utf-8") as fh:
        for ex in examples:
            fh.write(f"{ex.id}\t{ex.label}\t{ex.raw_text}\n")


def make_splits(
    examples: list[LabeledExample], val_fraction: float, seed: int
) -> tuple[list[LabeledExample], list[LabeledExample]]:
    """Stratified train/validation split, deterministic given seed.

    Per-label counts in the validation set are round(n_label * val_fraction),
    which keeps per-label proportions within one example of val_fraction.
    """
    if not 0 < val_fraction < 1:
        raise ValueError("val_fraction must be in (0, 1)")
    if len(examples) < 10:
        raise ValueError(f"need at least 10 examples, got {len(examples)}")
    rng = np.random.default_rng(seed)
    by_label: dict[str, list[LabeledExample]] = {label: [] for label in LABELS}
    for ex in examples:
        by_label[ex.label].append(ex)
    train, validation = [], []
    for label in LABELS:
        group = by_label[label]
        order = rng.permutation(len(group))
        n_val = int(round(len(group) * val_fraction))
        val_idx = set(order[:n_val].tolist())
        for i, ex in enumerate(group):
            (validation if i in val_idx else train).append(ex)
    return train, validation
