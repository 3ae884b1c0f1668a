"""Greedy byte pair encoding: learn merge tables and segment tokens."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

Pair = tuple[str, str]


@dataclass
class MergeTable:
    """Ordered merge priorities learned by `learn_bpe`."""

    merges: list[Pair] = field(default_factory=list)

    def __post_init__(self):
        if len(set(self.merges)) != len(self.merges):
            raise ValueError("duplicate merge pair")

    def __len__(self) -> int:
        return len(self.merges)


def _pair_counts(words: dict[tuple[str, ...], int]) -> Counter:
    counts: Counter = Counter()
    for symbols, freq in words.items():
        for left, right in zip(symbols, symbols[1:]):
            counts[(left, right)] += freq
    return counts


def _merge_word(symbols: tuple[str, ...], pair: Pair) -> tuple[str, ...]:
    left, right = pair
    out = []
    i = 0
    while i < len(symbols):
        if i + 1 < len(symbols) and symbols[i] == left and symbols[i + 1] == right:
            out.append(left + right)
            i += 2
        else:
            out.append(symbols[i])
            i += 1
    return tuple(out)


def learn_bpe(word_frequencies: dict[str, int], num_merges: int) -> MergeTable:
    """Learn merges by repeatedly joining the most frequent adjacent pair.

    Pair counts are weighted by word frequency; ties break toward the
    lexicographically smallest (left, right) pair. Stops early once no pair
    occurs at least twice.
    """
    if not word_frequencies:
        raise ValueError("empty frequency map")
    if num_merges < 0:
        raise ValueError("num_merges must be >= 0")
    words = {tuple(word): freq for word, freq in word_frequencies.items()}
    merges: list[Pair] = []
    for _ in range(num_merges):
        counts = _pair_counts(words)
        if not counts:
            break
        best = min(counts.items(), key=lambda kv: (-kv[1], kv[0]))
        if best[1] < 2:
            break
        pair = best[0]
        merges.append(pair)
        rewritten: dict[tuple[str, ...], int] = {}
        for symbols, freq in words.items():
            merged = _merge_word(symbols, pair)
            rewritten[merged] = rewritten.get(merged, 0) + freq
        words = rewritten
    return MergeTable(merges)


def apply_bpe(token: str, table: MergeTable) -> list[str]:
    """Segment `token` by applying the table's merges in priority order."""
    symbols: tuple[str, ...] = tuple(token)
    for pair in table.merges:
        if len(symbols) < 2:
            break
        symbols = _merge_word(symbols, pair)
    return list(symbols)
