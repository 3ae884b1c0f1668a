"""Synthetic bilingual / code-mixed corpora with known ground truth.

The "second language" is a cipher: a seeded bijection from every source
token to a pseudo-token with a distinguishing prefix. Ciphering preserves
sentence structure and sentiment labels exactly, which gives exact
ground-truth dictionaries for alignment and a known Bayes-optimal
classifier for end-to-end experiments.
"""
from __future__ import annotations

import string
from dataclasses import dataclass, field

import numpy as np

from .data import LabeledExample

CIPHER_PREFIX = "q"


@dataclass
class CipherLexicon:
    mapping: dict[str, str]

    def __post_init__(self):
        images = set(self.mapping.values())
        if len(images) != len(self.mapping):
            raise ValueError("cipher mapping is not injective")
        if images & set(self.mapping):
            raise ValueError("cipher images collide with source tokens")

    def __len__(self) -> int:
        return len(self.mapping)


@dataclass
class SynthConfig:
    vocab_size: int = 200
    sentence_length: tuple[int, int] = (5, 12)
    n_sentences: int = 2000
    n_pos: int = 20
    n_neg: int = 20
    switch_prob: float = 0.5
    seed: int = 0
    pos_lexicon: list[str] = field(default_factory=list)
    neg_lexicon: list[str] = field(default_factory=list)
    lexicon_rate: float = 0.35

    def __post_init__(self):
        if not 0 <= self.switch_prob <= 1:
            raise ValueError("switch_prob must be in [0, 1]")
        if self.sentence_length[0] < 1 or self.sentence_length[0] > self.sentence_length[1]:
            raise ValueError("bad sentence_length range")
        if not self.pos_lexicon:
            self.pos_lexicon = [f"pos{i}" for i in range(self.n_pos)]
        if not self.neg_lexicon:
            self.neg_lexicon = [f"neg{i}" for i in range(self.n_neg)]
        if set(self.pos_lexicon) & set(self.neg_lexicon):
            raise ValueError("pos/neg lexicons must be disjoint")

    @property
    def neutral_vocab(self) -> list[str]:
        return [f"w{i:03d}" for i in range(self.vocab_size)]

    @property
    def full_vocab(self) -> list[str]:
        return self.neutral_vocab + self.pos_lexicon + self.neg_lexicon


def build_cipher_lexicon(vocab: list[str], seed: int) -> CipherLexicon:
    """Deterministic bijection token -> prefixed pseudo-token.

    Characters are re-spelled through a seeded alphabet permutation, so
    images share no obvious surface form with their sources.
    """
    if not vocab:
        raise ValueError("empty vocabulary")
    rng = np.random.default_rng(seed)
    alphabet = string.ascii_lowercase + string.digits
    shuffled = "".join(np.array(list(alphabet))[rng.permutation(len(alphabet))])
    table = str.maketrans(alphabet, shuffled)
    mapping = {}
    used = set()
    for token in vocab:
        image = CIPHER_PREFIX + token.translate(table)
        # disambiguate rare translation collisions deterministically
        while image in used:
            image += "x"
        used.add(image)
        mapping[token] = image
    return CipherLexicon(mapping)


def _label_for(tokens: list[str], pos: set[str], neg: set[str]) -> str:
    n_pos = sum(t in pos for t in tokens)
    n_neg = sum(t in neg for t in tokens)
    if n_pos > n_neg:
        return "positive"
    if n_neg > n_pos:
        return "negative"
    return "neutral"


def gen_mono_corpus(cfg: SynthConfig) -> list[LabeledExample]:
    """Sample sentences from a Zipf-ish unigram model over the neutral vocab,
    splicing in sentiment-lexicon tokens; the label is decided by lexicon
    counts (positive vs negative majority, neutral on ties)."""
    rng = np.random.default_rng(cfg.seed)
    neutral = cfg.neutral_vocab
    weights = 1.0 / np.arange(1, len(neutral) + 1)
    weights /= weights.sum()
    pos_set, neg_set = set(cfg.pos_lexicon), set(cfg.neg_lexicon)
    lo, hi = cfg.sentence_length
    examples = []
    for idx in range(cfg.n_sentences):
        length = int(rng.integers(lo, hi + 1))
        tokens = [neutral[i] for i in rng.choice(len(neutral), size=length, p=weights)]
        # with prob 2*lexicon_rate the sentence carries a sentiment; polar
        # sentences get several cue tokens so ciphering rarely hides them all
        roll = rng.random()
        if roll < cfg.lexicon_rate:
            lexicon = cfg.pos_lexicon
        elif roll < 2 * cfg.lexicon_rate:
            lexicon = cfg.neg_lexicon
        else:
            lexicon = None
        if lexicon is not None:
            n_cues = int(rng.integers(2, 5))
            for _ in range(min(n_cues, length)):
                slot = int(rng.integers(0, length))
                tokens[slot] = lexicon[int(rng.integers(0, len(lexicon)))]
        label = _label_for(tokens, pos_set, neg_set)
        text = " ".join(tokens)
        examples.append(
            LabeledExample(id=f"s{idx:06d}", raw_text=text, label=label, origin="en", tokens=tokens)
        )
    return examples


def gen_codemixed(
    mono: list[LabeledExample], lex: CipherLexicon, p: float, seed: int
) -> list[LabeledExample]:
    """Independently replace each token by its cipher image with probability p."""
    if not 0 <= p <= 1:
        raise ValueError("p must be in [0, 1]")
    rng = np.random.default_rng(seed)
    out = []
    for ex in mono:
        tokens = []
        for token in ex.tokens:
            if token not in lex.mapping:
                raise ValueError(f"token {token!r} outside the cipher lexicon domain")
            tokens.append(lex.mapping[token] if rng.random() < p else token)
        out.append(
            LabeledExample(
                id=ex.id,
                raw_text=" ".join(tokens),
                label=ex.label,
                origin="cm",
                tokens=tokens,
            )
        )
    return out


def cipher_corpus(mono: list[LabeledExample], lex: CipherLexicon) -> list[LabeledExample]:
    """Fully ciphered copy (p=1) with fresh ids, for pseudo-multilingual training."""
    out = []
    for ex in mono:
        tokens = [lex.mapping[t] for t in ex.tokens]
        out.append(
            LabeledExample(
                id=f"c{ex.id}",
                raw_text=" ".join(tokens),
                label=ex.label,
                origin="es",
                tokens=tokens,
            )
        )
    return out


def decoy_lexicon(lex: CipherLexicon, seed: int) -> CipherLexicon:
    """Scramble the pairing of an existing lexicon.

    Keeps the source vocabulary and the set of cipher images but assigns
    them at random, so code-mixing with the decoy exposes a model to
    cipher-language surface forms without revealing any true translation.
    Useful for noise-robustness augmentation in zero-shot experiments.
    """
    rng = np.random.default_rng(seed)
    sources = sorted(lex.mapping)
    images = [lex.mapping[s] for s in sources]
    perm = rng.permutation(len(images))
    return CipherLexicon({s: images[perm[i]] for i, s in enumerate(sources)})


def ground_truth_dictionary(lex: CipherLexicon) -> list[tuple[str, str]]:
    return sorted(lex.mapping.items())
