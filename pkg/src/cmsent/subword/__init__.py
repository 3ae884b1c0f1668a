from .bpe import MergeTable, apply_bpe, learn_bpe
from .ngrams import NGramConfig, extract_ngrams, fnv1a_32, hash_ngram
from .skipgram import (
    SkipgramConfig,
    SubwordEmbeddingSpace,
    load_subword_space,
    oov_vector,
    save_subword_space,
    train_skipgram,
)

__all__ = [
    "MergeTable",
    "apply_bpe",
    "learn_bpe",
    "NGramConfig",
    "extract_ngrams",
    "fnv1a_32",
    "hash_ngram",
    "SkipgramConfig",
    "SubwordEmbeddingSpace",
    "load_subword_space",
    "oov_vector",
    "save_subword_space",
    "train_skipgram",
]
