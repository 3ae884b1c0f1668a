"""Cross-lingual/multilingual embedding toolkit for code-mixed sentiment
classification: embedding alignment, subword skip-gram training, a small
numpy neural kit, curriculum training, and synthetic benchmarks."""

__version__ = "0.1.0"
