"""Config-driven composition of the toolkit: synth -> embed -> train -> eval.

A single config file (YAML, sectioned) drives the whole experiment so a
result row is reproducible from one invocation. All randomness is seeded;
metrics reports are written with sorted keys and no timestamps so identical
runs produce byte-identical files.
"""
from __future__ import annotations

import hashlib
import json
import logging
import os
from dataclasses import asdict

import yaml

from . import align as align_mod
from . import synth as synth_mod
from .data import DatasetSplit, LabeledExample, load_dataset, make_splits
from .embeddings import EmbeddingSpace, l2_normalize, load_embeddings, save_embeddings
from .metrics import confusion, f1_report, format_report
from .neural import init_bilstm_model, init_sentence_model, save_model
from .subword.ngrams import NGramConfig
from .subword.skipgram import (
    SkipgramConfig,
    load_subword_space,
    save_subword_space,
    train_skipgram,
)
from .trainer import CurriculumConfig, _SentenceTable, predict, run_curriculum

logger = logging.getLogger(__name__)


class ConfigError(ValueError):
    """Raised when a config file fails validation; message carries the field path."""


def load_config(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        cfg = yaml.safe_load(fh)
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a mapping")
    return cfg


def output_dir(cfg: dict) -> str:
    directory = os.environ.get("CMSENT_OUTPUT_DIR") or cfg.get("output", {}).get("dir")
    if not directory:
        raise ConfigError("output.dir: missing (or set CMSENT_OUTPUT_DIR)")
    os.makedirs(directory, exist_ok=True)
    return directory


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(directory, command: str, inputs: list, settings: dict, force=False) -> None:
    """Record inputs (with hashes) and settings alongside the outputs."""
    path = os.path.join(directory, "manifest.json")
    if os.path.exists(path) and not force:
        raise FileExistsError(f"{path} already exists (pass --force to overwrite)")
    manifest = {
        "command": command,
        "inputs": {str(p): _sha256(p) for p in inputs},
        "settings": settings,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_corpus(path) -> list[list[str]]:
    """One whitespace-tokenized sentence per line."""
    sentences = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            tokens = line.split()
            if tokens:
                sentences.append(tokens)
    return sentences


def write_corpus(sentences: list[list[str]], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for tokens in sentences:
            fh.write(" ".join(tokens) + "\n")


def write_metrics_report(gold, pred, path_prefix) -> dict:
    """Write a metrics report as sorted JSON plus a human-readable table."""
    cm = confusion(gold, pred)
    report = f1_report(cm)
    record = dict(report)
    record["confusion"] = cm.counts.tolist()
    with open(path_prefix + ".json", "w", encoding="utf-8") as fh:
        json.dump(record, fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(path_prefix + ".txt", "w", encoding="utf-8") as fh:
        fh.write(format_report(cm, report) + "\n")
    return record


def write_history(history, path) -> None:
    """Line-delimited epoch records for downstream tabulation."""
    with open(path, "w", encoding="utf-8") as fh:
        for rec in history.records:
            fh.write(json.dumps(asdict(rec), sort_keys=True) + "\n")


def _require(cfg: dict, section: str, key: str):
    if section not in cfg:
        raise ConfigError(f"{section}: missing section")
    if key not in cfg[section]:
        raise ConfigError(f"{section}.{key}: missing")
    return cfg[section][key]


def synth_experiment_data(cfg: dict):
    """Generate all synthetic artifacts for one experiment config.

    Returns (skipgram corpus sentences, phase1 split, phase2 split or None,
    code-mixed test examples, cipher lexicon).
    """
    s = cfg.get("synth", {})
    base_seed = int(s.get("seed", 0))
    switch_prob = float(s.get("switch_prob", 0.5))
    n_test = int(s.get("n_test", 500))
    n_finetune = int(s.get("n_finetune", 500))
    make_cfg = lambda n, seed: synth_mod.SynthConfig(
        vocab_size=int(s.get("vocab_size", 150)),
        sentence_length=tuple(s.get("sentence_length", (5, 12))),
        n_sentences=n,
        switch_prob=switch_prob,
        seed=seed,
        lexicon_rate=float(s.get("lexicon_rate", 0.35)),
    )
    mono_train = synth_mod.gen_mono_corpus(make_cfg(int(s.get("n_sentences", 3000)), base_seed))
    mono_test = synth_mod.gen_mono_corpus(make_cfg(n_test, base_seed + 1))
    mono_finetune = synth_mod.gen_mono_corpus(make_cfg(n_finetune, base_seed + 2))
    for pool, prefix in ((mono_test, "t"), (mono_finetune, "f")):
        for ex in pool:
            ex.id = prefix + ex.id

    vocab = make_cfg(1, base_seed).full_vocab
    lexicon = synth_mod.build_cipher_lexicon(vocab, seed=base_seed)
    ciphered = synth_mod.cipher_corpus(mono_train, lexicon)
    corpus = [ex.tokens for ex in mono_train] + [ex.tokens for ex in ciphered]

    val_fraction = float(cfg.get("data", {}).get("val_fraction", 0.1))
    train1, val1 = make_splits(mono_train, val_fraction, seed=base_seed)
    augment_p = float(s.get("augment_p", 0.0))
    if augment_p > 0:
        # noise-robustness augmentation: mix cipher surface forms into the
        # labeled source sentences through a scrambled (decoy) lexicon, so
        # the classifier sees cipher-like noise without any true translation
        decoy = synth_mod.decoy_lexicon(lexicon, seed=base_seed + 6)
        augmented = synth_mod.gen_codemixed(train1, decoy, augment_p, seed=base_seed + 7)
        for ex in augmented:
            ex.id = "a" + ex.id
        train1 = train1 + augmented
    phase1 = DatasetSplit(train=train1, validation=val1)

    cm_test = synth_mod.gen_codemixed(mono_test, lexicon, switch_prob, seed=base_seed + 3)
    mode = cfg.get("curriculum", {}).get("mode", "unsupervised")
    phase2 = None
    if mode == "supervised":
        cm_finetune = synth_mod.gen_codemixed(
            mono_finetune, lexicon, switch_prob, seed=base_seed + 4
        )
        train2, val2 = make_splits(cm_finetune, val_fraction, seed=base_seed + 5)
        phase2 = DatasetSplit(train=train2, validation=val2)
    return corpus, phase1, phase2, cm_test, lexicon


def load_experiment_data(cfg: dict):
    """Load TSV datasets listed in the data section (non-synthetic runs)."""
    d = cfg.get("data", {})
    val_fraction = float(d.get("val_fraction", 0.1))
    seed = int(cfg.get("curriculum", {}).get("seed", 0))
    mono: list[LabeledExample] = []
    for origin in ("en", "es"):
        for path in d.get(origin, []):
            mono.extend(load_dataset(path, origin=origin))
    if not mono:
        raise ConfigError("data.en / data.es: no monolingual datasets configured")
    train1, val1 = make_splits(mono, val_fraction, seed=seed)
    phase1 = DatasetSplit(train=train1, validation=val1)
    phase2 = None
    mode = cfg.get("curriculum", {}).get("mode", "unsupervised")
    if mode == "supervised":
        path = d.get("cm_train")
        if not path:
            raise ConfigError("data.cm_train: required for supervised mode")
        cm = load_dataset(path, origin="cm")
        train2, val2 = make_splits(cm, val_fraction, seed=seed + 1)
        phase2 = DatasetSplit(train=train2, validation=val2)
    test_path = d.get("cm_test")
    if not test_path:
        raise ConfigError("data.cm_test: missing")
    cm_test = load_dataset(test_path, origin="cm")
    return phase1, phase2, cm_test


def build_embedding(cfg: dict, corpus: list[list[str]] | None, directory: str):
    """Resolve the embeddings section into a queryable space for training."""
    e = cfg.get("embeddings", {})
    kind = e.get("kind", "pseudo_multilingual")
    if kind == "pseudo_multilingual":
        if corpus is None:
            paths = e.get("corpora", [])
            if not paths:
                raise ConfigError("embeddings.corpora: missing for pseudo_multilingual")
            corpus = []
            for path in paths:
                corpus.extend(read_corpus(path))
        sg_cfg = SkipgramConfig(
            dim=int(e.get("dim", 100)),
            window=int(e.get("window", 5)),
            negatives=int(e.get("negatives", 5)),
            epochs=int(e.get("epochs", 5)),
            initial_lr=float(e.get("lr", 0.025)),
            min_count=int(e.get("min_count", 5)),
            subsample_t=float(e.get("subsample_t", 1e-4)),
            seed=int(e.get("seed", 1)),
            oov_reduce=e.get("oov_reduce", "sum"),
        )
        ng_cfg = NGramConfig(
            n_min=int(e.get("n_min", 3)),
            n_max=int(e.get("n_max", 6)),
            buckets=int(e.get("buckets", 2_000_000)),
        )
        space = train_skipgram(corpus, sg_cfg, ng_cfg)
        save_subword_space(space, os.path.join(directory, "subword_space"))
        return space
    if kind == "mapped":
        src = l2_normalize(load_embeddings(e["src"]))
        tgt = l2_normalize(load_embeddings(e["tgt"]))
        method = e.get("method", "procrustes")
        if method == "procrustes":
            if "dict" not in e:
                raise ConfigError("embeddings.dict: required for procrustes")
            dictionary = align_mod.load_dictionary(e["dict"])
            linear_map = align_mod.procrustes(src, tgt, dictionary)
        elif method == "adversarial":
            adv = align_mod.AdversarialConfig(
                steps=int(e.get("steps", 10_000)), seed=int(e.get("seed", 1))
            )
            linear_map = align_mod.adversarial_align(src, tgt, adv)
        else:
            raise ConfigError(f"embeddings.method: unknown {method!r}")
        refine_iters = int(e.get("refine_iters", 0))
        if refine_iters > 0:
            linear_map = align_mod.refine(src, tgt, linear_map, iterations=refine_iters)
        mapped = EmbeddingSpace(src.vocab, linear_map.apply(src.matrix), name="mapped")
        merged = align_mod.merge_spaces(mapped, tgt)
        align_mod.save_map(linear_map, os.path.join(directory, "map.vec"))
        save_embeddings(merged, os.path.join(directory, "merged.vec"))
        return merged
    if kind == "subword_file":
        return load_subword_space(e["path"])
    if kind == "file":
        return load_embeddings(e["path"])
    if kind == "sentence":
        table = load_embeddings(e["path"])
        vectors = {tok: table.matrix[i] for i, tok in enumerate(table.vocab.tokens)}
        return _SentenceTable(vectors, table.dim)
    raise ConfigError(f"embeddings.kind: unknown {kind!r}")


def run_pipeline(cfg: dict, directory: str | None = None, force: bool = False) -> dict:
    """Full experiment: data -> embedding -> curriculum -> evaluation."""
    directory = directory or output_dir(cfg)
    mode = cfg.get("curriculum", {}).get("mode", "unsupervised")
    if mode not in ("unsupervised", "partially_supervised", "supervised"):
        raise ConfigError(f"curriculum.mode: unknown {mode!r}")

    if "synth" in cfg:
        corpus, phase1, phase2, cm_test, lexicon = synth_experiment_data(cfg)
        align_mod.save_dictionary(
            align_mod.BilingualDictionary(synth_mod.ground_truth_dictionary(lexicon)),
            os.path.join(directory, "cipher_dictionary.tsv"),
        )
    else:
        corpus = None
        phase1, phase2, cm_test = load_experiment_data(cfg)

    embedding = build_embedding(cfg, corpus, directory)

    c = cfg.get("curriculum", {})
    model_cfg = cfg.get("model", {})
    model_kind = model_cfg.get("path", "token")
    seed = int(c.get("seed", 0))
    if isinstance(embedding, _SentenceTable) or model_kind == "sentence":
        model = init_sentence_model(embedding.dim, seed=seed)
    else:
        model = init_bilstm_model(embedding.dim, units=int(model_cfg.get("units", 50)), seed=seed)

    curriculum = CurriculumConfig(
        phase1_data=phase1,
        phase2_data=phase2,
        batch_size=int(c.get("batch_size", 32)),
        patience=int(c.get("patience", 10)),
        max_epochs=int(c.get("max_epochs", 100)),
        seed=seed,
        lr=float(c.get("lr", 0.001)),
    )
    best, history = run_curriculum(model, curriculum, mode, embedding)

    save_model(best, os.path.join(directory, "model.npz"))
    write_history(history, os.path.join(directory, "history.jsonl"))
    preds = predict(best, cm_test, embedding)
    gold = [ex.label for ex in cm_test]
    report = write_metrics_report(gold, preds, os.path.join(directory, "metrics"))
    logger.info("pipeline done: macro-F1 %.4f on %d test examples",
                report["macro_f1"], len(cm_test))
    return report
