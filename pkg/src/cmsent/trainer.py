"""Curriculum training: monolingual phase first, optional code-mixed
fine-tuning phase resuming from the best-validation checkpoint."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .data import LABELS, DatasetSplit, LabeledExample
from .embeddings import EmbeddingSpace
from .metrics import confusion, f1_report
from .neural import AdamState, ClassifierModel, adam_step, forward, loss_and_gradients
from .subword.skipgram import SubwordEmbeddingSpace, oov_vector

logger = logging.getLogger(__name__)

MODES = ("unsupervised", "partially_supervised", "supervised")


@dataclass
class TrainConfig:
    batch_size: int = 32
    patience: int = 10
    max_epochs: int = 100
    seed: int = 0
    lr: float = 0.001


@dataclass
class CurriculumConfig:
    phase1_data: DatasetSplit
    phase2_data: DatasetSplit | None = None
    batch_size: int = 32
    patience: int = 10
    max_epochs: int = 100
    seed: int = 0
    lr: float = 0.001

    def train_config(self) -> TrainConfig:
        return TrainConfig(
            batch_size=self.batch_size,
            patience=self.patience,
            max_epochs=self.max_epochs,
            seed=self.seed,
            lr=self.lr,
        )


@dataclass
class EpochRecord:
    phase: int
    epoch: int
    train_loss: float
    val_metric: float


@dataclass
class TrainingHistory:
    records: list[EpochRecord] = field(default_factory=list)
    best_metrics: dict[int, float] = field(default_factory=dict)

    def phases(self) -> set[int]:
        return {r.phase for r in self.records}


def sentence_to_sequence(
    tokens: list[str], embedding: EmbeddingSpace | SubwordEmbeddingSpace
) -> np.ndarray:
    """Token list -> T x dim matrix. With a subword space every token gets a
    vector (n-gram synthesis for OOV); with a plain space OOV tokens are
    skipped and an all-OOV sentence becomes one zero-vector step."""
    rows = []
    if isinstance(embedding, SubwordEmbeddingSpace):
        for token in tokens:
            rows.append(oov_vector(embedding, token))
        dim = embedding.dim
    else:
        for token in tokens:
            idx = embedding.vocab.index.get(token)
            if idx is not None:
                rows.append(embedding.matrix[idx])
        dim = embedding.dim
    if not rows:
        rows = [np.zeros(dim)]
    return np.vstack(rows)


def _encode_examples(examples, embedding, model):
    gold = [LABELS.index(ex.label) for ex in examples]
    seqs = [_model_input(model, ex, embedding) for ex in examples]
    return seqs, gold


def _evaluate(model, seqs, gold) -> float:
    preds = [int(np.argmax(forward(model, s, train_mode=False))) for s in seqs]
    cm = confusion([LABELS[g] for g in gold], [LABELS[p] for p in preds])
    return f1_report(cm)["macro_f1"]


def fit_phase(
    model: ClassifierModel,
    split: DatasetSplit,
    cfg: TrainConfig,
    embedding,
    phase: int = 1,
    history: TrainingHistory | None = None,
) -> tuple[ClassifierModel, TrainingHistory]:
    """Train with early stopping on validation macro-F1; returns the best checkpoint."""
    if not split.train or not split.validation:
        raise ValueError("train and validation sets must be nonempty")
    history = history or TrainingHistory()
    train_seqs, train_gold = _encode_examples(split.train, embedding, model)
    val_seqs, val_gold = _encode_examples(split.validation, embedding, model)

    state = AdamState.for_params(model.params, lr=cfg.lr)
    rng = np.random.default_rng(cfg.seed)
    best = model.copy()
    best_metric = -np.inf
    stall = 0
    for epoch in range(1, cfg.max_epochs + 1):
        order = rng.permutation(len(train_seqs))
        losses = []
        for start in range(0, len(order), cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            batch = [(train_seqs[i], train_gold[i]) for i in idx]
            dropout_seed = int(rng.integers(0, 2**31))
            loss, grads = loss_and_gradients(model, batch, train_mode=True, seed=dropout_seed)
            adam_step(model.params, grads, state)
            losses.append(loss)
        metric = _evaluate(model, val_seqs, val_gold)
        history.records.append(
            EpochRecord(phase=phase, epoch=epoch, train_loss=float(np.mean(losses)), val_metric=metric)
        )
        logger.info("phase %d epoch %d: loss %.4f val macro-F1 %.4f", phase, epoch,
                    float(np.mean(losses)), metric)
        if metric > best_metric:
            best_metric = metric
            best = model.copy()
            stall = 0
        else:
            stall += 1
            if stall >= cfg.patience:
                break
    history.best_metrics[phase] = best_metric
    return best, history


def run_curriculum(
    model: ClassifierModel, cfg: CurriculumConfig, mode: str, embedding
) -> tuple[ClassifierModel, TrainingHistory]:
    """Phase 1 on concatenated monolingual data; phase 2 (supervised mode
    only) fine-tunes the phase-1 best checkpoint on code-mixed data."""
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "supervised" and cfg.phase2_data is None:
        raise ValueError("supervised mode requires phase2 (code-mixed) data")
    if mode != "supervised" and cfg.phase2_data is not None:
        raise ValueError(f"{mode} mode must not receive code-mixed training data")
    best, history = fit_phase(model, cfg.phase1_data, cfg.train_config(), embedding, phase=1)
    if mode != "supervised":
        return best, history
    best2, history = fit_phase(
        best.copy(), cfg.phase2_data, cfg.train_config(), embedding, phase=2, history=history
    )
    return best2, history


def train_sentence_classifier(
    vectors: dict[str, np.ndarray], split: DatasetSplit, cfg: TrainConfig, model: ClassifierModel
) -> tuple[ClassifierModel, TrainingHistory]:
    """Dense+softmax training over precomputed sentence vectors keyed by id."""
    for part in (split.train, split.validation):
        for ex in part:
            if ex.id not in vectors:
                raise ValueError(f"missing sentence vector for example id {ex.id!r}")
    embedding = _SentenceTable(vectors, model.input_dim)
    return fit_phase(model, split, cfg, embedding)


class _SentenceTable:
    """Adapter letting fit_phase consume an id -> vector table."""

    def __init__(self, vectors: dict[str, np.ndarray], dim: int):
        self.vectors = vectors
        self.dim = dim


def predict(
    model: ClassifierModel, examples: list[LabeledExample], embedding
) -> list[str]:
    """Deterministic argmax predictions; ties break to the lowest class index."""
    preds = []
    for ex in examples:
        x = _model_input(model, ex, embedding)
        probs = forward(model, x, train_mode=False)
        preds.append(LABELS[int(np.argmax(probs))])
    return preds


def _model_input(model, ex, embedding):
    if isinstance(embedding, _SentenceTable):
        return np.asarray(embedding.vectors[ex.id], dtype=np.float64)
    seq = sentence_to_sequence(ex.tokens, embedding)
    if model.encoder == "identity":
        return seq.mean(axis=0)
    return seq
