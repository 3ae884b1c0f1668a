"""Minimal neural kit: bidirectional LSTM encoder, dense softmax head,
cross-entropy loss with full backpropagation through time, and Adam.

Parameters live in plain dicts of float64 numpy arrays so gradients can be
checked against finite differences. Input embeddings are frozen: no
operation produces gradients with respect to input vectors.
"""
from __future__ import annotations

import io
import json
from dataclasses import dataclass, field

import numpy as np

GATES = 4  # input, forget, candidate, output


class GradientError(FloatingPointError):
    """Raised when a non-finite value shows up during backprop."""


@dataclass
class DropoutSpec:
    input_rate: float = 0.3
    recurrent_rate: float = 0.3

    def __post_init__(self):
        for rate in (self.input_rate, self.recurrent_rate):
            if not 0 <= rate < 1:
                raise ValueError("dropout rates must be in [0, 1)")


@dataclass
class ClassifierModel:
    """Token-sequence encoder (BiLSTM) or identity, plus a 3-way softmax head."""

    encoder: str  # "bilstm" | "identity"
    params: dict[str, np.ndarray]
    input_dim: int
    units: int = 0
    dropout: DropoutSpec = field(default_factory=DropoutSpec)

    @property
    def feature_dim(self) -> int:
        return 2 * self.units if self.encoder == "bilstm" else self.input_dim

    def copy(self) -> "ClassifierModel":
        return ClassifierModel(
            encoder=self.encoder,
            params={k: v.copy() for k, v in self.params.items()},
            input_dim=self.input_dim,
            units=self.units,
            dropout=self.dropout,
        )


def _glorot(rng: np.random.Generator, fan_out: int, fan_in: int) -> np.ndarray:
    r = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-r, r, (fan_out, fan_in))


def init_bilstm_model(
    input_dim: int, units: int = 50, seed: int = 0, dropout: DropoutSpec | None = None
) -> ClassifierModel:
    """Single-layer BiLSTM with `units` per direction feeding the 3-way head.

    Forget-gate biases start at 1.0, everything else at 0; weights are
    Glorot-uniform.
    """
    rng = np.random.default_rng(seed)
    params: dict[str, np.ndarray] = {}
    for direction in ("fwd", "bwd"):
        params[f"{direction}_W"] = _glorot(rng, GATES * units, input_dim)
        params[f"{direction}_U"] = _glorot(rng, GATES * units, units)
        bias = np.zeros(GATES * units)
        bias[units : 2 * units] = 1.0
        params[f"{direction}_b"] = bias
    params["head_W"] = _glorot(rng, 3, 2 * units)
    params["head_b"] = np.zeros(3)
    return ClassifierModel(
        encoder="bilstm",
        params=params,
        input_dim=input_dim,
        units=units,
        dropout=dropout or DropoutSpec(),
    )


def init_sentence_model(input_dim: int, seed: int = 0) -> ClassifierModel:
    """Identity encoder: a single dense softmax layer over sentence vectors."""
    rng = np.random.default_rng(seed)
    params = {"head_W": _glorot(rng, 3, input_dim), "head_b": np.zeros(3)}
    return ClassifierModel(
        encoder="identity", params=params, input_dim=input_dim, dropout=DropoutSpec(0.0, 0.0)
    )


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _direction_forward(w, u, b, xs, imask=None, rmask=None):
    """Run one LSTM direction over xs (T x input_dim); returns final h and cache."""
    units = u.shape[1]
    t_steps = xs.shape[0]
    h = np.zeros(units)
    c = np.zeros(units)
    cache = []
    for t in range(t_steps):
        x = xs[t] if imask is None else xs[t] * imask
        h_in = h if rmask is None else h * rmask
        z = w @ x + u @ h_in + b
        i = _sigmoid(z[:units])
        f = _sigmoid(z[units : 2 * units])
        g = np.tanh(z[2 * units : 3 * units])
        o = _sigmoid(z[3 * units :])
        c_prev = c
        c = f * c_prev + i * g
        tanh_c = np.tanh(c)
        h = o * tanh_c
        cache.append((x, h_in, i, f, g, o, c_prev, tanh_c))
    return h, cache


def _direction_backward(w, u, cache, dh_final, rmask=None):
    """BPTT for one direction; returns grads for (W, U, b)."""
    units = u.shape[1]
    dw = np.zeros_like(w)
    du = np.zeros_like(u)
    db = np.zeros(GATES * units)
    dh = dh_final.copy()
    dc = np.zeros(units)
    for t in range(len(cache) - 1, -1, -1):
        x, h_in, i, f, g, o, c_prev, tanh_c = cache[t]
        do = dh * tanh_c
        dc = dc + dh * o * (1.0 - tanh_c**2)
        di = dc * g
        df = dc * c_prev
        dg = dc * i
        dz = np.concatenate(
            [
                di * i * (1.0 - i),
                df * f * (1.0 - f),
                dg * (1.0 - g**2),
                do * o * (1.0 - o),
            ]
        )
        dw += np.outer(dz, x)
        du += np.outer(dz, h_in)
        db += dz
        dh = u.T @ dz
        if rmask is not None:
            dh = dh * rmask
        dc = dc * f
    return dw, du, db


def lstm_forward(
    model: ClassifierModel, sequence: np.ndarray, dropout_masks: dict | None = None
) -> np.ndarray:
    """Concatenated final hidden states of the forward and backward passes."""
    sequence = np.atleast_2d(np.asarray(sequence, dtype=np.float64))
    if sequence.shape[0] < 1:
        raise ValueError("empty sequence")
    feats = []
    for direction, xs in (("fwd", sequence), ("bwd", sequence[::-1])):
        masks = dropout_masks.get(direction) if dropout_masks else None
        imask, rmask = masks if masks else (None, None)
        h, _ = _direction_forward(
            model.params[f"{direction}_W"],
            model.params[f"{direction}_U"],
            model.params[f"{direction}_b"],
            xs,
            imask,
            rmask,
        )
        feats.append(h)
    return np.concatenate(feats)


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max()
    ex = np.exp(shifted)
    return ex / ex.sum()


def _draw_masks(model: ClassifierModel, rng: np.random.Generator) -> dict:
    """One input mask and one recurrent mask per direction (variational),
    with inverted scaling."""
    masks = {}
    for direction in ("fwd", "bwd"):
        keep_in = 1.0 - model.dropout.input_rate
        keep_rec = 1.0 - model.dropout.recurrent_rate
        imask = (rng.random(model.input_dim) < keep_in) / keep_in if keep_in < 1 else None
        rmask = (rng.random(model.units) < keep_rec) / keep_rec if keep_rec < 1 else None
        masks[direction] = (imask, rmask)
    return masks


def forward(
    model: ClassifierModel,
    x: np.ndarray,
    train_mode: bool = False,
    seed: int | None = None,
) -> np.ndarray:
    """Class probability vector (3,); dropout applies only in train mode."""
    x = np.asarray(x, dtype=np.float64)
    if model.encoder == "bilstm":
        if np.atleast_2d(x).shape[1] != model.input_dim:
            raise ValueError(
                f"input dim {np.atleast_2d(x).shape[1]} != model dim {model.input_dim}"
            )
        masks = None
        if train_mode:
            masks = _draw_masks(model, np.random.default_rng(seed))
        features = lstm_forward(model, x, masks)
    else:
        if x.shape != (model.input_dim,):
            raise ValueError(f"expected vector of dim {model.input_dim}, got {x.shape}")
        features = x
    logits = model.params["head_W"] @ features + model.params["head_b"]
    return softmax(logits)


def loss_and_gradients(
    model: ClassifierModel,
    batch: list[tuple[np.ndarray, int]],
    train_mode: bool = False,
    seed: int | None = None,
) -> tuple[float, dict[str, np.ndarray]]:
    """Mean cross-entropy over (input, gold class index) pairs and its gradients.

    Gradients average over the batch in list order (fixed reduction order).
    """
    if not batch:
        raise ValueError("empty batch")
    grads = {k: np.zeros_like(v) for k, v in model.params.items()}
    total_loss = 0.0
    rng = np.random.default_rng(seed) if train_mode else None
    for x, gold in batch:
        x = np.asarray(x, dtype=np.float64)
        masks = _draw_masks(model, rng) if train_mode and rng is not None else None
        if model.encoder == "bilstm":
            xs = np.atleast_2d(x)
            caches = {}
            feats = []
            for direction, seq in (("fwd", xs), ("bwd", xs[::-1])):
                m = masks.get(direction) if masks else (None, None)
                h, cache = _direction_forward(
                    model.params[f"{direction}_W"],
                    model.params[f"{direction}_U"],
                    model.params[f"{direction}_b"],
                    seq,
                    m[0],
                    m[1],
                )
                caches[direction] = (cache, m[1])
                feats.append(h)
            features = np.concatenate(feats)
        else:
            features = x
        logits = model.params["head_W"] @ features + model.params["head_b"]
        probs = softmax(logits)
        total_loss += -np.log(max(probs[gold], 1e-300))
        dlogits = probs.copy()
        dlogits[gold] -= 1.0
        grads["head_W"] += np.outer(dlogits, features)
        grads["head_b"] += dlogits
        if model.encoder == "bilstm":
            dfeat = model.params["head_W"].T @ dlogits
            for idx, direction in enumerate(("fwd", "bwd")):
                cache, rmask = caches[direction]
                dh = dfeat[idx * model.units : (idx + 1) * model.units]
                dw, du, db = _direction_backward(
                    model.params[f"{direction}_W"],
                    model.params[f"{direction}_U"],
                    cache,
                    dh,
                    rmask,
                )
                grads[f"{direction}_W"] += dw
                grads[f"{direction}_U"] += du
                grads[f"{direction}_b"] += db
    n = len(batch)
    for name, grad in grads.items():
        grad /= n
        if not np.all(np.isfinite(grad)):
            raise GradientError(f"non-finite gradient for parameter {name!r}")
    return total_loss / n, grads


@dataclass
class AdamState:
    """Bias-corrected Adam accumulators for a parameter dict."""

    m: dict[str, np.ndarray]
    v: dict[str, np.ndarray]
    t: int = 0
    lr: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_params(cls, params: dict[str, np.ndarray], lr: float = 0.001) -> "AdamState":
        return cls(
            m={k: np.zeros_like(p) for k, p in params.items()},
            v={k: np.zeros_like(p) for k, p in params.items()},
            lr=lr,
        )


def adam_step(
    params: dict[str, np.ndarray], grads: dict[str, np.ndarray], state: AdamState
) -> None:
    """One in-place Adam update: m, v decay then bias-corrected step."""
    state.t += 1
    b1, b2 = state.beta1, state.beta2
    correction1 = 1.0 - b1**state.t
    correction2 = 1.0 - b2**state.t
    for name, param in params.items():
        g = grads[name]
        state.m[name] = b1 * state.m[name] + (1.0 - b1) * g
        state.v[name] = b2 * state.v[name] + (1.0 - b2) * g**2
        m_hat = state.m[name] / correction1
        v_hat = state.v[name] / correction2
        param -= state.lr * m_hat / (np.sqrt(v_hat) + state.eps)


CHECKPOINT_VERSION = 1


def save_model(model: ClassifierModel, path) -> None:
    """Self-describing checkpoint; load(save(m)) is bit-exact."""
    meta = {
        "version": CHECKPOINT_VERSION,
        "encoder": model.encoder,
        "input_dim": model.input_dim,
        "units": model.units,
        "dropout": [model.dropout.input_rate, model.dropout.recurrent_rate],
        "param_names": sorted(model.params),
    }
    arrays = {f"param_{k}": v for k, v in model.params.items()}
    buf = io.BytesIO()
    np.savez(buf, meta=np.frombuffer(json.dumps(meta).encode("utf-8"), dtype=np.uint8), **arrays)
    with open(path, "wb") as fh:
        fh.write(buf.getvalue())


def load_model(path) -> ClassifierModel:
    with np.load(path) as data:
        meta = json.loads(bytes(data["meta"]).decode("utf-8"))
        if meta["version"] != CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint version {meta['version']}")
        params = {k: data[f"param_{k}"] for k in meta["param_names"]}
    return ClassifierModel(
        encoder=meta["encoder"],
        params=params,
        input_dim=meta["input_dim"],
        units=meta["units"],
        dropout=DropoutSpec(*meta["dropout"]),
    )
