"""Forecaster families with distinct accuracy/cost trade-offs.

Three families cover the lightweight-to-heavy spectrum: LINEAR (least
squares on lag features), KERNEL (ridge regression over random Fourier
features), and RECURRENT (a small recurrent network trained by
full-batch gradient descent). Training is deterministic given
(family, data, seed); energy is charged through a fixed cost model
rather than measured.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import (
    EmptyTrainingSetError,
    NonFiniteError,
    NumericalError,
    TooShortError,
)

LAG = 5  # input window: previous 5 readings predict the next one

KERNEL_FEATURES = 64
KERNEL_RIDGE = 1e-2
LINEAR_RIDGE = 1e-8
RECURRENT_HIDDEN = 16
RECURRENT_EPOCHS = 30
RECURRENT_LR = 0.01


class ModelFamily(Enum):
    LINEAR = "linear"
    KERNEL = "kernel"
    RECURRENT = "recurrent"


@dataclass(frozen=True)
class TrainingSet:
    """Supervised lag windows: inputs[k] holds the readings preceding targets[k]."""

    inputs: np.ndarray  # (n, LAG)
    targets: np.ndarray  # (n,)

    def __post_init__(self):
        if len(self.inputs) != len(self.targets):
            raise ValueError("inputs and targets must have the same length")

    def __len__(self) -> int:
        return len(self.targets)


def make_supervised(series, lag: int = LAG) -> TrainingSet:
    """Slide a lag-window over a contiguous series segment."""
    arr = np.asarray(series, dtype=float)
    if len(arr) <= lag:
        raise TooShortError(f"need more than {lag} readings, got {len(arr)}")
    windows = np.lib.stride_tricks.sliding_window_view(arr, lag)
    return TrainingSet(inputs=windows[:-1].copy(), targets=arr[lag:].copy())


# ---------------------------------------------------------------------------
# Family-specific parameters
# ---------------------------------------------------------------------------


@dataclass
class LinearParams:
    weights: np.ndarray  # on standardized lags
    x_mean: float
    x_std: float
    y_mean: float


@dataclass
class KernelParams:
    frequencies: np.ndarray  # (KERNEL_FEATURES, LAG)
    phases: np.ndarray  # (KERNEL_FEATURES,)
    weights: np.ndarray  # (KERNEL_FEATURES,)
    x_mean: float
    x_std: float
    y_mean: float


@dataclass
class RecurrentParams:
    w_in: np.ndarray  # (H,)
    w_rec: np.ndarray  # (H, H)
    b_h: np.ndarray  # (H,)
    w_out: np.ndarray  # (H,)
    w_skip: float  # direct last-reading -> output path
    b_out: float
    x_mean: float
    x_std: float
    y_mean: float
    y_std: float


@dataclass
class TrainedModel:
    """An immutable-after-training forecaster instance."""

    model_id: str
    family: ModelFamily
    params: LinearParams | KernelParams | RecurrentParams
    trained_on: str
    seed: int


def _standardize_stats(values: np.ndarray) -> tuple[float, float]:
    mean = float(values.mean())
    std = float(values.std())
    if std < 1e-12:
        std = 1.0
    return mean, std


def train(
    family: ModelFamily,
    training_set: TrainingSet,
    seed: int,
    model_id: str | None = None,
    trained_on: str = "",
) -> TrainedModel:
    """Fit one forecaster; deterministic given (family, training_set, seed)."""
    if len(training_set) == 0:
        raise EmptyTrainingSetError("training set is empty")
    if model_id is None:
        model_id = family.value
    x = np.asarray(training_set.inputs, dtype=float)
    y = np.asarray(training_set.targets, dtype=float)
    if family is ModelFamily.LINEAR:
        params = _train_linear(x, y)
    elif family is ModelFamily.KERNEL:
        params = _train_kernel(x, y, seed)
    else:
        params = _train_recurrent(x, y, seed)
    return TrainedModel(model_id, family, params, trained_on, seed)


def _train_linear(x: np.ndarray, y: np.ndarray) -> LinearParams:
    x_mean, x_std = _standardize_stats(x)
    xs = (x - x_mean) / x_std
    y_mean = float(y.mean())
    gram = xs.T @ xs + LINEAR_RIDGE * np.eye(xs.shape[1])
    weights = np.linalg.solve(gram, xs.T @ (y - y_mean))
    if not np.all(np.isfinite(weights)):
        raise NumericalError("linear fit produced non-finite weights")
    return LinearParams(weights, x_mean, x_std, y_mean)


def linear_coefficients(model: TrainedModel) -> tuple[np.ndarray, float]:
    """Raw-space lag coefficients and intercept of a LINEAR model."""
    if model.family is not ModelFamily.LINEAR:
        raise ValueError("not a LINEAR model")
    p = model.params
    coef = p.weights / p.x_std
    intercept = p.y_mean - float(coef.sum()) * p.x_mean
    return coef, intercept


def _kernel_features(xs: np.ndarray, freqs: np.ndarray, phases: np.ndarray) -> np.ndarray:
    proj = xs @ freqs.T + phases
    return math.sqrt(2.0 / len(phases)) * np.cos(proj)


def _train_kernel(x: np.ndarray, y: np.ndarray, seed: int) -> KernelParams:
    x_mean, x_std = _standardize_stats(x)
    xs = (x - x_mean) / x_std
    y_mean = float(y.mean())
    rng = np.random.default_rng(seed)
    freqs = rng.standard_normal((KERNEL_FEATURES, x.shape[1]))
    phases = rng.uniform(0.0, 2.0 * math.pi, KERNEL_FEATURES)
    z = _kernel_features(xs, freqs, phases)
    gram = z.T @ z + KERNEL_RIDGE * np.eye(KERNEL_FEATURES)
    weights = np.linalg.solve(gram, z.T @ (y - y_mean))
    if not np.all(np.isfinite(weights)):
        raise NumericalError("kernel fit produced non-finite weights")
    return KernelParams(freqs, phases, weights, x_mean, x_std, y_mean)


def _recurrent_forward(
    xs: np.ndarray, p: RecurrentParams
) -> tuple[np.ndarray, list[np.ndarray]]:
    n = xs.shape[0]
    h = np.zeros((n, len(p.w_in)))
    states = [h]
    for t in range(xs.shape[1]):
        h = np.tanh(np.outer(xs[:, t], p.w_in) + h @ p.w_rec + p.b_h)
        states.append(h)
    out = h @ p.w_out + p.w_skip * xs[:, -1] + p.b_out
    return out, states


def _train_recurrent(x: np.ndarray, y: np.ndarray, seed: int) -> RecurrentParams:
    x_mean, x_std = _standardize_stats(x)
    y_mean, y_std = _standardize_stats(np.asarray(y, dtype=float))
    xs = (x - x_mean) / x_std
    ys = (y - y_mean) / y_std
    rng = np.random.default_rng(seed)
    h = RECURRENT_HIDDEN
    # skip path starts at persistence (predict the last reading); gradient
    # descent refines from there within the fixed epoch budget
    p = RecurrentParams(
        w_in=0.1 * rng.standard_normal(h),
        w_rec=(0.1 / math.sqrt(h)) * rng.standard_normal((h, h)),
        b_h=np.zeros(h),
        w_out=0.1 * rng.standard_normal(h),
        w_skip=1.0,
        b_out=0.0,
        x_mean=x_mean,
        x_std=x_std,
        y_mean=y_mean,
        y_std=y_std,
    )
    n = xs.shape[0]
    lag = xs.shape[1]
    for _ in range(RECURRENT_EPOCHS):
        out, states = _recurrent_forward(xs, p)
        err = out - ys
        loss = float(np.mean(err**2))
        if not math.isfinite(loss):
            raise NumericalError("recurrent training diverged")
        dout = 2.0 * err / n
        g_w_out = states[-1].T @ dout
        g_w_skip = float(xs[:, -1] @ dout)
        g_b_out = float(dout.sum())
        g_w_in = np.zeros(h)
        g_w_rec = np.zeros((h, h))
        g_b_h = np.zeros(h)
        dh = np.outer(dout, p.w_out)
        for t in range(lag - 1, -1, -1):
            dz = dh * (1.0 - states[t + 1] ** 2)
            g_b_h += dz.sum(axis=0)
            g_w_in += xs[:, t] @ dz
            g_w_rec += states[t].T @ dz
            dh = dz @ p.w_rec.T
        p.w_in -= RECURRENT_LR * g_w_in
        p.w_rec -= RECURRENT_LR * g_w_rec
        p.b_h -= RECURRENT_LR * g_b_h
        p.w_out -= RECURRENT_LR * g_w_out
        p.w_skip -= RECURRENT_LR * g_w_skip
        p.b_out -= RECURRENT_LR * g_b_out
    return p


def predict(model: TrainedModel, window) -> float:
    """Forecast the next reading from the previous LAG readings."""
    w = np.asarray(window, dtype=float)
    if w.shape != (LAG,):
        raise ValueError(f"window must hold exactly {LAG} readings")
    if not np.all(np.isfinite(w)):
        raise NonFiniteError("window contains non-finite readings")
    p = model.params
    xs = (w - p.x_mean) / p.x_std
    if model.family is ModelFamily.LINEAR:
        value = float(xs @ p.weights) + p.y_mean
    elif model.family is ModelFamily.KERNEL:
        z = _kernel_features(xs[None, :], p.frequencies, p.phases)
        value = float(z[0] @ p.weights) + p.y_mean
    else:
        out, _ = _recurrent_forward(xs[None, :], p)
        value = float(out[0]) * p.y_std + p.y_mean
    if not math.isfinite(value):
        raise NonFiniteError("prediction is not finite")
    return value


# ---------------------------------------------------------------------------
# Serialization (used by the versioned model repository)
# ---------------------------------------------------------------------------


def model_to_dict(model: TrainedModel) -> dict:
    p = model.params
    if model.family is ModelFamily.LINEAR:
        payload = {
            "weights": p.weights.tolist(),
            "x_mean": p.x_mean,
            "x_std": p.x_std,
            "y_mean": p.y_mean,
        }
    elif model.family is ModelFamily.KERNEL:
        payload = {
            "frequencies": p.frequencies.tolist(),
            "phases": p.phases.tolist(),
            "weights": p.weights.tolist(),
            "x_mean": p.x_mean,
            "x_std": p.x_std,
            "y_mean": p.y_mean,
        }
    else:
        payload = {
            "w_in": p.w_in.tolist(),
            "w_rec": p.w_rec.tolist(),
            "b_h": p.b_h.tolist(),
            "w_out": p.w_out.tolist(),
            "w_skip": p.w_skip,
            "b_out": p.b_out,
            "x_mean": p.x_mean,
            "x_std": p.x_std,
            "y_mean": p.y_mean,
            "y_std": p.y_std,
        }
    return {
        "model_id": model.model_id,
        "family": model.family.value,
        "seed": model.seed,
        "trained_on": model.trained_on,
        "params": payload,
    }


def model_from_dict(data: dict) -> TrainedModel:
    family = ModelFamily(data["family"])
    raw = data["params"]
    if family is ModelFamily.LINEAR:
        params = LinearParams(
            np.array(raw["weights"]), raw["x_mean"], raw["x_std"], raw["y_mean"]
        )
    elif family is ModelFamily.KERNEL:
        params = KernelParams(
            np.array(raw["frequencies"]),
            np.array(raw["phases"]),
            np.array(raw["weights"]),
            raw["x_mean"],
            raw["x_std"],
            raw["y_mean"],
        )
    else:
        params = RecurrentParams(
            np.array(raw["w_in"]),
            np.array(raw["w_rec"]),
            np.array(raw["b_h"]),
            np.array(raw["w_out"]),
            raw["w_skip"],
            raw["b_out"],
            raw["x_mean"],
            raw["x_std"],
            raw["y_mean"],
            raw["y_std"],
        )
    return TrainedModel(data["model_id"], family, params, data["trained_on"], data["seed"])


# ---------------------------------------------------------------------------
# Energy cost model
# ---------------------------------------------------------------------------


class OpKind(Enum):
    INFER = "infer"
    TRAIN = "train"
    LOOP = "loop"


@dataclass(frozen=True)
class EnergyCostModel:
    """Deterministic per-operation energy prices in energy units (eu)."""

    infer_cost: dict[ModelFamily, float] = field(
        default_factory=lambda: {
            ModelFamily.LINEAR: 1.0,
            ModelFamily.KERNEL: 3.0,
            ModelFamily.RECURRENT: 12.0,
        }
    )
    train_cost: dict[ModelFamily, float] = field(
        default_factory=lambda: {
            ModelFamily.LINEAR: 200.0,
            ModelFamily.KERNEL: 800.0,
            ModelFamily.RECURRENT: 6000.0,
        }
    )
    loop_cost: float = 0.5

    def __post_init__(self):
        order = (ModelFamily.LINEAR, ModelFamily.KERNEL, ModelFamily.RECURRENT)
        for table, name in ((self.infer_cost, "infer"), (self.train_cost, "train")):
            costs = [table[f] for f in order]
            if any(c <= 0 for c in costs):
                raise ValueError(f"{name} costs must be positive")
            if not (costs[0] < costs[1] < costs[2]):
                raise ValueError(
                    f"{name} costs must be ordered LINEAR < KERNEL < RECURRENT"
                )
        if self.loop_cost <= 0:
            raise ValueError("loop cost must be positive")

    @property
    def most_expensive_family(self) -> ModelFamily:
        return max(self.infer_cost, key=self.infer_cost.get)


def charge(
    cost_model: EnergyCostModel,
    op_kind: OpKind,
    family: ModelFamily | None = None,
    count: int = 1,
) -> float:
    """Energy for `count` operations of one kind; totals are exact sums of charges."""
    if count < 0:
        raise ValueError("count must be >= 0")
    if op_kind is OpKind.LOOP:
        return count * cost_model.loop_cost
    if family is None:
        raise ValueError("family required for infer/train charges")
    table = cost_model.infer_cost if op_kind is OpKind.INFER else cost_model.train_cost
    return count * table[family]
