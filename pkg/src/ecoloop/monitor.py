"""Per-interval runtime metrics: accuracy, normalized energy, score, EMA, drift.

The interval score is s = beta * a + (1 - beta) * (1 - e_bar) with the
accuracy term clamped to [0, 1] and the normalized energy clamped to
[0, 1] for scoring only; boundary checks elsewhere use the unclamped
value. The drift statistic is KL(interval true values || reference
distribution of the deployed model).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .errors import DegenerateError
from .histograms import Histogram, estimate_histogram, kl_divergence  # noqa: F401
from .knowledge import Record, SustainabilityGoals


def r_squared(y_true, y_pred) -> float:
    """Coefficient of determination 1 - SS_res / SS_tot."""
    yt = np.asarray(y_true, dtype=float)
    yp = np.asarray(y_pred, dtype=float)
    if len(yt) == 0 or len(yt) != len(yp):
        raise ValueError("need equal, nonzero-length sequences")
    ss_tot = float(np.sum((yt - yt.mean()) ** 2))
    if ss_tot == 0.0:
        raise DegenerateError("true values have zero variance")
    ss_res = float(np.sum((yt - yp) ** 2))
    return 1.0 - ss_res / ss_tot


def performance_score(a_i: float, e_bar_i: float, beta: float) -> float:
    """Accuracy/efficiency trade-off score; both inputs already in [0, 1]."""
    return beta * a_i + (1.0 - beta) * (1.0 - e_bar_i)


def update_ema(prev_ema: float, s_i: float, gamma: float) -> float:
    """Exponentially smoothed score: gamma * s_i + (1 - gamma) * prev."""
    return gamma * s_i + (1.0 - gamma) * prev_ema


@dataclass(frozen=True)
class IntervalMetrics:
    interval: int
    a_i: float
    raw_r2: float
    e_i: float
    e_bar_i: float
    s_i: float
    ema_s_i: float
    d_i: float
    carried: bool = False


@dataclass(frozen=True)
class MonitorState:
    """Carry-over between intervals: interval counter, EMA, and the
    reference distribution of the currently deployed model."""

    e_max_train: float
    reference: Histogram
    interval: int = 0
    ema: float | None = None
    last_a: float | None = None

    def with_reference(self, reference: Histogram) -> "MonitorState":
        return replace(self, reference=reference)


def aggregate_interval(
    records: Sequence[Record],
    goals: SustainabilityGoals,
    state: MonitorState,
) -> tuple[IntervalMetrics, MonitorState]:
    """Fold the records of one monitoring interval into metrics.

    Returns the metrics and the advanced state. Intervals with fewer
    than two records, or with degenerate true values, carry the previous
    accuracy forward and are flagged.
    """
    interval = state.interval + 1
    energies = [r.energy for r in records]
    e_i = float(sum(energies))
    e_bar_i = e_i / state.e_max_train

    carried = False
    raw = float("nan")
    if len(records) < 2:
        a_i = state.last_a if state.last_a is not None else 0.0
        carried = True
        d_i = 0.0
    else:
        y_true = [r.y_true for r in records]
        y_pred = [r.y_pred for r in records]
        try:
            raw = r_squared(y_true, y_pred)
            a_i = min(1.0, max(0.0, raw))
        except DegenerateError:
            a_i = state.last_a if state.last_a is not None else 0.0
            carried = True
        d_i = kl_divergence(
            estimate_histogram(y_true, state.reference.edges), state.reference
        )

    s_i = performance_score(a_i, min(1.0, max(0.0, e_bar_i)), goals.beta)
    ema = s_i if state.ema is None else update_ema(state.ema, s_i, goals.gamma)
    metrics = IntervalMetrics(interval, a_i, raw, e_i, e_bar_i, s_i, ema, d_i, carried)
    new_state = replace(state, interval=interval, ema=ema, last_a=a_i)
    return metrics, new_state
