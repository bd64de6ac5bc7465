"""Map detected uncertainties to an adaptation action.

Priority: drift outranks energy outranks performance. Drift tries to
reuse an archived model whose training distribution matches the current
data, falling back to a full retrain; energy violations exploit the
best-scoring alternative model; performance degradation explores
epsilon-greedily over the whole repository.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .analyzer import Uncertainty, UncertaintyKind
from .errors import NoAlternativeError
from .histograms import Histogram
from .knowledge import (
    SustainabilityGoals,
    Trigger,
    VersionedModelRepository,
    match_distribution,
)


class ActionType(Enum):
    SWITCH_TO = "SwitchTo"
    REUSE_VERSION = "ReuseVersion"
    RETRAIN_CURRENT = "RetrainCurrent"
    NO_OP = "NoOp"


@dataclass(frozen=True)
class AdaptationAction:
    kind: ActionType
    trigger: Trigger
    decided_at: int
    target: str | None = None  # model id for SwitchTo, version id for ReuseVersion


@dataclass
class ModelScoreBoard:
    """Per-model smoothed scores plus deployment bookkeeping.

    `emas` is keyed by repository model id; only the active model's
    entry moves while it serves traffic, the rest stay frozen at their
    last value (cold-started from validation scores).
    """

    emas: dict[str, float]
    infer_costs: dict[str, float]
    active: str
    last_adaptation: int | None = None

    def model_ids(self) -> list[str]:
        return list(self.emas)


# priority order consumed from the analyzer's uncertainty set
_PRIORITY = (
    UncertaintyKind.DRIFT_DETECTED,
    UncertaintyKind.ENERGY_VIOLATION,
    UncertaintyKind.PERFORMANCE_DEGRADATION,
)


def select_exploit(board: ModelScoreBoard) -> str:
    """Highest-EMA model excluding the active one; ties break toward the
    cheaper per-inference model, then lexicographic id."""
    candidates = [m for m in board.model_ids() if m != board.active]
    if not candidates:
        raise NoAlternativeError("repository holds no alternative model")
    return min(
        candidates, key=lambda m: (-board.emas[m], board.infer_costs[m], m)
    )


def epsilon_greedy(
    board: ModelScoreBoard, epsilon: float, rng: np.random.Generator
) -> str:
    """Explore uniformly over the full repository with probability epsilon,
    otherwise exploit."""
    if epsilon > 0.0 and rng.random() < epsilon:
        ids = board.model_ids()
        return ids[int(rng.integers(len(ids)))]
    return select_exploit(board)


def plan_drift(
    current_histogram: Histogram,
    vmr: VersionedModelRepository,
    goals: SustainabilityGoals,
    decided_at: int,
) -> AdaptationAction:
    """Reuse the closest archived model if one matches, else retrain."""
    version_id = match_distribution(vmr, current_histogram, goals.tau_match)
    if version_id is not None:
        return AdaptationAction(
            ActionType.REUSE_VERSION, Trigger.DRIFT, decided_at, version_id
        )
    return AdaptationAction(ActionType.RETRAIN_CURRENT, Trigger.DRIFT, decided_at)


def plan(
    uncertainties: list[Uncertainty],
    board: ModelScoreBoard,
    current_histogram: Histogram | None,
    vmr: VersionedModelRepository,
    goals: SustainabilityGoals,
    rng: np.random.Generator,
    interval: int,
    drift_tactics: bool = True,
) -> AdaptationAction:
    """Pick one action for this interval, honoring the cooldown.

    With `drift_tactics` disabled (switch-only operation) drift falls
    through to an exploit switch instead of reuse/retrain.
    """
    if (
        board.last_adaptation is not None
        and interval - board.last_adaptation <= goals.cooldown
    ):
        return AdaptationAction(ActionType.NO_OP, Trigger.NONE, interval)
    if not uncertainties:
        return AdaptationAction(ActionType.NO_OP, Trigger.NONE, interval)

    present = {u.kind for u in uncertainties}
    top = next(k for k in _PRIORITY if k in present)

    if top is UncertaintyKind.DRIFT_DETECTED:
        if drift_tactics:
            if current_histogram is None:
                raise ValueError("drift planning needs the current histogram")
            return plan_drift(current_histogram, vmr, goals, interval)
        return AdaptationAction(
            ActionType.SWITCH_TO, Trigger.DRIFT, interval, select_exploit(board)
        )
    if top is UncertaintyKind.ENERGY_VIOLATION:
        return AdaptationAction(
            ActionType.SWITCH_TO, Trigger.ENERGY, interval, select_exploit(board)
        )
    return AdaptationAction(
        ActionType.SWITCH_TO,
        Trigger.PERFORMANCE,
        interval,
        epsilon_greedy(board, goals.epsilon, rng),
    )
