"""Enact planner decisions on the managed system.

Switching deploys an existing repository model, reuse deploys an
archived version, and retraining fits a fresh model of the active
family on the trailing window, archives it with the window's data
distribution, and deploys it. Every path emits one adaptation event.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InsufficientDataError, UnknownModelError
from .forecasting import (
    LAG,
    EnergyCostModel,
    OpKind,
    TrainedModel,
    charge,
    make_supervised,
    train,
)
from .histograms import Histogram, estimate_histogram
from .knowledge import (
    AdaptationEvent,
    EventKind,
    SustainabilityGoals,
    Trigger,
    VersionedModelRepository,
    store_version,
)
from .planner import ActionType, AdaptationAction

RETRAIN_WINDOW = 1200  # readings per (re)training window


@dataclass(frozen=True)
class ModelRecord:
    """A deployable model together with its training-data distribution."""

    model: TrainedModel
    train_histogram: Histogram


@dataclass(frozen=True)
class DeploymentState:
    active_model: TrainedModel
    active_reference: Histogram  # distribution the active model was trained on
    deployed_at: int


def execute(
    action: AdaptationAction,
    deployment: DeploymentState,
    vmr: VersionedModelRepository,
    recent_readings: np.ndarray,
    cost_model: EnergyCostModel,
    goals: SustainabilityGoals,
    repository: dict[str, ModelRecord],
    edges: np.ndarray,
    loop_energy: float = 0.0,
) -> tuple[DeploymentState, AdaptationEvent, float]:
    """Apply one non-NoOp action; returns the new deployment, the logged
    event, and the training energy charged (zero for switch/reuse)."""
    if action.kind is ActionType.NO_OP:
        raise ValueError("NoOp actions are not executed")
    from_id = deployment.active_model.model_id

    if action.kind is ActionType.SWITCH_TO:
        if action.target not in repository:
            raise UnknownModelError(str(action.target))
        record = repository[action.target]
        new_deployment = DeploymentState(
            record.model, record.train_histogram, action.decided_at
        )
        event = AdaptationEvent(
            action.decided_at,
            EventKind.SWITCH,
            action.trigger,
            from_id,
            record.model.model_id,
            "",
            loop_energy,
        )
        return new_deployment, event, 0.0

    if action.kind is ActionType.REUSE_VERSION:
        entry = vmr.get(str(action.target))
        slot = entry.model.family.value
        repository[slot] = ModelRecord(entry.model, entry.train_histogram)
        new_deployment = DeploymentState(
            entry.model, entry.train_histogram, action.decided_at
        )
        event = AdaptationEvent(
            action.decided_at,
            EventKind.VERSION_REUSE,
            action.trigger,
            from_id,
            entry.model.model_id,
            f"version={entry.version_id}",
            loop_energy,
        )
        return new_deployment, event, 0.0

    # RetrainCurrent
    readings = np.asarray(recent_readings, dtype=float)
    if len(readings) < RETRAIN_WINDOW + LAG:
        raise InsufficientDataError(
            f"retraining needs {RETRAIN_WINDOW + LAG} readings, have {len(readings)}"
        )
    window = readings[-RETRAIN_WINDOW:]
    family = deployment.active_model.family
    seed = goals.seed + action.decided_at
    model = train(
        family,
        make_supervised(window, LAG),
        seed,
        model_id=f"{family.value}-r{action.decided_at}",
        trained_on=f"trailing{RETRAIN_WINDOW}@i{action.decided_at}",
    )
    histogram = estimate_histogram(window, edges)
    version_id = store_version(vmr, model, histogram, action.decided_at)
    repository[family.value] = ModelRecord(model, histogram)
    energy = charge(cost_model, OpKind.TRAIN, family, 1)
    new_deployment = DeploymentState(model, histogram, action.decided_at)
    event = AdaptationEvent(
        action.decided_at,
        EventKind.RETRAIN,
        action.trigger,
        from_id,
        model.model_id,
        f"family={family.value} version={version_id}",
        loop_energy,
    )
    return new_deployment, event, energy
