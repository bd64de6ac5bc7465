"""Knowledge base: design-time goals, runtime repositories, and the event log.

Holds everything the control loop reads or writes between intervals: the
goal configuration loaded from the decision-map file, the append-only
observation log, the versioned model repository matched by data
distribution, and the adaptation event log.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import TYPE_CHECKING

from .errors import (
    BinMismatchError,
    OrderError,
    ParseError,
    UnknownModelError,
    UnknownVersionError,
    ValidationError,
)
from .histograms import Histogram, kl_divergence

if TYPE_CHECKING:
    from .forecasting import TrainedModel


# ---------------------------------------------------------------------------
# Goals / decision-map configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SustainabilityGoals:
    """Design-time constants read from the decision-map config.

    `beta` weighs accuracy against efficiency in the interval score,
    `gamma` smooths the score, `delta` and `e_ref` drive the dynamic
    energy threshold, and the tau_* values are the adaptation boundaries.
    """

    beta: float = 0.5
    gamma: float = 0.3
    delta: float = 0.1
    s_min: float = 0.6
    e_ref: float = 0.6
    tau_e_init: float = 0.75
    tau_e_bounds: tuple[float, float] = (0.3, 0.95)
    tau_drift: float = 0.5
    tau_match: float = 0.25
    epsilon: float = 0.1
    interval_len: int = 100
    cooldown: int = 12
    vmr_capacity: int = 16
    histogram_bins: int = 20
    seed: int = 42

    def __post_init__(self):
        _validate_goals(self)

    @property
    def tau_min(self) -> float:
        return self.tau_e_bounds[0]

    @property
    def tau_max(self) -> float:
        return self.tau_e_bounds[1]


# (field, check, description) in declared order; first failure is reported.
_GOAL_CHECKS = [
    ("beta", lambda g: 0.0 <= g.beta <= 1.0, "must be in [0, 1]"),
    ("gamma", lambda g: 0.0 < g.gamma <= 1.0, "must be in (0, 1]"),
    ("delta", lambda g: 0.0 < g.delta < 1.0, "must be in (0, 1)"),
    ("s_min", lambda g: 0.0 <= g.s_min <= 1.0, "must be in [0, 1]"),
    ("e_ref", lambda g: 0.0 < g.e_ref <= 1.0, "must be in (0, 1]"),
    (
        "tau_e_bounds",
        lambda g: g.tau_e_bounds[0] <= g.tau_e_bounds[1],
        "lower bound must not exceed upper bound",
    ),
    (
        "tau_e_init",
        lambda g: g.tau_e_bounds[0] <= g.tau_e_init <= g.tau_e_bounds[1],
        "must lie within tau_e_bounds",
    ),
    ("tau_drift", lambda g: g.tau_drift >= 0.0, "must be >= 0"),
    ("tau_match", lambda g: g.tau_match >= 0.0, "must be >= 0"),
    ("epsilon", lambda g: 0.0 <= g.epsilon <= 1.0, "must be in [0, 1]"),
    ("interval_len", lambda g: g.interval_len >= 1, "must be >= 1"),
    ("cooldown", lambda g: g.cooldown >= 0, "must be >= 0"),
    ("vmr_capacity", lambda g: g.vmr_capacity >= 1, "must be >= 1"),
    ("histogram_bins", lambda g: g.histogram_bins >= 2, "must be >= 2"),
]


def _validate_goals(goals: SustainabilityGoals) -> None:
    for name, check, why in _GOAL_CHECKS:
        if not check(goals):
            raise ValidationError(name, why)


_GOAL_FIELDS = {f for f in SustainabilityGoals.__dataclass_fields__}
_INT_FIELDS = {"interval_len", "cooldown", "vmr_capacity", "histogram_bins", "seed"}


def load_decision_map(path) -> SustainabilityGoals:
    """Load and validate goals from a JSON decision-map file.

    Missing fields take the documented defaults; the first out-of-range
    field raises ValidationError naming it.
    """
    text = Path(path).read_text()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ParseError("decision map must be a JSON object")

    kwargs = {}
    for key, value in raw.items():
        if key not in _GOAL_FIELDS:
            raise ValidationError(key, "unknown field")
        if key == "tau_e_bounds":
            if not (isinstance(value, (list, tuple)) and len(value) == 2):
                raise ValidationError(key, "must be a pair [tau_min, tau_max]")
            kwargs[key] = (float(value[0]), float(value[1]))
        elif key in _INT_FIELDS:
            if not isinstance(value, int) or isinstance(value, bool):
                raise ValidationError(key, "must be an integer")
            kwargs[key] = value
        else:
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise ValidationError(key, "must be a number")
            kwargs[key] = float(value)
    return SustainabilityGoals(**kwargs)


# ---------------------------------------------------------------------------
# Data repository
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Record:
    timestep: int
    y_true: float
    y_pred: float
    model_id: str
    energy: float


@dataclass
class DataRepository:
    """Append-only log of (true value, prediction, model, energy) per timestep."""

    records: list[Record] = field(default_factory=list)
    known_models: set[str] = field(default_factory=set)

    def register_model(self, model_id: str) -> None:
        self.known_models.add(model_id)

    def __len__(self) -> int:
        return len(self.records)


def record_observation(
    repo: DataRepository,
    timestep: int,
    y_true: float,
    y_pred: float,
    model_id: str,
    energy: float,
) -> DataRepository:
    """Append one observation; timesteps must be strictly increasing."""
    if repo.records and timestep <= repo.records[-1].timestep:
        raise OrderError(
            f"timestep {timestep} not greater than last {repo.records[-1].timestep}"
        )
    if repo.known_models and model_id not in repo.known_models:
        raise UnknownModelError(model_id)
    repo.records.append(Record(timestep, y_true, y_pred, model_id, energy))
    return repo


# ---------------------------------------------------------------------------
# Versioned model repository
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VersionedModelEntry:
    version_id: str
    model: "TrainedModel"
    train_histogram: Histogram
    created_at: int


@dataclass
class VersionedModelRepository:
    """FIFO-bounded archive of retrained models and their training distributions."""

    capacity: int = 16
    entries: list[VersionedModelEntry] = field(default_factory=list)
    _next_id: int = 1

    def __len__(self) -> int:
        return len(self.entries)

    def get(self, version_id: str) -> VersionedModelEntry:
        for entry in self.entries:
            if entry.version_id == version_id:
                return entry
        raise UnknownVersionError(version_id)


def store_version(
    vmr: VersionedModelRepository,
    model: "TrainedModel",
    train_histogram: Histogram,
    timestep: int,
) -> str:
    """Archive a retrained model; evicts the oldest entry past capacity."""
    if abs(float(train_histogram.probs.sum()) - 1.0) > 1e-9:
        raise ValueError("train_histogram must be normalized")
    version_id = f"v{vmr._next_id}"
    vmr._next_id += 1
    vmr.entries.append(
        VersionedModelEntry(version_id, model, train_histogram, timestep)
    )
    if len(vmr.entries) > vmr.capacity:
        del vmr.entries[: len(vmr.entries) - vmr.capacity]
    return version_id


def match_distribution(
    vmr: VersionedModelRepository,
    current_histogram: Histogram,
    tau_match: float,
) -> str | None:
    """Return the stored version whose training distribution is closest
    (KL(current || stored)) if that distance is below tau_match.

    Ties favor the most recently created entry.
    """
    best_id: str | None = None
    best_kl = float("inf")
    best_created = -1
    for entry in vmr.entries:
        if not current_histogram.same_edges(entry.train_histogram):
            raise BinMismatchError(
                f"entry {entry.version_id} has incompatible bin edges"
            )
        kl = kl_divergence(current_histogram, entry.train_histogram)
        if kl < best_kl or (kl == best_kl and entry.created_at >= best_created):
            best_id, best_kl, best_created = entry.version_id, kl, entry.created_at
    if best_id is not None and best_kl < tau_match:
        return best_id
    return None


# ---------------------------------------------------------------------------
# Adaptation event log
# ---------------------------------------------------------------------------


class EventKind(Enum):
    SWITCH = "Switch"
    RETRAIN = "Retrain"
    VERSION_REUSE = "VersionReuse"
    THRESHOLD_UPDATE = "ThresholdUpdate"
    NO_ACTION = "NoAction"


class Trigger(Enum):
    PERFORMANCE = "Performance"
    ENERGY = "Energy"
    DRIFT = "Drift"
    PERIODIC = "Periodic"
    NONE = "None"


ADAPTATION_KINDS = frozenset(
    {EventKind.SWITCH, EventKind.RETRAIN, EventKind.VERSION_REUSE}
)


@dataclass(frozen=True)
class AdaptationEvent:
    """One loop outcome: what was done, why, and which models were involved."""

    interval: int
    kind: EventKind
    trigger: Trigger
    from_model: str
    to_model: str
    detail: str
    loop_energy: float

    def __post_init__(self):
        if self.kind is EventKind.RETRAIN and self.trigger not in (
            Trigger.DRIFT,
            Trigger.PERIODIC,
        ):
            raise ValueError("Retrain events require a Drift or Periodic trigger")
        if self.kind is EventKind.VERSION_REUSE and self.trigger is not Trigger.DRIFT:
            raise ValueError("VersionReuse events require a Drift trigger")

    def to_json(self) -> str:
        # field order is part of the on-disk format
        return json.dumps(
            {
                "interval": self.interval,
                "kind": self.kind.value,
                "trigger": self.trigger.value,
                "from_model": self.from_model,
                "to_model": self.to_model,
                "detail": self.detail,
                "loop_energy": self.loop_energy,
            }
        )


@dataclass
class EventLog:
    events: list[AdaptationEvent] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.events)

    def to_jsonl(self) -> str:
        return "".join(e.to_json() + "\n" for e in self.events)

    def adaptation_count(self) -> int:
        return sum(1 for e in self.events if e.kind in ADAPTATION_KINDS)


def log_event(log: EventLog, event: AdaptationEvent) -> EventLog:
    log.events.append(event)
    return log
