"""Experiment orchestration: data synthesis, drift injection, and the nine
approaches (six static/periodic baselines, two switch-only loop variants,
and the fully adaptive loop).

Each repetition is an isolated, deterministic simulation: repetition r
seeds everything with goals.seed + r. Setup work (initial training,
validation scoring, calibration) is not charged to the energy ledger;
the ledger covers the test stream: inference, loop invocations, and
retraining.
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field, replace
from datetime import datetime
from enum import Enum
from pathlib import Path

import numpy as np

from .analyzer import detect, initial_threshold_state, update_energy_threshold
from .errors import NegativeFlowError, ParseError, SegmentError, TooShortError
from .executor import DeploymentState, ModelRecord, execute
from .forecasting import (
    LAG,
    EnergyCostModel,
    ModelFamily,
    OpKind,
    charge,
    make_supervised,
    predict,
    train,
)
from .histograms import estimate_histogram, histogram_edges
from .knowledge import (
    AdaptationEvent,
    DataRepository,
    EventKind,
    EventLog,
    SustainabilityGoals,
    Trigger,
    VersionedModelRepository,
    log_event,
    record_observation,
)
from .monitor import (
    IntervalMetrics,
    MonitorState,
    aggregate_interval,
    performance_score,
    r_squared,
    update_ema,
)
from .planner import ActionType, AdaptationAction, ModelScoreBoard, plan

DAILY_PERIOD = 288  # 5-minute cadence
WEEKLY_PERIOD = 2016
AR_PHI = 0.7


# ---------------------------------------------------------------------------
# Series: synthesis, CSV ingestion, drift injection
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Series:
    readings: np.ndarray
    origin: str  # "csv" or "synthetic"
    seed: int | None = None

    def __len__(self) -> int:
        return len(self.readings)


@dataclass(frozen=True)
class SyntheticParams:
    """Traffic-flow-like generator: daily + weekly cycles over AR(1) noise."""

    base: float = 180.0
    daily_amplitude: float = 80.0
    weekly_amplitude: float = 20.0
    noise_sigma: float = 18.0


# the comparative study needs interval-scale stationarity of the value
# distribution (drift detection compares 100-step snapshots against the
# training marginal), so its series keeps the seasonal swing small
# relative to the fast-mixing noise
STUDY_SERIES_PARAMS = SyntheticParams(
    base=200.0, daily_amplitude=10.0, weekly_amplitude=4.0, noise_sigma=25.0
)


def generate_synthetic(params: SyntheticParams, seed: int, length: int) -> Series:
    """Deterministic synthetic flow series; exactly periodic when sigma=0."""
    if length < 1445:
        raise ValueError("length must be >= 1445")
    rng = np.random.default_rng(seed)
    phase = np.arange(length) % WEEKLY_PERIOD
    seasonal = params.base
    seasonal = seasonal + params.daily_amplitude * np.sin(
        2.0 * math.pi * (phase % DAILY_PERIOD) / DAILY_PERIOD
    )
    seasonal = seasonal + params.weekly_amplitude * np.sin(
        2.0 * math.pi * phase / WEEKLY_PERIOD
    )
    noise = np.zeros(length)
    if params.noise_sigma > 0.0:
        innovations = rng.normal(0.0, params.noise_sigma, length)
        level = rng.normal(0.0, params.noise_sigma / math.sqrt(1.0 - AR_PHI**2))
        for t in range(length):
            level = AR_PHI * level + innovations[t]
            noise[t] = level
    readings = np.clip(seasonal + noise, 0.0, None)
    return Series(readings=readings, origin="synthetic", seed=seed)


CSV_HEADER = ("timestamp", "flow")
CSV_EPOCH = datetime(2024, 1, 1)


def load_series_csv(path) -> Series:
    """Read a `timestamp,flow` CSV; row order and count are preserved."""
    readings: list[float] = []
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty file") from None
        if tuple(h.strip() for h in header) != CSV_HEADER:
            raise ParseError(f"expected header {','.join(CSV_HEADER)}", line=1)
        for lineno, row in enumerate(reader, start=2):
            if len(row) != 2:
                raise ParseError("expected two columns", line=lineno)
            try:
                datetime.fromisoformat(row[0].strip())
            except ValueError:
                raise ParseError(f"bad timestamp {row[0]!r}", line=lineno) from None
            try:
                flow = float(row[1])
            except ValueError:
                raise ParseError(f"bad flow value {row[1]!r}", line=lineno) from None
            if not math.isfinite(flow):
                raise ParseError(f"non-finite flow {row[1]!r}", line=lineno)
            if flow < 0.0:
                raise NegativeFlowError(f"negative flow {flow}", line=lineno)
            readings.append(flow)
    return Series(readings=np.array(readings, dtype=float), origin="csv")


def write_series_csv(series: Series, path) -> None:
    """Emit the documented CSV schema with deterministic 5-minute timestamps."""
    lines = [",".join(CSV_HEADER)]
    epoch = CSV_EPOCH.timestamp()
    for t, value in enumerate(series.readings):
        stamp = datetime.fromtimestamp(epoch + 300 * t).isoformat()
        lines.append(f"{stamp},{float(value)!r}")
    Path(path).write_text("\n".join(lines) + "\n")


DriftSegment = tuple[int, int, float, float]  # (start, end, scale, shift)


def inject_drift(series: Series, drift_spec) -> Series:
    """Apply y <- a*y + b within each [start, end) segment, clamped at 0."""
    segments = [tuple(s) for s in drift_spec]
    previous_end = 0
    for seg in segments:
        if len(seg) != 4:
            raise SegmentError(f"segment must be (start, end, a, b): {seg}")
        start, end = int(seg[0]), int(seg[1])
        if not (0 <= start < end <= len(series)):
            raise SegmentError(f"segment [{start}, {end}) outside series")
        if start < previous_end:
            raise SegmentError("segments must be ordered and non-overlapping")
        previous_end = end
    readings = series.readings.copy()
    for start, end, a, b in segments:
        readings[int(start) : int(end)] = np.clip(
            a * readings[int(start) : int(end)] + b, 0.0, None
        )
    return Series(readings=readings, origin=series.origin, seed=series.seed)


# ---------------------------------------------------------------------------
# Experiment plan and approaches
# ---------------------------------------------------------------------------


class Approach(Enum):
    LINEAR = "linear"
    LINEAR_PRT = "linear-prt"
    KERNEL = "kernel"
    KERNEL_PRT = "kernel-prt"
    RECURRENT = "recurrent"
    RECURRENT_PRT = "recurrent-prt"
    SWITCH = "switch"
    SWITCH_PRT = "switch-prt"
    HARMONE = "harmone"

    @property
    def uses_loop(self) -> bool:
        return self in (Approach.SWITCH, Approach.SWITCH_PRT, Approach.HARMONE)

    @property
    def uses_prt(self) -> bool:
        return self.value.endswith("-prt")

    @property
    def drift_tactics(self) -> bool:
        # retrain + versioned reuse stay exclusive to the full loop
        return self is Approach.HARMONE

    @property
    def static_family(self) -> ModelFamily | None:
        name = self.value.removesuffix("-prt")
        try:
            return ModelFamily(name)
        except ValueError:
            return None


@dataclass(frozen=True)
class Split:
    train: int = 1200
    val: int = 240
    test: int = 14500

    @property
    def total(self) -> int:
        return self.train + self.val + self.test


DEFAULT_DRIFT_SPEC: tuple[DriftSegment, ...] = (
    (4000, 6000, 1.4, 30.0),
    (10000, 12000, 1.4, 30.0),
)


@dataclass(frozen=True)
class ExperimentPlan:
    """Everything one comparative run needs; drift segments are given in
    test-stream coordinates."""

    approach: Approach
    goals: SustainabilityGoals = field(default_factory=SustainabilityGoals)
    cost_model: EnergyCostModel = field(default_factory=EnergyCostModel)
    split: Split = field(default_factory=Split)
    prt_period: int = 3200
    drift_spec: tuple[DriftSegment, ...] = DEFAULT_DRIFT_SPEC
    synthetic: SyntheticParams = STUDY_SERIES_PARAMS
    repetitions: int = 5
    series: Series | None = None  # fixed input series (CSV); else synthesized per rep

    def __post_init__(self):
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if self.prt_period <= 0:
            raise ValueError("prt_period must be positive")
        previous_end = 0
        for start, end, _, _ in self.drift_spec:
            if not (0 <= start < end <= self.split.test):
                raise SegmentError(f"segment [{start}, {end}) outside test range")
            if start < previous_end:
                raise SegmentError("segments must be ordered and non-overlapping")
            previous_end = end


def should_periodic_retrain(t: int, period: int) -> bool:
    """Periodic-retraining trigger: every full period, never at stream start."""
    if t < 0 or period <= 0:
        raise ValueError("need t >= 0 and period > 0")
    return t > 0 and t % period == 0


# ---------------------------------------------------------------------------
# Run results
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IntervalRow:
    metrics: IntervalMetrics
    tau_e: float
    active_model: str
    cum_energy: float  # ledger total at interval end (inference + loop + training)


@dataclass
class RunResult:
    approach: Approach
    rep: int
    seed: int
    total_energy: float
    r2: float
    mse: float
    mean_inference_cost: float
    wall_ms_per_pred: float  # informational; hardware-dependent
    n_adaptations: int
    loop_energy: float
    events: EventLog
    per_interval: list[IntervalRow]


def _calibrate_e_max(
    cost_model: EnergyCostModel, goals: SustainabilityGoals, train_len: int
) -> float:
    """Max per-interval energy over a calibration pass of the training
    window with the most expensive family."""
    family = cost_model.most_expensive_family
    best = 0.0
    acc = 0.0
    steps = 0
    for _ in range(train_len):
        acc += charge(cost_model, OpKind.INFER, family, 1)
        steps += 1
        if steps == goals.interval_len:
            best = max(best, acc)
            acc = 0.0
            steps = 0
    if steps:
        best = max(best, acc)
    return best if best > 0.0 else goals.interval_len * cost_model.infer_cost[family]


def _prepare_series(plan: ExperimentPlan, seed: int) -> Series:
    if plan.series is not None:
        series = plan.series
    else:
        series = generate_synthetic(plan.synthetic, seed, plan.split.total)
    if len(series) < plan.split.total:
        raise TooShortError(
            f"series has {len(series)} readings, split needs {plan.split.total}"
        )
    offset = plan.split.train + plan.split.val
    absolute = [(offset + s, offset + e, a, b) for s, e, a, b in plan.drift_spec]
    return inject_drift(series, absolute) if absolute else series


def run_single(plan: ExperimentPlan, rep: int) -> RunResult:
    """One deterministic repetition of the plan's approach."""
    seed = plan.goals.seed + rep
    goals = replace(plan.goals, seed=seed)
    cost_model = plan.cost_model
    split = plan.split
    approach = plan.approach
    series = _prepare_series(plan, seed)
    readings = series.readings
    offset = split.train + split.val

    train_window = readings[: split.train]
    edges = histogram_edges(train_window, goals.histogram_bins)
    base_histogram = estimate_histogram(train_window, edges)
    e_max = _calibrate_e_max(cost_model, goals, split.train)

    training_set = make_supervised(train_window, LAG)
    repository: dict[str, ModelRecord] = {}
    for family in ModelFamily:
        model = train(
            family,
            training_set,
            seed,
            model_id=family.value,
            trained_on=f"train[0:{split.train}]",
        )
        repository[family.value] = ModelRecord(model, base_histogram)

    # validation pass fixes cold-start scores (setup phase, not charged)
    val_true = readings[split.train : offset]
    emas: dict[str, float] = {}
    infer_costs: dict[str, float] = {}
    for slot, record in repository.items():
        preds = [
            predict(record.model, readings[i - LAG : i])
            for i in range(split.train, offset)
        ]
        accuracy = min(1.0, max(0.0, r_squared(val_true, preds)))
        steady_e_bar = min(
            1.0,
            charge(cost_model, OpKind.INFER, record.model.family, goals.interval_len)
            / e_max,
        )
        emas[slot] = performance_score(accuracy, steady_e_bar, goals.beta)
        infer_costs[slot] = cost_model.infer_cost[record.model.family]

    if approach.uses_loop:
        start_slot = cost_model.most_expensive_family.value
    else:
        start_slot = approach.static_family.value
    deployment = DeploymentState(
        repository[start_slot].model, repository[start_slot].train_histogram, 0
    )
    board = ModelScoreBoard(emas=emas, infer_costs=infer_costs, active=start_slot)
    monitor_state = MonitorState(e_max_train=e_max, reference=deployment.active_reference)
    threshold = initial_threshold_state(goals)
    vmr = VersionedModelRepository(capacity=goals.vmr_capacity)
    data_repo = DataRepository()
    for slot in repository:
        data_repo.register_model(slot)
    events = EventLog()
    rng = np.random.default_rng(seed)

    ledger = 0.0
    inference_energy = 0.0
    loop_energy_total = 0.0
    wall_seconds = 0.0
    rows: list[IntervalRow] = []
    interval_mark = 0

    for t in range(split.test):
        if approach.uses_prt and should_periodic_retrain(t, plan.prt_period):
            now = t // goals.interval_len + 1
            action = AdaptationAction(
                ActionType.RETRAIN_CURRENT, Trigger.PERIODIC, now
            )
            deployment, event, train_energy = execute(
                action,
                deployment,
                vmr,
                readings[: offset + t],
                cost_model,
                goals,
                repository,
                edges,
                loop_energy=0.0,
            )
            ledger += train_energy
            board.last_adaptation = now
            monitor_state = monitor_state.with_reference(deployment.active_reference)
            data_repo.register_model(deployment.active_model.model_id)
            log_event(events, event)

        window = readings[offset + t - LAG : offset + t]
        clock = time.perf_counter()
        y_pred = predict(deployment.active_model, window)
        wall_seconds += time.perf_counter() - clock
        energy = charge(cost_model, OpKind.INFER, deployment.active_model.family, 1)
        inference_energy += energy
        ledger += energy
        record_observation(
            data_repo, t, float(readings[offset + t]), y_pred,
            deployment.active_model.model_id, energy,
        )

        if (t + 1) % goals.interval_len != 0:
            continue
        interval = (t + 1) // goals.interval_len
        interval_records = data_repo.records[interval_mark:]
        interval_mark = len(data_repo.records)
        metrics, monitor_state = aggregate_interval(interval_records, goals, monitor_state)
        tau_in_force = threshold.tau_e
        active_during = interval_records[-1].model_id

        if approach.uses_loop:
            loop_charge = charge(cost_model, OpKind.LOOP, count=1)
            ledger += loop_charge
            loop_energy_total += loop_charge
            board.emas[board.active] = update_ema(
                board.emas[board.active], metrics.s_i, goals.gamma
            )
            uncertainties = detect(metrics, goals, threshold)
            threshold = update_energy_threshold(threshold, metrics.e_bar_i, goals)
            current_histogram = estimate_histogram(
                [r.y_true for r in interval_records], edges
            )
            action = plan(
                uncertainties,
                board,
                current_histogram,
                vmr,
                goals,
                rng,
                interval=interval,
                drift_tactics=approach.drift_tactics,
            )
            if action.kind is not ActionType.NO_OP:
                deployment, event, train_energy = execute(
                    action,
                    deployment,
                    vmr,
                    readings[: offset + t + 1],
                    cost_model,
                    goals,
                    repository,
                    edges,
                    loop_energy=loop_charge,
                )
                ledger += train_energy
                board.active = deployment.active_model.family.value
                board.last_adaptation = interval
                monitor_state = monitor_state.with_reference(deployment.active_reference)
                data_repo.register_model(deployment.active_model.model_id)
            else:
                kind = (
                    EventKind.THRESHOLD_UPDATE
                    if threshold.tau_e != tau_in_force
                    else EventKind.NO_ACTION
                )
                event = AdaptationEvent(
                    interval, kind, Trigger.NONE,
                    active_during, active_during, "", loop_charge,
                )
            log_event(events, event)

        rows.append(IntervalRow(metrics, tau_in_force, active_during, ledger))

    y_true = np.array([r.y_true for r in data_repo.records])
    y_pred_all = np.array([r.y_pred for r in data_repo.records])
    return RunResult(
        approach=approach,
        rep=rep,
        seed=seed,
        total_energy=ledger,
        r2=r_squared(y_true, y_pred_all),
        mse=float(np.mean((y_true - y_pred_all) ** 2)),
        mean_inference_cost=inference_energy / split.test,
        wall_ms_per_pred=wall_seconds * 1000.0 / split.test,
        n_adaptations=events.adaptation_count(),
        loop_energy=loop_energy_total,
        events=events,
        per_interval=rows,
    )


def run_experiment(plan: ExperimentPlan) -> list[RunResult]:
    """All repetitions of the plan, seeds goals.seed + 0..repetitions-1."""
    return [run_single(plan, rep) for rep in range(plan.repetitions)]
