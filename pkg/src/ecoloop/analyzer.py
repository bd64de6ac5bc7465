"""Boundary-violation detection and the dynamic energy threshold.

The energy threshold follows a control rule every interval:
tau <- clamp(tau + delta * (e_ref - e_bar), tau_min, tau_max), so
persistent over-consumption tightens the boundary and persistent
headroom relaxes it. Detection uses strict inequalities; boundary
values themselves are acceptable.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .knowledge import SustainabilityGoals
from .monitor import IntervalMetrics


class UncertaintyKind(Enum):
    PERFORMANCE_DEGRADATION = "PerformanceDegradation"
    ENERGY_VIOLATION = "EnergyViolation"
    DRIFT_DETECTED = "DriftDetected"


@dataclass(frozen=True)
class Uncertainty:
    kind: UncertaintyKind
    magnitude: float
    interval: int


@dataclass(frozen=True)
class ThresholdState:
    tau_e: float
    history: tuple[tuple[int, float], ...] = ()

    @property
    def interval(self) -> int:
        return len(self.history)


def initial_threshold_state(goals: SustainabilityGoals) -> ThresholdState:
    return ThresholdState(tau_e=goals.tau_e_init)


def update_energy_threshold(
    state: ThresholdState, e_bar_i: float, goals: SustainabilityGoals
) -> ThresholdState:
    """Apply the control rule once; runs every interval, violations or not."""
    raw = state.tau_e + goals.delta * (goals.e_ref - e_bar_i)
    tau = min(goals.tau_max, max(goals.tau_min, raw))
    return ThresholdState(tau_e=tau, history=state.history + ((state.interval + 1, tau),))


def detect(
    metrics: IntervalMetrics,
    goals: SustainabilityGoals,
    threshold_state: ThresholdState,
) -> list[Uncertainty]:
    """Check the three adaptation boundaries against this interval's metrics.

    Returned in planner priority order: drift, energy, performance.
    """
    found: list[Uncertainty] = []
    if metrics.d_i > goals.tau_drift:
        found.append(
            Uncertainty(
                UncertaintyKind.DRIFT_DETECTED,
                metrics.d_i - goals.tau_drift,
                metrics.interval,
            )
        )
    if metrics.e_bar_i > threshold_state.tau_e:
        found.append(
            Uncertainty(
                UncertaintyKind.ENERGY_VIOLATION,
                metrics.e_bar_i - threshold_state.tau_e,
                metrics.interval,
            )
        )
    if metrics.ema_s_i < goals.s_min:
        found.append(
            Uncertainty(
                UncertaintyKind.PERFORMANCE_DEGRADATION,
                goals.s_min - metrics.ema_s_i,
                metrics.interval,
            )
        )
    return found
