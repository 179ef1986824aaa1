"""Chart statistics and control limits for the auxiliary-adjusted charts.

The plotted statistic is the difference estimator of the Y mean; the
classical Shewhart/EWMA charts are the rho = 0 special case. Limits are
symmetric about the in-control Y mean with half-width proportional to the
standard deviation of the plotted statistic, sqrt(1 - rho^2) * sigma_y /
sqrt(n); the EWMA chart additionally carries the stationary variance
factor lambda / (2 - lambda) (fixed asymptotic limits, no time index).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .errors import InvalidLambda
from .estimators import SampleMoments, difference_estimate
from .stochastics import ProcessModel


class ChartKind(str, Enum):
    SHEWHART = "shewhart"
    EWMA = "ewma"


@dataclass(frozen=True)
class ChartSpec:
    """Chart kind, smoothing, limit multiplier, center and limit half-width.

    ``half_width`` is precomputed; ``make_limits`` is the normal way to get
    a consistent spec. A zero half-width is tolerated only as a degenerate
    always-signal configuration for tests.
    """

    kind: ChartKind
    lam: float
    limit_multiplier: float
    center: float
    half_width: float

    def __post_init__(self):
        if not 0.0 < self.lam <= 1.0:
            raise InvalidLambda(f"lambda must be in (0, 1], got {self.lam}")
        if self.kind is ChartKind.SHEWHART and self.lam != 1.0:
            raise InvalidLambda("Shewhart chart requires lambda = 1")
        if self.limit_multiplier <= 0:
            raise ValueError("limit_multiplier must be positive")
        if self.half_width < 0:
            raise ValueError("half_width must be nonnegative")

    @property
    def lcl(self) -> float:
        return self.center - self.half_width

    @property
    def ucl(self) -> float:
        return self.center + self.half_width


@dataclass(frozen=True)
class ChartState:
    """Current smoothed value and number of subgroups processed."""

    w: float
    t: int = 0


def initial_state(spec: ChartSpec) -> ChartState:
    """Fresh state: the smoothed value starts at the chart center."""
    return ChartState(w=spec.center, t=0)


def aib_statistic(m: SampleMoments, model: ProcessModel) -> float:
    """Plotted statistic: delegates to the difference estimator."""
    return difference_estimate(m, model)


def make_limits(
    kind: ChartKind, lam: float, limit_multiplier: float, model: ProcessModel
) -> ChartSpec:
    """Build the ChartSpec for a chart centered at the in-control Y mean.

    For a Shewhart chart ``lam`` is ignored and forced to 1. The half-width
    scales with sigma_y (the plotted statistic's standard deviation), which
    is what makes the stock multiplier 2.807 deliver an in-control ARL of
    200.
    """
    if limit_multiplier <= 0:
        raise ValueError("limit_multiplier must be positive")
    if kind is ChartKind.SHEWHART:
        lam = 1.0
    elif not 0.0 < lam <= 1.0:
        raise InvalidLambda(f"lambda must be in (0, 1], got {lam}")
    base = model.sigma_y * math.sqrt(1.0 - model.rho**2) / math.sqrt(model.n)
    if kind is ChartKind.EWMA:
        base *= math.sqrt(lam / (2.0 - lam))
    return ChartSpec(
        kind=kind,
        lam=lam,
        limit_multiplier=limit_multiplier,
        center=model.mu_y0,
        half_width=limit_multiplier * base,
    )


def update(state: ChartState, spec: ChartSpec, z: float) -> tuple[ChartState, bool]:
    """Advance the chart by one statistic; signal on strict limit violation.

    EWMA recursion w' = lam * z + (1 - lam) * w; lam = 1 makes w' = z, the
    Shewhart case.
    """
    w = spec.lam * z + (1.0 - spec.lam) * state.w
    signal = abs(w - spec.center) > spec.half_width
    return ChartState(w=w, t=state.t + 1), signal
