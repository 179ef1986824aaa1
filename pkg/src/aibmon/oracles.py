"""Analytic run-length computations, independent of the Monte Carlo engine.

These routines never simulate. The Shewhart ARL is closed-form (geometric
run length), the EWMA ARL comes from a Markov-chain discretization of the
smoothed statistic, and limit calibration inverts them. They exist to
cross-check the simulation engine, so their accuracy must exceed Monte
Carlo noise by orders of magnitude: the normal CDF/quantile used here is
accurate to double precision, and the Markov approximation error is
O(n_states^-2).

Everything works on the standardized scale: the plotted statistic minus
the chart center, divided by its in-control standard deviation
sqrt(1 - rho^2) * sigma_y / sqrt(n), is a unit normal with mean ``s``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.optimize import brentq
from scipy.special import ndtr, ndtri

from .charts import ChartKind
from .errors import InvalidLambda, NoBracket, SingularSystem
from .stochastics import ProcessModel, ShiftMode, ShiftScenario


@dataclass(frozen=True)
class StandardizedShift:
    """Mean of the standardized chart statistic under a shift scenario."""

    s: float

    def __float__(self) -> float:
        return self.s


ShiftLike = Union[StandardizedShift, float]


def standardized_shift(model: ProcessModel, scenario: ShiftScenario) -> StandardizedShift:
    """Residual shift seen by the chart, in statistic standard deviations.

    The statistic's mean moves by delta_y - rho * delta_x in units of
    sigma_y / sqrt(n); dividing by the statistic's standard deviation gives

        s = (delta_y - rho * delta_x) / sqrt(1 - rho^2).

    A masking-coupled scenario cancels exactly, s = 0, whatever delta_y.
    """
    if scenario.mode is ShiftMode.MASKING:
        return StandardizedShift(0.0)
    s = (scenario.delta_y - model.rho * scenario.delta_x) / math.sqrt(
        1.0 - model.rho**2
    )
    return StandardizedShift(s)


def shewhart_arl_exact(L: float, s: ShiftLike) -> float:
    """Closed-form Shewhart ARL: 1 / p with p the two-sided exceedance.

    p = Phi(-(L - s)) + Phi(-(L + s)); the run length is geometric because
    subgroups are independent.
    """
    if L <= 0:
        raise ValueError("limit multiplier L must be positive")
    s = float(s)
    p = float(ndtr(-(L - s)) + ndtr(-(L + s)))
    if p == 0.0:
        return math.inf
    return 1.0 / p


def ewma_arl_markov(lam: float, L: float, s: ShiftLike, n_states: int = 401) -> float:
    """EWMA ARL by Markov-chain discretization of the in-limits interval.

    The standardized EWMA w' = (1 - lam) * w + lam * u, u ~ N(s, 1), lives
    in (-h, h) with h = L * sqrt(lam / (2 - lam)). The interval is cut into
    ``n_states`` equal cells; transition mass from cell center c_j into
    cell k is Phi(hi) - Phi(lo) with the cell edges mapped back through the
    recursion. With absorption outside the limits, the expected absorption
    time solves (I - Q) a = 1 and the chart starts at the center cell.

    The approximation converges at second order in the cell width;
    n_states = 401 is accurate to well under 0.1% at in-control ARL 200.
    lam = 1 reproduces the Shewhart closed form.
    """
    if not 0.0 < lam <= 1.0:
        raise InvalidLambda(f"lambda must be in (0, 1], got {lam}")
    if L <= 0:
        raise ValueError("limit multiplier L must be positive")
    if n_states < 51 or n_states % 2 == 0:
        raise ValueError("n_states must be odd and >= 51")
    s = float(s)
    h = L * math.sqrt(lam / (2.0 - lam))
    width = 2.0 * h / n_states
    centers = -h + (np.arange(n_states) + 0.5) * width
    carried = (1.0 - lam) * centers[:, None]
    lo = (centers[None, :] - 0.5 * width - carried) / lam
    hi = (centers[None, :] + 0.5 * width - carried) / lam
    Q = ndtr(hi - s) - ndtr(lo - s)
    try:
        a = np.linalg.solve(np.eye(n_states) - Q, np.ones(n_states))
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(f"I - Q singular for lam={lam}, L={L}") from exc
    arl = float(a[n_states // 2])
    if not math.isfinite(arl) or arl < 1.0:
        raise SingularSystem(
            f"Markov solve produced invalid ARL {arl} for lam={lam}, L={L}"
        )
    return arl


def calibrate_limit(
    kind: ChartKind,
    lam: float,
    target_arl0: float,
    n_states: int = 401,
) -> float:
    """Limit multiplier whose in-control ARL equals ``target_arl0``.

    Shewhart is analytic: L = Phi^-1(1 - 1 / (2 * target)). EWMA brackets
    the Markov-chain ARL in L and solves by Brent's method to |ARL -
    target| < 0.1.
    """
    if target_arl0 <= 1.0:
        raise ValueError("target in-control ARL must exceed 1")
    if kind is ChartKind.SHEWHART:
        return float(-ndtri(0.5 / target_arl0))

    def gap(L: float) -> float:
        return ewma_arl_markov(lam, L, 0.0, n_states) - target_arl0

    # ARL grows monotonically (and eventually astronomically) in L; walk the
    # bracket upper end outward until the gap turns positive, stopping at 10
    # or where the Markov solve degenerates.
    lo = 1e-3
    if gap(lo) > 0:
        raise NoBracket(
            f"target in-control ARL {target_arl0} already exceeded at L={lo}"
        )
    hi = None
    for cand in (1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0):
        try:
            g = gap(cand)
        except SingularSystem:
            break
        if g >= 0:
            hi = cand
            break
        lo = cand
    if hi is None:
        raise NoBracket(
            f"no L in (0, 10] reaches in-control ARL {target_arl0} at lam={lam}"
        )
    L = float(brentq(gap, lo, hi, xtol=1e-7))
    if abs(gap(L)) >= 0.1:
        raise NoBracket(f"calibration residual too large at lam={lam}")
    return L
