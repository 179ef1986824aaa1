"""Reproducible bivariate-normal subgroup generation.

Randomness contract
-------------------
Every replication owns a substream derived by hashing
``(master_seed, replication_index)`` through ``numpy.random.SeedSequence``
into a Philox counter-based generator, so substreams are independent and
the draw for a given subgroup never depends on execution order or worker
count.

Within a substream, subgroup ``t`` (0-based) consumes a fixed slot of raw
64-bit words: slots are padded to the 4-word Philox counter block, the
first ``n`` words drive the X draws and the next ``n`` words the residual
of Y given X. Words become uniforms via ``((w >> 11) + 0.5) * 2**-53``
(strictly inside (0, 1)) and normals via the inverse normal CDF, which
consumes exactly one word per normal. That fixed budget is what makes
``sample_subgroup`` a pure function of ``(key, subgroup_index)`` and lets
the block-vectorized simulation engine replay identical values.

The bivariate draw is the conditional (Cholesky) construction, X first:

    x = mu_x + sigma_x * zx
    y = mu_y + rho * sigma_y * zx + sigma_y * sqrt(1 - rho^2) * ze

so the conditional-mean slope of Y on X is beta = rho * sigma_y / sigma_x.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from numpy.random import Philox, SeedSequence
from scipy.special import ndtri

from .errors import MaskingWithZeroCorrelation

_U64_MAX = 2**64
_UNIFORM_SCALE = 2.0**-53


class ShiftMode(str, Enum):
    """How the out-of-control means of Y and X are coupled."""

    INDEPENDENT = "independent"
    MASKING = "masking"


@dataclass(frozen=True)
class ProcessModel:
    """In-control bivariate-normal description of (Y, X).

    Fields are the in-control means, standard deviations, correlation and
    subgroup size. ``|rho| = 1`` is rejected: downstream limit widths and
    the masking coupling divide by sqrt(1 - rho^2) and beta respectively.
    """

    mu_y0: float
    mu_x0: float
    sigma_y: float
    sigma_x: float
    rho: float
    n: int = 1

    def __post_init__(self):
        if not (self.sigma_y > 0 and self.sigma_x > 0):
            raise ValueError("sigma_y and sigma_x must be positive")
        if not abs(self.rho) < 1:
            raise ValueError("need |rho| < 1 (degenerate correlation rejected)")
        if not (isinstance(self.n, int) and self.n >= 1):
            raise ValueError("subgroup size n must be an integer >= 1")

    def beta(self) -> float:
        """Population regression slope of Y on X: rho * sigma_y / sigma_x."""
        return self.rho * self.sigma_y / self.sigma_x

    @classmethod
    def standard(cls, rho: float, n: int = 1) -> "ProcessModel":
        """Zero-mean unit-variance model; raw and standardized shifts coincide."""
        return cls(mu_y0=0.0, mu_x0=0.0, sigma_y=1.0, sigma_x=1.0, rho=rho, n=n)


@dataclass(frozen=True)
class ShiftScenario:
    """Out-of-control description in standardized shift units.

    ``delta_y`` and ``delta_x`` are shifts in units of sigma/sqrt(n). In
    MASKING mode ``delta_x`` is ignored: the X shift is derived internally
    so that it exactly cancels the Y shift inside the auxiliary-adjusted
    statistic. ``changepoint`` counts in-control subgroups before the shift
    (0 = shift active from the first subgroup).
    """

    delta_y: float = 0.0
    delta_x: float = 0.0
    mode: ShiftMode = ShiftMode.INDEPENDENT
    changepoint: int = 0

    def __post_init__(self):
        if not (isinstance(self.changepoint, int) and self.changepoint >= 0):
            raise ValueError("changepoint must be an integer >= 0")


@dataclass(frozen=True)
class PairedSample:
    """One subgroup of n (y, x) pairs."""

    y: np.ndarray
    x: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "y", np.asarray(self.y, dtype=np.float64))
        object.__setattr__(self, "x", np.asarray(self.x, dtype=np.float64))
        if self.y.shape != self.x.shape or self.y.ndim != 1 or self.y.size < 1:
            raise ValueError("y and x must be equal-length 1-d vectors")

    @property
    def n(self) -> int:
        return self.y.size


@dataclass(frozen=True)
class StreamKey:
    """Addresses one replication's substream: (master_seed, replication_index)."""

    master_seed: int
    replication_index: int

    def __post_init__(self):
        for name in ("master_seed", "replication_index"):
            v = getattr(self, name)
            if not (isinstance(v, int) and 0 <= v < _U64_MAX):
                raise ValueError(f"{name} must be an unsigned 64-bit integer")

    def seed_sequence(self) -> SeedSequence:
        return SeedSequence(self.master_seed, spawn_key=(self.replication_index,))


def shifted_means(model: ProcessModel, scenario: ShiftScenario) -> tuple[float, float]:
    """Post-changepoint means (mu_y1, mu_x1) in raw units.

    INDEPENDENT: each mean moves by its own standardized shift,
    delta * sigma / sqrt(n). MASKING: the X mean moves by
    delta_y * sigma_y / (beta * sqrt(n)), the exact amount that cancels the
    Y shift inside the auxiliary-adjusted statistic.
    """
    root_n = math.sqrt(model.n)
    mu_y1 = model.mu_y0 + scenario.delta_y * model.sigma_y / root_n
    if scenario.mode is ShiftMode.MASKING:
        if model.rho == 0.0:
            raise MaskingWithZeroCorrelation(
                "masking-coupled shift undefined at rho = 0 (beta = 0)"
            )
        mu_x1 = model.mu_x0 + scenario.delta_y * model.sigma_y / (model.beta() * root_n)
    else:
        mu_x1 = model.mu_x0 + scenario.delta_x * model.sigma_x / root_n
    return mu_y1, mu_x1


def words_per_subgroup(n: int) -> int:
    """Raw 64-bit words reserved per subgroup (2n, padded to the 4-word block)."""
    return 4 * ((2 * n + 3) // 4)


def _uniforms(raw: np.ndarray) -> np.ndarray:
    return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * _UNIFORM_SCALE


def normals_from_words(n: int, words: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Decode raw word slots into standard-normal arrays (zx, ze).

    ``words`` has shape (..., words_per_subgroup(n)); the first n words map
    to the X normals, the next n to the residual normals, the padding is
    discarded. Used by both the scalar and the batched generation paths so
    the decoded values agree bitwise.
    """
    z = ndtri(_uniforms(words[..., : 2 * n]))
    return z[..., :n], z[..., n : 2 * n]


class SubgroupStream:
    """Sequential source of standard-normal subgroup pairs for one replication.

    ``take(count)`` returns arrays ``(zx, ze)`` of shape (count, n) holding
    the X normals and the conditional residual normals for the next
    ``count`` subgroups. Consumption is identical, word for word, to what
    ``sample_subgroup`` uses for the same indices.
    """

    def __init__(self, n: int, key: StreamKey, start_index: int = 0):
        if start_index < 0:
            raise ValueError("start_index must be >= 0")
        self.n = n
        self._wps = words_per_subgroup(n)
        self._bitgen = Philox(key.seed_sequence())
        if start_index:
            self._bitgen.advance(start_index * self._wps // 4)
        self.next_index = start_index

    def take_words(self, count: int) -> np.ndarray:
        """Raw word slots for the next ``count`` subgroups, shape (count, wps)."""
        raw = self._bitgen.random_raw(count * self._wps).reshape(count, self._wps)
        self.next_index += count
        return raw

    def take(self, count: int) -> tuple[np.ndarray, np.ndarray]:
        return normals_from_words(self.n, self.take_words(count))


def pairs_from_normals(
    model: ProcessModel,
    mu_y: float,
    mu_x: float,
    zx: np.ndarray,
    ze: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Map standard-normal draws (zx, ze) to (y, x) under the given means.

    Shared by the scalar and block-vectorized paths so both produce
    bit-identical values from the same normals; broadcasts over any leading
    axes.
    """
    x = mu_x + model.sigma_x * zx
    y = (
        mu_y
        + model.rho * model.sigma_y * zx
        + model.sigma_y * math.sqrt(1.0 - model.rho**2) * ze
    )
    return y, x


def sample_subgroup(
    model: ProcessModel,
    mu_y: float,
    mu_x: float,
    key: StreamKey,
    subgroup_index: int,
) -> PairedSample:
    """Draw subgroup ``subgroup_index`` of the replication addressed by ``key``.

    The draw is a pure function of (key, subgroup_index): replaying the same
    arguments gives a bit-identical PairedSample. Means are supplied by the
    caller so the same substream serves in-control and shifted regimes.
    """
    zx, ze = SubgroupStream(model.n, key, start_index=subgroup_index).take(1)
    y, x = pairs_from_normals(model, mu_y, mu_x, zx[0], ze[0])
    return PairedSample(y=y, x=x)
