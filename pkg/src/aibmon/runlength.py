"""Monte Carlo run-length engine.

Drives a chart over scenario-generated subgroup streams until the first
signal and aggregates run-length statistics over independent replications.
Replication ``i`` of a study always uses the substream addressed by
``StreamKey(master_seed, i)``, so results are deterministic for a fixed
master seed no matter how replications are sharded over threads.

The monitored party never learns of the shift: the chart statistic and
limits always use the in-control parameters, while the data-generating
means switch at the changepoint. Run lengths are 1-based and counted from
the changepoint-adjusted start (the first shifted subgroup); with a
changepoint of 0 that is simply the first subgroup.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import charts
from .charts import ChartSpec
from .errors import ExcessCensoring
from .stochastics import (
    ProcessModel,
    ShiftScenario,
    StreamKey,
    SubgroupStream,
    normals_from_words,
    pairs_from_normals,
    shifted_means,
    words_per_subgroup,
)

PERCENTILE_LEVELS = (5, 25, 50, 75, 95)

# Subgroups drawn per replication per round: geometric growth keeps short
# runs cheap without many Python-level rounds for long ones. The schedule
# depends only on the round number, so per-replication consumption is
# identical however replications are chunked.
_BLOCK_FIRST = 64
_BLOCK_MAX = 1024
_CHUNK = 4096
_MAX_CENSORED_FRACTION = 0.001


@dataclass(frozen=True)
class RunLengthSummary:
    """Aggregate of one run-length study."""

    arl: float
    sdrl: float
    se_arl: float
    reps: int
    percentiles: dict[int, float]
    censored: int


@dataclass(frozen=True)
class SimulationConfig:
    """Everything one run-length study needs."""

    model: ProcessModel
    scenario: ShiftScenario
    spec: ChartSpec
    reps: int = 50_000
    master_seed: int = 0
    rl_cap: int = 10_000_000

    def __post_init__(self):
        if self.reps < 1:
            raise ValueError("reps must be >= 1")
        if self.rl_cap < 1:
            raise ValueError("rl_cap must be >= 1")


def _chunk_run_lengths(
    config: SimulationConfig,
    master_seed: int,
    rep_indices: range,
) -> np.ndarray:
    """Run lengths for a batch of replications, vectorized across the batch.

    Each replication consumes its own substream block by block; a censored
    replication reports the cap itself. Values are bit-identical to the
    scalar path (sample_subgroup + chart update) over the same keys.
    """
    model, scenario, spec = config.model, config.scenario, config.spec
    n = model.n
    wps = words_per_subgroup(n)
    changepoint = scenario.changepoint
    mu_y1, mu_x1 = shifted_means(model, scenario)
    beta = model.beta()
    lam, om = spec.lam, 1.0 - spec.lam
    center, hw = spec.center, spec.half_width

    streams = [
        SubgroupStream(n, StreamKey(master_seed, r)) for r in rep_indices
    ]
    total = len(streams)
    rl = np.zeros(total, dtype=np.int64)
    w = np.full(total, center, dtype=np.float64)
    alive = np.arange(total)
    horizon = changepoint + config.rl_cap
    t0 = 0
    block = _BLOCK_FIRST
    while alive.size and t0 < horizon:
        count = min(block, horizon - t0)
        block = min(2 * block, _BLOCK_MAX)
        words = np.empty((alive.size, count, wps), dtype=np.uint64)
        for row, idx in enumerate(alive):
            words[row] = streams[idx].take_words(count)
        zx, ze = normals_from_words(n, words)

        ybar = np.empty((alive.size, count))
        xbar = np.empty((alive.size, count))
        split = min(max(changepoint - t0, 0), count)
        for sl, mu_y, mu_x in (
            (slice(0, split), model.mu_y0, model.mu_x0),
            (slice(split, count), mu_y1, mu_x1),
        ):
            if sl.start == sl.stop:
                continue
            y, x = pairs_from_normals(model, mu_y, mu_x, zx[:, sl], ze[:, sl])
            ybar[:, sl] = y.mean(axis=2)
            xbar[:, sl] = x.mean(axis=2)
        z = ybar + beta * (model.mu_x0 - xbar)

        wa = w[alive]
        done = np.zeros(alive.size, dtype=bool)
        hit = np.zeros(alive.size, dtype=np.int64)
        for j in range(count):
            wa = lam * z[:, j] + om * wa
            t = t0 + j + 1
            if t <= changepoint:
                continue
            sig = ~done & (np.abs(wa - center) > hw)
            hit[sig] = t - changepoint
            done |= sig
        w[alive] = wa
        rl[alive[done]] = hit[done]
        alive = alive[~done]
        t0 += count

    rl[alive] = config.rl_cap
    return rl


def run_to_signal(config: SimulationConfig, key: StreamKey) -> int:
    """Run length of the single replication addressed by ``key``.

    Returns the 1-based index, counted from the first post-changepoint
    subgroup, of the first signal after the changepoint; a run that reaches
    the cap without signaling returns the cap (censored).
    """
    rl = _chunk_run_lengths(
        config,
        key.master_seed,
        range(key.replication_index, key.replication_index + 1),
    )
    return int(rl[0])


def simulate_run_lengths(
    config: SimulationConfig, threads: int = 1
) -> np.ndarray:
    """Run lengths of replications 0..reps-1; deterministic for a master seed.

    Threading only shards fixed-size chunks of replications; chunk content
    and all arithmetic are independent of the thread count.
    """
    chunks = [
        range(start, min(start + _CHUNK, config.reps))
        for start in range(0, config.reps, _CHUNK)
    ]
    if threads <= 1 or len(chunks) == 1:
        parts = [
            _chunk_run_lengths(config, config.master_seed, c) for c in chunks
        ]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(
                pool.map(
                    lambda c: _chunk_run_lengths(config, config.master_seed, c),
                    chunks,
                )
            )
    return np.concatenate(parts)


def summarize_run_lengths(rl: np.ndarray, rl_cap: int) -> RunLengthSummary:
    """Aggregate a run-length sample; refuses samples with heavy censoring."""
    reps = rl.size
    censored = int((rl >= rl_cap).sum())
    if censored / reps >= _MAX_CENSORED_FRACTION:
        raise ExcessCensoring(
            f"{censored}/{reps} replications hit the run-length cap {rl_cap}"
        )
    arl = float(rl.mean())
    sdrl = float(rl.std(ddof=1)) if reps > 1 else 0.0
    pcts = np.percentile(rl, PERCENTILE_LEVELS)
    return RunLengthSummary(
        arl=arl,
        sdrl=sdrl,
        se_arl=sdrl / np.sqrt(reps),
        reps=reps,
        percentiles={lv: float(p) for lv, p in zip(PERCENTILE_LEVELS, pcts)},
        censored=censored,
    )


def estimate_runlength(config: SimulationConfig, threads: int = 1) -> RunLengthSummary:
    """Monte Carlo ARL/SDRL/percentiles over ``config.reps`` replications."""
    return summarize_run_lengths(simulate_run_lengths(config, threads), config.rl_cap)


@dataclass(frozen=True)
class TracePoint:
    """One emitted subgroup of a full chart path."""

    t: int
    x_bar: float
    y_bar: float
    z: float
    w: float
    lcl: float
    ucl: float
    signal: bool
    regime: str


def trace(
    config: SimulationConfig, key: StreamKey, n_subgroups: int
) -> list[TracePoint]:
    """Full chart path over ``n_subgroups`` subgroups, not stopping at signals."""
    if n_subgroups < 1:
        raise ValueError("n_subgroups must be >= 1")
    model, scenario, spec = config.model, config.scenario, config.spec
    mu_y1, mu_x1 = shifted_means(model, scenario)
    beta = model.beta()
    shifted_label = (
        "out-of-control"
        if (mu_y1, mu_x1) != (model.mu_y0, model.mu_x0)
        else "in-control"
    )
    zx, ze = SubgroupStream(model.n, key).take(n_subgroups)
    state = charts.initial_state(spec)
    points = []
    for i in range(n_subgroups):
        t = i + 1
        in_control = t <= scenario.changepoint
        mu_y, mu_x = (
            (model.mu_y0, model.mu_x0) if in_control else (mu_y1, mu_x1)
        )
        y, x = pairs_from_normals(model, mu_y, mu_x, zx[i], ze[i])
        y_bar, x_bar = float(y.mean()), float(x.mean())
        z = y_bar + beta * (model.mu_x0 - x_bar)
        state, signal = charts.update(state, spec, z)
        points.append(
            TracePoint(
                t=t,
                x_bar=x_bar,
                y_bar=y_bar,
                z=z,
                w=state.w,
                lcl=spec.lcl,
                ucl=spec.ucl,
                signal=signal,
                regime="in-control" if in_control else shifted_label,
            )
        )
    return points
