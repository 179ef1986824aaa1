import math

import numpy as np
import pytest

from aibmon import (
    ChartKind,
    ChartSpec,
    ExcessCensoring,
    ProcessModel,
    ShiftMode,
    ShiftScenario,
    SimulationConfig,
    StreamKey,
    estimate_runlength,
    make_limits,
    run_to_signal,
    shewhart_arl_exact,
    trace,
)
from aibmon import charts, estimators, sample_subgroup, shifted_means
from aibmon.runlength import simulate_run_lengths, summarize_run_lengths


def shewhart_config(rho=0.0, reps=1000, seed=7, **scenario_kwargs):
    model = ProcessModel.standard(rho)
    return SimulationConfig(
        model=model,
        scenario=ShiftScenario(**scenario_kwargs),
        spec=make_limits(ChartKind.SHEWHART, 1.0, 2.807, model),
        reps=reps,
        master_seed=seed,
    )


def test_zero_half_width_always_signals():
    model = ProcessModel.standard(0.0)
    config = SimulationConfig(
        model=model,
        scenario=ShiftScenario(),
        spec=ChartSpec(ChartKind.SHEWHART, 1.0, 2.807, center=0.0, half_width=0.0),
        reps=50,
        master_seed=1,
    )
    rl = simulate_run_lengths(config)
    assert (rl == 1).all()


def test_in_control_shewhart_run_length_is_geometric():
    # ARL within 3 SE of the closed form and SDRL/ARL near sqrt(1 - p).
    config = shewhart_config(reps=50_000, seed=11)
    s = estimate_runlength(config)
    exact = shewhart_arl_exact(2.807, 0.0)
    assert abs(s.arl - exact) < 3 * s.se_arl
    p = 1.0 / exact
    assert s.sdrl / s.arl == pytest.approx(math.sqrt(1 - p), rel=0.03)
    assert s.censored == 0
    assert set(s.percentiles) == {5, 25, 50, 75, 95}
    # geometric quantiles: median ~ ARL * ln 2
    assert s.percentiles[50] == pytest.approx(exact * math.log(2), rel=0.08)


def test_masking_mode_run_lengths_match_in_control():
    # Not just the ARL: the whole run-length distribution is unchanged.
    from scipy.stats import ks_2samp

    model = ProcessModel.standard(0.5)
    spec = make_limits(ChartKind.EWMA, 0.1, 2.454, model)

    def run_lengths(scenario, seed):
        return simulate_run_lengths(
            SimulationConfig(model, scenario, spec, reps=20_000, master_seed=seed)
        )

    in_control = run_lengths(ShiftScenario(), 13)
    masked = run_lengths(ShiftScenario(delta_y=2.0, mode=ShiftMode.MASKING), 14)
    joint_se = math.hypot(
        in_control.std(ddof=1) / math.sqrt(in_control.size),
        masked.std(ddof=1) / math.sqrt(masked.size),
    )
    assert abs(masked.mean() - in_control.mean()) < 3 * joint_se
    assert ks_2samp(in_control, masked).pvalue > 0.01


def test_detection_delay_after_changepoint():
    # A delta_y = 2 shift at subgroup 25 with the auxiliary in control is
    # caught about 3.3 subgroups later (absolute time ~28).
    model = ProcessModel.standard(0.5)
    config = SimulationConfig(
        model=model,
        scenario=ShiftScenario(delta_y=2.0, changepoint=25),
        spec=make_limits(ChartKind.EWMA, 0.1, 2.454, model),
        reps=10_000,
        master_seed=37,
    )
    delay = estimate_runlength(config).arl
    assert 2.9 < delay < 3.7


def test_run_lengths_independent_of_threading_and_chunking():
    config = shewhart_config(rho=0.3, delta_x=0.5, reps=9000, seed=23)
    serial = simulate_run_lengths(config, threads=1)
    sharded = simulate_run_lengths(config, threads=4)
    assert np.array_equal(serial, sharded)
    a = estimate_runlength(config, threads=1)
    b = estimate_runlength(config, threads=4)
    assert a == b


def test_run_to_signal_matches_batched_engine():
    config = shewhart_config(rho=0.5, delta_x=1.0, reps=200, seed=31)
    rl = simulate_run_lengths(config)
    for r in (0, 1, 57, 199):
        assert run_to_signal(config, StreamKey(31, r)) == rl[r]


def test_run_to_signal_matches_scalar_chart_walk():
    # Engine values replicate the sample_subgroup -> statistic -> update path.
    model = ProcessModel(0.2, -0.4, 1.1, 0.9, rho=0.55, n=3)
    scenario = ShiftScenario(delta_y=0.8, delta_x=0.2, changepoint=4)
    spec = make_limits(ChartKind.EWMA, 0.2, 2.636, model)
    config = SimulationConfig(model, scenario, spec, reps=1, master_seed=41)
    mu_y1, mu_x1 = shifted_means(model, scenario)
    for rep in range(6):
        key = StreamKey(41, rep)
        state = charts.initial_state(spec)
        walked = None
        for t in range(1, 20_001):
            mu = (model.mu_y0, model.mu_x0) if t <= scenario.changepoint else (mu_y1, mu_x1)
            sample = sample_subgroup(model, mu[0], mu[1], key, t - 1)
            z = charts.aib_statistic(estimators.moments(sample), model)
            state, sig = charts.update(state, spec, z)
            if sig and t > scenario.changepoint:
                walked = t - scenario.changepoint
                break
        assert walked == run_to_signal(config, key)


def test_pre_changepoint_signals_are_not_counted():
    # A degenerate always-signal chart still reports the first post-shift
    # subgroup as run length 1.
    model = ProcessModel.standard(0.0)
    config = SimulationConfig(
        model=model,
        scenario=ShiftScenario(delta_y=1.0, changepoint=5),
        spec=ChartSpec(ChartKind.SHEWHART, 1.0, 2.807, center=0.0, half_width=0.0),
        reps=20,
        master_seed=3,
    )
    assert (simulate_run_lengths(config) == 1).all()


def test_cap_censors_and_summary_rejects_heavy_censoring():
    config = shewhart_config(reps=400, seed=17)
    config = SimulationConfig(
        model=config.model,
        scenario=config.scenario,
        spec=config.spec,
        reps=400,
        master_seed=17,
        rl_cap=50,
    )
    rl = simulate_run_lengths(config)
    assert rl.max() == 50
    assert (rl >= 1).all()
    with pytest.raises(ExcessCensoring):
        estimate_runlength(config)


def test_summary_of_single_replication():
    s = summarize_run_lengths(np.array([7], dtype=np.int64), rl_cap=10**7)
    assert s.arl == 7.0 and s.sdrl == 0.0 and s.se_arl == 0.0 and s.reps == 1


def test_config_validation():
    model = ProcessModel.standard(0.0)
    spec = make_limits(ChartKind.SHEWHART, 1.0, 2.807, model)
    with pytest.raises(ValueError):
        SimulationConfig(model, ShiftScenario(), spec, reps=0)
    with pytest.raises(ValueError):
        SimulationConfig(model, ShiftScenario(), spec, reps=10, rl_cap=0)


# --------------------------------------------------------------------- trace


def test_trace_single_in_control_subgroup():
    model = ProcessModel.standard(0.5)
    spec = make_limits(ChartKind.EWMA, 0.1, 2.454, model)
    config = SimulationConfig(model, ShiftScenario(), spec, reps=1, master_seed=5)
    key = StreamKey(5, 0)
    points = trace(config, key, 1)
    assert len(points) == 1
    p = points[0]
    sample = sample_subgroup(model, 0.0, 0.0, key, 0)
    z1 = charts.aib_statistic(estimators.moments(sample), model)
    assert p.t == 1
    assert p.z == z1
    assert p.w == spec.lam * z1 + (1 - spec.lam) * spec.center
    assert p.regime == "in-control"  # zero shift: nothing moved


def test_trace_regime_labels_and_limits():
    model = ProcessModel.standard(0.5)
    spec = make_limits(ChartKind.EWMA, 0.1, 2.454, model)
    config = SimulationConfig(
        model,
        ShiftScenario(delta_y=2.0, mode=ShiftMode.MASKING, changepoint=25),
        spec,
        reps=1,
        master_seed=5,
    )
    points = trace(config, StreamKey(5, 0), 60)
    assert [p.regime for p in points[:25]] == ["in-control"] * 25
    assert all(p.regime == "out-of-control" for p in points[25:])
    assert all(p.lcl == spec.lcl and p.ucl == spec.ucl for p in points)
    assert [p.t for p in points] == list(range(1, 61))


def test_trace_does_not_stop_at_signals():
    model = ProcessModel.standard(0.0)
    spec = ChartSpec(ChartKind.SHEWHART, 1.0, 2.807, center=0.0, half_width=0.0)
    config = SimulationConfig(model, ShiftScenario(), spec, reps=1, master_seed=9)
    points = trace(config, StreamKey(9, 0), 30)
    assert len(points) == 30
    assert all(p.signal for p in points)


def test_trace_matches_run_to_signal():
    model = ProcessModel.standard(0.25)
    spec = make_limits(ChartKind.EWMA, 0.2, 2.636, model)
    config = SimulationConfig(
        model, ShiftScenario(delta_y=1.0), spec, reps=1, master_seed=29
    )
    key = StreamKey(29, 4)
    rl = run_to_signal(config, key)
    points = trace(config, key, rl + 10)
    first_signal = next(p.t for p in points if p.signal)
    assert first_signal == rl
    # zero changepoint with a real shift: shifted regime from the start
    assert all(p.regime == "out-of-control" for p in points)
