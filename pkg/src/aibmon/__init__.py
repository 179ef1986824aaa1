"""Auxiliary-information-based process monitoring toolkit.

Estimators that sharpen the process-mean estimate with a correlated
auxiliary variable, the Shewhart/EWMA charts built on them, a reproducible
Monte Carlo run-length engine, and analytic oracles that cross-check it —
including the studies showing how a drifting auxiliary mean inflates false
alarms or masks real shifts.
"""

from .charts import ChartKind, ChartSpec, ChartState, aib_statistic, initial_state, make_limits, update
from .errors import (
    AibmonError,
    DegenerateDesign,
    DivisionByZeroMean,
    ExcessCensoring,
    InvalidLambda,
    MaskingWithZeroCorrelation,
    MismatchedSlope,
    NoBracket,
    SingularSystem,
    SubgroupTooSmall,
    ZeroPopulationMean,
)
from .estimators import (
    EfficiencyInputs,
    SampleMoments,
    difference_estimate,
    mean_estimate,
    moments,
    product_estimate,
    product_preferred,
    ratio_estimate,
    ratio_preferred,
    regression_estimate,
)
from .experiments import (
    EquivalenceResult,
    MaskingDemo,
    ProfileModel,
    Table1Cell,
    equivalence_check,
    masking_demo,
    profile_deviation,
    profile_equivalence_trials,
    reproduce_table1,
)
from .oracles import (
    StandardizedShift,
    calibrate_limit,
    ewma_arl_markov,
    shewhart_arl_exact,
    standardized_shift,
)
from .runlength import (
    RunLengthSummary,
    SimulationConfig,
    TracePoint,
    estimate_runlength,
    run_to_signal,
    trace,
)
from .stochastics import (
    PairedSample,
    ProcessModel,
    ShiftMode,
    ShiftScenario,
    StreamKey,
    sample_subgroup,
    shifted_means,
)

__version__ = "0.1.0"

__all__ = [
    "AibmonError",
    "ChartKind",
    "ChartSpec",
    "ChartState",
    "DegenerateDesign",
    "DivisionByZeroMean",
    "EfficiencyInputs",
    "EquivalenceResult",
    "ExcessCensoring",
    "InvalidLambda",
    "MaskingDemo",
    "MaskingWithZeroCorrelation",
    "MismatchedSlope",
    "NoBracket",
    "PairedSample",
    "ProcessModel",
    "ProfileModel",
    "RunLengthSummary",
    "SampleMoments",
    "ShiftMode",
    "ShiftScenario",
    "SimulationConfig",
    "SingularSystem",
    "StandardizedShift",
    "StreamKey",
    "SubgroupTooSmall",
    "Table1Cell",
    "TracePoint",
    "ZeroPopulationMean",
    "aib_statistic",
    "calibrate_limit",
    "difference_estimate",
    "equivalence_check",
    "estimate_runlength",
    "ewma_arl_markov",
    "initial_state",
    "make_limits",
    "masking_demo",
    "mean_estimate",
    "moments",
    "product_estimate",
    "product_preferred",
    "profile_deviation",
    "profile_equivalence_trials",
    "ratio_estimate",
    "ratio_preferred",
    "regression_estimate",
    "reproduce_table1",
    "run_to_signal",
    "sample_subgroup",
    "shewhart_arl_exact",
    "shifted_means",
    "standardized_shift",
    "trace",
    "update",
]
