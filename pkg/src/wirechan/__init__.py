"""Statistical wireline channel generation and link evaluation."""

from wirechan.channel import (
    DegenerateChannelError,
    ImpulseResponse,
    NyquistKernel,
    TransferFunction,
    channel_power_gain,
    equivalent_response,
    frequency_response,
    load_impulse_response,
    rms_delay_spread,
    transfer_function,
)
from wirechan.generator import (
    Ensemble,
    GeneratorConfig,
    Realization,
    draw_attenuation,
    generate,
    generate_ensemble,
    generate_two_tap,
    make_rng,
    synthesize_pdp,
    target_rms_ds,
)
from wirechan.link import (
    CapacityConfig,
    OfdmConfig,
    achievable_rate_mc,
    capacity,
    capacity_gain_correlation,
    coverage_cdf,
    optimize_cp,
    power_partition,
    snir,
)
from wirechan.lptv import (
    LptvChannel,
    apply_lptv,
    harmonic_extract,
    lptv_equivalent_response,
    response_at,
    zadeh_compose,
)
from wirechan.profiles import (
    RegressionLine,
    ScenarioProfile,
    builtin_profiles,
    get_profile,
    load_profile_config,
)
from wirechan.regression import robust_regress
from wirechan.stats import (
    SummaryStats,
    TestReport,
    battery_rejects,
    boxplot_outliers,
    ks_two_sample,
    lognormality_battery,
    summary_statistics,
)

__all__ = [
    "CapacityConfig",
    "DegenerateChannelError",
    "Ensemble",
    "GeneratorConfig",
    "ImpulseResponse",
    "LptvChannel",
    "NyquistKernel",
    "OfdmConfig",
    "Realization",
    "RegressionLine",
    "ScenarioProfile",
    "SummaryStats",
    "TestReport",
    "TransferFunction",
    "achievable_rate_mc",
    "apply_lptv",
    "battery_rejects",
    "boxplot_outliers",
    "builtin_profiles",
    "capacity",
    "capacity_gain_correlation",
    "channel_power_gain",
    "coverage_cdf",
    "draw_attenuation",
    "equivalent_response",
    "frequency_response",
    "generate",
    "generate_ensemble",
    "generate_two_tap",
    "get_profile",
    "harmonic_extract",
    "ks_two_sample",
    "load_impulse_response",
    "load_profile_config",
    "lognormality_battery",
    "lptv_equivalent_response",
    "make_rng",
    "optimize_cp",
    "power_partition",
    "response_at",
    "rms_delay_spread",
    "robust_regress",
    "snir",
    "summary_statistics",
    "synthesize_pdp",
    "target_rms_ds",
    "transfer_function",
    "zadeh_compose",
]

__version__ = "0.1.0"
