"""Time-reversal MIMO over multi-path fading channels, at desk scale.

Monte Carlo simulation of retransmitted time-reversed pulse trains through
block-fading Rayleigh channels (optionally funneled through pinhole layers),
with exact moment calculations, statistical-stability scaling laws, and the
information-rate tradeoff they imply.
"""

from .channel import (
    ChannelConfig,
    ChannelRealization,
    ConfigError,
    FrequencyGrid,
    build_frequency_grid,
    sample_realization,
    transfer_at,
)
from .infotheory import (
    RatePoint,
    RateSweep,
    info_rate,
    optimal_power,
    rate_sweep,
    sinr_bbfs,
    sinr_nbfn,
)
from .moments import (
    CapacityError,
    GraphClassification,
    GraphTerm,
    MomentSpec,
    MonomialSum,
    classify_graphs,
    multilayer_leading,
    neff,
    second_moment_flat,
    single_layer_closed,
    squared_mean,
    wick_exact,
    wick_variance,
)
from .stability import (
    RegressionResult,
    StabilityPrediction,
    VarianceEstimate,
    mc_normalized_variance,
    predicted_normalized_variance,
    scaling_regression,
)
from .timereversal import (
    SignalTrace,
    SymbolStream,
    mean_signal,
    pulse_amplitude,
    pulse_area,
    synthesize,
)

__version__ = "0.1.0"

__all__ = [
    "ChannelConfig",
    "ChannelRealization",
    "ConfigError",
    "FrequencyGrid",
    "build_frequency_grid",
    "sample_realization",
    "transfer_at",
    "SymbolStream",
    "SignalTrace",
    "pulse_amplitude",
    "pulse_area",
    "synthesize",
    "mean_signal",
    "MomentSpec",
    "MonomialSum",
    "GraphTerm",
    "GraphClassification",
    "CapacityError",
    "wick_exact",
    "wick_variance",
    "squared_mean",
    "second_moment_flat",
    "single_layer_closed",
    "multilayer_leading",
    "classify_graphs",
    "neff",
    "VarianceEstimate",
    "StabilityPrediction",
    "RegressionResult",
    "mc_normalized_variance",
    "predicted_normalized_variance",
    "scaling_regression",
    "RatePoint",
    "RateSweep",
    "sinr_bbfs",
    "sinr_nbfn",
    "info_rate",
    "optimal_power",
    "rate_sweep",
    "__version__",
]
