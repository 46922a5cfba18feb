"""Robust transceiver design for dual-hop amplify-and-forward MIMO relays
with Gaussian channel-estimation errors."""
from .channel import (
    ChannelEstimate,
    HopErrorModel,
    SystemDims,
    exponential_correlation,
    hop_model,
    lmmse_error_correlation,
    sample_error,
    sample_estimated_channel,
    trial_rng,
)
from .design import (
    PowerAllocation,
    TransceiverDesign,
    WhitenedHop,
    alternating_power_allocation,
    assemble_design,
    design_naive,
    design_robust,
    eta_scaling,
    whiten_hop,
)
from .harness import RunConfig, SummaryRow, run_monte_carlo, write_csv
from .kernels import BACKEND
from .mse import LinkStats, achievable_rate, lmmse_equalizer, mse_matrix, rate_lower_bound

__version__ = "0.1.0"
