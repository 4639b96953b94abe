"""Constellation optimization for noncoherent cascaded-fading links.

Designs one- and two-sided multi-level ASK energy codebooks that
maximize the worst decoding-region error exponent of an energy
detector, and validates them by Monte Carlo simulation against the
traditional equispaced layouts.
"""

from .channel import (
    ChannelConfig,
    ChannelStats,
    compute_stats,
    laguerre_half,
    sample_exact_gain,
    sample_gauss_gain,
)
from .constellation import (
    Codebook,
    SymbolSet,
    average_energy,
    energy_cap,
    read_constellation_file,
    symbols,
    traditional,
    write_constellation_file,
)
from .detector import (
    DecisionRegions,
    decode_one_sided,
    decode_two_sided,
    midpoint_regions,
    normalized_statistic,
    regions_from_design,
    ser_upper_bound,
)
from .ratefn import (
    ConvergenceError,
    RateEvaluator,
    RateModel,
    VarianceCoefficients,
    log_mgf,
    mgf,
    rate_left,
    rate_quadratic,
    rate_right,
    statistic_variance,
    variance_coefficients,
)
from .designer import (
    Design,
    InfeasibleExponent,
    achieved_exponent,
    design_for_exponent,
    optimize,
)
from .simulator import (
    SerEstimate,
    SimConfig,
    SweepRow,
    crossover_snr,
    noise_variance_for_snr,
    rows_to_csv,
    ser_monte_carlo,
    sweep,
)

__version__ = "0.1.0"
