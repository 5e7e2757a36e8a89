"""Heating-channel toolkit.

Simulation of an additive-noise channel whose noise variance rises with the
weighted sum of past input powers, the periodic Gaussian coding scheme with
nearest-neighbor decoding, the achievable-rate and converse-constant
formulas, and a classifier for the bounded-vs-unbounded capacity dichotomy.
"""

from . import bounds, channel, codec, coeffs, harness, serialize
from .bounds import (
    ConverseReport,
    RateReport,
    achievable_rate_opt,
    achievable_rate_pre_limit,
    beta_tilde,
    converse_constant,
    h_minus,
    lemma1_empirical,
    rho_rate_lower_bound,
    truncated_rate,
)
from .channel import (
    ChannelParams,
    NoiseDistribution,
    geometric_fast_variance,
    noise_variance,
    simulate_block,
    simulate_with_feedback,
    variance_profile,
)
from .codec import (
    Codebook,
    ErrorEstimate,
    SchemeParams,
    generate_codebook,
    nn_decode,
    power_violation_fraction,
    scheme_error_probability,
)
from .coeffs import (
    Classification,
    ClassifyPolicy,
    CoefficientSpec,
    Verdict,
    alpha_L,
    alpha_total,
    capacity_per_unit_cost,
    classify,
    eval_coeff,
    parse_spec,
)
from .errors import (
    DivergentSumError,
    HeatchanError,
    NumericError,
    PreconditionError,
    ResourceLimitError,
    SpecValidationError,
)
from .harness import (
    ConcentrationReport,
    SweepConfig,
    dichotomy_demo,
    demo_rate,
    error_sweep,
    fidelity_check,
    lemma2_check,
)

__version__ = "0.1.0"
