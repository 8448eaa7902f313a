"""Exact information-loss analysis for finite-alphabet causal systems.

A deterministic system with finite input and output memory maps a random
input sequence to an output sequence; whatever entropy rate the output
gives up relative to the input is unrecoverable.  This package computes
that loss exactly for small systems (certified two-sided brackets),
bounds it combinatorially from the update table, decides when it is zero,
reconstructs inputs when it is, and covers the classical special cases:
linear filters over residue rings, fixed-point filter realizations,
memoryless nonlinearities, cascades, and real-coefficient filters via
their log-gain average.
"""

from .alphabet import Alphabet, Ring, mod_ring, plain_alphabet
from .config import ANALYSIS_KINDS, ExperimentConfig, load_config, parse_config
from .entropy import (
    JointChain,
    LossReport,
    PluginEstimate,
    RateBracket,
    build_joint_chain,
    determinism_identity,
    exact_block_entropy,
    finite_length_loss,
    loss_rate_report,
    output_rate_bracket,
    plugin_estimate,
)
from .errors import (
    AnalysisUnsupportedError,
    InconsistentObservationError,
    IndeterminateError,
    NumericError,
    ResourceLimitError,
    ValidationError,
)
from .filters import (
    TransferFunction,
    is_minimum_phase,
    random_stable_filter,
    rate_change_integral,
    rate_change_roots,
)
from .reconstruct import (
    PartialInverse,
    StagedInverse,
    multiplier_closed_form,
    reconstruct,
    reconstruct_candidates,
)
from .sources import (
    MarkovSource,
    make_iid,
    make_markov,
    marginal_entropy,
    random_source,
    sample_path,
    source_entropy_rate,
    stationary_distribution,
)
from .systems import (
    CascadeSystem,
    InvertibilityVerdict,
    OpaqueSystem,
    System,
    SystemState,
    TableSystem,
    cascade,
    check_partial_invertibility,
    identity_system,
    inverse_table,
    preimage_bound,
    random_invertible_system,
    random_table_system,
    simulate,
    static_system,
)
from .zoo import (
    FilterCoeffs,
    Quantizer,
    accumulator_domain,
    fixed_point_filter,
    hammerstein_system,
    multiplier_system,
    rational_filter_inverse,
    rational_linear_filter,
    ring_linear_filter,
    squarer,
    table_quantizer,
    truncating_quantizer,
    xor_filter,
)

__version__ = "0.1.0"

__all__ = [
    "ANALYSIS_KINDS",
    "Alphabet",
    "AnalysisUnsupportedError",
    "CascadeSystem",
    "ExperimentConfig",
    "FilterCoeffs",
    "InconsistentObservationError",
    "IndeterminateError",
    "InvertibilityVerdict",
    "JointChain",
    "LossReport",
    "MarkovSource",
    "NumericError",
    "OpaqueSystem",
    "PartialInverse",
    "PluginEstimate",
    "Quantizer",
    "RateBracket",
    "ResourceLimitError",
    "Ring",
    "StagedInverse",
    "System",
    "SystemState",
    "TableSystem",
    "TransferFunction",
    "ValidationError",
    "accumulator_domain",
    "build_joint_chain",
    "cascade",
    "check_partial_invertibility",
    "determinism_identity",
    "exact_block_entropy",
    "finite_length_loss",
    "fixed_point_filter",
    "hammerstein_system",
    "identity_system",
    "inverse_table",
    "is_minimum_phase",
    "load_config",
    "loss_rate_report",
    "make_iid",
    "make_markov",
    "marginal_entropy",
    "mod_ring",
    "multiplier_closed_form",
    "multiplier_system",
    "output_rate_bracket",
    "parse_config",
    "plain_alphabet",
    "plugin_estimate",
    "preimage_bound",
    "random_invertible_system",
    "random_source",
    "random_stable_filter",
    "random_table_system",
    "rate_change_integral",
    "rate_change_roots",
    "rational_filter_inverse",
    "rational_linear_filter",
    "reconstruct",
    "reconstruct_candidates",
    "ring_linear_filter",
    "sample_path",
    "simulate",
    "source_entropy_rate",
    "squarer",
    "static_system",
    "stationary_distribution",
    "table_quantizer",
    "truncating_quantizer",
    "xor_filter",
]
