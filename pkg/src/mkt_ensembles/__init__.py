"""Tridiagonal beta ensembles at high temperature (beta = 2c/N): samplers,
Markov-Krein moment transforms, limiting moment flows with their companion
flows, interacting-particle SDE simulation, and verification harnesses.
"""
from .ensembles import EnsembleSpec, build_ensemble, build_gaussian, build_jacobi, build_laguerre
from .errors import CapabilityError, DomainError, NumericalError, ParameterError
from .flows import (
    FLOW_N_MAX,
    FlowMktReport,
    FlowSpec,
    companion_flow,
    flow_mkt_check,
    gaussian_envelope_constant,
    gaussian_flow,
    growth_envelope_check,
    jacobi_flow,
    laguerre_flow,
    model_flow,
)
from .measures import (
    AtomicMeasure,
    MomentSequence,
    empirical_measure,
    gen_stieltjes,
    hankel_min_det,
    log_potential,
    moments_of_measure,
)
from .mkt import (
    GrowthBoundReport,
    c_convolve,
    convolve_moments,
    growth_bound_fit,
    growth_constant,
    imkt_exact,
    imkt_moments,
    mkt_exact,
    mkt_moments,
    mkt_moments_closed,
    pochhammer,
    reference_moments,
    series_pair_check,
)
from .rng import (
    DEFAULT_SEED,
    RandomStream,
    sample_beta,
    sample_chi_tilde_sq,
    sample_dirichlet,
    sample_dirichlet_symmetric,
    sample_gamma,
    sample_normal,
)
from .sde import (
    CompanionEstimate,
    MomentEstimate,
    ParticlePath,
    ScalingSpec,
    SimConfig,
    empirical_moment_paths,
    replicate_moments,
    simulate_companion,
    simulate_dyson,
    simulate_jacobi,
    simulate_laguerre,
    simulate_local_scaling,
)
from .tridiagonal import TridiagonalMatrix, spectral_measure, tridiag_eigen
from .verify import (
    regime_scaling,
    verify_flow_mkt,
    verify_local_scaling,
    verify_theorem1,
)

__version__ = "0.1.0"

__all__ = [
    "AtomicMeasure",
    "CapabilityError",
    "CompanionEstimate",
    "DEFAULT_SEED",
    "DomainError",
    "EnsembleSpec",
    "FLOW_N_MAX",
    "FlowMktReport",
    "FlowSpec",
    "GrowthBoundReport",
    "MomentEstimate",
    "MomentSequence",
    "NumericalError",
    "ParameterError",
    "ParticlePath",
    "RandomStream",
    "ScalingSpec",
    "SimConfig",
    "TridiagonalMatrix",
    "build_ensemble",
    "build_gaussian",
    "build_jacobi",
    "build_laguerre",
    "c_convolve",
    "companion_flow",
    "convolve_moments",
    "empirical_measure",
    "empirical_moment_paths",
    "flow_mkt_check",
    "gaussian_envelope_constant",
    "gaussian_flow",
    "gen_stieltjes",
    "growth_bound_fit",
    "growth_constant",
    "growth_envelope_check",
    "hankel_min_det",
    "imkt_exact",
    "imkt_moments",
    "jacobi_flow",
    "laguerre_flow",
    "log_potential",
    "mkt_exact",
    "mkt_moments",
    "mkt_moments_closed",
    "model_flow",
    "moments_of_measure",
    "pochhammer",
    "reference_moments",
    "regime_scaling",
    "replicate_moments",
    "sample_beta",
    "sample_chi_tilde_sq",
    "sample_dirichlet",
    "sample_dirichlet_symmetric",
    "sample_gamma",
    "sample_normal",
    "series_pair_check",
    "simulate_companion",
    "simulate_dyson",
    "simulate_jacobi",
    "simulate_laguerre",
    "simulate_local_scaling",
    "spectral_measure",
    "tridiag_eigen",
    "verify_flow_mkt",
    "verify_local_scaling",
    "verify_theorem1",
]
