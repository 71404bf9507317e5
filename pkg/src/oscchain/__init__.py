"""Infinite harmonic chains driven at one site by a stationary random force.

The chain obeys q_j'' = -sum_k a(k - j) q_k + f(t) delta_{j n}. The package
computes the dispersion symbol, stationary covariances and energy
constants of the limiting process, and simulates truncated chains to check
them by Monte Carlo.
"""
from ._accel import HAVE_NUMBA, backend_name
from .errors import (
    BoundaryUnsupported,
    ChainError,
    ConfigError,
    DegenerateSupport,
    DegenerateVariance,
    DegenerateWindow,
    EmptyMeasure,
    GapViolation,
    InsideSpectrum,
    MismatchedRuns,
    NotPositiveDefinite,
    NumericalGuard,
    PositivityViolation,
    RepeatedRoot,
    Resonance,
    RootOnCircle,
    TooFew,
    TooSmall,
    ValidationError,
)
from .force import (
    EnsembleForcing,
    ForceRealization,
    GapReport,
    Panel,
    SpectralMeasure,
    check_gap,
    covariance_B,
    synthesize,
    synthesize_batch,
)
from .lattice import (
    InteractionKernel,
    SpectralSet,
    SymbolPolynomial,
    omega_squared,
    spectral_set,
    symbol_polynomial,
    truncated_V,
)
from .propagator import (
    ChainState,
    PropagatorBlocks,
    SpectralCalculus,
    duhamel_forced,
    expm_taylor,
    generator_matrix,
    kernel_bound,
    propagator_blocks,
)
from .simulator import (
    EnergyTrace,
    SimConfig,
    Trajectory,
    decompose_epsilon,
    energy_trace,
    simulate,
    simulate_ensemble,
    stationary_trajectory,
)
from .stationary import (
    StationaryCovariance,
    energy_limit_alpha,
    h_k_quadrature,
    h_k_residue,
    inner_root_radius,
    resolvent_action,
    stationary_covariance,
    stationary_mode_solution,
    transient_mean_energy,
    variance_decay_fit,
)
from .stats import EnsembleSummary, ensemble_mean, ks_distance, sqrt_t_decay_statistic, variance_profile

__version__ = "0.1.0"
