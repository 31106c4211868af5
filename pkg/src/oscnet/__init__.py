"""oscnet: reconstruct oscillator-network states through a single qubit probe.

Simulation toolkit for the reconstruction protocol of harmonically
coupled oscillator networks probed by one tunable qubit: normal-mode
decomposition, coupling-pulse synthesis, qubit-readout simulation with
finite statistics, closed-form decoherence damping, and white-noise
resolution limits.
"""

from .analysis import (
    BochnerReport,
    ChiSample,
    MomentFit,
    TemperatureFit,
    bochner_check,
    estimate_temperature,
    fit_moments,
    lattice_grid,
    star_grid,
)
from .chain import ChainSpec, chain_G, chain_decomposition, chain_spectrum
from .decoherence import (
    DecoherenceSpec,
    brute_force_lindblad,
    correct_signal,
    damping_factor,
    eta_from_profile,
    kappa_from_spectral_density,
    measured_signal,
    mu_k,
    validity_horizon,
)
from .dynamics import (
    FockState,
    GaussianState,
    MeasurementRecord,
    brute_force_evolve,
    chi_fock,
    chi_gaussian,
    coherent_state,
    fock_cat,
    fock_coherent,
    fock_thermal_dm,
    ideal_measurement,
    reduced_chi,
    sample_shots,
    squeezed_state,
    thermal_chi,
    thermal_occupation,
    thermal_state,
    two_mode_squeezed_state,
    vacuum_state,
)
from .errors import (
    AssumptionViolation,
    ConfigError,
    DegenerateSpectrum,
    IllConditioned,
    InsufficientClosure,
    NearDegenerateWarning,
    NonPhysicalChi,
    OscnetError,
    OverAmplifiedWarning,
    RankDeficient,
    TruncationLeak,
    UnstableChain,
    UnstableNetwork,
)
from .network import (
    AssumptionReport,
    NetworkSpec,
    NormalModeDecomposition,
    SymplecticResiduals,
    build_quadratic_form,
    check_assumptions,
    diagonal_form_residual,
    diagonalize,
    local_normal_convert,
    verify_symplectic,
)
from .noise import (
    MonteCarloResult,
    NoiseSpec,
    delta_beta_covariance,
    monte_carlo_delta_beta,
    resolution_spectrum,
)
from .protocol import (
    CouplingProfile,
    MMatrix,
    beta_from_profile,
    build_M,
    evaluate_g,
    g_max,
    min_interaction_time,
    synthesize_profile,
)

__version__ = "0.1.0"
