"""Two-state Hamiltonian identification from single-basis measurement records.

The pipeline: simulate (or load) a record of repeated initialize-evolve-
measure cycles, locate the precession line in its discrete Fourier spectrum,
trim the record to an integer number of periods, invert the Fourier
components into physical parameters (precession rate, axis angles,
measurement-error rate) and propagate the spectral noise floor into
one-sigma uncertainties on everything, including the reconstructed
Hamiltonian coefficients.
"""

from .bloch import (
    BlochVector,
    HamiltonianCoeffs,
    PolarHamiltonian,
    Z_PLUS,
    coeffs_to_polar,
    equator_rotation,
    evolve_state,
    polar_to_coeffs,
    z_expectation,
    z_phi_expectation,
)
from .errors import (
    AliasingSuspected,
    BranchDomainError,
    ConfigError,
    DegenerateSignal,
    DomainError,
    EstimationError,
    FitFailed,
    HamspectError,
    InconsistentSpectrum,
    NoPeak,
    PhaseCorrectionFailed,
    SpectralError,
)
from .measurement import (
    MeasurementRecord,
    SamplingConfig,
    analytic_phase_record,
    analytic_record,
    load_record,
    run_phase_series,
    run_time_series,
    sample_shot,
    save_record,
)
from .spectral import MppResult, Spectrum, dft, find_peak, mpp_search, noise_floor
from .estimator import (
    AxisEstimate,
    HamiltonianEstimate,
    PhaseEstimate,
    estimate_axis,
    estimate_cd,
    estimate_phase_record,
    estimate_phi,
    phase_correct,
    reconstruct_hamiltonians,
)
from .uncertainty import (
    DistanceReport,
    Estimate,
    delta_beta,
    delta_cd,
    delta_eta,
    delta_theta,
    distance_metrics,
    propagate_variance,
)

__version__ = "0.1.0"
