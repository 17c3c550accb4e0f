"""Invert Fourier components of measurement records into physical parameters.

First axis (record taken from the +z pole): with the 1/n-normalized
spectrum of an integer-period window,

    eta       = (1 - F(0))/2 - |F(nu_p)|
    cos_theta = sqrt(F(0) / (1 - 2*eta))
    omega     = 2*pi*n_periods / t_p

Second axis (record taken from the equator state prepared about the first
axis): the constant and quadrature amplitudes follow from the corrected
peak component,

    C = -2*Re(F_c)/(1 - 2*eta),   D = +2*Im(F_c)/(1 - 2*eta),

where ``C = sin(2*theta_k)*cos(phi - beta)/2`` and ``D = sin(theta_k) *
sin(phi - beta)`` (signs fixed against the forward model in
:func:`hamspect.bloch.z_phi_expectation`).  The azimuth is then recovered
from whichever of C or D is better conditioned for the measured polar
angle.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace

import numpy as np

from .bloch import equator_rotation
from .errors import (
    BranchDomainError,
    DegenerateSignal,
    InconsistentSpectrum,
    NoPeak,
    PhaseCorrectionFailed,
)
from .measurement import MeasurementRecord
from .spectral import MppResult, Spectrum, dft, find_peak, mpp_search, noise_floor
from .uncertainty import (
    Estimate,
    delta_beta,
    delta_cd,
    delta_cos_phi,
    delta_eta,
    delta_rel_cos_from_c,
    delta_rel_cos_from_d,
    delta_sin_from_cos,
    delta_theta,
    product_estimate,
    ZERO_CHANNEL_PER_FLOOR,
)

__all__ = [
    "AxisEstimate",
    "PhaseEstimate",
    "HamiltonianEstimate",
    "estimate_axis",
    "phase_correct",
    "estimate_cd",
    "estimate_phi",
    "estimate_phase_record",
    "reconstruct_axis",
    "reconstruct_hamiltonians",
]

# Records start one grid step after the initialization instant; complex
# phases must be referenced back to t = 0 before they are interpreted.
_ORIGIN_OFFSET_SAMPLES = 1

# Polar angle separating the cosine-amplitude route from the sine-amplitude
# route when recovering the azimuth.  The tie goes to the sine route.
_BRANCH_SPLIT = 3.0 * math.pi / 8.0


@dataclass(frozen=True)
class AxisEstimate:
    """Single-axis characterization: rate, polar angle, error rate, sigmas."""

    omega: Estimate
    cos_theta: Estimate
    sin_theta: Estimate
    theta: Estimate
    eta: Estimate
    nu_p: int
    t_p: float
    delta_f: float
    flags: tuple[str, ...]
    spectrum: Spectrum
    mpp: MppResult


@dataclass(frozen=True)
class PhaseEstimate:
    """Second-axis azimuth characterization from the equatorial record."""

    c: Estimate
    d: Estimate
    chi_c: float
    beta: Estimate
    t_rot: float
    cos_rel: Estimate  # cos(phi - beta)
    sin_rel: float
    cos_phi: Estimate
    sin_phi: Estimate
    phi: float
    branch: str
    nu_p: int
    t_p: float
    delta_f: float
    flags: tuple[str, ...]
    spectrum: Spectrum | None = None
    mpp: MppResult | None = None


@dataclass(frozen=True)
class HamiltonianEstimate:
    """Reconstructed Pauli coefficients with per-component sigmas."""

    h_x: Estimate
    h_y: Estimate
    h_z: Estimate
    omega: Estimate
    theta: Estimate
    phi: float

    def d_hat(self) -> np.ndarray:
        return 2.0 * np.array([self.h_x.value, self.h_y.value, self.h_z.value])

    def d_sigma(self) -> np.ndarray:
        return 2.0 * np.array([self.h_x.sigma, self.h_y.sigma, self.h_z.sigma])


def _trimmed_spectrum(record: MeasurementRecord, mpp: MppResult) -> Spectrum:
    return dft(record.z_m[: mpp.n_samples])


def estimate_axis(record: MeasurementRecord, t_predict: float) -> AxisEstimate:
    """Characterize one axis from a pole-initialized record.

    Runs the minimum-phase-point search, trims the record, applies the
    inversion formulas and attaches propagated one-sigma uncertainties.

    Raises :class:`DegenerateSignal` when no precession line clears the
    noise floor and :class:`InconsistentSpectrum` when the components
    violate the signal model beyond three noise floors.
    """
    mpp = mpp_search(record, t_predict)
    spec = _trimmed_spectrum(record, mpp)
    try:
        nu_p = find_peak(spec)
    except NoPeak as exc:
        raise DegenerateSignal(str(exc)) from exc
    d_f = noise_floor(spec, nu_p)
    f0 = float(spec.coeffs[0].real)
    fp = float(abs(spec.coeffs[nu_p]))

    flags: list[str] = []
    eta_hat = (1.0 - f0) / 2.0 - fp
    if eta_hat < 0.0:
        flags.append("eta-clamped-to-zero")
        eta_hat = 0.0
    if eta_hat >= 0.5:
        raise InconsistentSpectrum(
            f"estimated error rate {eta_hat:.3f} >= 0.5; the record "
            "contradicts the measurement model"
        )
    u = 1.0 - 2.0 * eta_hat
    ratio = f0 / u
    eps = 3.0 * d_f + 1e-12  # absolute term absorbs pure float rounding
    if ratio < -eps or ratio > 1.0 + eps:
        raise InconsistentSpectrum(
            f"F(0)/(1-2*eta) = {ratio:.4f} outside [0, 1] by more than "
            f"three noise floors ({d_f:.2e})"
        )
    if not 0.0 <= ratio <= 1.0:
        flags.append("cos2-theta-clamped")
        ratio = min(1.0, max(0.0, ratio))
    if ratio < 1e-12:
        # below float rounding of the spectrum: the axis is equatorial
        ratio = 0.0
    a = math.sqrt(ratio)
    b = math.sqrt(max(0.0, 1.0 - ratio))
    theta = math.acos(min(1.0, a))

    d_eta = delta_eta(d_f)
    d_a, d_theta = delta_theta(f0, eta_hat, d_f, d_eta)
    if math.isinf(d_theta):
        flags.append("polar-angle-singular")
    # The sine sigma comes from direct propagation of B = sqrt(1 - F0/u),
    # which stays finite at A -> 0 where the pair relation degenerates.
    sigma_ratio = math.hypot(
        ZERO_CHANNEL_PER_FLOOR * d_f / u, 2.0 * ratio * d_eta / u
    )
    d_b = sigma_ratio / (2.0 * b) if b > 1e-6 else d_a
    omega_hat = 2.0 * math.pi * nu_p / mpp.t_p
    return AxisEstimate(
        omega=Estimate(omega_hat, mpp.delta_omega),
        cos_theta=Estimate(a, d_a),
        sin_theta=Estimate(b, d_b),
        theta=Estimate(theta, d_theta),
        eta=Estimate(eta_hat, d_eta),
        nu_p=nu_p,
        t_p=mpp.t_p,
        delta_f=d_f,
        flags=tuple(flags),
        spectrum=spec,
        mpp=mpp,
    )


def phase_correct(f0: float, f_p: complex, delta_f: float = 0.0) -> complex:
    """Correct the complex phase of the peak component.

    An imperfect integer-period truncation rotates the complex phase of the
    peak while barely touching its magnitude or the zero channel.  The
    corrected phase chi_c is defined so that the constant term and the
    negative cosine amplitude of the reconstructed signal are equal:
    ``cos(chi_c) = -F(0) / (2*|F(nu_p)|)``, with the sign of the sine part
    taken from the measured imaginary part.

    Raises :class:`PhaseCorrectionFailed` when the cosine argument exceeds
    1 in magnitude by more than ``3*delta_f / (2*|F(nu_p)|)``; inside that
    band it is clamped.
    """
    mag = abs(f_p)
    if mag == 0.0:
        raise PhaseCorrectionFailed("peak component has zero magnitude")
    x = -f0 / (2.0 * mag)
    band = 3.0 * delta_f / (2.0 * mag)
    if abs(x) > 1.0 + band:
        raise PhaseCorrectionFailed(
            f"phase-correction cosine argument {x:.4f} exceeds 1 beyond the "
            f"noise allowance {band:.2e}"
        )
    x = min(1.0, max(-1.0, x))
    chi = math.acos(x)
    sign = 1.0 if f_p.imag >= 0.0 else -1.0
    return mag * complex(math.cos(chi), sign * math.sin(chi))


def estimate_cd(
    f_c: complex, eta: Estimate, delta_f: float
) -> tuple[Estimate, Estimate, tuple[str, ...]]:
    """Constant and quadrature amplitudes from the corrected peak component.

    ``C = -2*Re(F_c)/(1-2*eta)`` and ``D = +2*Im(F_c)/(1-2*eta)``, using the
    error rate determined by the earlier axis characterizations.  Values
    are clamped to their geometric ranges (|C| <= 1/2, |D| <= 1).
    """
    u = 1.0 - 2.0 * eta.value
    c = -2.0 * f_c.real / u
    d = 2.0 * f_c.imag / u
    flags: list[str] = []
    if abs(c) > 0.5:
        flags.append("c-clamped")
        c = math.copysign(0.5, c)
    if abs(d) > 1.0:
        flags.append("d-clamped")
        d = math.copysign(1.0, d)
    d_c, d_d = delta_cd(c, d, eta.value, delta_f, eta.sigma)
    return Estimate(c, d_c), Estimate(d, d_d), tuple(flags)


def _sign_with_ambiguity(est: Estimate, name: str, flags: list[str]) -> float:
    if abs(est.value) < est.sigma:
        flags.append(f"{name}-sign-ambiguous")
        return 1.0
    return 1.0 if est.value >= 0.0 else -1.0


def estimate_phi(
    c: Estimate, d: Estimate, axis_k: AxisEstimate, beta: Estimate
) -> PhaseEstimate:
    """Recover the azimuth of the second axis relative to the first.

    For ``theta_k`` above 3*pi/8 the cosine route is better conditioned:
    ``cos(phi-beta) = C/(A_theta*B_theta)`` with the sine sign taken from D.
    Below (and at) the split the sine route is used:
    ``sin(phi-beta) = D/B_theta`` with the cosine sign taken from C.  Then
    ``cos(phi) = A_beta*A_rel - B_beta*B_rel`` and the reported angle is
    ``atan2(sin(phi-beta), cos(phi-beta)) + beta`` wrapped into (-pi, pi].

    Raises :class:`BranchDomainError` when the branch ratio exceeds 1 in
    magnitude by more than three of its own sigmas; inside that band it is
    clamped.
    """
    flags: list[str] = []
    a_t, d_a_t = axis_k.cos_theta.value, axis_k.cos_theta.sigma
    b_t, d_b_t = axis_k.sin_theta.value, axis_k.sin_theta.sigma
    theta_k = axis_k.theta.value

    # A route is usable when its denominator is nonzero and its own one
    # sigma does not span the whole [-1, 1] range.
    den_c = a_t * b_t
    c_sigma_rel = (
        delta_rel_cos_from_c(c.value, c.sigma, a_t, d_a_t, b_t, d_b_t)
        if abs(den_c) > 1e-12
        else math.inf
    )
    c_usable = c_sigma_rel < 1.0
    d_sigma_ratio = (
        math.sqrt((d.sigma / b_t) ** 2 + (d.value * d_b_t / b_t**2) ** 2)
        if abs(b_t) > 1e-12
        else math.inf
    )
    d_usable = d_sigma_ratio < 1.0

    branch = "C" if theta_k > _BRANCH_SPLIT else "D"
    if branch == "C" and not c_usable:
        if not d_usable:
            raise BranchDomainError("both azimuth routes are uninformative")
        branch = "D"
        flags.append("branch-fallback")
    elif branch == "D" and not d_usable:
        if not c_usable:
            raise BranchDomainError("both azimuth routes are uninformative")
        branch = "C"
        flags.append("branch-fallback")

    if branch == "C":
        ratio = c.value / den_c
        d_rel = c_sigma_rel
        if abs(ratio) > 1.0 + 3.0 * d_rel:
            raise BranchDomainError(
                f"cos(phi-beta) ratio {ratio:.4f} exceeds 1 beyond 3 sigma"
            )
        if abs(ratio) > 1.0:
            flags.append("rel-cos-clamped")
            ratio = math.copysign(1.0, ratio)
        a_rel = ratio
        sign_b = _sign_with_ambiguity(d, "sine", flags)
        b_rel = sign_b * math.sqrt(max(0.0, 1.0 - a_rel**2))
    else:
        ratio = d.value / b_t
        if abs(ratio) > 1.0 + 3.0 * d_sigma_ratio:
            raise BranchDomainError(
                f"sin(phi-beta) ratio {ratio:.4f} exceeds 1 beyond 3 sigma"
            )
        if abs(ratio) > 1.0:
            flags.append("rel-sin-clamped")
            ratio = math.copysign(1.0, ratio)
        b_rel = ratio
        sign_a = _sign_with_ambiguity(c, "cosine", flags)
        a_rel = sign_a * math.sqrt(max(0.0, 1.0 - b_rel**2))
        d_rel = delta_rel_cos_from_d(a_rel, d.value, d.sigma, b_t, d_b_t)

    a_beta = math.cos(beta.value)
    b_beta = math.sin(beta.value)
    d_a_beta = abs(b_beta) * beta.sigma

    a_phi = a_beta * a_rel - b_beta * b_rel
    b_phi = b_beta * a_rel + a_beta * b_rel
    d_a_phi = delta_cos_phi(a_beta, d_a_beta, b_beta, a_rel, d_rel, b_rel)
    if math.isinf(d_a_phi):
        flags.append("azimuth-geometry-singular")
    d_b_phi = delta_sin_from_cos(a_phi, d_a_phi, b_phi) if math.isfinite(d_a_phi) else math.inf

    phi = math.atan2(b_rel, a_rel) + beta.value
    if phi > math.pi:
        phi -= 2.0 * math.pi
    elif phi <= -math.pi:
        phi += 2.0 * math.pi

    return PhaseEstimate(
        c=c,
        d=d,
        chi_c=math.nan,
        beta=beta,
        t_rot=math.nan,
        cos_rel=Estimate(a_rel, d_rel),
        sin_rel=b_rel,
        cos_phi=Estimate(a_phi, d_a_phi),
        sin_phi=Estimate(b_phi, d_b_phi),
        phi=phi,
        branch=branch,
        nu_p=0,
        t_p=math.nan,
        delta_f=math.nan,
        flags=tuple(flags),
    )


def estimate_phase_record(
    record: MeasurementRecord,
    axis_r: AxisEstimate,
    axis_k: AxisEstimate,
    t_predict: float | None = None,
) -> PhaseEstimate:
    """Full azimuth estimation from an equatorial record.

    The search window defaults to 1.05 estimated periods of the second
    axis.  The measurement-error rate comes from the reference-axis
    characterization.
    """
    if t_predict is None:
        t_predict = 1.05 * 2.0 * math.pi / axis_k.omega.value
    mpp = mpp_search(record, t_predict)
    spec = _trimmed_spectrum(record, mpp)
    try:
        nu_p = find_peak(spec)
    except NoPeak as exc:
        raise DegenerateSignal(str(exc)) from exc
    d_f = noise_floor(spec, nu_p)
    f0 = float(spec.coeffs[0].real)
    # Reference the complex phase to the initialization instant (the first
    # sample sits one grid step after it).
    shift = cmath.exp(-2j * math.pi * nu_p * _ORIGIN_OFFSET_SAMPLES / spec.n)
    f_p = complex(spec.coeffs[nu_p]) * shift

    f_c = phase_correct(f0, f_p, d_f)
    c, d, cd_flags = estimate_cd(f_c, axis_r.eta, d_f)
    t_rot, beta_val = equator_rotation(axis_r.omega.value, axis_r.theta.value)
    beta = Estimate(beta_val, axis_r.theta.sigma)
    pe = estimate_phi(c, d, axis_k, beta)
    return replace(
        pe,
        chi_c=cmath.phase(f_c),
        t_rot=t_rot,
        nu_p=nu_p,
        t_p=mpp.t_p,
        delta_f=d_f,
        flags=pe.flags + cd_flags,
        spectrum=spec,
        mpp=mpp,
    )


def reconstruct_axis(axis: AxisEstimate) -> HamiltonianEstimate:
    """Reconstruct an in-plane (zero-azimuth) Hamiltonian from one axis.

    H = (omega/2) * (sin(theta) sx + cos(theta) sz); component sigmas are
    quadrature sums over the independent factors.
    """
    return HamiltonianEstimate(
        h_x=product_estimate(0.5, axis.omega, axis.sin_theta),
        h_y=Estimate(0.0, 0.0),
        h_z=product_estimate(0.5, axis.omega, axis.cos_theta),
        omega=axis.omega,
        theta=axis.theta,
        phi=0.0,
    )


def reconstruct_hamiltonians(
    axis_r: AxisEstimate, axis_k: AxisEstimate, phase: PhaseEstimate
) -> tuple[HamiltonianEstimate, HamiltonianEstimate]:
    """Assemble both Hamiltonian estimates with per-component sigmas.

    H_r = (omega_r/2) * (sin(theta_r) sx + cos(theta_r) sz)
    H_k = (omega_k/2) * (sin(theta_k)cos(phi) sx
                         + sin(theta_k)sin(phi) sy + cos(theta_k) sz)

    Component sigmas follow from quadrature over the independent factors
    (rate, angle cosines/sines, azimuth cosine/sine).
    """
    h_r = reconstruct_axis(axis_r)
    h_k = HamiltonianEstimate(
        h_x=product_estimate(0.5, axis_k.omega, axis_k.sin_theta, phase.cos_phi),
        h_y=product_estimate(0.5, axis_k.omega, axis_k.sin_theta, phase.sin_phi),
        h_z=product_estimate(0.5, axis_k.omega, axis_k.cos_theta),
        omega=axis_k.omega,
        theta=axis_k.theta,
        phi=phase.phi,
    )
    return h_r, h_k
