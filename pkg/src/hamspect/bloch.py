"""Exact dynamics of a two-state system in the Bloch-vector picture.

A constant Hamiltonian ``H = h_x*sigma_x + h_y*sigma_y + h_z*sigma_z``
(hbar = 1) makes the Bloch vector precess about the axis ``d = 2*(h_x,
h_y, h_z)`` at angular rate ``omega = |d|``, following ``ds/dt = d x s``
(right-hand rule).  All functions here are closed-form, deterministic and
free of shared state; the stochastic measurement layer lives in
:mod:`hamspect.measurement`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = [
    "HamiltonianCoeffs",
    "PolarHamiltonian",
    "BlochVector",
    "Z_PLUS",
    "coeffs_to_polar",
    "polar_to_coeffs",
    "evolve_state",
    "z_expectation",
    "z_phi_expectation",
    "equator_rotation",
]

_POLE_TOL = 1e-12


def _require_finite(name: str, *values: float) -> None:
    for v in values:
        if not math.isfinite(v):
            raise DomainError(f"{name} must be finite, got {v!r}")


@dataclass(frozen=True)
class HamiltonianCoeffs:
    """Pauli coefficients of a two-state Hamiltonian (energy units, hbar = 1).

    The rotation vector is ``d = 2*(h_x, h_y, h_z)``; its direction is the
    precession axis and its magnitude the angular precession frequency.
    ``|d| = 0`` identifies the trivial Hamiltonian, which the estimation
    paths reject.
    """

    h_x: float
    h_y: float
    h_z: float

    def __post_init__(self) -> None:
        _require_finite("Hamiltonian coefficient", self.h_x, self.h_y, self.h_z)

    def d_vector(self) -> np.ndarray:
        return 2.0 * np.array([self.h_x, self.h_y, self.h_z], dtype=float)

    @property
    def omega(self) -> float:
        """Angular precession frequency ``|d|``."""
        return 2.0 * math.sqrt(self.h_x**2 + self.h_y**2 + self.h_z**2)

    def is_trivial(self, tol: float = 0.0) -> bool:
        return self.omega <= tol


@dataclass(frozen=True)
class PolarHamiltonian:
    """Spherical-angle form of the rotation vector.

    ``omega`` is the precession rate (rad per time unit), ``theta`` the polar
    angle of the axis in [0, pi] and ``phi`` its azimuth in (-pi, pi].  The
    azimuth is undefined on the poles and canonicalized to 0 there.
    """

    omega: float
    theta: float
    phi: float

    def __post_init__(self) -> None:
        _require_finite("polar parameter", self.omega, self.theta, self.phi)
        if self.omega < 0:
            raise DomainError(f"omega must be >= 0, got {self.omega}")
        if not 0.0 <= self.theta <= math.pi:
            raise DomainError(f"theta must lie in [0, pi], got {self.theta}")
        if not -math.pi < self.phi <= math.pi + _POLE_TOL:
            raise DomainError(f"phi must lie in (-pi, pi], got {self.phi}")


@dataclass(frozen=True)
class BlochVector:
    """A point in the unit ball; pure states sit on the unit sphere."""

    s_x: float
    s_y: float
    s_z: float

    def __post_init__(self) -> None:
        _require_finite("Bloch component", self.s_x, self.s_y, self.s_z)
        if self.norm > 1.0 + 1e-12:
            raise DomainError(f"Bloch vector norm {self.norm} exceeds 1")

    def as_array(self) -> np.ndarray:
        return np.array([self.s_x, self.s_y, self.s_z], dtype=float)

    @property
    def norm(self) -> float:
        return math.sqrt(self.s_x**2 + self.s_y**2 + self.s_z**2)


#: The initialization state used throughout: the +z pole.
Z_PLUS = BlochVector(0.0, 0.0, 1.0)


def coeffs_to_polar(h: HamiltonianCoeffs) -> PolarHamiltonian:
    """Convert Pauli coefficients to (omega, theta, phi).

    Total function: the trivial Hamiltonian maps to (0, 0, 0) and the
    azimuth is canonicalized to 0 when the axis hits a pole.
    """
    omega = h.omega
    if omega == 0.0:
        return PolarHamiltonian(0.0, 0.0, 0.0)
    d = h.d_vector()
    cos_theta = min(1.0, max(-1.0, d[2] / omega))
    theta = math.acos(cos_theta)
    if theta < _POLE_TOL or theta > math.pi - _POLE_TOL:
        phi = 0.0
    else:
        phi = math.atan2(d[1], d[0])
        if phi <= -math.pi:
            phi = math.pi
    return PolarHamiltonian(omega, theta, phi)


def polar_to_coeffs(p: PolarHamiltonian) -> HamiltonianCoeffs:
    """Inverse of :func:`coeffs_to_polar` away from the poles."""
    half = 0.5 * p.omega
    st = math.sin(p.theta)
    return HamiltonianCoeffs(
        half * st * math.cos(p.phi),
        half * st * math.sin(p.phi),
        half * math.cos(p.theta),
    )


def evolve_state(h: HamiltonianCoeffs, s0: BlochVector, t: float) -> BlochVector:
    """Precess ``s0`` about the axis of ``h`` for time ``t``.

    Rodrigues rotation about the unit axis ``d / |d|`` by angle ``|d| * t``,
    right-hand rule (the solution of ``ds/dt = d x s``).  Norm preserving.
    """
    _require_finite("time", t)
    d = h.d_vector()
    dmag = float(np.linalg.norm(d))
    if dmag == 0.0 or t == 0.0:
        return s0
    axis = d / dmag
    alpha = dmag * t
    s = s0.as_array()
    c, si = math.cos(alpha), math.sin(alpha)
    rotated = s * c + np.cross(axis, s) * si + axis * float(np.dot(axis, s)) * (1.0 - c)
    return BlochVector(float(rotated[0]), float(rotated[1]), float(rotated[2]))


def z_expectation(omega: float, theta: float, t: float) -> float:
    """z-projection at time ``t`` of a state initialized at the +z pole.

    ``z(t) = cos(omega*t) * sin(theta)**2 + cos(theta)**2``; equals the s_z
    component of :func:`evolve_state` from ``Z_PLUS``.
    """
    st2 = math.sin(theta) ** 2
    return math.cos(omega * t) * st2 + (1.0 - st2)


def z_phi_expectation(
    omega_k: float, theta_k: float, phi: float, beta: float, t: float
) -> float:
    """z-projection of precession started from the equator at azimuth ``beta``.

    For an axis with polar angle ``theta_k`` and azimuth ``phi``,

        ``z(t) = C*(1 - cos(omega_k*t)) - D*sin(omega_k*t)``,

    with ``C = sin(2*theta_k)*cos(phi - beta)/2`` and
    ``D = sin(theta_k)*sin(phi - beta)``.  The sign of the sine term follows
    the same rotation sense as :func:`evolve_state`; ``z(0) = 0``.
    """
    c = 0.5 * math.sin(2.0 * theta_k) * math.cos(phi - beta)
    d = math.sin(theta_k) * math.sin(phi - beta)
    a = omega_k * t
    return c * (1.0 - math.cos(a)) - d * math.sin(a)


def equator_rotation(omega_r: float, theta_r: float) -> tuple[float, float]:
    """Pulse duration and landing azimuth for the equator-rotation step.

    Precessing the pole state about an axis with polar angle ``theta_r``
    reaches the equator after time ``t_rot = arccos[(cos(2*theta_r) + 1) /
    (cos(2*theta_r) - 1)] / omega_r``, landing at azimuth ``beta``.  The
    azimuth is computed geometrically (branch-safe two-argument arctangent
    of the rotated state) rather than from a closed arctan form.

    Raises :class:`DomainError` outside ``theta_r in [pi/4, 3*pi/4]``, where
    the precession circle never reaches the equator.
    """
    _require_finite("equator rotation input", omega_r, theta_r)
    if omega_r <= 0:
        raise DomainError(f"omega_r must be positive, got {omega_r}")
    lo, hi = math.pi / 4.0, 3.0 * math.pi / 4.0
    if theta_r < lo - _POLE_TOL or theta_r > hi + _POLE_TOL:
        raise DomainError(
            f"theta_r = {theta_r} outside [pi/4, 3*pi/4]; the precession "
            "circle about this axis does not intersect the equator"
        )
    theta_r = min(max(theta_r, lo), hi)
    cos2 = math.cos(2.0 * theta_r)
    arg = (cos2 + 1.0) / (cos2 - 1.0)
    alpha = math.acos(min(1.0, max(-1.0, arg)))
    t_rot = alpha / omega_r
    # Rotated state, specialized from evolve_state with s0 = +z pole and the
    # axis in the x-z plane (the frame is defined so the reference axis has
    # zero azimuth).
    s1_x = math.cos(theta_r) / math.sin(theta_r)
    s1_y = -math.sin(theta_r) * math.sin(alpha)
    beta = math.atan2(s1_y, s1_x)
    return t_rot, beta
