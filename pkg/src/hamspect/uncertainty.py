"""First-order error propagation for every estimated quantity.

Conventions used throughout:

* ``delta_f`` is the spectral noise floor (standard deviation of the
  off-signal channel magnitudes); it stands in for the one-sigma error of
  the zero-channel and peak-channel magnitudes.
* The zero channel and the peak channel share the same white-noise floor,
  so their errors are treated as correlated with covariance ``delta_f**2``;
  the cross term enters the cosine-of-polar-angle formula with its
  magnitude (adverse sign), which keeps that bound conservative.
* For a sine/cosine pair of the same angle, ``A*dA = B*dB`` converts one
  sigma into the other.  At ``B = 0`` the conversion degenerates and the
  cosine sigma is reused unchanged (conservative).
* Singular geometries yield an infinite sigma instead of raising, so batch
  Monte Carlo runs complete and report which trials degenerated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError

__all__ = [
    "Estimate",
    "DistanceReport",
    "QUADRATURE_PER_FLOOR",
    "ZERO_CHANNEL_PER_FLOOR",
    "propagate_variance",
    "delta_eta",
    "delta_theta",
    "delta_beta",
    "delta_cd",
    "delta_sin_from_cos",
    "delta_rel_cos_from_c",
    "delta_rel_cos_from_d",
    "delta_cos_phi",
    "product_estimate",
    "distance_metrics",
]

_SINGULAR_B = 1e-6
_SINGULAR_A = 1e-9

# The noise floor is the standard deviation of channel *magnitudes*.  For
# complex Gaussian channel noise with per-quadrature sigma s, the magnitude
# is Rayleigh-distributed with SD = s*sqrt((4-pi)/2), and the zero channel
# is real with variance 2*s**2.  These constants convert the measured floor
# into the component sigmas the propagation formulas actually need.
QUADRATURE_PER_FLOOR = math.sqrt(2.0 / (4.0 - math.pi))
ZERO_CHANNEL_PER_FLOOR = math.sqrt(2.0) * QUADRATURE_PER_FLOOR


@dataclass(frozen=True)
class Estimate:
    """A value paired with its one-sigma propagated uncertainty."""

    value: float
    sigma: float

    def __post_init__(self) -> None:
        if math.isnan(self.value) or math.isnan(self.sigma):
            raise DomainError("estimate fields must not be NaN")
        if self.sigma < 0:
            raise DomainError(f"sigma must be >= 0, got {self.sigma}")


@dataclass(frozen=True)
class DistanceReport:
    """Relative distance between true and estimated rotation vectors."""

    dist: float
    delta_dist: float


def propagate_variance(
    partials: Sequence[tuple[float, float]],
    cov_terms: Sequence[tuple[float, float, float]] = (),
) -> float:
    """Generic first-order variance.

    ``partials`` is a sequence of ``(df/dx_i, var_i)`` pairs; ``cov_terms``
    adds ``2 * d1 * d2 * cov`` contributions for correlated input pairs.
    """
    var = 0.0
    for deriv, v in partials:
        if v < 0:
            raise DomainError("variances must be >= 0")
        var += deriv * deriv * v
    for d1, d2, cov in cov_terms:
        var += 2.0 * d1 * d2 * cov
    return var


def delta_eta(delta_f: float) -> float:
    """Sigma of the measurement-error estimate: ``1.5 * delta_f``.

    This is the propagation of ``eta = (1 - F0)/2 - Fp`` with unit-floor
    variances on both channels and covariance ``delta_f**2`` between them.
    """
    if delta_f < 0:
        raise DomainError("delta_f must be >= 0")
    return 1.5 * delta_f


def delta_theta(
    f0: float, eta: float, delta_f: float, delta_eta_: float
) -> tuple[float, float]:
    """Sigmas of ``A = cos(theta) = sqrt(F0/(1-2*eta))`` and of ``theta``.

    dA**2 = [F0/(1-2*eta)] * [(k0*dF/(2*F0))**2 + (d_eta/(1-2*eta))**2]
            + |(1 - 2*eta - F0)/(1-2*eta)**3| * dF**2

    with ``k0 = ZERO_CHANNEL_PER_FLOOR`` converting the magnitude floor to
    the zero-channel sigma (the dominant route when F0 is small).  The
    first bracket is the partial-derivative propagation in (F0, eta); the
    last term is the zero-channel/peak-channel covariance cross term taken
    with adverse sign.  ``d_theta = dA / sqrt(1 - A**2)``, reported as
    infinity when A -> 1 (the polar angle becomes unresolvable).
    """
    if delta_f < 0 or delta_eta_ < 0:
        raise DomainError("sigmas must be >= 0")
    if delta_f == 0.0 and delta_eta_ == 0.0:
        return 0.0, 0.0
    u = 1.0 - 2.0 * eta
    if u <= 0:
        raise DomainError("eta must be < 0.5")
    sigma_f0 = ZERO_CHANNEL_PER_FLOOR * delta_f
    # The formula diverges as F0 -> 0 (square-root kink of the estimator);
    # flooring F0 at half the zero-channel noise keeps the sigma finite and
    # representative of the actual estimator spread at the boundary.
    f0 = max(f0, sigma_f0 / 2.0)
    if f0 <= 0.0:
        return math.inf, math.inf
    a_sq = f0 / u
    d_a_sq = a_sq * ((sigma_f0 / (2.0 * f0)) ** 2 + (delta_eta_ / u) ** 2)
    d_a_sq += abs((u - f0) / u**3) * delta_f**2
    d_a = math.sqrt(d_a_sq)
    if a_sq >= (1.0 - _SINGULAR_A) ** 2:
        return d_a, math.inf
    d_theta = d_a / math.sqrt(1.0 - a_sq)
    return d_a, d_theta


def delta_beta(beta: float, theta_r: float, delta_a_theta_r: float) -> float:
    """Sigma of ``cos(beta)`` inherited from the reference-axis angle.

    The equator-rotation pulse is only as accurate as the axis behind it;
    with ``d_beta ~ d_theta_r`` this gives
    ``dA_beta = (|sin(beta)| / sin(theta_r)) * dA_theta_r``.
    """
    b_theta = math.sin(theta_r)
    if b_theta <= 0:
        raise DomainError("sin(theta_r) must be positive")
    if delta_a_theta_r < 0:
        raise DomainError("sigmas must be >= 0")
    return abs(math.sin(beta)) / b_theta * delta_a_theta_r


def delta_cd(
    c: float, d: float, eta: float, delta_f: float, delta_eta_: float
) -> tuple[float, float]:
    """Sigmas of the constant/sine amplitudes of the equatorial signal.

    After phase correction the constant amplitude is carried by the zero
    channel and the quadrature amplitude by the peak-channel magnitude, so

    dC**2 = (k0/(1-2*eta))**2 dF**2 + (2C/(1-2*eta))**2 d_eta**2
    dD**2 = (2*kq/(1-2*eta))**2 dF**2 + (2D/(1-2*eta))**2 d_eta**2

    with ``k0 = ZERO_CHANNEL_PER_FLOOR`` and ``kq = QUADRATURE_PER_FLOOR``.
    Covariance between the two channel inputs is ignored; the error-rate
    term is kept because both amplitudes share the same 1/(1-2*eta) gain.
    """
    if delta_f < 0 or delta_eta_ < 0:
        raise DomainError("sigmas must be >= 0")
    u = 1.0 - 2.0 * eta
    if u <= 0:
        raise DomainError("eta must be < 0.5")
    d_c = math.sqrt(
        (ZERO_CHANNEL_PER_FLOOR / u) ** 2 * delta_f**2
        + (2.0 * c / u) ** 2 * delta_eta_**2
    )
    d_d = math.sqrt(
        (2.0 * QUADRATURE_PER_FLOOR / u) ** 2 * delta_f**2
        + (2.0 * d / u) ** 2 * delta_eta_**2
    )
    return d_c, d_d


def delta_sin_from_cos(a: float, delta_a: float, b: float) -> float:
    """Convert a cosine sigma to the paired sine sigma via ``A*dA = B*dB``.

    Degenerates at ``B = 0``; the cosine sigma is returned unchanged there
    (conservative).
    """
    if abs(b) < _SINGULAR_B:
        return delta_a
    return abs(a) * delta_a / abs(b)


def delta_rel_cos_from_c(
    c: float,
    delta_c: float,
    a_theta: float,
    delta_a_theta: float,
    b_theta: float,
    delta_b_theta: float,
) -> float:
    """Sigma of ``cos(phi - beta) = C / (A_theta * B_theta)`` (cosine route).

    Relative quadrature of the three factors, written so the ``C -> 0``
    limit stays finite:
    ``dA**2 = (dC/(A_t*B_t))**2 + A**2 * ((dA_t/A_t)**2 + (dB_t/B_t)**2)``.
    """
    den = a_theta * b_theta
    if abs(den) < _SINGULAR_B:
        return math.inf
    ratio = c / den
    var = (delta_c / den) ** 2
    var += ratio**2 * ((delta_a_theta / a_theta) ** 2 + (delta_b_theta / b_theta) ** 2)
    return math.sqrt(var)


def delta_rel_cos_from_d(
    a_rel: float,
    d: float,
    delta_d: float,
    b_theta: float,
    delta_b_theta: float,
) -> float:
    """Sigma of ``cos(phi - beta)`` from the sine route ``D / B_theta``.

    ``dA**2 = A**2 * ((dD/D)**2 + (dB_t/B_t)**2)``; infinite when the sine
    amplitude vanishes (the route carries no cosine information there).
    """
    if d == 0.0 or abs(b_theta) < _SINGULAR_B:
        return math.inf
    rel = (delta_d / d) ** 2 + (delta_b_theta / b_theta) ** 2
    return abs(a_rel) * math.sqrt(rel)


def delta_cos_phi(
    a_beta: float,
    delta_a_beta: float,
    b_beta: float,
    a_rel: float,
    delta_a_rel: float,
    b_rel: float,
) -> float:
    """Sigma of ``cos(phi) = A_beta*A_rel - B_beta*B_rel``.

    The four factors are treated as independent error channels, with the
    sine sigmas tied to the cosine sigmas through ``A*dA = B*dB``:

    ``dA_phi**2 = (A_rel**2 + B_rel**2*A_beta**2/B_beta**2) * dA_beta**2
                + (A_beta**2 + B_beta**2*A_rel**2/B_rel**2) * dA_rel**2``

    Returns infinity when either sine factor is (numerically) zero: the
    pair conversion degenerates and the geometry pins no azimuth.
    """
    if abs(b_beta) < _SINGULAR_B or abs(b_rel) < _SINGULAR_B:
        return math.inf
    var = (a_rel**2 + (b_rel * a_beta / b_beta) ** 2) * delta_a_beta**2
    var += (a_beta**2 + (b_beta * a_rel / b_rel) ** 2) * delta_a_rel**2
    return math.sqrt(var)


def product_estimate(scale: float, *factors: Estimate) -> Estimate:
    """Product of independent estimates times a constant scale.

    The sigma is the quadrature sum of single-factor contributions,
    ``sigma**2 = sum_i (scale * sigma_i * prod_{j != i} v_j)**2``, which
    reduces to the usual relative-quadrature form when every factor is
    nonzero and stays defined when one vanishes.
    """
    values = [f.value for f in factors]
    value = scale * math.prod(values)
    var = 0.0
    for i, f in enumerate(factors):
        others = math.prod(values[:i] + values[i + 1 :])
        var += (scale * f.sigma * others) ** 2
    return Estimate(value, math.sqrt(var))


def distance_metrics(
    d_true: Iterable[float], d_hat: Iterable[float], delta_d: Iterable[float]
) -> DistanceReport:
    """Relative rotation-vector distance and its propagated uncertainty.

    ``dist = |d - d_hat| / |d|`` and
    ``delta_dist = sqrt(sum_i delta_d_i**2) / |d_hat|``.
    """
    d_true = np.asarray(list(d_true), dtype=float)
    d_hat = np.asarray(list(d_hat), dtype=float)
    delta_d = np.asarray(list(delta_d), dtype=float)
    norm_true = float(np.linalg.norm(d_true))
    norm_hat = float(np.linalg.norm(d_hat))
    if norm_true <= 0 or norm_hat <= 0:
        raise DomainError("rotation vectors must have positive magnitude")
    dist = float(np.linalg.norm(d_true - d_hat)) / norm_true
    delta_dist = float(np.linalg.norm(delta_d)) / norm_hat
    return DistanceReport(dist, delta_dist)
