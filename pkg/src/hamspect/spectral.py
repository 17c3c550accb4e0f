"""Discrete-Fourier analysis of measurement records.

The forward transform carries the 1/n normalization,

    ``F(nu) = (1/n) * sum_j z[j] * exp(-2j*pi*nu*j/n)``,

so a unit k-period cosine lands value 1/2 in channels k and n-k and a
constant record lands entirely in channel 0.  With that convention the
pure-signal reconstruction ``z ~ F(0) + 2*F(nu_p)*cos(...)`` holds exactly
for records that span an integer number of periods.

A record generally does not span an integer number of periods, which
spreads ("leaks") the line into neighboring channels.  The minimum-phase-
point (MPP) search trims the record tail, at most one predicted period, to
the truncation that maximizes the leakage test function

    ``P(t_p) = (2|F(nu_p)| - |F(nu_p - 1)| - |F(nu_p + 1)|)
               / (|F(nu_p - 1)| + |F(nu_p + 1)|)``,

recomputing the spectrum per candidate.  The chosen truncation pins the
frequency to ``omega = 2*pi*n_periods / t_p`` and the width of the P peak
sets the frequency uncertainty.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .errors import AliasingSuspected, DomainError, NoPeak

if TYPE_CHECKING:  # pragma: no cover
    from .measurement import MeasurementRecord

__all__ = [
    "Spectrum",
    "MppResult",
    "dft",
    "find_peak",
    "noise_floor",
    "mpp_search",
]

# Conversion from a full-width-at-half-maximum to a one-sigma width under a
# Gaussian peak model; used to turn the P-curve width into a standard
# deviation for the located truncation time.
_FWHM_TO_SIGMA = 2.0 * math.sqrt(2.0 * math.log(2.0))

# Test-function values above this are leakage-free to within float rounding.
_P_PERFECT = 1e12


@dataclass(frozen=True)
class Spectrum:
    """Normalized complex DFT coefficients of a real record window.

    Channels are indexed 0..n-1 and interpreted symmetrically:
    ``F(-nu) == F(n - nu)``.  For real input the coefficients obey
    conjugate symmetry ``F(n - nu) == conj(F(nu))``.
    """

    coeffs: np.ndarray
    n: int

    def __post_init__(self) -> None:
        coeffs = np.asarray(self.coeffs, dtype=complex)
        object.__setattr__(self, "coeffs", coeffs)
        if len(coeffs) != self.n:
            raise DomainError("coefficient array length must equal n")
        self.coeffs.setflags(write=False)

    def channel(self, nu: int) -> complex:
        """Coefficient at (possibly negative) channel ``nu``."""
        return complex(self.coeffs[nu % self.n])

    def magnitudes(self) -> np.ndarray:
        return np.abs(self.coeffs)

    def inverse(self) -> np.ndarray:
        """Reconstruct the input window (real part of the inverse DFT)."""
        return np.fft.ifft(self.coeffs * self.n).real


def dft(values: np.ndarray) -> Spectrum:
    """Forward transform of a record window with the 1/n normalization."""
    z = np.asarray(values, dtype=float)
    if z.ndim != 1 or len(z) < 4:
        raise DomainError("DFT window must be one-dimensional with length >= 4")
    return Spectrum(np.fft.fft(z) / len(z), len(z))


def noise_floor(spec: Spectrum, nu_p: int) -> float:
    """Standard deviation of channel magnitudes away from the signal.

    The noise set is every channel magnitude except the zero channel and
    the peak pair {nu_p, n - nu_p}.  Leakage-contaminated neighbors stay in
    the set, which makes the returned floor slightly conservative.
    """
    mags = spec.magnitudes()
    mask = np.ones(spec.n, dtype=bool)
    mask[0] = False
    mask[nu_p % spec.n] = False
    mask[(-nu_p) % spec.n] = False
    return float(np.std(mags[mask]))


def find_peak(spec: Spectrum) -> int:
    """Locate the precession line: argmax of |F| over channels 1..n//2-1.

    Raises :class:`AliasingSuspected` when the maximum sits on the last
    resolvable channel (the line may lie beyond the band edge) and
    :class:`NoPeak` when the maximum does not clear the rest of the
    spectrum by at least three noise floors (a peak within the extreme-
    value spread of the noise is no resolvable precession, e.g. an
    eigenstate record).
    """
    half = spec.n // 2
    if half < 2:
        raise DomainError("spectrum too short to search for a peak")
    mags = spec.magnitudes()
    nu_p = 1 + int(np.argmax(mags[1:half]))
    floor = noise_floor(spec, nu_p)
    if nu_p == half - 1:
        raise AliasingSuspected(
            f"spectral maximum at the band-edge channel {nu_p}; "
            "sampling may not resolve the precession"
        )
    # Runner-up comparison: the peak and its immediate leakage neighbors
    # (plus mirrors) are removed; a real line dominates everything else,
    # while the maximum of pure noise does not.
    mask = np.ones(spec.n, dtype=bool)
    for ch in (0, nu_p - 1, nu_p, nu_p + 1):
        mask[ch % spec.n] = False
        mask[(-ch) % spec.n] = False
    runner_up = float(mags[mask].max()) if mask.any() else 0.0
    if mags[nu_p] < runner_up + 3.0 * floor or mags[nu_p] <= 1e-12 * max(1.0, mags[0]):
        raise NoPeak(
            f"channel {nu_p} magnitude {mags[nu_p]:.3e} does not clear the "
            f"remaining spectrum (max {runner_up:.3e}) by 3x the noise "
            f"floor {floor:.3e}"
        )
    return nu_p


@dataclass(frozen=True)
class MppResult:
    """Outcome of the minimum-phase-point search.

    ``t_p`` is the chosen window end time (``n_samples`` grid points),
    ``n_periods`` the peak channel of the trimmed window, ``p_values`` the
    test function over all candidate truncations, ``fwhm`` the width of its
    peak (None when the half-maximum level is not bracketed inside the
    search window) and ``delta_omega`` the one-sigma frequency uncertainty
    implied by the peak width, with a grid-resolution fallback.
    """

    t_p: float
    n_periods: int
    n_samples: int
    t_candidates: np.ndarray
    p_values: np.ndarray
    fwhm: float | None
    delta_omega: float
    used_fallback: bool

    def omega(self) -> float:
        """Frequency pinned by the integer-period truncation."""
        return 2.0 * math.pi * self.n_periods / self.t_p


def _test_function(mags: np.ndarray, nu_p: int) -> float:
    num = 2.0 * mags[nu_p] - mags[nu_p - 1] - mags[nu_p + 1]
    den = mags[nu_p - 1] + mags[nu_p + 1]
    if den == 0.0:
        return math.inf if num > 0 else -math.inf
    return num / den


def _interp_crossing(t0: float, p0: float, t1: float, p1: float, level: float) -> float:
    if p1 == p0:
        return t1
    return t0 + (level - p0) * (t1 - t0) / (p1 - p0)


def _fwhm(t: np.ndarray, p: np.ndarray, idx: int) -> float | None:
    """Linear-interpolated full width of the P peak at half its maximum.

    Returns None when either side fails to cross the half-maximum level
    inside the candidate window (boundary peaks, or an effectively
    delta-like peak whose maximum is not finite).
    """
    p_max = p[idx]
    if not math.isfinite(p_max):
        return None
    level = p_max / 2.0
    left = None
    for j in range(idx - 1, -1, -1):
        if not math.isfinite(p[j]) or p[j] > level:
            continue
        left = _interp_crossing(t[j], p[j], t[j + 1], p[j + 1], level)
        break
    right = None
    for j in range(idx + 1, len(p)):
        if not math.isfinite(p[j]) or p[j] > level:
            continue
        right = _interp_crossing(t[j - 1], p[j - 1], t[j], p[j], level)
        break
    if left is None or right is None:
        return None
    return right - left


def mpp_search(record: "MeasurementRecord", t_predict: float) -> MppResult:
    """Find the truncation of ``record`` closest to an integer period count.

    Every sample point in the final predicted period, i.e. candidate end
    times in ``[t_ob - t_predict, t_ob]``, is evaluated; the spectrum is
    recomputed per truncation and the candidate maximizing the test
    function wins.  Ties within 1e-12 go to the largest ``t_p`` (keeps the
    most data).

    Preconditions: the record must span at least two predicted periods and
    satisfy the two-samples-per-period bound.
    """
    config = record.config
    config.check_nyquist(t_predict)
    t_ob = config.t_ob
    if t_ob < 2.0 * t_predict:
        raise DomainError(
            f"record spans {t_ob / t_predict:.2f} predicted periods; "
            "need at least two to resolve the line"
        )
    delta_t = config.delta_t
    m_lo = max(4, int(math.ceil((t_ob - t_predict) / delta_t - 1e-9)))
    m_values = np.arange(m_lo, config.n_s + 1)
    if len(m_values) < 2:
        raise DomainError("search window contains fewer than two candidate truncations")

    z = np.asarray(record.z_m, dtype=float)
    t_candidates = m_values * delta_t
    p_values = np.empty(len(m_values))
    peaks = np.zeros(len(m_values), dtype=int)
    for i, m in enumerate(m_values):
        mags = np.abs(np.fft.rfft(z[:m])) / m
        half = m // 2
        if half < 3:
            p_values[i] = -math.inf
            continue
        nu_p = 1 + int(np.argmax(mags[1:half]))
        if nu_p < 2:
            p_values[i] = -math.inf
            continue
        peaks[i] = nu_p
        p_values[i] = _test_function(mags, nu_p)

    p_max = np.max(p_values)
    if not (math.isfinite(p_max) or p_max == math.inf):
        raise NoPeak("leakage test function has no maximum over the search window")
    # Candidates with essentially zero neighbor leakage (P beyond any
    # physically meaningful ratio) are indistinguishable "perfect" windows
    # whose float values are rounding noise; among those, and among exact
    # ties, keep the largest window.
    if p_max >= _P_PERFECT:
        eligible = p_values >= _P_PERFECT
    else:
        eligible = p_values >= p_max - 1e-12 * max(1.0, abs(p_max))
    idx = int(np.nonzero(eligible)[0][-1])

    n_samples = int(m_values[idx])
    t_p = float(t_candidates[idx])
    n_periods = int(peaks[idx])
    if n_periods < 2:
        raise NoPeak("no usable spectral line at the chosen truncation")

    fwhm = _fwhm(t_candidates, p_values, idx)
    # The located truncation time carries an uncertainty sigma_tp; through
    # omega = 2*pi*n/t_p this gives delta_omega = 2*pi*n*sigma_tp/t_p**2.
    # sigma_tp comes from the P-peak width when it is bracketed, floored at
    # the grid quantization; otherwise fall back to one grid step, which
    # reproduces the delta_t/t_ob resolution bound.
    if fwhm is None:
        sigma_tp = delta_t
        used_fallback = True
    else:
        fwhm = float(fwhm)
        sigma_tp = max(fwhm / _FWHM_TO_SIGMA, delta_t / math.sqrt(12.0))
        used_fallback = False
    delta_omega = float(2.0 * math.pi * n_periods * sigma_tp / t_p**2)
    return MppResult(
        t_p=t_p,
        n_periods=n_periods,
        n_samples=n_samples,
        t_candidates=t_candidates,
        p_values=p_values,
        fwhm=fwhm,
        delta_omega=delta_omega,
        used_fallback=used_fallback,
    )
