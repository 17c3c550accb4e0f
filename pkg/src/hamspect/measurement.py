"""Stochastic generation and serialization of measurement records.

A record is the outcome of repeated initialize-evolve-measure cycles on a
fixed time grid ``t_i = i * delta_t`` for ``i = 1..n_s`` (the trivial t = 0
point is not measured).  Each grid point is measured ``n_e`` times with a
single-basis projective measurement subject to a bit-flip error rate
``eta``, so the ensemble average estimates ``(1 - 2*eta) * z(t_i)``.

Records are a pure function of ``(hamiltonian, config)`` including the seed:
sampling streams are derived from the seed with ``numpy.random.SeedSequence``
spawn keys, so results do not depend on scheduling or worker count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .bloch import (
    HamiltonianCoeffs,
    PolarHamiltonian,
    Z_PLUS,
    coeffs_to_polar,
    equator_rotation,
    evolve_state,
)
from .errors import DomainError

__all__ = [
    "SamplingConfig",
    "MeasurementRecord",
    "sample_shot",
    "run_time_series",
    "run_phase_series",
    "analytic_record",
    "analytic_phase_record",
    "save_record",
    "load_record",
]

_MAX_SEED = 2**64

# Stream identifiers keep the two record kinds on disjoint substreams even
# if a caller reuses one seed for both.
_STREAM_TIME_SERIES = 0
_STREAM_PHASE_SERIES = 1


@dataclass(frozen=True)
class SamplingConfig:
    """Time grid, ensemble size, error rate and RNG seed for one record.

    ``t_ob = n_s * delta_t`` is the total observation time and
    ``n_total = n_e * n_s`` the total number of measurements.
    """

    delta_t: float
    n_s: int
    n_e: int
    eta: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.delta_t) and self.delta_t > 0):
            raise DomainError(f"delta_t must be positive and finite, got {self.delta_t}")
        if not isinstance(self.n_s, (int, np.integer)) or self.n_s < 2:
            raise DomainError(f"n_s must be an integer >= 2, got {self.n_s!r}")
        if not isinstance(self.n_e, (int, np.integer)) or self.n_e < 1:
            raise DomainError(f"n_e must be an integer >= 1, got {self.n_e!r}")
        if not (math.isfinite(self.eta) and 0.0 <= self.eta < 0.5):
            raise DomainError(
                f"eta must lie in [0, 0.5); eta = {self.eta} makes the signal "
                "sign-ambiguous or is out of range"
            )
        if not isinstance(self.seed, (int, np.integer)) or not 0 <= self.seed < _MAX_SEED:
            raise DomainError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")

    @property
    def t_ob(self) -> float:
        return self.n_s * self.delta_t

    @property
    def n_total(self) -> int:
        return self.n_e * self.n_s

    def times(self) -> np.ndarray:
        return np.arange(1, self.n_s + 1, dtype=float) * self.delta_t

    def check_nyquist(self, t_predict: float) -> None:
        """Reject grids that undersample a predicted oscillation period."""
        if not (math.isfinite(t_predict) and t_predict > 0):
            raise DomainError(f"t_predict must be positive, got {t_predict}")
        if self.delta_t >= t_predict / 2.0:
            raise DomainError(
                f"delta_t = {self.delta_t} does not resolve a period of "
                f"{t_predict}: need at least two samples per period"
            )


@dataclass(frozen=True)
class MeasurementRecord:
    """Per-time-point ensemble averages plus the raw counts behind them.

    ``z_m[i] = (2 * counts_plus[i] - n_e) / n_e`` exactly when counts are
    present; analytic (noise-free) records carry ``counts_plus = None`` and
    store ``z_m`` directly.
    """

    times: np.ndarray
    z_m: np.ndarray
    counts_plus: np.ndarray | None
    config: SamplingConfig

    def __post_init__(self) -> None:
        times = np.asarray(self.times, dtype=float)
        z_m = np.asarray(self.z_m, dtype=float)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "z_m", z_m)
        n_s = self.config.n_s
        if len(times) != n_s or len(z_m) != n_s:
            raise DomainError("record arrays must have length n_s")
        if self.counts_plus is not None:
            counts = np.asarray(self.counts_plus, dtype=np.int64)
            object.__setattr__(self, "counts_plus", counts)
            if len(counts) != n_s:
                raise DomainError("record arrays must have length n_s")
            if counts.min() < 0 or counts.max() > self.config.n_e:
                raise DomainError("counts_plus must lie in [0, n_e]")
            expected = (2.0 * counts - self.config.n_e) / self.config.n_e
            if not np.array_equal(expected, z_m):
                raise DomainError("z_m must equal (2*counts_plus - n_e)/n_e exactly")
            self.counts_plus.setflags(write=False)
        if np.any(np.abs(z_m) > 1.0 + 1e-12):
            raise DomainError("z_m values must lie in [-1, 1]")
        self.times.setflags(write=False)
        self.z_m.setflags(write=False)

    @property
    def analytic(self) -> bool:
        return self.counts_plus is None


def _shot_probability(z_true: float | np.ndarray, eta: float) -> float | np.ndarray:
    """Probability of the +1 outcome: (1-eta)(1+z)/2 + eta(1-z)/2."""
    return 0.5 + 0.5 * (1.0 - 2.0 * eta) * z_true


def sample_shot(z_true: float, eta: float, rng: np.random.Generator) -> int:
    """Draw one projective-measurement outcome (+1 or -1).

    The +1 probability is ``(1-eta)*(1+z)/2 + eta*(1-z)/2``, i.e. a perfect
    projection followed by a bit flip with probability ``eta``; the outcome
    expectation is ``(1 - 2*eta) * z_true``.
    """
    if not (math.isfinite(z_true) and abs(z_true) <= 1.0 + 1e-9):
        raise DomainError(f"z_true must lie in [-1, 1], got {z_true}")
    if not 0.0 <= eta < 0.5:
        raise DomainError(f"eta must lie in [0, 0.5), got {eta}")
    z = min(1.0, max(-1.0, z_true))
    return 1 if rng.random() < _shot_probability(z, eta) else -1


def _stream_rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(stream,)))


def _sampled_record(
    z_true: np.ndarray, config: SamplingConfig, stream: int
) -> MeasurementRecord:
    z = np.clip(z_true, -1.0, 1.0)
    p = _shot_probability(z, config.eta)
    rng = _stream_rng(config.seed, stream)
    counts = rng.binomial(config.n_e, p).astype(np.int64)
    z_m = (2.0 * counts - config.n_e) / config.n_e
    return MeasurementRecord(config.times(), z_m, counts, config)


def _z_true_time_series(h: HamiltonianCoeffs, times: np.ndarray) -> np.ndarray:
    if h.is_trivial():
        raise DomainError("trivial Hamiltonian: nothing precesses")
    polar = coeffs_to_polar(h)
    st2 = math.sin(polar.theta) ** 2
    return np.cos(polar.omega * times) * st2 + (1.0 - st2)


def run_time_series(h: HamiltonianCoeffs, config: SamplingConfig) -> MeasurementRecord:
    """Simulate the initialize-evolve-measure protocol from the +z pole.

    For each grid point, ``n_e`` independent shots are drawn against the true
    ``z(t_i)``.  Deterministic given the config seed.
    """
    return _sampled_record(_z_true_time_series(h, config.times()), config, _STREAM_TIME_SERIES)


def analytic_record(h: HamiltonianCoeffs, config: SamplingConfig) -> MeasurementRecord:
    """Noise-free oracle record: ``z_m[i] = (1 - 2*eta) * z(t_i)`` exactly."""
    z_true = _z_true_time_series(h, config.times())
    z_m = (1.0 - 2.0 * config.eta) * z_true
    return MeasurementRecord(config.times(), z_m, None, config)


def _z_true_phase_series(
    h_r: HamiltonianCoeffs,
    h_k: HamiltonianCoeffs,
    times: np.ndarray,
    h_r_est: PolarHamiltonian | None,
) -> np.ndarray:
    if abs(h_r.h_y) > 1e-12 * max(1.0, h_r.omega):
        raise DomainError(
            "the reference Hamiltonian must lie in the x-z plane (h_y = 0); "
            "it defines the azimuth origin"
        )
    if h_k.is_trivial():
        raise DomainError("trivial second Hamiltonian: nothing precesses")
    if h_r_est is None:
        h_r_est = coeffs_to_polar(h_r)
    # Pulse duration comes from the *estimated* first axis, but the state
    # evolves under the true one, so characterization error propagates into
    # the prepared state.
    t_rot, _beta = equator_rotation(h_r_est.omega, h_r_est.theta)
    s1 = evolve_state(h_r, Z_PLUS, t_rot).as_array()
    d = h_k.d_vector()
    omega_k = float(np.linalg.norm(d))
    axis = d / omega_k
    alpha = omega_k * times
    cos_a, sin_a = np.cos(alpha), np.sin(alpha)
    cross_z = axis[0] * s1[1] - axis[1] * s1[0]
    return s1[2] * cos_a + cross_z * sin_a + axis[2] * float(np.dot(axis, s1)) * (1.0 - cos_a)


def run_phase_series(
    h_r: HamiltonianCoeffs,
    h_k: HamiltonianCoeffs,
    config: SamplingConfig,
    h_r_est: PolarHamiltonian | None = None,
) -> MeasurementRecord:
    """Simulate the two-axis protocol cycle for the azimuth measurement.

    Each cycle initializes the pole state, applies the reference-axis
    evolution for the equator-rotation time computed from ``h_r_est``
    (defaults to the exact polar form of ``h_r``), then evolves under
    ``h_k`` for ``i * delta_t`` and measures with error ``eta``.
    """
    z_true = _z_true_phase_series(h_r, h_k, config.times(), h_r_est)
    return _sampled_record(z_true, config, _STREAM_PHASE_SERIES)


def analytic_phase_record(
    h_r: HamiltonianCoeffs,
    h_k: HamiltonianCoeffs,
    config: SamplingConfig,
    h_r_est: PolarHamiltonian | None = None,
) -> MeasurementRecord:
    """Noise-free counterpart of :func:`run_phase_series`."""
    z_true = _z_true_phase_series(h_r, h_k, config.times(), h_r_est)
    z_m = (1.0 - 2.0 * config.eta) * z_true
    return MeasurementRecord(config.times(), z_m, None, config)


# ---------------------------------------------------------------------------
# Serialization: delimiter-separated table with a bit-exact round trip.
# Floats are written with repr(), which numpy/python parse back exactly.

_RECORD_FORMAT = "hamspect-record-v1"


def save_record(record: MeasurementRecord, path: str | Path) -> None:
    cfg = record.config
    lines = [
        f"# format = {_RECORD_FORMAT}",
        f"# delta_t = {float(cfg.delta_t)!r}",
        f"# n_s = {int(cfg.n_s)}",
        f"# n_e = {int(cfg.n_e)}",
        f"# eta = {float(cfg.eta)!r}",
        f"# seed = {int(cfg.seed)}",
        f"# analytic = {'true' if record.analytic else 'false'}",
        "time,z_m,counts_plus,n_e",
    ]
    for i in range(cfg.n_s):
        counts = "" if record.analytic else str(int(record.counts_plus[i]))
        lines.append(
            f"{float(record.times[i])!r},{float(record.z_m[i])!r},{counts},{cfg.n_e}"
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_record(path: str | Path) -> MeasurementRecord:
    text = Path(path).read_text(encoding="utf-8")
    meta: dict[str, str] = {}
    rows: list[str] = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, value = line.lstrip("# ").partition("=")
            meta[key.strip()] = value.strip()
        elif not line.startswith("time,"):
            rows.append(line)
    if meta.get("format") != _RECORD_FORMAT:
        raise DomainError(f"unrecognized record format in {path}")
    config = SamplingConfig(
        delta_t=float(meta["delta_t"]),
        n_s=int(meta["n_s"]),
        n_e=int(meta["n_e"]),
        eta=float(meta["eta"]),
        seed=int(meta["seed"]),
    )
    analytic = meta.get("analytic", "false") == "true"
    times = np.empty(config.n_s)
    z_m = np.empty(config.n_s)
    counts = None if analytic else np.empty(config.n_s, dtype=np.int64)
    if len(rows) != config.n_s:
        raise DomainError(f"expected {config.n_s} rows, found {len(rows)}")
    for i, row in enumerate(rows):
        t_s, z_s, c_s, _ = row.split(",")
        times[i] = float(t_s)
        z_m[i] = float(z_s)
        if counts is not None:
            counts[i] = int(c_s)
    return MeasurementRecord(times, z_m, counts, config)
