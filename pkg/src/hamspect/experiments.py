"""Experiment orchestration: single runs, the two-axis protocol, Monte
Carlo coverage studies and the measurement-count scaling study.

Every run is a pure function of an :class:`ExperimentConfig`.  Sub-seeds
for records, trials and sweep points are derived from the root seed with
``numpy.random.SeedSequence`` spawn keys, so reruns are bit-identical and
independent of worker count or scheduling.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .bloch import HamiltonianCoeffs, PolarHamiltonian, coeffs_to_polar
from .errors import ConfigError, FitFailed, HamspectError
from .estimator import (
    AxisEstimate,
    HamiltonianEstimate,
    PhaseEstimate,
    estimate_axis,
    estimate_phase_record,
    reconstruct_axis,
    reconstruct_hamiltonians,
)
from .measurement import (
    MeasurementRecord,
    SamplingConfig,
    analytic_phase_record,
    analytic_record,
    run_phase_series,
    run_time_series,
)
from .uncertainty import DistanceReport, distance_metrics

__all__ = [
    "ExperimentConfig",
    "CharacterizeResult",
    "TwoAxisResult",
    "MonteCarloResult",
    "ScalingPoint",
    "ScalingCurve",
    "ScalingResult",
    "run_characterize",
    "run_two_axis",
    "run_montecarlo",
    "run_scaling",
    "worker_count",
]

WORKERS_ENV_VAR = "HAMSPECT_WORKERS"

# Spawn-key domains for seed derivation.
_KEY_RECORD_R = 0
_KEY_RECORD_K = 1
_KEY_RECORD_PHASE = 2
_KEY_MC_TRIAL = 3
_KEY_SCALING = 4

_HISTOGRAM_BINS = 40


@dataclass(frozen=True)
class ExperimentConfig:
    """Full description of one experiment, sufficient to reproduce it."""

    mode: str
    h_r: HamiltonianCoeffs
    h_k: HamiltonianCoeffs | None
    delta_t: float
    n_s: int
    n_e: int
    eta: float
    seed: int
    t_predict_r: float
    t_predict_k: float | None = None
    analytic: bool = False
    trials: int = 1
    delta_t_k: float | None = None
    n_s_k: int | None = None
    scaling_sweep_variable: str = "n_ensemble"
    scaling_sweep_values: tuple[int, ...] = ()
    scaling_trials_per_point: int = 10
    scaling_eta_values: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.mode not in ("single", "two-axis", "montecarlo", "scaling"):
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.h_r.is_trivial():
            raise ConfigError("reference Hamiltonian must be nontrivial")
        if abs(self.h_r.h_y) > 1e-12 * max(1.0, self.h_r.omega):
            raise ConfigError(
                "reference Hamiltonian must lie in the x-z plane (h_r_y = 0); "
                "it defines the azimuth origin"
            )
        if self.mode in ("two-axis", "montecarlo"):
            if self.h_k is None or self.h_k.is_trivial():
                raise ConfigError(f"mode {self.mode!r} needs a nontrivial second Hamiltonian")
            if self.t_predict_k is None:
                raise ConfigError(f"mode {self.mode!r} needs t_predict_k")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.mode == "scaling":
            if not self.scaling_sweep_values:
                raise ConfigError("scaling mode needs sweep values")
            vals = self.scaling_sweep_values
            if any(v < 1 for v in vals) or any(b <= a for a, b in zip(vals, vals[1:])):
                raise ConfigError("sweep values must be strictly increasing integers >= 1")
            if self.scaling_sweep_variable not in ("n_ensemble", "n_time_points"):
                raise ConfigError(
                    f"unknown sweep variable {self.scaling_sweep_variable!r}"
                )
            if self.scaling_trials_per_point < 1:
                raise ConfigError("scaling_trials_per_point must be >= 1")
            for e in self.scaling_eta_values:
                if not 0.0 <= e < 0.5:
                    raise ConfigError("scaling eta values must lie in [0, 0.5)")
        # Surface sampling-domain errors as configuration errors.
        try:
            self.sampling(seed=0)
            self.sampling_k(seed=0)
        except HamspectError as exc:
            raise ConfigError(str(exc)) from exc

    def sampling(self, seed: int) -> SamplingConfig:
        return SamplingConfig(self.delta_t, self.n_s, self.n_e, self.eta, seed)

    def sampling_k(self, seed: int) -> SamplingConfig:
        return SamplingConfig(
            self.delta_t_k if self.delta_t_k is not None else self.delta_t,
            self.n_s_k if self.n_s_k is not None else self.n_s,
            self.n_e,
            self.eta,
            seed,
        )


def derive_seed(root: int, *key: int) -> int:
    """Deterministic 64-bit sub-seed for a named stream."""
    ss = np.random.SeedSequence(entropy=root, spawn_key=tuple(key))
    return int(ss.generate_state(1, np.uint64)[0])


def worker_count() -> int:
    """Worker processes for batch runs, from the environment (default 1)."""
    raw = os.environ.get(WORKERS_ENV_VAR, "1")
    try:
        n = int(raw)
    except ValueError as exc:
        raise ConfigError(f"{WORKERS_ENV_VAR} must be an integer, got {raw!r}") from exc
    return max(1, n)


@dataclass(frozen=True)
class CharacterizeResult:
    record: MeasurementRecord
    axis: AxisEstimate
    h_est: HamiltonianEstimate
    distance: DistanceReport


@dataclass(frozen=True)
class TwoAxisResult:
    record_r: MeasurementRecord
    record_k: MeasurementRecord
    record_phase: MeasurementRecord
    axis_r: AxisEstimate
    axis_k: AxisEstimate
    phase: PhaseEstimate
    h_r_est: HamiltonianEstimate
    h_k_est: HamiltonianEstimate
    dist_r: DistanceReport
    dist_k: DistanceReport


@dataclass(frozen=True)
class MonteCarloResult:
    rows: list[dict]
    failures: list[dict]
    coverage: dict[str, float | int]
    histograms: dict[str, tuple[np.ndarray, np.ndarray]]


@dataclass(frozen=True)
class ScalingPoint:
    sweep_value: int
    n_total: int
    mean_delta_dist: float
    sem_delta_dist: float
    mean_dist: float
    trials_ok: int
    trials_failed: int


@dataclass(frozen=True)
class ScalingCurve:
    eta: float
    points: list[ScalingPoint] = field(default_factory=list)
    slope: float = math.nan
    intercept: float = math.nan


@dataclass(frozen=True)
class ScalingResult:
    curves: list[ScalingCurve]


def run_characterize(config: ExperimentConfig, seed: int | None = None) -> CharacterizeResult:
    """Single-axis characterization of the reference Hamiltonian."""
    root = config.seed if seed is None else seed
    sampling = config.sampling(derive_seed(root, _KEY_RECORD_R))
    if config.analytic:
        record = analytic_record(config.h_r, sampling)
    else:
        record = run_time_series(config.h_r, sampling)
    axis = estimate_axis(record, config.t_predict_r)
    h_est = reconstruct_axis(axis)
    dist = distance_metrics(config.h_r.d_vector(), h_est.d_hat(), h_est.d_sigma())
    return CharacterizeResult(record, axis, h_est, dist)


def run_two_axis(config: ExperimentConfig, seed: int | None = None) -> TwoAxisResult:
    """Bootstrap two-axis characterization.

    The reference axis is characterized first; the equator-rotation pulse
    for the azimuth record is timed from the *estimated* reference
    parameters, so their error propagates into the prepared state.
    """
    root = config.seed if seed is None else seed
    cfg_r = config.sampling(derive_seed(root, _KEY_RECORD_R))
    cfg_k = config.sampling_k(derive_seed(root, _KEY_RECORD_K))
    cfg_p = config.sampling_k(derive_seed(root, _KEY_RECORD_PHASE))

    if config.analytic:
        record_r = analytic_record(config.h_r, cfg_r)
        record_k = analytic_record(config.h_k, cfg_k)
    else:
        record_r = run_time_series(config.h_r, cfg_r)
        record_k = run_time_series(config.h_k, cfg_k)
    axis_r = estimate_axis(record_r, config.t_predict_r)
    axis_k = estimate_axis(record_k, config.t_predict_k)

    h_r_polar = PolarHamiltonian(axis_r.omega.value, axis_r.theta.value, 0.0)
    if config.analytic:
        record_phase = analytic_phase_record(config.h_r, config.h_k, cfg_p, h_r_polar)
    else:
        record_phase = run_phase_series(config.h_r, config.h_k, cfg_p, h_r_polar)
    phase = estimate_phase_record(record_phase, axis_r, axis_k)

    h_r_est, h_k_est = reconstruct_hamiltonians(axis_r, axis_k, phase)
    dist_r = distance_metrics(config.h_r.d_vector(), h_r_est.d_hat(), h_r_est.d_sigma())
    dist_k = distance_metrics(config.h_k.d_vector(), h_k_est.d_hat(), h_k_est.d_sigma())
    return TwoAxisResult(
        record_r, record_k, record_phase,
        axis_r, axis_k, phase,
        h_r_est, h_k_est, dist_r, dist_k,
    )


def _mc_trial(payload: tuple[ExperimentConfig, int]) -> dict:
    config, trial = payload
    trial_seed = derive_seed(config.seed, _KEY_MC_TRIAL, trial)
    try:
        res = run_two_axis(config, seed=trial_seed)
    except HamspectError as exc:
        return {"trial": trial, "status": type(exc).__name__, "message": str(exc)}
    row = {
        "trial": trial,
        "status": "ok",
        "eta_hat": res.axis_r.eta.value,
        "delta_eta": res.axis_r.eta.sigma,
        "dist_r": res.dist_r.dist,
        "delta_dist_r": res.dist_r.delta_dist,
        "dist_k": res.dist_k.dist,
        "delta_dist_k": res.dist_k.delta_dist,
        "omega_r": res.axis_r.omega.value,
        "omega_k": res.axis_k.omega.value,
        "theta_r": res.axis_r.theta.value,
        "theta_k": res.axis_k.theta.value,
        "phi": res.phase.phi,
        "branch": res.phase.branch,
        "flags": ";".join(res.axis_r.flags + res.axis_k.flags + res.phase.flags),
    }
    if not all(
        math.isfinite(row[k])
        for k in ("delta_dist_r", "delta_dist_k", "delta_eta")
    ):
        row["status"] = "nonfinite-uncertainty"
    return row


def _histogram(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    if len(values) == 0:
        return np.array([0.0, 1.0]), np.array([0])
    counts, edges = np.histogram(values, bins=_HISTOGRAM_BINS)
    return edges, counts


def run_montecarlo(config: ExperimentConfig) -> MonteCarloResult:
    """Repeated two-axis characterization with derived per-trial seeds.

    Degenerate trials (estimation errors, or non-finite propagated
    uncertainties) are recorded and excluded from the coverage statistics
    with a count, never silently dropped.
    """
    payloads = [(config, i) for i in range(config.trials)]
    workers = worker_count()
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_mc_trial, payloads, chunksize=8))
    else:
        results = [_mc_trial(p) for p in payloads]

    rows = [r for r in results if r["status"] == "ok"]
    failures = [r for r in results if r["status"] != "ok"]

    def col(key: str) -> np.ndarray:
        return np.array([r[key] for r in rows], dtype=float)

    coverage: dict[str, float | int] = {
        "trials_total": config.trials,
        "trials_ok": len(rows),
        "trials_failed": len(failures),
    }
    hists: dict[str, tuple[np.ndarray, np.ndarray]] = {}
    if rows:
        dist_r, ddist_r = col("dist_r"), col("delta_dist_r")
        dist_k, ddist_k = col("dist_k"), col("delta_dist_k")
        eta_hat, d_eta = col("eta_hat"), col("delta_eta")
        coverage["mean_delta_dist_r"] = float(ddist_r.mean())
        coverage["mean_delta_dist_k"] = float(ddist_k.mean())
        coverage["mean_delta_eta"] = float(d_eta.mean())
        coverage["coverage_dist_r"] = float(np.mean(dist_r <= 3.0 * ddist_r.mean()))
        coverage["coverage_dist_k"] = float(np.mean(dist_k <= 3.0 * ddist_k.mean()))
        coverage["coverage_eta"] = float(
            np.mean(np.abs(eta_hat - config.eta) <= 3.0 * d_eta)
        )
        hists["dist_r"] = _histogram(dist_r)
        hists["dist_k"] = _histogram(dist_k)
        hists["eta_hat"] = _histogram(eta_hat)
    return MonteCarloResult(rows, failures, coverage, hists)


def _scaling_trial(payload: tuple[ExperimentConfig, int]) -> tuple[float, float] | str:
    config, _ = payload
    try:
        res = run_characterize(config)
    except HamspectError as exc:
        return type(exc).__name__
    if not math.isfinite(res.distance.delta_dist):
        return "nonfinite-uncertainty"
    return res.distance.delta_dist, res.distance.dist


def run_scaling(config: ExperimentConfig) -> ScalingResult:
    """Sweep the total measurement count and fit the uncertainty scaling.

    Each sweep point averages the predicted relative distance uncertainty
    of the reference axis over ``scaling_trials_per_point`` independent
    single-axis characterizations.  A log-log line is fitted per error
    rate; :class:`FitFailed` is raised when fewer than three sweep points
    produced a usable average.
    """
    etas = config.scaling_eta_values or (config.eta,)
    curves: list[ScalingCurve] = []
    for ei, eta in enumerate(etas):
        points: list[ScalingPoint] = []
        payloads = []
        for vi, value in enumerate(config.scaling_sweep_values):
            overrides = {"eta": eta, "mode": "single"}
            if config.scaling_sweep_variable == "n_ensemble":
                overrides["n_e"] = value
            else:
                overrides["n_s"] = value
            for trial in range(config.scaling_trials_per_point):
                seed = derive_seed(config.seed, _KEY_SCALING, ei, vi, trial)
                payloads.append((replace(config, seed=seed, **overrides), vi))
        workers = worker_count()
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                outcomes = list(pool.map(_scaling_trial, payloads, chunksize=4))
        else:
            outcomes = [_scaling_trial(p) for p in payloads]

        per_point: dict[int, list[tuple[float, float]]] = {}
        per_point_failed: dict[int, int] = {}
        for (cfg, vi), outcome in zip(payloads, outcomes):
            if isinstance(outcome, str):
                per_point_failed[vi] = per_point_failed.get(vi, 0) + 1
            else:
                per_point.setdefault(vi, []).append(outcome)
        for vi, value in enumerate(config.scaling_sweep_values):
            ok = per_point.get(vi, [])
            if not ok:
                continue
            ddists = np.array([o[0] for o in ok])
            dists = np.array([o[1] for o in ok])
            n_total = value * (
                config.n_s if config.scaling_sweep_variable == "n_ensemble" else config.n_e
            )
            points.append(
                ScalingPoint(
                    sweep_value=value,
                    n_total=n_total,
                    mean_delta_dist=float(ddists.mean()),
                    sem_delta_dist=float(ddists.std(ddof=1) / math.sqrt(len(ddists)))
                    if len(ddists) > 1
                    else 0.0,
                    mean_dist=float(dists.mean()),
                    trials_ok=len(ok),
                    trials_failed=per_point_failed.get(vi, 0),
                )
            )
        if len(points) < 3:
            raise FitFailed(
                f"eta = {eta}: only {len(points)} usable sweep points; "
                "need at least three to fit the scaling law"
            )
        log_n = np.log10([p.n_total for p in points])
        log_d = np.log10([p.mean_delta_dist for p in points])
        slope, intercept = np.polyfit(log_n, log_d, 1)
        curves.append(ScalingCurve(eta=eta, points=points, slope=float(slope), intercept=float(intercept)))
    return ScalingResult(curves)
