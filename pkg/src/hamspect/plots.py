"""Figure rendering for the report path.

Each function writes one PNG next to the delimited tables.  Figures are a
convenience view; the tables stay the canonical output.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .estimator import AxisEstimate, PhaseEstimate
from .experiments import ScalingResult
from .measurement import MeasurementRecord
from .spectral import MppResult, Spectrum

__all__ = [
    "record_figure",
    "spectrum_figure",
    "pcurve_figure",
    "histogram_figure",
    "scaling_figure",
]


def record_figure(record: MeasurementRecord, path: str | Path, title: str = "record") -> Path:
    fig, ax = plt.subplots(figsize=(8, 3.2))
    ax.plot(record.times, record.z_m, lw=0.7, color="C0")
    ax.set_xlabel("time")
    ax.set_ylabel("measured z projection")
    ax.set_title(title)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return Path(path)


def spectrum_figure(spec: Spectrum, nu_p: int, path: str | Path, title: str = "spectrum") -> Path:
    half = spec.n // 2
    mags = spec.magnitudes()[: half + 1]
    fig, ax = plt.subplots(figsize=(8, 3.2))
    ax.semilogy(np.arange(half + 1), np.maximum(mags, 1e-18), lw=0.7, color="C0")
    ax.axvline(nu_p, color="C3", ls="--", lw=0.8, label=f"peak channel {nu_p}")
    ax.set_xlabel("channel")
    ax.set_ylabel("|F|")
    ax.set_title(title)
    ax.legend(loc="upper right")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return Path(path)


def pcurve_figure(mpp: MppResult, path: str | Path, title: str = "truncation test function") -> Path:
    fig, ax = plt.subplots(figsize=(8, 3.2))
    finite = np.isfinite(mpp.p_values)
    ax.plot(mpp.t_candidates[finite], mpp.p_values[finite], lw=0.8, color="C0")
    ax.axvline(mpp.t_p, color="C3", ls="--", lw=0.8, label=f"chosen end time {mpp.t_p:g}")
    ax.set_xlabel("candidate window end time")
    ax.set_ylabel("P")
    ax.set_title(title)
    ax.legend(loc="upper left")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return Path(path)


def histogram_figure(
    edges: np.ndarray,
    counts: np.ndarray,
    threshold: float | None,
    path: str | Path,
    xlabel: str,
    title: str,
    threshold_label: str = "3 x mean predicted sigma",
) -> Path:
    fig, ax = plt.subplots(figsize=(6, 3.6))
    ax.stairs(counts, edges, fill=True, color="C0", alpha=0.75)
    if threshold is not None and np.isfinite(threshold):
        ax.axvline(threshold, color="C3", ls="--", lw=1.0, label=threshold_label)
        ax.legend(loc="upper right")
    ax.set_xlabel(xlabel)
    ax.set_ylabel("trials")
    ax.set_title(title)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return Path(path)


def scaling_figure(result: ScalingResult, path: str | Path) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    for i, curve in enumerate(result.curves):
        n = np.array([p.n_total for p in curve.points], dtype=float)
        d = np.array([p.mean_delta_dist for p in curve.points])
        sem = np.array([p.sem_delta_dist for p in curve.points])
        ax.errorbar(
            n, d, yerr=sem, fmt="o-", ms=4, lw=0.9, color=f"C{i}",
            label=f"eta = {curve.eta:g} (slope {curve.slope:.2f})",
        )
    if result.curves and result.curves[0].points:
        n = np.array([p.n_total for p in result.curves[0].points], dtype=float)
        ref = result.curves[0].points[0].mean_delta_dist
        ax.plot(n, ref * np.sqrt(n[0] / n), "k--", lw=0.8, label="1/sqrt(N)")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("total number of measurements")
    ax.set_ylabel("mean predicted relative distance uncertainty")
    ax.legend()
    ax.grid(alpha=0.3, which="both")
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return Path(path)
