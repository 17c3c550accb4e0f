"""Command-line interface.

Subcommands
-----------
characterize   single-axis characterization of the reference Hamiltonian
two-axis       bootstrap protocol: both axes plus the relative azimuth
montecarlo     repeated two-axis runs with coverage statistics
scaling        uncertainty versus total measurement count, log-log fit

Every command reads a flat key-value config file (see ``hamspect.config``)
and writes delimited tables plus rendered figures into the output
directory.  Tables embed the effective configuration and its hash, so a
rerun with the same config and seed is byte-identical regardless of the
``HAMSPECT_WORKERS`` worker count.

Exit codes: 0 success, 2 configuration error, 3 degenerate signal or
domain error, 4 fit failure.
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from pathlib import Path

from . import __version__
from .config import canonical_items, config_hash, load_config
from .errors import ConfigError, EstimationError, FitFailed, HamspectError
from .estimator import AxisEstimate, HamiltonianEstimate, PhaseEstimate
from .experiments import (
    ExperimentConfig,
    run_characterize,
    run_montecarlo,
    run_scaling,
    run_two_axis,
    worker_count,
    WORKERS_ENV_VAR,
)
from .measurement import save_record
from .report import write_table
from .spectral import MppResult, Spectrum

__all__ = ["main", "build_parser"]

_MODE_BY_COMMAND = {
    "characterize": "single",
    "two-axis": "two-axis",
    "montecarlo": "montecarlo",
    "scaling": "scaling",
}

_ESTIMATE_COLUMNS = [
    "quantity", "value", "sigma", "axis", "nu_p", "t_p", "delta_f", "branch", "flags",
]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hamspect",
        description=(
            "Estimate two-state Hamiltonian parameters (precession rate, axis "
            "angles, measurement-error rate) with propagated uncertainties "
            "from simulated single-basis measurement records."
        ),
        epilog=(
            f"Set {WORKERS_ENV_VAR} to parallelize Monte Carlo trials and "
            "scaling sweep points; results are identical for any worker count."
        ),
    )
    parser.add_argument("--version", action="version", version=f"hamspect {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("characterize", "single-axis characterization of the reference Hamiltonian"),
        ("two-axis", "characterize both axes and the azimuth between them"),
        ("montecarlo", "repeat the two-axis protocol and report coverage"),
        ("scaling", "sweep the measurement count and fit the uncertainty scaling"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, metavar="PATH", help="experiment config file")
        p.add_argument("--out", required=True, metavar="DIR", help="output directory")
        p.add_argument("--seed", type=int, default=None, metavar="U64", help="override the config seed")
        p.add_argument("--trials", type=int, default=None, metavar="N", help="override the trial count")
        p.add_argument("--analytic", action="store_true", help="noise-free oracle mode")
        p.add_argument(
            "--format", choices=["table", "json-lines"], default="table",
            help="output table format (default: table)",
        )
        p.add_argument("--no-figures", action="store_true", help="skip figure rendering")
    return parser


def _meta(config: ExperimentConfig, command: str) -> list[tuple[str, object]]:
    meta: list[tuple[str, object]] = [
        ("tool", "hamspect"),
        ("version", __version__),
        ("command", command),
        ("config_hash", config_hash(config)),
    ]
    meta += [(f"config.{k}", v) for k, v in canonical_items(config)]
    return meta


def _estimate_rows_axis(axis: AxisEstimate, label: str) -> list[dict]:
    base = dict(axis=label, nu_p=axis.nu_p, t_p=axis.t_p, delta_f=axis.delta_f,
                branch=None, flags=";".join(axis.flags))
    return [
        dict(quantity=f"omega_{label}", value=axis.omega.value, sigma=axis.omega.sigma, **base),
        dict(quantity=f"theta_{label}", value=axis.theta.value, sigma=axis.theta.sigma, **base),
        dict(quantity=f"cos_theta_{label}", value=axis.cos_theta.value, sigma=axis.cos_theta.sigma, **base),
        dict(quantity=f"sin_theta_{label}", value=axis.sin_theta.value, sigma=axis.sin_theta.sigma, **base),
        dict(quantity=f"eta_{label}", value=axis.eta.value, sigma=axis.eta.sigma, **base),
    ]


def _estimate_rows_hamiltonian(h: HamiltonianEstimate, label: str, dist=None) -> list[dict]:
    base = dict(axis=label, nu_p=None, t_p=None, delta_f=None, branch=None, flags="")
    rows = [
        dict(quantity=f"h_{label}_x", value=h.h_x.value, sigma=h.h_x.sigma, **base),
        dict(quantity=f"h_{label}_y", value=h.h_y.value, sigma=h.h_y.sigma, **base),
        dict(quantity=f"h_{label}_z", value=h.h_z.value, sigma=h.h_z.sigma, **base),
    ]
    if dist is not None:
        rows.append(
            dict(quantity=f"dist_{label}", value=dist.dist, sigma=dist.delta_dist, **base)
        )
    return rows


def _estimate_rows_phase(phase: PhaseEstimate) -> list[dict]:
    base = dict(axis="phase", nu_p=phase.nu_p, t_p=phase.t_p, delta_f=phase.delta_f,
                branch=phase.branch, flags=";".join(phase.flags))
    return [
        dict(quantity="c_amplitude", value=phase.c.value, sigma=phase.c.sigma, **base),
        dict(quantity="d_amplitude", value=phase.d.value, sigma=phase.d.sigma, **base),
        dict(quantity="chi_c", value=phase.chi_c, sigma=None, **base),
        dict(quantity="beta", value=phase.beta.value, sigma=phase.beta.sigma, **base),
        dict(quantity="t_rot", value=phase.t_rot, sigma=None, **base),
        dict(quantity="cos_phi_minus_beta", value=phase.cos_rel.value, sigma=phase.cos_rel.sigma, **base),
        dict(quantity="cos_phi", value=phase.cos_phi.value, sigma=phase.cos_phi.sigma, **base),
        dict(quantity="sin_phi", value=phase.sin_phi.value, sigma=phase.sin_phi.sigma, **base),
        dict(quantity="phi", value=phase.phi, sigma=None, **base),
    ]


def _spectrum_rows(spec: Spectrum, t_p: float) -> list[dict]:
    rows = []
    for nu in range(spec.n // 2 + 1):
        coeff = spec.coeffs[nu]
        rows.append(
            dict(
                channel=nu,
                angular_frequency=2.0 * math.pi * nu / t_p,
                real=float(coeff.real),
                imag=float(coeff.imag),
                magnitude=float(abs(coeff)),
            )
        )
    return rows


def _pcurve_rows(mpp: MppResult) -> list[dict]:
    return [
        dict(t_end=float(t), p=float(p))
        for t, p in zip(mpp.t_candidates, mpp.p_values)
    ]


def _write_spectral_outputs(out, label, spec, mpp, meta, fmt, figures) -> None:
    write_table(out, f"spectrum_{label}", ["channel", "angular_frequency", "real", "imag", "magnitude"],
                _spectrum_rows(spec, mpp.t_p), meta, fmt)
    write_table(out, f"pcurve_{label}", ["t_end", "p"], _pcurve_rows(mpp), meta, fmt)
    if figures:
        from . import plots

        plots.spectrum_figure(spec, find_peak_channel(spec, mpp), out / f"fig_spectrum_{label}.png",
                              title=f"spectrum ({label})")
        plots.pcurve_figure(mpp, out / f"fig_pcurve_{label}.png",
                            title=f"truncation test function ({label})")


def find_peak_channel(spec: Spectrum, mpp: MppResult) -> int:
    return mpp.n_periods


def _cmd_characterize(config: ExperimentConfig, out: Path, fmt: str, figures: bool) -> int:
    res = run_characterize(config)
    meta = _meta(config, "characterize")
    save_record(res.record, out / "record_r.csv")
    rows = _estimate_rows_axis(res.axis, "r") + _estimate_rows_hamiltonian(res.h_est, "r", res.distance)
    write_table(out, "estimates", _ESTIMATE_COLUMNS, rows, meta, fmt)
    _write_spectral_outputs(out, "r", res.axis.spectrum, res.axis.mpp, meta, fmt, figures)
    if figures:
        from . import plots

        plots.record_figure(res.record, out / "fig_record_r.png", title="reference-axis record")
    print(f"omega_r = {res.axis.omega.value!r} +/- {res.axis.omega.sigma!r}")
    print(f"cos_theta_r = {res.axis.cos_theta.value!r} +/- {res.axis.cos_theta.sigma!r}")
    print(f"eta = {res.axis.eta.value!r} +/- {res.axis.eta.sigma!r}")
    print(f"dist_r = {res.distance.dist!r} (predicted {res.distance.delta_dist!r})")
    return 0


def _cmd_two_axis(config: ExperimentConfig, out: Path, fmt: str, figures: bool) -> int:
    res = run_two_axis(config)
    meta = _meta(config, "two-axis")
    save_record(res.record_r, out / "record_r.csv")
    save_record(res.record_k, out / "record_k.csv")
    save_record(res.record_phase, out / "record_phase.csv")
    rows = (
        _estimate_rows_axis(res.axis_r, "r")
        + _estimate_rows_hamiltonian(res.h_r_est, "r", res.dist_r)
        + _estimate_rows_axis(res.axis_k, "k")
        + _estimate_rows_hamiltonian(res.h_k_est, "k", res.dist_k)
        + _estimate_rows_phase(res.phase)
    )
    write_table(out, "estimates", _ESTIMATE_COLUMNS, rows, meta, fmt)
    _write_spectral_outputs(out, "r", res.axis_r.spectrum, res.axis_r.mpp, meta, fmt, figures)
    _write_spectral_outputs(out, "k", res.axis_k.spectrum, res.axis_k.mpp, meta, fmt, figures)
    _write_spectral_outputs(out, "phase", res.phase.spectrum, res.phase.mpp, meta, fmt, figures)
    if figures:
        from . import plots

        plots.record_figure(res.record_r, out / "fig_record_r.png", title="reference-axis record")
        plots.record_figure(res.record_k, out / "fig_record_k.png", title="second-axis record")
        plots.record_figure(res.record_phase, out / "fig_record_phase.png", title="azimuth record")
    for label, h, dist in (("r", res.h_r_est, res.dist_r), ("k", res.h_k_est, res.dist_k)):
        print(
            f"H_{label} = ({h.h_x.value!r}, {h.h_y.value!r}, {h.h_z.value!r})"
            f"  dist = {dist.dist!r} (predicted {dist.delta_dist!r})"
        )
    print(f"phi = {res.phase.phi!r} (branch {res.phase.branch})")
    return 0


_TRIAL_COLUMNS = [
    "trial", "status", "eta_hat", "delta_eta", "dist_r", "delta_dist_r",
    "dist_k", "delta_dist_k", "omega_r", "omega_k", "theta_r", "theta_k",
    "phi", "branch", "flags", "message",
]


def _cmd_montecarlo(config: ExperimentConfig, out: Path, fmt: str, figures: bool) -> int:
    res = run_montecarlo(config)
    meta = _meta(config, "montecarlo")
    all_rows = sorted(res.rows + res.failures, key=lambda r: r["trial"])
    write_table(out, "trials", _TRIAL_COLUMNS, all_rows, meta, fmt)
    cov_rows = [dict(metric=k, value=v) for k, v in sorted(res.coverage.items())]
    write_table(out, "coverage", ["metric", "value"], cov_rows, meta, fmt)
    thresholds = {
        "dist_r": 3.0 * res.coverage.get("mean_delta_dist_r", math.nan),
        "dist_k": 3.0 * res.coverage.get("mean_delta_dist_k", math.nan),
        "eta_hat": None,
    }
    for name, (edges, counts) in res.histograms.items():
        hist_rows = [
            dict(bin_left=float(edges[i]), bin_right=float(edges[i + 1]), count=int(counts[i]))
            for i in range(len(counts))
        ]
        hist_meta = list(meta)
        if thresholds.get(name) is not None:
            hist_meta.append((f"threshold_3x_mean_sigma", thresholds[name]))
        write_table(out, f"hist_{name}", ["bin_left", "bin_right", "count"], hist_rows, hist_meta, fmt)
        if figures:
            from . import plots

            xlabel = {
                "dist_r": "relative distance (reference axis)",
                "dist_k": "relative distance (second axis)",
                "eta_hat": "estimated measurement-error rate",
            }[name]
            plots.histogram_figure(
                edges, counts, thresholds.get(name), out / f"fig_hist_{name}.png",
                xlabel=xlabel, title=f"distribution of {name} over {config.trials} trials",
            )
    for key in ("trials_ok", "trials_failed", "coverage_dist_r", "coverage_dist_k", "coverage_eta"):
        if key in res.coverage:
            print(f"{key} = {res.coverage[key]}")
    return 0


def _cmd_scaling(config: ExperimentConfig, out: Path, fmt: str, figures: bool) -> int:
    res = run_scaling(config)
    meta = _meta(config, "scaling")
    point_rows = []
    fit_rows = []
    for curve in res.curves:
        for p in curve.points:
            point_rows.append(
                dict(
                    eta=curve.eta,
                    sweep_variable=config.scaling_sweep_variable,
                    sweep_value=p.sweep_value,
                    n_total=p.n_total,
                    mean_delta_dist=p.mean_delta_dist,
                    sem_delta_dist=p.sem_delta_dist,
                    mean_dist=p.mean_dist,
                    trials_ok=p.trials_ok,
                    trials_failed=p.trials_failed,
                )
            )
        fit_rows.append(
            dict(eta=curve.eta, slope=curve.slope, intercept=curve.intercept,
                 n_points=len(curve.points))
        )
    write_table(
        out, "scaling_points",
        ["eta", "sweep_variable", "sweep_value", "n_total", "mean_delta_dist",
         "sem_delta_dist", "mean_dist", "trials_ok", "trials_failed"],
        point_rows, meta, fmt,
    )
    write_table(out, "scaling_fit", ["eta", "slope", "intercept", "n_points"], fit_rows, meta, fmt)
    if figures:
        from . import plots

        plots.scaling_figure(res, out / "fig_scaling.png")
    for row in fit_rows:
        print(f"eta = {row['eta']!r}: slope = {row['slope']!r} over {row['n_points']} points")
    return 0


_COMMANDS = {
    "characterize": _cmd_characterize,
    "two-axis": _cmd_two_axis,
    "montecarlo": _cmd_montecarlo,
    "scaling": _cmd_scaling,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    started = time.monotonic()
    try:
        overrides: dict = {}
        if args.seed is not None:
            overrides["seed"] = args.seed
        if args.trials is not None:
            overrides["trials"] = args.trials
        if args.analytic:
            overrides["analytic"] = True
        config = load_config(args.config, _MODE_BY_COMMAND[args.command], overrides)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        code = _COMMANDS[args.command](config, out, args.format, not args.no_figures)
    except ConfigError as exc:
        print(f"error: ConfigError: {exc}", file=sys.stderr)
        return 2
    except FitFailed as exc:
        print(f"error: FitFailed: {exc}", file=sys.stderr)
        return 4
    except HamspectError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    print(
        f"[{args.command}] completed in {time.monotonic() - started:.1f}s "
        f"with {worker_count()} worker(s)",
        file=sys.stderr,
    )
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
