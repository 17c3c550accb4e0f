"""Flat key-value experiment configuration files.

Grammar: one ``key = value`` pair per line; blank lines and lines starting
with ``#`` are ignored; keys carry explicit units in their names; unknown
or duplicate keys are errors.  Lists are comma-separated.  Booleans are
``true``/``false``.

Example::

    mode = two-axis
    h_r_x_energy = 0.1
    h_r_z_energy = 0.05
    h_k_x_energy = 0.6
    h_k_y_energy = 0.45
    h_k_z_energy = 0.1
    delta_t_time_units = 0.25
    n_time_points = 2000
    n_ensemble = 20
    eta_error_probability = 0.1
    seed = 12345
    t_predict_r_time_units = 30
    t_predict_k_time_units = 4.5
"""

from __future__ import annotations

import hashlib
from pathlib import Path

from .bloch import HamiltonianCoeffs
from .errors import ConfigError
from .experiments import ExperimentConfig

__all__ = [
    "parse_config_text",
    "load_config",
    "canonical_items",
    "canonical_lines",
    "config_hash",
]


def _parse_bool(raw: str) -> bool:
    if raw == "true":
        return True
    if raw == "false":
        return False
    raise ConfigError(f"expected true/false, got {raw!r}")


def _parse_int_list(raw: str) -> tuple[int, ...]:
    return tuple(int(x.strip()) for x in raw.split(",") if x.strip())


def _parse_float_list(raw: str) -> tuple[float, ...]:
    return tuple(float(x.strip()) for x in raw.split(",") if x.strip())


# key -> (parser, default); required keys have the _REQUIRED sentinel.
_REQUIRED = object()
_KEYS: dict[str, tuple] = {
    "mode": (str, None),
    "h_r_x_energy": (float, _REQUIRED),
    "h_r_y_energy": (float, 0.0),
    "h_r_z_energy": (float, 0.0),
    "h_k_x_energy": (float, None),
    "h_k_y_energy": (float, None),
    "h_k_z_energy": (float, None),
    "delta_t_time_units": (float, _REQUIRED),
    "n_time_points": (int, _REQUIRED),
    "n_ensemble": (int, _REQUIRED),
    "eta_error_probability": (float, 0.0),
    "seed": (int, _REQUIRED),
    "t_predict_r_time_units": (float, _REQUIRED),
    "t_predict_k_time_units": (float, None),
    "analytic": (_parse_bool, False),
    "trials": (int, 1),
    "delta_t_k_time_units": (float, None),
    "n_time_points_k": (int, None),
    "scaling_sweep_variable": (str, "n_ensemble"),
    "scaling_sweep_values": (_parse_int_list, ()),
    "scaling_trials_per_point": (int, 10),
    "scaling_eta_values": (_parse_float_list, ()),
}


def parse_config_text(
    text: str, mode: str | None = None, overrides: dict | None = None
) -> ExperimentConfig:
    """Parse configuration text into an :class:`ExperimentConfig`.

    ``mode`` (from the CLI subcommand) fills in or must agree with the
    file's ``mode`` key; ``overrides`` replaces parsed values (CLI flags).
    """
    values: dict[str, object] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {stripped!r}")
        key, _, raw = stripped.partition("=")
        key, raw = key.strip(), raw.strip()
        if key not in _KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        parser = _KEYS[key][0]
        try:
            values[key] = parser(raw)
        except (ValueError, ConfigError) as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {exc}") from exc

    for key, (_parser, default) in _KEYS.items():
        if key not in values:
            if default is _REQUIRED:
                raise ConfigError(f"missing required key {key!r}")
            values[key] = default

    if overrides:
        values.update(overrides)

    file_mode = values["mode"]
    if mode is not None:
        if file_mode is not None and file_mode != mode:
            raise ConfigError(
                f"config declares mode {file_mode!r} but the command runs {mode!r}"
            )
        values["mode"] = mode
    elif file_mode is None:
        raise ConfigError("mode is not set (neither in the file nor by the command)")

    h_k = None
    k_parts = [values["h_k_x_energy"], values["h_k_y_energy"], values["h_k_z_energy"]]
    if any(p is not None for p in k_parts):
        h_k = HamiltonianCoeffs(*(0.0 if p is None else p for p in k_parts))

    return ExperimentConfig(
        mode=values["mode"],
        h_r=HamiltonianCoeffs(
            values["h_r_x_energy"], values["h_r_y_energy"], values["h_r_z_energy"]
        ),
        h_k=h_k,
        delta_t=values["delta_t_time_units"],
        n_s=values["n_time_points"],
        n_e=values["n_ensemble"],
        eta=values["eta_error_probability"],
        seed=values["seed"],
        t_predict_r=values["t_predict_r_time_units"],
        t_predict_k=values["t_predict_k_time_units"],
        analytic=values["analytic"],
        trials=values["trials"],
        delta_t_k=values["delta_t_k_time_units"],
        n_s_k=values["n_time_points_k"],
        scaling_sweep_variable=values["scaling_sweep_variable"],
        scaling_sweep_values=values["scaling_sweep_values"],
        scaling_trials_per_point=values["scaling_trials_per_point"],
        scaling_eta_values=values["scaling_eta_values"],
    )


def load_config(
    path: str | Path, mode: str | None = None, overrides: dict | None = None
) -> ExperimentConfig:
    return parse_config_text(Path(path).read_text(encoding="utf-8"), mode, overrides)


def canonical_items(config: ExperimentConfig) -> list[tuple[str, str]]:
    """Canonical key-value pairs of an effective configuration."""
    items = [
        ("mode", config.mode),
        ("h_r_x_energy", repr(config.h_r.h_x)),
        ("h_r_y_energy", repr(config.h_r.h_y)),
        ("h_r_z_energy", repr(config.h_r.h_z)),
    ]
    if config.h_k is not None:
        items += [
            ("h_k_x_energy", repr(config.h_k.h_x)),
            ("h_k_y_energy", repr(config.h_k.h_y)),
            ("h_k_z_energy", repr(config.h_k.h_z)),
        ]
    items += [
        ("delta_t_time_units", repr(config.delta_t)),
        ("n_time_points", str(config.n_s)),
        ("n_ensemble", str(config.n_e)),
        ("eta_error_probability", repr(config.eta)),
        ("seed", str(config.seed)),
        ("t_predict_r_time_units", repr(config.t_predict_r)),
    ]
    if config.t_predict_k is not None:
        items.append(("t_predict_k_time_units", repr(config.t_predict_k)))
    if config.delta_t_k is not None:
        items.append(("delta_t_k_time_units", repr(config.delta_t_k)))
    if config.n_s_k is not None:
        items.append(("n_time_points_k", str(config.n_s_k)))
    items.append(("analytic", "true" if config.analytic else "false"))
    items.append(("trials", str(config.trials)))
    if config.mode == "scaling":
        items += [
            ("scaling_sweep_variable", config.scaling_sweep_variable),
            ("scaling_sweep_values", ",".join(str(v) for v in config.scaling_sweep_values)),
            ("scaling_trials_per_point", str(config.scaling_trials_per_point)),
            ("scaling_eta_values", ",".join(repr(v) for v in config.scaling_eta_values)),
        ]
    return items


def canonical_lines(config: ExperimentConfig) -> list[str]:
    """Canonical ``key = value`` rendering of an effective configuration."""
    return [f"{k} = {v}" for k, v in canonical_items(config)]


def config_hash(config: ExperimentConfig) -> str:
    text = "\n".join(canonical_lines(config))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]
