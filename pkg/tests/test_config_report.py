"""Config-file grammar, validation, hashing and table rendering."""

from __future__ import annotations

import json

import pytest

from hamspect.bloch import HamiltonianCoeffs
from hamspect.config import (
    canonical_lines,
    config_hash,
    load_config,
    parse_config_text,
)
from hamspect.errors import ConfigError
from hamspect.experiments import ExperimentConfig
from hamspect.report import render_table


BASE = """
mode = single
h_r_x_energy = 0.1
h_r_z_energy = 0.05
delta_t_time_units = 0.25
n_time_points = 2000
n_ensemble = 20
eta_error_probability = 0.1
seed = 42
t_predict_r_time_units = 30
"""


class TestGrammar:
    def test_minimal_config(self):
        cfg = parse_config_text(BASE)
        assert cfg.mode == "single"
        assert cfg.h_r == HamiltonianCoeffs(0.1, 0.0, 0.05)
        assert cfg.h_k is None
        assert cfg.seed == 42
        assert not cfg.analytic

    def test_comments_and_blank_lines_ignored(self):
        cfg = parse_config_text("# a comment\n\n" + BASE + "\n# trailing\n")
        assert cfg.n_s == 2000

    def test_unknown_key_is_error(self):
        with pytest.raises(ConfigError, match="unknown key"):
            parse_config_text(BASE + "\nnot_a_key = 3\n")

    def test_duplicate_key_is_error(self):
        with pytest.raises(ConfigError, match="duplicate"):
            parse_config_text(BASE + "\nseed = 43\n")

    def test_missing_required_key_is_error(self):
        broken = BASE.replace("seed = 42", "")
        with pytest.raises(ConfigError, match="seed"):
            parse_config_text(broken)

    def test_bad_value_is_error(self):
        with pytest.raises(ConfigError, match="bad value"):
            parse_config_text(BASE.replace("seed = 42", "seed = forty-two"))
        with pytest.raises(ConfigError, match="bad value"):
            parse_config_text(BASE + "\nanalytic = yes\n")

    def test_missing_equals_is_error(self):
        with pytest.raises(ConfigError, match="key = value"):
            parse_config_text(BASE + "\njust some words\n")

    def test_lists_parse(self):
        text = BASE.replace("mode = single", "mode = scaling")
        text += "\nscaling_sweep_values = 2, 20, 200\nscaling_eta_values = 0.0, 0.1\n"
        cfg = parse_config_text(text)
        assert cfg.scaling_sweep_values == (2, 20, 200)
        assert cfg.scaling_eta_values == (0.0, 0.1)

    def test_mode_mismatch_rejected(self):
        with pytest.raises(ConfigError, match="mode"):
            parse_config_text(BASE, mode="two-axis")

    def test_mode_filled_from_command(self):
        cfg = parse_config_text(BASE.replace("mode = single\n", ""), mode="single")
        assert cfg.mode == "single"

    def test_overrides_apply(self):
        cfg = parse_config_text(BASE, overrides={"seed": 7, "analytic": True})
        assert cfg.seed == 7
        assert cfg.analytic


class TestValidation:
    def test_two_axis_needs_second_hamiltonian(self):
        with pytest.raises(ConfigError, match="second Hamiltonian"):
            parse_config_text(BASE.replace("mode = single", "mode = two-axis"))

    def test_reference_must_be_in_plane(self):
        with pytest.raises(ConfigError, match="x-z plane"):
            parse_config_text(BASE + "\nh_r_y_energy = 0.2\n")

    def test_trivial_reference_rejected(self):
        text = BASE.replace("h_r_x_energy = 0.1", "h_r_x_energy = 0.0").replace(
            "h_r_z_energy = 0.05", "h_r_z_energy = 0.0"
        )
        with pytest.raises(ConfigError, match="nontrivial"):
            parse_config_text(text)

    def test_sweep_must_increase(self):
        text = BASE.replace("mode = single", "mode = scaling")
        text += "\nscaling_sweep_values = 20, 20, 200\n"
        with pytest.raises(ConfigError, match="strictly increasing"):
            parse_config_text(text)

    def test_unknown_sweep_variable(self):
        text = BASE.replace("mode = single", "mode = scaling")
        text += "\nscaling_sweep_values = 2, 20\nscaling_sweep_variable = shots\n"
        with pytest.raises(ConfigError, match="sweep variable"):
            parse_config_text(text)

    def test_sampling_errors_become_config_errors(self):
        with pytest.raises(ConfigError):
            parse_config_text(BASE.replace("eta_error_probability = 0.1",
                                           "eta_error_probability = 0.7"))


class TestHash:
    def test_hash_is_stable(self):
        a = parse_config_text(BASE)
        b = parse_config_text(BASE)
        assert config_hash(a) == config_hash(b)

    def test_hash_tracks_values(self):
        a = parse_config_text(BASE)
        b = parse_config_text(BASE.replace("seed = 42", "seed = 43"))
        assert config_hash(a) != config_hash(b)

    def test_canonical_lines_round_trip(self):
        cfg = parse_config_text(BASE)
        again = parse_config_text("\n".join(canonical_lines(cfg)))
        assert again == cfg

    def test_load_from_file(self, tmp_path):
        p = tmp_path / "c.txt"
        p.write_text(BASE)
        assert load_config(p) == parse_config_text(BASE)


class TestRenderTable:
    ROWS = [
        {"a": 1, "b": 0.1, "c": "x"},
        {"a": 2, "b": float("inf"), "c": None},
    ]

    def test_csv_format(self):
        text = render_table(["a", "b", "c"], self.ROWS, [("k", "v")], "table")
        lines = text.splitlines()
        assert lines[0] == "# k = v"
        assert lines[1] == "a,b,c"
        assert lines[2] == "1,0.1,x"
        assert lines[3] == "2,inf,"

    def test_float_cells_round_trip(self):
        value = 0.1 + 0.2  # not exactly representable as "0.3"
        text = render_table(["v"], [{"v": value}], (), "table")
        assert float(text.splitlines()[-1]) == value

    def test_json_lines_format(self):
        text = render_table(["a", "b", "c"], self.ROWS, [("k", "v")], "json-lines")
        lines = text.splitlines()
        assert json.loads(lines[0]) == {"meta": {"k": "v"}}
        assert json.loads(lines[1]) == {"a": 1, "b": 0.1, "c": "x"}
        assert json.loads(lines[2]) == {"a": 2, "b": "inf", "c": None}

    def test_unknown_format_rejected(self):
        with pytest.raises(ValueError):
            render_table(["a"], [], (), "yaml")


class TestExperimentConfigDirect:
    def test_montecarlo_requires_predict_k(self):
        with pytest.raises(ConfigError, match="t_predict_k"):
            ExperimentConfig(
                mode="montecarlo",
                h_r=HamiltonianCoeffs(0.1, 0.0, 0.05),
                h_k=HamiltonianCoeffs(0.6, 0.45, 0.1),
                delta_t=0.25,
                n_s=100,
                n_e=5,
                eta=0.0,
                seed=1,
                t_predict_r=30.0,
            )

    def test_trials_must_be_positive(self):
        with pytest.raises(ConfigError, match="trials"):
            ExperimentConfig(
                mode="single",
                h_r=HamiltonianCoeffs(0.1, 0.0, 0.05),
                h_k=None,
                delta_t=0.25,
                n_s=100,
                n_e=5,
                eta=0.0,
                seed=1,
                t_predict_r=30.0,
                trials=0,
            )
