"""Command-line behavior: outputs, determinism, exit codes, formats."""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np
import pytest

from hamspect.cli import main
from hamspect.measurement import load_record

from conftest import H_REF, PERIOD_REF


BASE_SINGLE = """
h_r_x_energy = 0.1
h_r_z_energy = 0.05
delta_t_time_units = 0.5
n_time_points = 1000
n_ensemble = 10
eta_error_probability = 0.1
seed = 42
t_predict_r_time_units = 30
"""

BASE_TWO_AXIS = BASE_SINGLE + """
h_k_x_energy = 0.6
h_k_y_energy = 0.45
h_k_z_energy = 0.1
t_predict_k_time_units = 4.5
"""


def write_config(tmp_path: Path, text: str, name: str = "cfg.txt") -> Path:
    p = tmp_path / name
    p.write_text(text)
    return p


def read_tables(directory: Path) -> dict[str, bytes]:
    return {
        p.name: p.read_bytes()
        for p in sorted(directory.iterdir())
        if p.suffix in (".csv", ".jsonl")
    }


class TestCharacterize:
    def test_outputs_and_determinism(self, tmp_path, capsys):
        cfg = write_config(tmp_path, BASE_SINGLE)
        assert main(["characterize", "--config", str(cfg), "--out", str(tmp_path / "a")]) == 0
        out = capsys.readouterr().out
        assert "omega_r" in out and "dist_r" in out
        assert main(["characterize", "--config", str(cfg), "--out", str(tmp_path / "b")]) == 0
        tables_a = read_tables(tmp_path / "a")
        tables_b = read_tables(tmp_path / "b")
        assert tables_a.keys() == tables_b.keys()
        assert set(tables_a) == {
            "estimates.csv", "pcurve_r.csv", "record_r.csv", "spectrum_r.csv",
        }
        for name in tables_a:
            assert tables_a[name] == tables_b[name]
        for fig in ("fig_record_r.png", "fig_spectrum_r.png", "fig_pcurve_r.png"):
            assert (tmp_path / "a" / fig).exists()

    def test_no_figures_flag(self, tmp_path):
        cfg = write_config(tmp_path, BASE_SINGLE)
        out = tmp_path / "nofig"
        assert main([
            "characterize", "--config", str(cfg), "--out", str(out), "--no-figures",
        ]) == 0
        assert not list(out.glob("*.png"))

    def test_seed_override_changes_outputs(self, tmp_path):
        cfg = write_config(tmp_path, BASE_SINGLE)
        main(["characterize", "--config", str(cfg), "--out", str(tmp_path / "a"), "--no-figures"])
        main([
            "characterize", "--config", str(cfg), "--out", str(tmp_path / "c"),
            "--seed", "43", "--no-figures",
        ])
        a = (tmp_path / "a" / "estimates.csv").read_bytes()
        c = (tmp_path / "c" / "estimates.csv").read_bytes()
        assert a != c

    def test_analytic_mode_is_exact(self, tmp_path):
        # Integer-period grid in analytic mode recovers the axis exactly.
        n_s = 1911
        delta_t = 17 * PERIOD_REF / n_s
        text = BASE_SINGLE.replace(
            "delta_t_time_units = 0.5", f"delta_t_time_units = {delta_t!r}"
        ).replace("n_time_points = 1000", f"n_time_points = {n_s}").replace(
            "eta_error_probability = 0.1", "eta_error_probability = 0.0"
        )
        cfg = write_config(tmp_path, text)
        out = tmp_path / "exact"
        assert main([
            "characterize", "--config", str(cfg), "--out", str(out),
            "--analytic", "--no-figures",
        ]) == 0
        rows = {
            line.split(",")[0]: line.split(",")
            for line in (out / "estimates.csv").read_text().splitlines()
            if line and not line.startswith("#") and not line.startswith("quantity")
        }
        assert abs(float(rows["dist_r"][1])) <= 1e-6

    def test_written_record_loads_back(self, tmp_path):
        cfg = write_config(tmp_path, BASE_SINGLE)
        out = tmp_path / "rec"
        main(["characterize", "--config", str(cfg), "--out", str(out), "--no-figures"])
        rec = load_record(out / "record_r.csv")
        # the record carries its own derived sub-seed, not the root seed
        assert len(rec.z_m) == 1000
        assert rec.config.n_e == 10
        assert not rec.analytic


class TestTwoAxis:
    def test_runs_and_reports_phase(self, tmp_path, capsys):
        cfg = write_config(tmp_path, BASE_TWO_AXIS)
        out = tmp_path / "two"
        assert main(["two-axis", "--config", str(cfg), "--out", str(out), "--no-figures"]) == 0
        text = (out / "estimates.csv").read_text()
        for q in ("omega_k", "phi", "c_amplitude", "beta", "dist_k"):
            assert f"\n{q}," in text
        assert (out / "record_phase.csv").exists()


class TestMonteCarlo:
    def test_worker_independence(self, tmp_path, monkeypatch):
        cfg = write_config(tmp_path, BASE_TWO_AXIS + "\ntrials = 6\n")
        monkeypatch.setenv("HAMSPECT_WORKERS", "1")
        assert main(["montecarlo", "--config", str(cfg), "--out", str(tmp_path / "w1"), "--no-figures"]) == 0
        monkeypatch.setenv("HAMSPECT_WORKERS", "3")
        assert main(["montecarlo", "--config", str(cfg), "--out", str(tmp_path / "w3"), "--no-figures"]) == 0
        t1 = read_tables(tmp_path / "w1")
        t3 = read_tables(tmp_path / "w3")
        assert t1.keys() == t3.keys()
        for name in t1:
            assert t1[name] == t3[name], name

    def test_trials_flag_and_histograms(self, tmp_path):
        cfg = write_config(tmp_path, BASE_TWO_AXIS)
        out = tmp_path / "mc"
        assert main([
            "montecarlo", "--config", str(cfg), "--out", str(out), "--trials", "5",
        ]) == 0
        assert (out / "hist_dist_r.csv").exists()
        assert (out / "hist_eta_hat.csv").exists()
        assert (out / "fig_hist_dist_k.png").exists()
        coverage = (out / "coverage.csv").read_text()
        assert "trials_ok,5" in coverage.replace(" ", "")

    def test_json_lines_format(self, tmp_path):
        cfg = write_config(tmp_path, BASE_TWO_AXIS + "\ntrials = 3\n")
        out = tmp_path / "jl"
        assert main([
            "montecarlo", "--config", str(cfg), "--out", str(out),
            "--format", "json-lines", "--no-figures",
        ]) == 0
        lines = (out / "trials.jsonl").read_text().splitlines()
        meta = json.loads(lines[0])["meta"]
        assert meta["command"] == "montecarlo"
        rows = [json.loads(line) for line in lines[1:]]
        assert [r["trial"] for r in rows] == [0, 1, 2]
        assert all(r["status"] == "ok" for r in rows)


class TestScaling:
    def test_fit_written(self, tmp_path):
        cfg = write_config(
            tmp_path,
            BASE_SINGLE
            + "\nscaling_sweep_values = 5, 50, 500\nscaling_trials_per_point = 4\n",
        )
        out = tmp_path / "sc"
        assert main(["scaling", "--config", str(cfg), "--out", str(out), "--no-figures"]) == 0
        fit = (out / "scaling_fit.csv").read_text().splitlines()[-1]
        slope = float(fit.split(",")[1])
        assert -0.8 <= slope <= -0.2


class TestExitCodes:
    def test_config_error_is_2(self, tmp_path, capsys):
        cfg = write_config(tmp_path, BASE_SINGLE + "\nbogus_key = 1\n")
        assert main(["characterize", "--config", str(cfg), "--out", str(tmp_path / "x")]) == 2
        assert "ConfigError" in capsys.readouterr().err

    def test_degenerate_signal_is_3(self, tmp_path, capsys):
        # z-aligned reference axis: the pole state never precesses.
        text = BASE_SINGLE.replace("h_r_x_energy = 0.1", "h_r_x_energy = 0.0")
        cfg = write_config(tmp_path, text)
        assert main(["characterize", "--config", str(cfg), "--out", str(tmp_path / "x")]) == 3
        err = capsys.readouterr().err
        assert "DegenerateSignal" in err or "NoPeak" in err

    def test_fit_failure_is_4(self, tmp_path, capsys):
        cfg = write_config(
            tmp_path,
            BASE_SINGLE + "\nscaling_sweep_values = 5, 50\nscaling_trials_per_point = 3\n",
        )
        assert main(["scaling", "--config", str(cfg), "--out", str(tmp_path / "x")]) == 4
        assert "FitFailed" in capsys.readouterr().err

    def test_estimated_axis_outside_rotation_band_is_3(self, tmp_path, capsys):
        # Reference axis with a clearly measurable polar angle of 0.6 rad,
        # below the pi/4 bound: the equator-rotation pulse is undefined and
        # the two-axis protocol reports a domain failure.
        text = BASE_TWO_AXIS.replace(
            "h_r_x_energy = 0.1", "h_r_x_energy = 0.06776202163729985"
        ).replace(
            "h_r_z_energy = 0.05", "h_r_z_energy = 0.09904872177669564"
        ).replace("t_predict_r_time_units = 30", "t_predict_r_time_units = 27")
        cfg = write_config(tmp_path, text)
        code = main(["two-axis", "--config", str(cfg), "--out", str(tmp_path / "x")])
        assert code == 3
        assert "DomainError" in capsys.readouterr().err
