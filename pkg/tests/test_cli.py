"""
End-to-end runs of the critnls command line.
"""

import json

import numpy as np
import pytest

from critnls import __version__
from critnls.cli import main
from critnls.engine.grid import RadialField, make_grid
from critnls.persistence import read_json, write_field_csv

pytestmark = pytest.mark.integration

EVOLVE_CONFIG = {
    "schema": 1,
    "r_max": 40.0,
    "n": 2047,
    "dt0": 2e-3,
    "t_end": 0.05,
    "output_every": 5,
    "virial_R_list": [5.0],
    "exterior_R_list": [5.0],
    "initial": {"kind": "gaussian", "amplitude": 0.5},
}


@pytest.fixture(autouse=True)
def _isolated_logging(reset_logging):
    yield


def _config(tmp_path, document, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(document))
    return str(path)


def _stdout_json(capsys):
    return json.loads(capsys.readouterr().out)


def _stderr_error(capsys):
    lines = [line for line in capsys.readouterr().err.splitlines() if line.startswith("{")]
    return json.loads(lines[-1])


class TestUsage:
    @pytest.mark.edge_case
    def test_unknown_command(self):
        with pytest.raises(SystemExit) as excinfo:
            main(["teleport"])
        assert excinfo.value.code == 2

    @pytest.mark.edge_case
    def test_missing_required_flag(self):
        with pytest.raises(SystemExit) as excinfo:
            main(["make-data"])
        assert excinfo.value.code == 2

    def test_help_describes_files(self, capsys):
        with pytest.raises(SystemExit) as excinfo:
            main(["--help"])
        assert excinfo.value.code == 0
        out = capsys.readouterr().out
        assert "trajectory.csv" in out
        assert "verify-variational" in out

    def test_version(self, capsys):
        with pytest.raises(SystemExit):
            main(["--version"])
        assert __version__ in capsys.readouterr().out

    @pytest.mark.edge_case
    def test_eps_out_of_range(self, tmp_path, capsys):
        assert main(["make-data", "--eps", "0.5", "--out", str(tmp_path)]) == 2
        error = _stderr_error(capsys)
        assert error["error"] == "CONFIGURATION_ERROR"
        assert error["exit_code"] == 2

    @pytest.mark.edge_case
    def test_partial_grid_flags(self, tmp_path, capsys):
        assert main(["make-data", "--eps", "0.1", "--r-max", "1.0", "--out", str(tmp_path)]) == 2
        assert _stderr_error(capsys)["error"] == "USAGE_ERROR"

    @pytest.mark.edge_case
    def test_missing_config_file(self, tmp_path, capsys):
        code = main(["evolve", "--config", str(tmp_path / "absent.json"), "--out", str(tmp_path)])
        assert code == 2
        assert _stderr_error(capsys)["error"] == "USAGE_ERROR"

    @pytest.mark.edge_case
    def test_evolve_needs_config(self, tmp_path):
        assert main(["evolve", "--out", str(tmp_path)]) == 2

    @pytest.mark.edge_case
    def test_invalid_config_file(self, tmp_path, capsys):
        path = _config(tmp_path, {**EVOLVE_CONFIG, "gamma": 3.0})
        assert main(["evolve", "--config", path, "--out", str(tmp_path)]) == 2
        error = _stderr_error(capsys)
        assert error["message"] == "invalid config file"
        assert error["details"]["errors"]

    @pytest.mark.edge_case
    def test_count_must_be_positive(self, tmp_path):
        assert main(["verify-variational", "--count", "0", "--out", str(tmp_path)]) == 2

    @pytest.mark.edge_case
    def test_functionals_needs_input(self, tmp_path, capsys):
        assert main(["functionals", "--out", str(tmp_path)]) == 2
        assert _stderr_error(capsys)["error"] == "USAGE_ERROR"

    @pytest.mark.edge_case
    def test_profiles_missing_field(self, tmp_path):
        assert main(["profiles", "--field", str(tmp_path / "none.csv"), "--out", str(tmp_path)]) == 2


class TestCommands:
    def test_ground_state(self, tmp_path, capsys):
        assert main(["ground-state", "--out", str(tmp_path)]) == 0
        printed = _stdout_json(capsys)
        written = read_json(tmp_path / "threshold.json")
        assert printed == written
        assert written["discrepancy"] <= 1e-8
        assert written["m_closed_form"] == pytest.approx(4.2726, abs=1e-4)

    @pytest.mark.parametrize("eps, membership", [(0.1, "K_minus"), (-0.1, "K_plus")])
    def test_make_data(self, tmp_path, capsys, eps, membership):
        assert main(["make-data", "--eps", str(eps), "--out", str(tmp_path)]) == 0
        report = read_json(tmp_path / "report.json")
        assert report["classification"] == membership
        assert report["functionals"]["energy"] < 4.2726
        assert report["dilation"] == pytest.approx(1e-3)
        assert (tmp_path / "field.csv").is_file()
        assert _stdout_json(capsys) == report

    def test_functionals_of_field(self, tmp_path, capsys):
        grid = make_grid(20.0, 4095)
        path = write_field_csv(tmp_path / "in.csv", RadialField(grid, np.exp(-grid.r**2)))
        assert main(["functionals", "--field", str(path), "--out", str(tmp_path)]) == 0
        report = read_json(tmp_path / "functionals.json")
        assert report["l2_norm_sq"] == pytest.approx((np.pi / 2.0) ** 1.5, rel=1e-8)

    def test_functionals_of_config(self, tmp_path, capsys):
        path = _config(tmp_path, EVOLVE_CONFIG)
        assert main(["functionals", "--config", path, "--out", str(tmp_path)]) == 0
        assert _stdout_json(capsys)["K"] > 0

    def test_variational_is_deterministic(self, tmp_path):
        first, second = tmp_path / "a", tmp_path / "b"
        assert main(["verify-variational", "--count", "25", "--seed", "7", "--out", str(first)]) == 0
        assert main(["verify-variational", "--count", "25", "--seed", "7", "--out", str(second)]) == 0
        assert (first / "variational.json").read_bytes() == (second / "variational.json").read_bytes()
        assert read_json(first / "variational.json")["seed"] == 7

    def test_evolve(self, tmp_path, capsys):
        path = _config(tmp_path, EVOLVE_CONFIG)
        assert main(["evolve", "--config", path, "--t-end", "0.02", "--out", str(tmp_path)]) == 0
        verdict = read_json(tmp_path / "verdict.json")
        assert verdict["stop_reason"] == "t_end"
        assert "proxy" in verdict["note"]
        header = (tmp_path / "trajectory.csv").read_text().splitlines()[0].split(",")
        assert header[:9] == ["t", "M", "E", "Ec", "K", "H", "grad2", "L4", "L6"]
        assert "VR@5" in header and "extE@5" in header
        assert _stdout_json(capsys)["kind"] == verdict["kind"]

    def test_dichotomy_runs_both_signs(self, tmp_path, capsys):
        document = {
            "schema": 1,
            "r_max": 40.0,
            "n": 2047,
            "dt0": 5e-3,
            "t_end": 0.05,
            "blowup_dt_floor": 1e-4,
            "output_every": 2,
            "virial_R_list": [5.0],
            "exterior_R_list": [5.0],
            "eps_list": [0.1],
        }
        path = _config(tmp_path, document)
        assert main(["dichotomy", "--config", path, "--out", str(tmp_path)]) == 0
        summary = read_json(tmp_path / "summary.json")
        assert [run["eps"] for run in summary["runs"]] == [-0.1, 0.1]
        assert [run["classification"] for run in summary["runs"]] == ["K_plus", "K_minus"]
        assert all(run["error"] is None and run["verdict"] for run in summary["runs"])
        assert all(run["dilation"] == pytest.approx(0.005) for run in summary["runs"])
        for eps in ("-0.1", "+0.1"):
            assert (tmp_path / f"eps_{eps}" / "verdict.json").is_file()
        assert _stdout_json(capsys) == summary

    def test_dichotomy_absolute_units_report_failed_members(self, tmp_path, capsys):
        document = {
            "schema": 1,
            "r_max": 40.0,
            "n": 2047,
            "virial_R_list": [5.0],
            "exterior_R_list": [5.0],
            "eps_list": [0.1],
            "dilation_rule": "cubic",
            "dilation_factor": 1.0,
        }
        path = _config(tmp_path, document)
        code = main(["dichotomy", "--config", path, "--absolute-units", "--out", str(tmp_path)])
        assert code == 1
        summary = read_json(tmp_path / "summary.json")
        assert [run["eps"] for run in summary["runs"]] == [-0.1, 0.1]
        assert all(run["error"]["error"] == "CONSTRUCTION_ERROR" for run in summary["runs"])

    def test_profiles(self, tmp_path, capsys):
        grid = make_grid(4.0, 16383)
        width = 2.0**-5
        field = RadialField(grid, np.exp(-(grid.r**2) / width**2))
        path = write_field_csv(tmp_path / "bubble.csv", field)
        code = main(
            ["profiles", "--field", str(path), "--reference", str(path), "--out", str(tmp_path)]
        )
        assert code == 0
        bubble = read_json(tmp_path / "bubble.json")
        assert abs(bubble["k_star"] - 5) <= 1
        assert bubble["correlation_if_reference_given"] == pytest.approx(1.0, abs=1e-2)
        assert (tmp_path / "profile.csv").is_file()
