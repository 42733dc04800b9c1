"""
SimConfig validation and schema-1 config files.
"""

import json
import math

import pytest
from pydantic import ValidationError

from critnls.config import SimConfig, load_config_document
from critnls.engine.diagnostics import VerdictThresholds
from critnls.exceptions import ConfigurationError, UsageError
from critnls.schemas import FILE_SCHEMAS, DichotomyConfigFile, SimConfigFile
from critnls.validators import ParameterValidator


def _write(tmp_path, document, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(document))
    return path


class TestSimConfig:
    @pytest.mark.fast
    def test_defaults_validate(self):
        config = SimConfig()
        assert config.validate()
        assert config.adapt == "gradient_capped"
        assert config.n == 8191

    @pytest.mark.fast
    @pytest.mark.edge_case
    @pytest.mark.parametrize(
        "changes",
        [
            {"n": 1000},
            {"n": 8},
            {"r_max": -1.0},
            {"dt0": 0.0},
            {"t_end": -1.0},
            {"adapt": "cfl"},
            {"blowup_dt_floor": 1.0},
            {"output_every": 0},
            {"late_fraction": 1.0},
            {"absorb_width": 0.0},
            {"transient_fraction": 1.0},
            {"absorb_strength": -0.5},
            {"monotone_window": 1},
            {"virial_R_list": [30.0]},
            {"exterior_R_list": [100.0]},
        ],
    )
    def test_invalid_entries(self, changes):
        config = SimConfig(**changes)
        with pytest.raises(ConfigurationError):
            config.validate()

    @pytest.mark.fast
    def test_from_dict_rejects_unknown_keys(self):
        with pytest.raises(ConfigurationError) as excinfo:
            SimConfig.from_dict({"r_max": 40.0, "n": 2047, "gamma": 1.0})
        assert "gamma" in excinfo.value.message

    @pytest.mark.fast
    def test_from_dict_validates(self):
        with pytest.raises(ConfigurationError):
            SimConfig.from_dict({"n": 2048})
        assert SimConfig.from_dict({"r_max": 40.0, "n": 2047}).r_max == 40.0

    @pytest.mark.fast
    def test_with_overrides_ignores_none(self):
        base = SimConfig(t_end=2.0)
        config = base.with_overrides(t_end=None, dt0=1e-3)
        assert config.t_end == 2.0
        assert config.dt0 == 1e-3
        assert base.dt0 == 5e-4

    @pytest.mark.fast
    def test_with_overrides_validates(self):
        with pytest.raises(ConfigurationError):
            SimConfig().with_overrides(dt0=-1.0)

    @pytest.mark.fast
    def test_round_trip_through_dict(self):
        config = SimConfig(r_max=40.0, n=2047, virial_R_list=[4.0])
        assert SimConfig.from_dict(config.to_dict()) == config

    @pytest.mark.fast
    def test_make_grid(self):
        grid = SimConfig(r_max=40.0, n=2047).make_grid()
        assert grid.r_max == 40.0
        assert grid.n == 2047

    @pytest.mark.fast
    def test_thresholds(self):
        thresholds = SimConfig(decay_factor=5.0, rate_floor=1e-3).thresholds()
        assert isinstance(thresholds, VerdictThresholds)
        assert thresholds.decay_factor == 5.0
        assert thresholds.rate_floor == 1e-3

    @pytest.mark.fast
    def test_from_env(self, monkeypatch):
        monkeypatch.setenv("CRITNLS_R_MAX", "80")
        monkeypatch.setenv("CRITNLS_N", "4095")
        config = SimConfig.from_env()
        assert config.r_max == 80.0
        assert config.n == 4095

    @pytest.mark.fast
    def test_from_env_defaults(self, monkeypatch):
        monkeypatch.delenv("CRITNLS_R_MAX", raising=False)
        monkeypatch.delenv("CRITNLS_N", raising=False)
        assert SimConfig.from_env() == SimConfig()

    @pytest.mark.fast
    @pytest.mark.edge_case
    def test_radius_limits(self):
        # 3R must stay inside r_max; exterior radii may reach r_max and 0
        assert SimConfig(r_max=60.0, virial_R_list=[19.9], exterior_R_list=[0.0, 60.0]).validate()
        with pytest.raises(ConfigurationError) as excinfo:
            SimConfig(r_max=60.0, virial_R_list=[20.0]).validate()
        assert excinfo.value.details["limit"] == pytest.approx(20.0)
        with pytest.raises(ConfigurationError):
            SimConfig(virial_R_list=[0.0]).validate()
        with pytest.raises(ConfigurationError):
            SimConfig(exterior_R_list=[-1.0]).validate()


class TestParameterValidator:
    @pytest.mark.fast
    def test_positive(self):
        assert ParameterValidator.positive("dt0", 1) == 1.0
        for bad in (0.0, -1.0, math.inf, math.nan, True, "1", None):
            with pytest.raises(ConfigurationError):
                ParameterValidator.positive("dt0", bad)

    @pytest.mark.fast
    def test_fraction(self):
        assert ParameterValidator.fraction("late_fraction", 0.2) == 0.2
        assert ParameterValidator.fraction("transient_fraction", 0.0, allow_zero=True) == 0.0
        with pytest.raises(ConfigurationError, match=r"\(0, 1\)"):
            ParameterValidator.fraction("late_fraction", 0.0)
        with pytest.raises(ConfigurationError, match=r"\[0, 1\)"):
            ParameterValidator.fraction("transient_fraction", 1.0, allow_zero=True)

    @pytest.mark.fast
    def test_radii(self):
        assert ParameterValidator.radii("R", [1, 2.5], limit=2.5) == [1.0, 2.5]
        with pytest.raises(ConfigurationError, match="< 2.5"):
            ParameterValidator.radii("R", [2.5], limit=2.5, inclusive=False)
        with pytest.raises(ConfigurationError):
            ParameterValidator.radii("R", [math.nan])
        assert ParameterValidator.radii("R", [0.0], allow_zero=True) == [0.0]

    @pytest.mark.fast
    def test_epsilon(self):
        assert ParameterValidator.epsilon(-0.25) == -0.25
        for bad in (0.0, 0.3, math.nan):
            with pytest.raises(ConfigurationError):
                ParameterValidator.epsilon(bad)


class TestConfigFiles:
    @pytest.mark.fast
    def test_from_file(self, tmp_path):
        path = _write(
            tmp_path,
            {
                "schema": 1,
                "r_max": 40.0,
                "n": 2047,
                "t_end": 0.5,
                "initial": {"kind": "gaussian", "amplitude": 0.5},
            },
        )
        config = SimConfig.from_file(path)
        assert (config.r_max, config.n, config.t_end) == (40.0, 2047, 0.5)

    @pytest.mark.fast
    @pytest.mark.edge_case
    def test_schema_is_required(self, tmp_path):
        with pytest.raises(ValidationError):
            SimConfig.from_file(_write(tmp_path, {"r_max": 40.0, "n": 2047}))

    @pytest.mark.fast
    @pytest.mark.edge_case
    def test_wrong_schema_version(self):
        with pytest.raises(ValidationError):
            SimConfigFile.model_validate({"schema": 2})

    @pytest.mark.fast
    @pytest.mark.edge_case
    def test_extra_keys_forbidden(self):
        with pytest.raises(ValidationError):
            SimConfigFile.model_validate({"schema": 1, "gamma": 2.0})

    @pytest.mark.fast
    @pytest.mark.edge_case
    def test_missing_file(self, tmp_path):
        with pytest.raises(UsageError):
            load_config_document(tmp_path / "absent.json")

    @pytest.mark.fast
    @pytest.mark.edge_case
    def test_invalid_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        with pytest.raises(UsageError):
            load_config_document(path)

    @pytest.mark.fast
    @pytest.mark.edge_case
    def test_non_object_document(self, tmp_path):
        with pytest.raises(UsageError):
            load_config_document(_write(tmp_path, [1, 2, 3]))

    @pytest.mark.fast
    def test_initial_kinds_are_discriminated(self):
        model = SimConfigFile.model_validate(
            {"schema": 1, "initial": {"kind": "k_data", "eps": 0.1}}
        )
        assert model.initial.kind == "k_data"
        assert model.initial.R is None
        with pytest.raises(ValidationError):
            SimConfigFile.model_validate({"schema": 1, "initial": {"kind": "soliton"}})
        with pytest.raises(ValidationError):
            SimConfigFile.model_validate(
                {"schema": 1, "initial": {"kind": "k_data", "eps": 0.5}}
            )

    @pytest.mark.fast
    def test_sim_fields_match_sim_config(self):
        fields = SimConfigFile.model_validate({"schema": 1}).sim_fields()
        assert "initial" not in fields
        assert "schema_version" not in fields
        assert SimConfig.from_dict(fields) == SimConfig()

    @pytest.mark.fast
    def test_dichotomy_file(self):
        model = DichotomyConfigFile.model_validate(
            {"schema": 1, "eps_list": [0.1, -0.1], "dilation_rule": "quadratic"}
        )
        fields = model.sim_fields()
        assert "eps_list" not in fields and "dilation_rule" not in fields
        assert model.workers == 1
        with pytest.raises(ValidationError):
            DichotomyConfigFile.model_validate({"schema": 1, "dilation_rule": "linear"})

    @pytest.mark.fast
    def test_dichotomy_defaults_are_desk_recipe(self):
        model = DichotomyConfigFile.model_validate({"schema": 1})
        assert model.eps_list == [-0.2, -0.1, -0.05, 0.05, 0.1, 0.2]
        assert model.sweep_options() == {
            "R": None,
            "dilation_rule": "quadratic",
            "dilation_factor": 0.5,
            "time_in_dilation_units": True,
            "grid_in_dilation_units": True,
            "rate_floor_relative": True,
            "workers": 1,
        }
        config = SimConfig.from_dict(model.sim_fields())
        config.validate()
        assert config.r_max == 250.0 and config.n == 8191
        assert config.virial_R_list == [40.0, 80.0]
        assert config.absorbing is True
        assert config.rate_floor == pytest.approx(1e-2)

    @pytest.mark.fast
    def test_file_schemas_name_every_output(self):
        for name in ("threshold.json", "trajectory.csv", "verdict.json", "summary.json"):
            assert name in FILE_SCHEMAS
