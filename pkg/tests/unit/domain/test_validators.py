"""Tests for run configuration and subcommand schemas."""

import json

import pytest

from fgfield.domain.entities.matrices import DensityNormalization
from fgfield.domain.exceptions import ValidationError
from fgfield.domain.validators import (
    ConvergeCommand,
    DecomposeCommand,
    DfgfCommand,
    DiagnoseCommand,
    GreenCommand,
    SampleCommand,
    build_run_config,
    load_run_config,
    parse_command,
)
from fgfield.domain.validators.run_config import RunConfig


class TestRunConfig:
    def test_defaults(self):
        config = RunConfig()
        assert config.seed is None
        assert config.n == 64
        assert config.spacing == pytest.approx(1.0 / 64)

    def test_require_seed(self):
        with pytest.raises(ValidationError) as exc_info:
            RunConfig().require_seed()
        assert exc_info.value.field == "seed"
        assert RunConfig(seed=3).require_seed() == 3

    @pytest.mark.parametrize("seed", [-1, 2 ** 64])
    def test_seed_range(self, seed):
        with pytest.raises(ValidationError) as exc_info:
            build_run_config({"seed": seed})
        assert exc_info.value.field == "seed"

    def test_unknown_key(self):
        with pytest.raises(ValidationError) as exc_info:
            build_run_config({"bogus": 1})
        assert exc_info.value.field == "bogus"

    def test_merged_ignores_none(self):
        config = RunConfig(seed=1, n=32)
        merged = config.merged(n=None, d=2)
        assert merged.n == 32
        assert merged.d == 2
        assert merged.seed == 1

    def test_to_dict_has_spacing(self):
        data = RunConfig(n=4, box_length=2.0).to_dict()
        assert data["spacing"] == 0.5

    def test_load_from_file_with_overrides(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"seed": 11, "n": 16, "ensemble_size": 5}))
        config = load_run_config(path, n=32, seed=None)
        assert config.seed == 11
        assert config.n == 32
        assert config.ensemble_size == 5

    def test_missing_file(self, tmp_path):
        with pytest.raises(ValidationError) as exc_info:
            load_run_config(tmp_path / "absent.json")
        assert exc_info.value.field == "config"

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text("{seed: 1")
        with pytest.raises(ValidationError):
            load_run_config(path)

    def test_non_object(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text("[1, 2]")
        with pytest.raises(ValidationError):
            load_run_config(path)


class TestCommandSchemas:
    def test_sample_single_order(self):
        command = parse_command(SampleCommand, {"d": 2, "n": 16, "s": 1.0, "box": None, "bits": None})
        assert command.orders == [1.0]
        assert command.box == 1.0
        assert command.bits == 8

    def test_sample_order_list(self):
        command = parse_command(SampleCommand, {"d": 1, "n": 16, "s_list": [0.5, 1.0]})
        assert command.orders == [0.5, 1.0]

    def test_sample_needs_exactly_one_order(self):
        with pytest.raises(ValidationError) as exc_info:
            parse_command(SampleCommand, {"d": 1, "n": 16, "s": 1.0, "s_list": [0.5]})
        assert exc_info.value.field == "SampleCommand"
        with pytest.raises(ValidationError):
            parse_command(SampleCommand, {"d": 1, "n": 16})

    def test_white_noise_needs_no_order(self):
        command = parse_command(SampleCommand, {"d": 1, "n": 16, "mode": "white"})
        assert command.orders == [0.0]

    def test_images_only_in_the_plane(self):
        with pytest.raises(ValidationError):
            parse_command(SampleCommand, {"d": 1, "n": 16, "s": 1.0, "png": True})

    def test_field_errors_carry_location(self):
        with pytest.raises(ValidationError) as exc_info:
            parse_command(SampleCommand, {"d": 4, "n": 16, "s": 1.0})
        assert exc_info.value.field == "d"

    def test_green_point_dimension(self):
        with pytest.raises(ValidationError):
            parse_command(GreenCommand, {"mode": "int", "d": 2, "s": 1.0, "x": [0.1], "y": [0.2, 0.0]})

    def test_dfgf_order_range(self):
        with pytest.raises(ValidationError) as exc_info:
            parse_command(DfgfCommand, {"d": 1, "s": 1.0, "delta": 0.1})
        assert exc_info.value.field == "s"

    def test_dfgf_normalization(self):
        command = parse_command(DfgfCommand, {"d": 1, "s": 0.5, "delta": 0.1, "normalization": "ordered_pairs"})
        assert command.normalization is DensityNormalization.ORDERED_PAIRS

    def test_converge_pairs(self):
        command = parse_command(ConvergeCommand, {"d": 2, "s": 0.5, "deltas": [0.25], "pairs": ["0,0:0.5,0"]})
        assert command.parsed_pairs() == [([0.0, 0.0], [0.5, 0.0])]

    def test_converge_needs_pairs(self):
        with pytest.raises(ValidationError):
            parse_command(ConvergeCommand, {"s": 0.5, "deltas": [0.25]})

    @pytest.mark.parametrize("pair", ["0.1", "0.1,0.2:0.3", "a:b"])
    def test_converge_bad_pair(self, pair):
        with pytest.raises(ValidationError):
            parse_command(ConvergeCommand, {"s": 0.5, "deltas": [0.25], "pairs": [pair]})

    def test_decompose_defaults(self):
        command = parse_command(DecomposeCommand, {"s": 1.0, "delta": 0.1})
        assert command.inner == 0.5
        assert command.margin == 0.1

    def test_diagnose_lags(self):
        with pytest.raises(ValidationError):
            parse_command(DiagnoseCommand, {"H": 0.5, "n": 64, "samples": 10, "lags": [-0.1]})
