# tests/test_config.py

import math

import pytest
from pydantic import ValidationError

from qsvrg.core.config import Config, get_config, init_config


class TestConfig:
    """Settings from defaults, YAML files and the environment"""

    def test_defaults(self):
        config = init_config()
        assert config.hessian_cap == 5000
        assert config.checkpoint_ratio == math.sqrt(2.0)
        assert config.log_file is None
        assert get_config() is config

    def test_yaml_round_trip(self, temp_dir):
        path = temp_dir / "config.yaml"
        Config(hessian_cap=12, workers=3, output_dir=temp_dir / "out").to_yaml(path)
        loaded = init_config(path)
        assert loaded.hessian_cap == 12
        assert loaded.workers == 3
        assert loaded.output_dir == temp_dir / "out"

    def test_overrides_apply_on_top_of_file(self, temp_dir):
        path = temp_dir / "config.yaml"
        path.write_text("log_level: WARNING\nworkers: 2\n", encoding="utf-8")
        config = init_config(path, log_level="DEBUG")
        assert config.log_level == "DEBUG"
        assert config.workers == 2

    def test_missing_file_uses_defaults(self, temp_dir):
        assert init_config(temp_dir / "absent.yaml").workers == 1

    def test_environment(self, monkeypatch):
        monkeypatch.setenv("QSVRG_HESSIAN_CAP", "7")
        assert init_config().hessian_cap == 7

    @pytest.mark.parametrize(
        "field,value", [("checkpoint_ratio", 1.0), ("workers", 0), ("reference_tolerance", 0.0)]
    )
    def test_invalid_values(self, field, value):
        with pytest.raises(ValidationError):
            Config(**{field: value})
