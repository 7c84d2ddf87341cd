# qsvrg/core/config.py

import math
from pathlib import Path
from typing import Optional

import yaml
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Config(BaseSettings):
    model_config = SettingsConfigDict(env_prefix="QSVRG_", env_file=".env", extra="ignore")

    # Dense linear algebra
    hessian_cap: int = Field(default=5000, ge=1)
    reference_tolerance: float = Field(default=1e-10, gt=0)
    refinement_steps: int = Field(default=5, ge=0)

    # Benchmark runs
    default_passes: float = Field(default=50.0, gt=0)
    checkpoint_start: float = Field(default=1.0, gt=0)
    checkpoint_ratio: float = Field(default=math.sqrt(2.0), gt=1)
    seed_base: int = Field(default=0, ge=0)
    workers: int = Field(default=1, ge=1)
    output_dir: Path = Field(default=Path("traces"))

    # Logging
    log_level: str = "INFO"
    log_file: Optional[Path] = None

    @classmethod
    def from_yaml(cls, path: Path) -> "Config":
        """Load settings from a YAML file; env vars still apply to missing keys"""
        with open(path) as f:
            data = yaml.safe_load(f) or {}
        return cls(**data)

    def to_yaml(self, path: Path):
        """Write the resolved settings as YAML"""
        data = self.model_dump(mode="json", exclude_none=True)
        with open(path, "w") as f:
            yaml.dump(data, f, default_flow_style=False)


# Global config instance
_config: Optional[Config] = None


def init_config(config_path: Optional[Path] = None, **overrides) -> Config:
    """Build the process-wide config from an optional YAML file plus CLI overrides"""
    global _config

    if config_path and Path(config_path).exists():
        _config = Config.from_yaml(Path(config_path))
        if overrides:
            _config = _config.model_copy(update=overrides)
    else:
        _config = Config(**overrides)

    return _config


def get_config() -> Config:
    """Get the global configuration instance"""
    if _config is None:
        return init_config()
    return _config
