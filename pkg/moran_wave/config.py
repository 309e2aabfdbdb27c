"""
Configuration settings for moran-wave
"""

from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Type

import yaml
from pydantic import Field, ValidationError
from pydantic_settings import (
    BaseSettings,
    PydanticBaseSettingsSource,
    SettingsConfigDict,
    YamlConfigSettingsSource,
)

from moran_wave.errors import ConfigError

PROJECT_ROOT = Path(__file__).parent.parent
DEFAULT_SETTINGS_FILE = PROJECT_ROOT / "configs" / "settings.yaml"


class Settings(BaseSettings):
    """Tool-wide defaults; per-run parameters live in the run configs"""

    model_config = SettingsConfigDict(
        yaml_file=DEFAULT_SETTINGS_FILE,
        yaml_file_encoding="utf-8",
        case_sensitive=True,
        extra="ignore",
    )

    # Logging configuration
    DEBUG: bool = Field(
        default=False,
        description="Colored console logs at DEBUG level instead of JSON at INFO",
    )
    LOG_DIR: Path = Field(default=Path("logs"), description="Directory for the log file")
    LOG_TO_FILE: bool = Field(default=True, description="Also write logs to LOG_DIR")

    # Engine limits
    EVENT_BUDGET: int = Field(
        default=2_000_000_000,
        ge=1,
        description="Hard cap on simulated events per run",
    )
    KD_BETA: float = Field(
        default=0.5,
        gt=0.0,
        lt=1.0,
        description="Exponent beta in the k_d threshold exp((ln N)^(1-beta))",
    )

    # Experiment defaults
    SWEEP_WORKERS: int = Field(
        default=1, ge=1, description="Worker processes used by run_sweep"
    )
    DEFAULT_BURN_IN: float = Field(
        default=0.2,
        ge=0.0,
        lt=1.0,
        description="Fraction of the horizon discarded before estimating rates",
    )

    # Validation suites
    VALIDATION_CONFIG: Path = Field(
        default=PROJECT_ROOT / "configs" / "validation.yaml",
        description="YAML file with per-suite parameters for `moran-wave validate`",
    )

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: Type[BaseSettings],
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,
    ) -> Tuple[PydanticBaseSettingsSource, ...]:
        # Explicit values first, then the YAML file; the environment is not consulted
        return (init_settings, YamlConfigSettingsSource(settings_cls))


def load_settings(path: Optional[Path] = None, **overrides: Any) -> Settings:
    """Build Settings from an explicit YAML file plus keyword overrides"""
    values: Dict[str, Any] = {}
    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as f:
                loaded = yaml.safe_load(f) or {}
        except OSError as e:
            raise ConfigError(f"cannot read settings file: {e}", path=str(path))
        except yaml.YAMLError as e:
            raise ConfigError(f"malformed settings file: {e}", path=str(path))
        if not isinstance(loaded, dict):
            raise ConfigError("settings file must hold a mapping", path=str(path))
        values.update(loaded)
    values.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return Settings(**values)
    except ValidationError as e:
        raise ConfigError.from_validation(e, prefix="settings")


# Global settings instance
settings = Settings()


def use_settings(new_settings: Settings) -> None:
    """Replace the global settings in place so existing imports see the change"""
    for name in Settings.model_fields:
        setattr(settings, name, getattr(new_settings, name))
