"""
Suite runner

Loads per-suite settings from the validation YAML file and executes the
registered suites, collecting their checks into one report.
"""

import importlib
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import structlog
import yaml

from moran_wave.config import settings
from moran_wave.errors import ConfigError
from moran_wave.models import CheckResult, ValidationReport
from moran_wave.validation.registry import get_suite_info, get_suites, list_suite_names

logger = structlog.get_logger()

SUITE_MODULES = ("moran_wave.validation.suites",)


class SuiteRunner:
    """
    Runs validation suites.

    Configuration file layout:

        suites:
          pgf:
            enabled: true
            config: {replicates: 100000, ...}
    """

    def __init__(self, config_path: Optional[Union[str, Path]] = None) -> None:
        self.config_path = Path(config_path or settings.VALIDATION_CONFIG)
        self.suite_configs: Dict[str, Any] = {}
        for module in SUITE_MODULES:
            importlib.import_module(module)

    def load_config(self) -> None:
        if not self.config_path.exists():
            logger.warning("Validation config not found, using suite defaults", path=str(self.config_path))
            self.suite_configs = {}
            return
        try:
            with open(self.config_path, "r", encoding="utf-8") as f:
                data = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise ConfigError(f"malformed validation config: {e}", path=str(self.config_path))
        suites = data.get("suites", {}) if isinstance(data, dict) else None
        if not isinstance(suites, dict):
            raise ConfigError("validation config needs a 'suites' mapping", path="suites")
        self.suite_configs = suites
        logger.info("Loaded validation config", path=str(self.config_path), suites=list(suites))

    def _suite_config(self, name: str) -> Dict[str, Any]:
        entry = self.suite_configs.get(name, {}) or {}
        section = entry.get("config", {})
        if not isinstance(section, dict):
            raise ConfigError(f"config for suite {name!r} must be a mapping", path=f"suites.{name}.config")
        return section

    def _enabled(self, name: str) -> bool:
        entry = self.suite_configs.get(name, {}) or {}
        return entry.get("enabled", True) is not False

    def resolve(self, selected: Optional[Sequence[str]]) -> List[str]:
        known = list_suite_names()
        if not selected:
            return [n for n in known if self._enabled(n)]
        unknown = [n for n in selected if n not in known]
        if unknown:
            raise ConfigError(
                f"unknown suite {unknown[0]!r}; choose from {', '.join(known)}", path="suite"
            )
        # explicit selection overrides `enabled: false`
        return [n for n in known if n in selected]

    def run(self, selected: Optional[Sequence[str]] = None) -> ValidationReport:
        self.load_config()
        names = self.resolve(selected)
        report = ValidationReport(suites=names)
        for name in names:
            info = get_suite_info(name)
            assert info is not None
            logger.info("Running validation suite", suite=name)
            checks: List[CheckResult] = info["function"](self._suite_config(name))
            failed = [c.name for c in checks if not c.passed]
            logger.info("Suite finished", suite=name, checks=len(checks), failed=len(failed))
            report.checks.extend(checks)
        return report


def available_suites() -> List[str]:
    for module in SUITE_MODULES:
        importlib.import_module(module)
    return [s["name"] for s in get_suites()]
