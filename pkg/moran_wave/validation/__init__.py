"""
Validation suites, registered by decorator and configured from YAML
"""

from moran_wave.validation.registry import get_suites, register_suite
from moran_wave.validation.runner import SuiteRunner, available_suites

__all__ = ["SuiteRunner", "available_suites", "get_suites", "register_suite"]
