"""
Validation suite registry

Suites register themselves with the `register_suite` decorator when their
module is imported; the runner looks them up by name.
"""

from typing import Any, Callable, Dict, List, Optional

import structlog

logger = structlog.get_logger()

SuiteFunction = Callable[[Dict[str, Any]], List[Any]]

_suite_registry: Dict[str, Dict[str, Any]] = {}


def register_suite(
    name: str,
    priority: int = 50,
    description: str = "",
) -> Callable[[SuiteFunction], SuiteFunction]:
    """
    Decorator to register a validation suite.

    Args:
        name: Unique suite name, used by `moran-wave validate --suite`
        priority: Execution order (lower numbers run first)
        description: One line shown in reports
    """

    def decorator(func: SuiteFunction) -> SuiteFunction:
        if name in _suite_registry:
            logger.warning("Suite already registered, overriding", suite=name)
        _suite_registry[name] = {
            "name": name,
            "function": func,
            "priority": priority,
            "description": description,
        }
        logger.debug("Registered validation suite", suite=name, priority=priority)
        return func

    return decorator


def get_suites() -> List[Dict[str, Any]]:
    """All registered suites sorted by priority, then name"""
    return sorted(_suite_registry.values(), key=lambda x: (x["priority"], x["name"]))


def get_suite_info(name: str) -> Optional[Dict[str, Any]]:
    return _suite_registry.get(name)


def list_suite_names() -> List[str]:
    return [s["name"] for s in get_suites()]


def unregister_suite(name: str) -> None:
    _suite_registry.pop(name, None)
