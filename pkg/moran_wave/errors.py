"""
Exception hierarchy and error payload helpers for moran-wave
"""

from typing import Any, Dict, Optional

from pydantic import ValidationError

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_BUDGET = 3


class MoranWaveError(Exception):
    """Base class for every failure the tool reports deliberately"""

    exit_code: int = EXIT_FAILURE
    error_type: str = "moran_wave_error"

    def __init__(self, message: str, **context: Any) -> None:
        super().__init__(message)
        self.message = message
        self.context = context


class ConfigError(MoranWaveError):
    """Invalid parameters, malformed config files, unknown selectors"""

    exit_code = EXIT_CONFIG
    error_type = "config_error"

    def __init__(self, message: str, path: Optional[str] = None, **context: Any):
        super().__init__(message, path=path, **context)
        self.path = path

    @classmethod
    def from_validation(
        cls, exc: ValidationError, prefix: str = ""
    ) -> "ConfigError":
        """Translate the first pydantic error into a ConfigError naming its path"""
        first = exc.errors()[0]
        parts = [str(p) for p in first.get("loc", ())]
        path = ".".join(([prefix] if prefix else []) + parts) or prefix or None
        return cls(f"{path}: {first.get('msg', 'invalid value')}", path=path)


class BudgetExceededError(MoranWaveError):
    """The event budget ran out before the horizon was reached"""

    exit_code = EXIT_BUDGET
    error_type = "budget_exceeded"

    def __init__(self, events: int, time_reached: float, horizon: float) -> None:
        super().__init__(
            f"event budget of {events} exhausted at t={time_reached:.6g} "
            f"(horizon {horizon:.6g})",
            events=events,
            time_reached=time_reached,
            horizon=horizon,
        )
        self.events = events
        self.time_reached = time_reached
        self.horizon = horizon


class CouplingViolationError(MoranWaveError):
    """Y_i <= X_i failed in a coupled run"""

    error_type = "coupling_violation"

    def __init__(self, index: int, x_value: int, y_value: int, time: float) -> None:
        super().__init__(
            f"domination broken for individual {index} at t={time:.6g}: "
            f"Y={y_value} > X={x_value}",
            index=index,
            x_value=x_value,
            y_value=y_value,
            time=time,
        )


class InsufficientDataError(MoranWaveError, ValueError):
    """Too few usable records for an estimator"""

    error_type = "insufficient_data"


def format_error_response(exc: BaseException) -> Dict[str, Any]:
    """
    Format an error payload for JSON reports
    Mirrors {"error": {"message", "type", "code"}}
    """
    if isinstance(exc, MoranWaveError):
        payload: Dict[str, Any] = {
            "message": exc.message,
            "type": exc.error_type,
            "code": exc.exit_code,
        }
        if exc.context:
            payload["context"] = {
                k: v for k, v in exc.context.items() if v is not None
            }
        return {"error": payload}
    return {"error": {"message": str(exc), "type": "internal_error", "code": EXIT_FAILURE}}
