"""
Phase timing for CLI runs, recorded into the run manifest
"""

import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any, Dict, Generator, List, Optional

import structlog

logger = structlog.get_logger()


@dataclass
class TimingEntry:
    """Individual timing measurement"""

    name: str
    start_time: float
    end_time: Optional[float] = None
    duration_ms: Optional[float] = None
    metadata: Dict[str, Any] = field(default_factory=dict)

    def finish(self, **metadata: Any) -> float:
        """Mark timing as finished and calculate duration"""
        self.end_time = time.perf_counter()
        self.duration_ms = round((self.end_time - self.start_time) * 1000, 2)
        self.metadata.update(metadata)
        return self.duration_ms


class RunProfiler:
    """Tracks wall-clock time of the phases of one CLI invocation"""

    def __init__(self, run_name: str) -> None:
        self.run_name = run_name
        self.timings: List[TimingEntry] = []
        self.started_at = datetime.now(timezone.utc)

    @contextmanager
    def time_phase(self, name: str, **metadata: Any) -> Generator[TimingEntry, None, None]:
        entry = TimingEntry(name=name, start_time=time.perf_counter(), metadata=metadata)
        self.timings.append(entry)
        try:
            yield entry
        finally:
            duration = entry.finish()
            logger.debug(
                f"profiler: {name}", run=self.run_name, duration_ms=duration, **metadata
            )

    def get_phases(self) -> List[Dict[str, Any]]:
        return [
            {"name": t.name, "duration_ms": t.duration_ms, "metadata": t.metadata}
            for t in self.timings
            if t.duration_ms is not None
        ]
