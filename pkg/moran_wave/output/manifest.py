"""
Run manifests written next to every output file
"""

import json
from datetime import datetime, timezone
from importlib import metadata
from pathlib import Path
from typing import Any, Dict, Iterable, Optional, Union

import structlog

from moran_wave import __version__
from moran_wave.config import Settings, settings
from moran_wave.models import RunManifest
from moran_wave.profiler import RunProfiler

logger = structlog.get_logger()

TRACKED_PACKAGES = ("numpy", "numba", "scipy", "pydantic", "pydantic-settings", "structlog")


def package_versions() -> Dict[str, str]:
    versions: Dict[str, str] = {}
    for name in TRACKED_PACKAGES:
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = "unknown"
    return versions


def build_manifest(
    subcommand: str,
    config: Dict[str, Any],
    profiler: RunProfiler,
    outputs: Iterable[Union[str, Path]] = (),
    master_seed: Optional[int] = None,
    cfg: Optional[Settings] = None,
) -> RunManifest:
    return RunManifest(
        subcommand=subcommand,
        tool_version=__version__,
        master_seed=master_seed,
        config=config,
        settings=(cfg or settings).model_dump(mode="json"),
        started_at=profiler.started_at,
        finished_at=datetime.now(timezone.utc),
        phases=profiler.get_phases(),
        outputs=[str(p) for p in outputs],
        package_versions=package_versions(),
    )


def manifest_path_for(output: Union[str, Path]) -> Path:
    """<stem>.manifest.json next to `output`"""
    output = Path(output)
    return output.with_name(f"{output.stem}.manifest.json")


def write_manifest(manifest: RunManifest, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(manifest.model_dump(mode="json"), f, indent=2)
        f.write("\n")
    logger.debug("Manifest written", path=str(path))
    return path


def load_manifest(path: Union[str, Path]) -> RunManifest:
    with open(path, "r", encoding="utf-8") as f:
        return RunManifest.model_validate(json.load(f))
