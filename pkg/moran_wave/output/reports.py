"""
Plain-text key-value blocks and JSON carrying the same fields
"""

import json
import math
from typing import Any, Dict, Iterator, Tuple

from pydantic import BaseModel


def to_payload(obj: Any) -> Any:
    """JSON-ready structure; non-finite floats become None"""
    if isinstance(obj, BaseModel):
        obj = obj.model_dump(mode="python")
    if isinstance(obj, dict):
        return {str(k): to_payload(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_payload(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def flatten(payload: Any, prefix: str = "") -> Iterator[Tuple[str, Any]]:
    """Dotted-key leaves of a nested payload, in insertion order"""
    if isinstance(payload, dict):
        for k, v in payload.items():
            yield from flatten(v, f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(payload, list) and payload:
        for i, v in enumerate(payload):
            yield from flatten(v, f"{prefix}.{i}" if prefix else str(i))
    else:
        yield prefix, payload


def _scalar(value: Any) -> str:
    # JSON spelling of every scalar so both renderings read alike
    return json.dumps(value)


def render_text(payload: Any) -> str:
    return "".join(f"{key}: {_scalar(value)}\n" for key, value in flatten(to_payload(payload)))


def render_json(payload: Any) -> str:
    return json.dumps(to_payload(payload), indent=2) + "\n"


def parse_text(text: str) -> Dict[str, Any]:
    """Inverse of render_text, used to compare the two renderings"""
    out: Dict[str, Any] = {}
    for line in text.splitlines():
        if not line:
            continue
        key, _, value = line.partition(": ")
        out[key] = json.loads(value)
    return out
