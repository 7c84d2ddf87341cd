# qsvrg/storage/trace_store.py

import json
import logging
import math
from pathlib import Path
from typing import Iterable, List, Optional

from pydantic import ValidationError

from ..core.config import get_config
from ..core.exceptions import ConfigurationError, NonFiniteError
from ..core.schemas import TraceFile

logger = logging.getLogger(__name__)

# Serialized order of a trace line; the extra fields follow the published schema
FIELD_ORDER = (
    "v",
    "dataset",
    "n",
    "d",
    "problem",
    "lambda",
    "method",
    "seed",
    "alpha",
    "l",
    "m",
    "g_star",
    "residual",
    "points",
    "passes",
    "seed_base",
    "gradient_count",
    "stream_id",
    "checkpoint_start",
    "checkpoint_ratio",
)
FLOAT_FIELDS = (
    "lambda",
    "alpha",
    "g_star",
    "residual",
    "passes",
    "checkpoint_start",
    "checkpoint_ratio",
)


def format_float(value: float) -> str:
    """17 significant digits, enough to read back the same double"""
    value = float(value)
    if not math.isfinite(value):
        raise NonFiniteError("trace value", repr(value))
    return format(value, ".17g")


def _encode(value) -> str:
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format_float(value)
    if isinstance(value, (list, tuple)):
        return "[" + ",".join(_encode(v) for v in value) + "]"
    return json.dumps(value, ensure_ascii=False)


def dumps_trace(trace: TraceFile) -> str:
    """One JSON document on one line, fields in FIELD_ORDER"""
    data = trace.model_dump(mode="json", by_alias=True)
    data["points"] = [[float(p), float(s)] for p, s in trace.points]
    for key in FLOAT_FIELDS:
        if data[key] is not None:
            data[key] = float(data[key])
    return "{" + ",".join(f'"{key}":{_encode(data[key])}' for key in FIELD_ORDER) + "}"


def loads_trace(line: str, source: str = "<string>") -> TraceFile:
    try:
        return TraceFile.model_validate(json.loads(line))
    except (json.JSONDecodeError, ValidationError) as e:
        raise ConfigurationError(f"{source}: not a valid trace line: {e}") from e


class TraceStore:
    """Line-delimited trace files, one run per line"""

    def __init__(self, output_dir: Optional[Path] = None):
        config = get_config()
        self.output_dir = Path(output_dir or config.output_dir)

    def write(self, traces: Iterable[TraceFile], path: Path, append: bool = False) -> Path:
        """Write traces in the given order"""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        lines = [dumps_trace(trace) for trace in traces]
        with open(path, "a" if append else "w", encoding="utf-8", newline="\n") as f:
            for line in lines:
                f.write(line)
                f.write("\n")
        logger.info(f"Wrote {len(lines)} trace(s) to {path}")
        return path

    def read(self, path: Path) -> List[TraceFile]:
        path = Path(path)
        if not path.exists():
            raise ConfigurationError(f"trace file not found: {path}")
        traces = []
        with open(path, "r", encoding="utf-8") as f:
            for line_no, line in enumerate(f, start=1):
                if line.strip():
                    traces.append(loads_trace(line, f"{path}:{line_no}"))
        if not traces:
            raise ConfigurationError(f"trace file is empty: {path}")
        return traces

    def read_many(self, paths: Iterable[Path]) -> List[TraceFile]:
        traces: List[TraceFile] = []
        for path in paths:
            traces.extend(self.read(path))
        return traces
