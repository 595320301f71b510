"""
Deterministic CSV/JSON writers with metadata sidecars.
"""
import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, Union

import numpy as np
import pandas as pd

from src.link_model.channel import ChannelMatrix

from .sweep import SweepResult

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

SIDECAR_SUFFIX = ".meta.json"


def format_float(value: float) -> str:
    """Shortest decimal string that round-trips to the same double."""
    return repr(float(value))


def jsonable(value: Any) -> Any:
    """Recursively convert numpy scalars/arrays and non-finite floats to JSON values."""
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [jsonable(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else format_float(value)
    if isinstance(value, complex):
        return [jsonable(value.real), jsonable(value.imag)]
    return value


def sidecar_path(path: PathLike) -> Path:
    """`<out>.meta.json` next to an output file."""
    path = Path(path)
    return path.with_name(path.name + SIDECAR_SUFFIX)


def _write_text(path: PathLike, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
    except OSError as e:
        raise OSError(e.errno, f"Cannot write output: {e.strerror}", str(path)) from e


def write_json(path: PathLike, payload: Dict[str, Any]) -> None:
    """Write canonical JSON (sorted keys, fixed indentation, trailing newline)."""
    text = json.dumps(jsonable(payload), sort_keys=True, indent=2, allow_nan=False)
    _write_text(path, text + "\n")


def write_sidecar(path: PathLike, metadata: Dict[str, Any]) -> Path:
    """Write the metadata sidecar of an output file and return its path."""
    target = sidecar_path(path)
    write_json(target, metadata)
    return target


def frame_to_csv(frame: pd.DataFrame) -> str:
    """Render a frame with a header row, "\\n" line endings and round-trip floats."""
    return frame.to_csv(index=False, lineterminator="\n", float_format=format_float, na_rep="")


def emit_csv(result: SweepResult, path: PathLike) -> None:
    """
    Write a sweep's rows as CSV plus its metadata sidecar.

    Args:
        result: Sweep frame and metadata
        path: Output CSV path

    Raises:
        OSError: With the path, if either file cannot be written
    """
    _write_text(path, frame_to_csv(result.frame))
    write_sidecar(path, result.metadata)
    logger.info("Wrote %d rows to %s", result.rows, path)


def matrix_record(matrix: Union[np.ndarray, ChannelMatrix]) -> Dict[str, Any]:
    """{"m", "n", "entries_re", "entries_im"} with row-major entries."""
    if isinstance(matrix, ChannelMatrix):
        return matrix.to_record()
    values = np.asarray(matrix, dtype=complex)
    rows, cols = values.shape
    return {
        "m": int(rows),
        "n": int(cols),
        "entries_re": [float(v) for v in values.real.ravel()],
        "entries_im": [float(v) for v in values.imag.ravel()],
    }


def emit_channel(channel: ChannelMatrix, path: PathLike, metadata: Dict[str, Any]) -> None:
    """Dump a channel matrix as JSON, or as one CSV row per entry for a .csv path."""
    if str(path).lower().endswith(".csv"):
        _write_text(path, frame_to_csv(channel.to_frame()))
    else:
        write_json(path, matrix_record(channel))
    write_sidecar(path, metadata)
    logger.info("Wrote %dx%d channel matrix to %s", *channel.shape, path)
