"""
Parser for the flat `key = value` experiment configuration format.

Lines are `key = value`; `#` starts a comment. Every angle key ending in
`_rad` has a `_deg` alias that is converted to radians on parse.
"""
import logging
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
from pydantic import ValidationError

from src.link_model.config import deg_to_rad
from src.link_model.schemas import LinkGeometry

from .models import ConfigError, SweepAxis, SweepSpec

logger = logging.getLogger(__name__)

ANGLE_KEYS = ["theta", "phi", "tilt_x", "tilt_y", "alpha_tx", "alpha_rx"]

# Config key -> (LinkGeometry field, value type)
GEOMETRY_KEYS: Dict[str, Tuple[str, Callable[[str], Any]]] = {
    "n_elements": ("n_tx", int),
    "n_rx_elements": ("n_rx", int),
    "wavelength_m": ("wavelength", float),
    "radius_tx_m": ("radius_tx", float),
    "radius_rx_m": ("radius_rx", float),
    "distance_m": ("distance", float),
    "beta_re": ("beta_re", float),
    "beta_im": ("beta_im", float),
}
GEOMETRY_KEYS.update({f"{name}_rad": (name, float) for name in ANGLE_KEYS})

EXPERIMENT_KEYS: Dict[str, Callable[[str], Any]] = {
    "snr_db": float,
    "constellation": str,
    "power_policy": str,
    "trials": int,
    "seed": int,
}

SWEEP_FIELDS: Dict[str, Callable[[str], Any]] = {
    "param": str,
    "start": float,
    "stop": float,
    "count": int,
}

# Sweep parameter names as written in the config -> SweepAxis.param
SWEEP_PARAM_KEYS: Dict[str, str] = {
    "n_elements": "n_elements",
    "snr_db": "snr_db",
    "wavelength_m": "wavelength",
    "radius_tx_m": "radius_tx",
    "radius_rx_m": "radius_rx",
    "distance_m": "distance",
}
SWEEP_PARAM_KEYS.update({f"{name}_rad": name for name in ANGLE_KEYS})
SWEEP_PARAM_KEYS.update({f"{name}_deg": name for name in ANGLE_KEYS})

REQUIRED_KEYS = ["n_elements"]

GEOMETRY_FIELD_KEYS = {field: key for key, (field, _) in GEOMETRY_KEYS.items()}


def _canonical(key: str) -> Tuple[str, bool]:
    """Map a `_deg` alias to its `_rad` key."""
    if key.endswith("_deg") and key[:-4] in ANGLE_KEYS:
        return key[:-4] + "_rad", True
    return key, False


def _known_keys() -> List[str]:
    keys = list(GEOMETRY_KEYS) + list(EXPERIMENT_KEYS)
    keys += [f"{prefix}.{field}" for prefix in ("sweep", "sweep2") for field in SWEEP_FIELDS]
    return keys


def _convert(key: str, raw: str, kind: Callable[[str], Any], line: int) -> Any:
    if kind is str:
        if not raw:
            raise ConfigError(key, line, "value must not be empty")
        return raw
    try:
        value = kind(raw)
    except ValueError:
        expected = "an integer" if kind is int else "a number"
        raise ConfigError(key, line, f"expected {expected}, got '{raw}'")
    if kind is float and np.isnan(value):
        raise ConfigError(key, line, "value must not be NaN")
    return value


def _read_lines(text: str) -> Dict[str, Tuple[str, int, bool]]:
    entries: Dict[str, Tuple[str, int, bool]] = {}
    known = set(_known_keys())
    for number, raw_line in enumerate(text.splitlines(), start=1):
        content = raw_line.split("#", 1)[0].strip()
        if not content:
            continue
        if "=" not in content:
            raise ConfigError(content, number, "expected 'key = value'")
        key, value = (part.strip() for part in content.split("=", 1))
        key = key.lower()
        canonical, in_degrees = _canonical(key)
        if canonical not in known:
            raise ConfigError(key, number, "unknown key")
        if canonical in entries:
            raise ConfigError(key, number, f"duplicate key (first given on line {entries[canonical][1]})")
        entries[canonical] = (value, number, in_degrees)
    return entries


def _sweep_axis(prefix: str, entries: Dict[str, Tuple[str, int, bool]]) -> Optional[SweepAxis]:
    keys = {field: f"{prefix}.{field}" for field in SWEEP_FIELDS}
    given = [key for key in keys.values() if key in entries]
    if not given:
        return None
    if keys["param"] not in entries:
        raise ConfigError(keys["param"], None, f"required because {given[0]} is set")
    for field, key in keys.items():
        if key not in entries:
            raise ConfigError(key, None, f"required for the {prefix} axis")

    param_raw, param_line, _ = entries[keys["param"]]
    written = param_raw.strip().lower()
    if written not in SWEEP_PARAM_KEYS:
        raise ConfigError(
            keys["param"], param_line,
            f"cannot sweep '{param_raw}' (allowed: {', '.join(sorted(SWEEP_PARAM_KEYS))})"
        )
    values = {
        field: _convert(key, entries[key][0], SWEEP_FIELDS[field], entries[key][1])
        for field, key in keys.items() if field != "param"
    }
    if written.endswith("_deg"):
        values["start"] = deg_to_rad(values["start"])
        values["stop"] = deg_to_rad(values["stop"])
    try:
        return SweepAxis(param=SWEEP_PARAM_KEYS[written], **values)
    except ValidationError as e:
        error = e.errors()[0]
        field = error["loc"][0] if error["loc"] else "param"
        key = keys.get(field, keys["param"])
        line = entries[key][1] if key in entries else param_line
        raise ConfigError(key, line, error["msg"]) from e


def _validation_to_config_error(
    error: ValidationError,
    field_keys: Dict[str, str],
    entries: Dict[str, Tuple[str, int, bool]],
    fallback_key: str
) -> ConfigError:
    located = []
    for detail in error.errors():
        field = str(detail["loc"][0]) if detail["loc"] else ""
        located.append((field_keys.get(field, fallback_key), detail["msg"]))
    # Prefer an error on a key the user actually wrote
    key, message = next(((k, m) for k, m in located if k in entries), located[0])
    line = entries[key][1] if key in entries else None
    return ConfigError(key, line, message)


def parse_config(text: str) -> SweepSpec:
    """
    Parse and validate an experiment configuration.

    Args:
        text: Configuration document

    Returns:
        SweepSpec: Validated spec with defaults applied

    Raises:
        ConfigError: For unknown, duplicate, missing or invalid keys, naming key and line
    """
    entries = _read_lines(text)
    for key in REQUIRED_KEYS:
        if key not in entries:
            raise ConfigError(key, None, "missing required key")

    values: Dict[str, Any] = {}
    for key, (raw, line, in_degrees) in entries.items():
        kind = GEOMETRY_KEYS.get(key, (None, EXPERIMENT_KEYS.get(key)))[1]
        if kind is None:
            continue
        written = key[:-4] + "_deg" if in_degrees else key
        value = _convert(written, raw, kind, line)
        values[key] = deg_to_rad(value) if in_degrees else value

    geometry_data: Dict[str, Any] = {}
    for key, (field, _) in GEOMETRY_KEYS.items():
        if key in values and field not in ("beta_re", "beta_im"):
            geometry_data[field] = values[key]
    geometry_data.setdefault("n_rx", geometry_data["n_tx"])
    if "beta_re" in values or "beta_im" in values:
        geometry_data["beta"] = complex(values.get("beta_re", 1.0), values.get("beta_im", 0.0))
    try:
        geometry = LinkGeometry(**geometry_data)
    except ValidationError as e:
        field_keys = dict(GEOMETRY_FIELD_KEYS)
        field_keys["beta"] = "beta_re" if "beta_re" in entries else "beta_im"
        raise _validation_to_config_error(e, field_keys, entries, "n_elements") from e

    axes = [axis for axis in (_sweep_axis("sweep", entries), _sweep_axis("sweep2", entries)) if axis]
    if "sweep2.param" in entries and "sweep.param" not in entries:
        raise ConfigError("sweep2.param", entries["sweep2.param"][1], "sweep2 needs a sweep axis first")

    experiment = {key: values[key] for key in EXPERIMENT_KEYS if key in values}
    defaults_applied = sorted(key for key in list(GEOMETRY_KEYS) + list(EXPERIMENT_KEYS) if key not in entries)
    try:
        spec = SweepSpec(
            geometry=geometry,
            axes=axes,
            defaults_applied=defaults_applied,
            key_lines={key: line for key, (_, line, _) in entries.items()},
            **experiment
        )
    except ValidationError as e:
        field_keys = {key: key for key in EXPERIMENT_KEYS}
        raise _validation_to_config_error(e, field_keys, entries, "sweep2.param") from e

    logger.debug("Parsed config: N=%d, %d sweep axes, %d defaults", spec.n_elements, len(axes), len(defaults_applied))
    return spec
