"""
Sweep engine: evaluates every grid point of a SweepSpec into a frame row.
"""
import logging
import time
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import pandas as pd
from joblib import Parallel, delayed

from src.link_model import __version__
from src.link_model.channel import channel_matrix
from src.link_model.config import GAIN_SORT_ORDER, SNR_CONVENTION, resolve_n_jobs
from src.link_model.exceptions import LinkModelError
from src.monitoring.analytics import SweepAnalytics
from src.monitoring.metrics import track_ser_trials, track_sweep_point, update_equivalence_residual
from src.schemes.base import NoiseModel
from src.schemes.bepre import verify_transforms
from src.schemes.complexity import COST_MODEL_VERSION
from src.schemes.detection import monte_carlo_ser
from src.schemes.links import BePreLink, PlainOamLink
from src.schemes.oam_transform import ModeIndexMap

from .models import SweepSpec

logger = logging.getLogger(__name__)

GEOMETRY_COLUMNS = [
    "n_elements", "wavelength", "radius_tx", "radius_rx", "distance",
    "theta", "phi", "tilt_x", "tilt_y", "alpha_tx", "alpha_rx", "beta_re", "beta_im",
]
CAPACITY_COLUMNS = [
    "snr_db", "power_policy", "se_with_bepre", "se_without_bepre",
    "equivalence_residual", "numerical_rank",
]
SER_COLUMNS = [
    "snr_db", "trials", "ser_with", "ser_without",
    "symbol_errors_with_bepre", "symbol_errors_without_bepre", "seed",
]
INTEGER_COLUMNS = [
    "n_elements", "numerical_rank", "trials", "seed",
    "symbol_errors_with_bepre", "symbol_errors_without_bepre",
]

GAMMA_CONVENTION = "squared singular value gamma_i^2 as the per-mode power gain"
GAMMA_CONVENTION_LINEAR = "both gamma_i^2 (se_with_bepre) and linear gamma_i (se_with_bepre_linear)"
SER_LINKS = ("with_bepre", "without_bepre")


@dataclass
class SweepResult:
    """Rows of a sweep in grid order plus self-describing metadata."""
    frame: pd.DataFrame
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def rows(self) -> int:
        return int(len(self.frame))


def geometry_row(spec: SweepSpec, point: Dict[str, Any]) -> Dict[str, Any]:
    """Geometry columns of a grid point (filled from the base geometry if the point is invalid)."""
    try:
        geom = spec.geometry_at(point)
    except LinkModelError:
        geom = spec.geometry
    row = {
        "n_elements": point.get("n_elements", geom.n_tx),
        "beta_re": geom.beta.real,
        "beta_im": geom.beta.imag,
    }
    for name in GEOMETRY_COLUMNS:
        if name not in row:
            row[name] = point.get(name, getattr(geom, name))
    return row


def evaluate_capacity_point(
    spec: SweepSpec,
    point: Dict[str, Any],
    linear_gamma: bool = False
) -> Tuple[Dict[str, Any], float]:
    """
    Spectrum efficiencies, residuals and optional SER for one grid point.

    Link-model failures are recorded in the row's error column.

    Returns:
        Tuple of the row and its evaluation time in seconds
    """
    start_time = time.perf_counter()
    row = geometry_row(spec, point)
    snr_db = spec.snr_at(point)
    row.update({"snr_db": snr_db, "power_policy": spec.power_policy, "error": ""})
    try:
        geom = spec.geometry_at(point)
        channel = channel_matrix(geom)
        bepre = BePreLink(channel, alpha_tx=geom.alpha_tx)
        plain = PlainOamLink(channel, alpha_tx=geom.alpha_tx)
        noise = NoiseModel.from_snr_db(geom.n_tx, snr_db)
        total_power = float(geom.n_tx)

        power_with = bepre.allocate_power(spec.power_policy, total_power, noise)
        power_without = plain.allocate_power(spec.power_policy, total_power, noise)
        report = verify_transforms(channel, bepre.transforms)
        row.update({
            "se_with_bepre": bepre.spectrum_efficiency(power_with, noise),
            "se_without_bepre": plain.spectrum_efficiency(power_without, noise),
            "equivalence_residual": report.equivalence_residual,
            "numerical_rank": bepre.transforms.numerical_rank,
        })
        if linear_gamma:
            row["se_with_bepre_linear"] = bepre.spectrum_efficiency(power_with, noise, linear_gamma=True)
        for index, value in enumerate(bepre.transforms.lambdas, start=1):
            row[f"lambda_{index}"] = float(value)
        if spec.trials > 0:
            ser = monte_carlo_ser(
                geom, spec.constellation, snr_db, spec.trials, spec.seed, mode="both", n_jobs=1
            )
            row.update({"trials": ser.trials, "ser_with": ser.ser_with, "ser_without": ser.ser_without})
    except LinkModelError as e:
        logger.warning("Sweep point %s failed: %s", point, e)
        row["error"] = str(e)
    return row, time.perf_counter() - start_time


def evaluate_ser_point(spec: SweepSpec, point: Dict[str, Any]) -> Tuple[Dict[str, Any], float]:
    """Monte-Carlo SER of both links for one grid point."""
    start_time = time.perf_counter()
    row = geometry_row(spec, point)
    snr_db = spec.snr_at(point)
    row.update({"snr_db": snr_db, "trials": spec.trials, "seed": spec.seed, "error": ""})
    try:
        report = monte_carlo_ser(
            spec.geometry_at(point), spec.constellation, snr_db, spec.trials, spec.seed, mode="both", n_jobs=1
        )
        row.update({
            "ser_with": report.ser_with,
            "ser_without": report.ser_without,
            "symbol_errors_with_bepre": report.symbol_errors_with_bepre,
            "symbol_errors_without_bepre": report.symbol_errors_without_bepre,
        })
    except LinkModelError as e:
        logger.warning("SER point %s failed: %s", point, e)
        row["error"] = str(e)
    return row, time.perf_counter() - start_time


def _max_modes(spec: SweepSpec) -> int:
    for axis in spec.axes:
        if axis.param == "n_elements":
            return max(axis.values())
    return spec.n_elements


def _mode_maps(spec: SweepSpec) -> Dict[str, Any]:
    sizes = {spec.n_elements}
    for axis in spec.axes:
        if axis.param == "n_elements":
            sizes.update(axis.values())
    return {str(n): ModeIndexMap.for_modes(n).to_record()["mode_of_column"] for n in sorted(sizes)}


def build_metadata(spec: SweepSpec, command: str, linear_gamma: bool = False) -> Dict[str, Any]:
    """Metadata that makes an output file reproducible by itself."""
    return {
        "command": command,
        "version": __version__,
        "config": spec.to_record(),
        "defaults_applied": spec.defaults_applied,
        "seed": spec.seed,
        "mode_map": _mode_maps(spec),
        "gain_sort_order": GAIN_SORT_ORDER,
        "snr_convention": SNR_CONVENTION,
        "gamma_convention": GAMMA_CONVENTION_LINEAR if linear_gamma else GAMMA_CONVENTION,
        "cost_model": COST_MODEL_VERSION,
    }


def _frame(rows: List[Dict[str, Any]], columns: List[str]) -> pd.DataFrame:
    frame = pd.DataFrame(rows, columns=columns)
    for column in INTEGER_COLUMNS:
        if column in frame:
            frame[column] = pd.to_numeric(frame[column]).astype("Int64")
    return frame


def _run(spec: SweepSpec, command: str, evaluate, n_jobs: Optional[int], **kwargs: Any) -> List[Dict[str, Any]]:
    points = list(spec.grid())
    logger.info("Starting %s over %d grid points (axes: %s)", command, len(points), spec.axis_names or "none")
    results = Parallel(n_jobs=resolve_n_jobs(n_jobs))(
        delayed(evaluate)(spec, point, **kwargs) for point in points
    )
    rows = []
    for row, duration in results:
        track_sweep_point(command, "error" if row["error"] else "ok", duration)
        if not row["error"]:
            if "equivalence_residual" in row:
                update_equivalence_residual(row["equivalence_residual"])
            if row.get("trials"):
                for mode in SER_LINKS:
                    track_ser_trials(mode, row["trials"])
        rows.append(row)
    failures = sum(1 for row in rows if row["error"])
    logger.info("Finished %s: %d rows, %d failed", command, len(rows), failures)
    return rows


def run_sweep(
    spec: SweepSpec,
    linear_gamma: bool = False,
    n_jobs: Optional[int] = None,
    command: str = "capacity-sweep"
) -> SweepResult:
    """
    Evaluate spectrum efficiency with and without BePre over the spec's grid.

    Args:
        spec: Validated experiment
        linear_gamma: Add the linear-gamma column se_with_bepre_linear
        n_jobs: Worker count (OAM_LINK_N_JOBS when omitted)
        command: Label for metrics and metadata

    Returns:
        SweepResult: One row per grid point in grid order
    """
    rows = _run(spec, command, evaluate_capacity_point, n_jobs, linear_gamma=linear_gamma)
    columns = list(dict.fromkeys(spec.axis_names + GEOMETRY_COLUMNS + CAPACITY_COLUMNS))
    if linear_gamma:
        columns.append("se_with_bepre_linear")
    columns += [f"lambda_{index}" for index in range(1, _max_modes(spec) + 1)]
    if spec.trials > 0:
        columns += ["trials", "ser_with", "ser_without"]
    columns.append("error")

    frame = _frame(rows, columns)
    metadata = build_metadata(spec, command, linear_gamma)
    metadata["columns"] = columns
    metadata["analytics"] = SweepAnalytics().summarize(frame, spec.axis_names)
    return SweepResult(frame=frame, metadata=metadata)


def run_ser_sweep(spec: SweepSpec, n_jobs: Optional[int] = None, command: str = "ser") -> SweepResult:
    """Monte-Carlo SER of both links over the spec's grid."""
    rows = _run(spec, command, evaluate_ser_point, n_jobs)
    columns = list(dict.fromkeys(spec.axis_names + SER_COLUMNS + GEOMETRY_COLUMNS)) + ["error"]
    frame = _frame(rows, columns)
    metadata = build_metadata(spec, command)
    metadata["columns"] = columns
    metadata["constellation"] = spec.constellation
    metadata["analytics"] = {
        "points": int(len(frame)),
        "failed_points": int(frame["error"].astype(bool).sum()),
        "ser_with_max": _nanmax(frame["ser_with"]),
        "ser_without_min": _nanmin(frame["ser_without"]),
    }
    return SweepResult(frame=frame, metadata=metadata)


def _nanmax(series: pd.Series) -> Optional[float]:
    values = series.dropna()
    return float(values.max()) if not values.empty else None


def _nanmin(series: pd.Series) -> Optional[float]:
    values = series.dropna()
    return float(values.min()) if not values.empty else None
