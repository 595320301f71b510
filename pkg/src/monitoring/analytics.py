"""
Shape analytics for spectrum-efficiency sweep frames.
"""
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd


class SweepAnalytics:
    """Summaries of a sweep frame with one row per grid point."""

    def __init__(self, value_column: str = "se_with_bepre", flat_tolerance: float = 1e-12):
        """
        Initialize analytics.

        Args:
            value_column: Column analysed by default
            flat_tolerance: Relative step size treated as flat in sign-change counts
        """
        self.value_column = value_column
        self.flat_tolerance = flat_tolerance

    def _valid(self, frame: pd.DataFrame, columns: List[str]) -> pd.DataFrame:
        return frame.dropna(subset=columns)

    def group_spread(
        self,
        frame: pd.DataFrame,
        group_by: str,
        along: str,
        value: Optional[str] = None,
        below: Optional[float] = None
    ) -> float:
        """
        Largest relative spread of the value across groups at equal `along`.

        Args:
            frame: Sweep frame
            group_by: Column whose curves are compared (e.g. theta)
            along: Shared abscissa (e.g. phi)
            value: Column to compare (default value_column)
            below: Only consider abscissa values strictly below this

        Returns:
            float: max over abscissa of (max - min) / max |value|, 0 for a single group
        """
        value = value or self.value_column
        data = self._valid(frame, [group_by, along, value])
        if below is not None:
            data = data[data[along] < below]
        if data.empty:
            return 0.0
        table = data.pivot_table(index=along, columns=group_by, values=value, aggfunc="first")
        spread = table.max(axis=1) - table.min(axis=1)
        scale = table.abs().max(axis=1).replace(0.0, np.nan)
        relative = (spread / scale).fillna(0.0)
        return float(relative.max())

    def sign_changes(self, frame: pd.DataFrame, along: str, value: Optional[str] = None) -> int:
        """
        Sign changes of the discrete derivative of value along one axis.

        A curve that first decreases and then increases has exactly one.
        """
        value = value or self.value_column
        data = self._valid(frame, [along, value]).sort_values(along)
        steps = np.diff(data[value].to_numpy())
        if steps.size == 0:
            return 0
        scale = np.abs(data[value].to_numpy()).max()
        signs = np.sign(steps[np.abs(steps) > self.flat_tolerance * max(scale, 1.0)])
        return int(np.count_nonzero(signs[1:] != signs[:-1]))

    def low_region(
        self,
        frame: pd.DataFrame,
        x: str,
        y: str,
        value: Optional[str] = None,
        quantile: float = 0.1
    ) -> Dict[str, Any]:
        """
        Location of the minimum and bounding box of the lowest values of a surface.

        Args:
            frame: Two-axis sweep frame
            x: First axis column
            y: Second axis column
            value: Surface column (default value_column)
            quantile: Fraction of points counted as "low"

        Returns:
            Dict with the minimum, its coordinates, the threshold and the low-region bounds
        """
        value = value or self.value_column
        data = self._valid(frame, [x, y, value])
        if data.empty:
            return {}
        lowest = data.loc[data[value].idxmin()]
        threshold = float(data[value].quantile(quantile))
        low = data[data[value] <= threshold]
        return {
            "minimum": float(lowest[value]),
            f"{x}_at_minimum": float(lowest[x]),
            f"{y}_at_minimum": float(lowest[y]),
            "threshold": threshold,
            f"{x}_range": [float(low[x].min()), float(low[x].max())],
            f"{y}_range": [float(low[y].min()), float(low[y].max())],
        }

    def dominance_fraction(
        self,
        frame: pd.DataFrame,
        better: str = "se_with_bepre",
        worse: str = "se_without_bepre",
        tolerance: float = 1e-12
    ) -> Optional[float]:
        """Fraction of points where `better` >= `worse` - tolerance."""
        data = self._valid(frame, [better, worse])
        if data.empty:
            return None
        return float((data[better] >= data[worse] - tolerance).mean())

    def summarize(self, frame: pd.DataFrame, axes: List[str]) -> Dict[str, Any]:
        """
        Summary embedded in sweep metadata.

        Args:
            frame: Sweep frame
            axes: Swept column names, in grid order

        Returns:
            Dict containing point counts and axis-dependent shape statistics
        """
        summary: Dict[str, Any] = {
            "points": int(len(frame)),
            "failed_points": int(frame["error"].astype(bool).sum()) if "error" in frame else 0,
            "dominance_fraction": self.dominance_fraction(frame),
        }
        if self.value_column in frame and frame[self.value_column].notna().any():
            summary["minimum"] = float(frame[self.value_column].min())
            summary["maximum"] = float(frame[self.value_column].max())
        if len(axes) == 1:
            summary["sign_changes"] = self.sign_changes(frame, axes[0])
        elif len(axes) == 2:
            summary["low_region"] = self.low_region(frame, axes[0], axes[1])
            if set(axes) == {"theta", "phi"}:
                summary["theta_spread"] = self.group_spread(frame, "theta", "phi")
                summary["theta_spread_below_pi_5"] = self.group_spread(
                    frame, "theta", "phi", below=np.pi / 5
                )
        return summary
