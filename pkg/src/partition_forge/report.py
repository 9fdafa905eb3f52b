"""Plot-ready CSV summaries of a pool: extremes, distributions, correlations."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .metrics import PROPERTY_NAMES, PropertyVector, correlation_matrix
from .tables import write_csv

logger = logging.getLogger(__name__)

__all__ = [
    "Extremes",
    "group_size",
    "report_extremes",
    "write_extremes",
    "report_distributions",
    "write_distributions",
    "write_correlation",
]

GROUPS = ("top", "mid", "bottom")


def group_size(n: int, frac: float) -> int:
    """``ceil(frac * n)``, ignoring float noise such as ``0.03 * 100 = 3.0000000000000004``."""
    return int(math.ceil(round(frac * n, 9)))


@dataclass(frozen=True, eq=False)
class Extremes:
    """Solutions ordered best first and tagged top / mid / bottom.

    Attributes:
        ids: Solution ids, best metric first, ties by ascending id.
        tags: Group tag per id.
        metric: Metric value per id.
        features: ``(n, 11)`` property rows aligned with ``ids``.
        metric_name: Name of the ranked metric.
    """

    ids: np.ndarray
    tags: list[str]
    metric: np.ndarray
    features: np.ndarray
    metric_name: str = "f1"

    def group(self, tag: str) -> np.ndarray:
        return np.array([t == tag for t in self.tags])

    def medians(self) -> dict[str, np.ndarray]:
        """Per group, the median of the metric followed by each property."""
        out = {}
        for tag in GROUPS:
            m = self.group(tag)
            cols = np.column_stack([self.metric, self.features])[m]
            out[tag] = np.median(cols, axis=0) if len(cols) else np.full(cols.shape[1], np.nan)
        return out


def report_extremes(metric, properties, frac: float = 0.03, metric_name: str = "f1") -> Extremes:
    """Tag the best and worst ``ceil(frac * n)`` solutions by a task metric.

    Args:
        metric: Mapping ``solution_id -> metric value``.
        properties: Mapping ``solution_id -> PropertyVector``.
        frac: Share of the pool in each of the top and bottom groups.

    Returns:
        An :class:`Extremes`; only ids present in both mappings count.
    """
    if not 0 < frac <= 0.5:
        raise ValidationError("frac must lie in (0, 0.5]")
    ids = np.array(sorted(set(metric) & set(properties)), dtype=np.int64)
    n = len(ids)
    need = group_size(2, 1.0 / frac) if frac else 0
    if n < need:
        raise ValidationError(f"need at least {need} solutions for frac={frac}, got {n}")
    values = np.array([float(metric[i]) for i in ids])
    order = np.lexsort((ids, -values))
    ids, values = ids[order], values[order]
    k = group_size(n, frac)
    if values[k - 1] == values[k] or values[n - k - 1] == values[n - k]:
        logger.warning("metric ties at a group boundary; ties ordered by solution id")
    tags = ["top"] * k + ["mid"] * (n - 2 * k) + ["bottom"] * k
    feats = np.array([properties[i].to_array() for i in ids.tolist()])
    return Extremes(ids, tags, values, feats, metric_name)


def write_extremes(ext: Extremes, path, summary_path=None) -> None:
    """Write one row per solution and, optionally, per-group medians."""
    header = ("solution_id", "group", ext.metric_name) + PROPERTY_NAMES
    write_csv(path, header, (
        [int(i), tag, float(v), *row.tolist()]
        for i, tag, v, row in zip(ext.ids, ext.tags, ext.metric, ext.features)
    ))
    if summary_path is not None:
        meds = ext.medians()
        write_csv(summary_path, ("group", "count", ext.metric_name) + PROPERTY_NAMES, (
            [tag, int(ext.group(tag).sum()), *meds[tag].tolist()] for tag in GROUPS
        ))


def report_distributions(properties) -> dict[str, tuple[float, float, float, float, float]]:
    """Five-number summary (min, q1, median, q3, max) per property column."""
    if not len(properties):
        raise ValidationError("no property rows")
    x = np.array([p.to_array() if isinstance(p, PropertyVector) else p for p in properties],
                 dtype=np.float64)
    q = np.percentile(x, [0, 25, 50, 75, 100], axis=0)
    return {name: tuple(float(v) for v in q[:, j]) for j, name in enumerate(PROPERTY_NAMES)}


def write_distributions(summary, path) -> None:
    write_csv(path, ("property", "min", "q1", "median", "q3", "max"),
              ([name, *vals] for name, vals in summary.items()))


def write_correlation(properties, path, extra=None) -> None:
    """Correlation matrix of the property columns as a labelled square CSV.

    Args:
        properties: Property rows.
        extra: Optional ``(name, values)`` appended as a last column, e.g. a
            task metric aligned with ``properties``.
    """
    x = np.array([p.to_array() if isinstance(p, PropertyVector) else p for p in properties],
                 dtype=np.float64)
    names = list(PROPERTY_NAMES)
    if extra is not None:
        name, values = extra
        x = np.column_stack([x, np.asarray(values, dtype=np.float64)])
        names.append(name)
    corr = correlation_matrix(x).matrix
    write_csv(path, ["property", *names],
              ([names[i], *corr[i].tolist()] for i in range(len(names))))
