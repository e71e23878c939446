"""Chance-corrected agreement: Krippendorff's alpha and Cohen's kappa.

Alpha is computed from the coincidence matrix. Every item rated ``m >= 2``
times contributes its ``m(m-1)`` ordered pairs of ratings, each weighted
``1/(m-1)``; items with fewer than two ratings are not pairable and are left
out. Then::

    alpha = 1 - D_o / D_e
    D_o = sum_{c,c'} o(c,c') d(c,c') / n
    D_e = sum_{c,c'} n_c n_c' d(c,c') / (n (n-1))

Real-valued ratings, including means of several ratings, are used as exact
values; nothing is binned.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import AggregateVector, RatingTable, ReliabilityReport
from .errors import DegenerateData, IncompleteData, InsufficientPairs, ScaleMismatch

METRICS = ("nominal", "ordinal", "interval", "ratio")


@dataclass(frozen=True, eq=False)
class CoincidenceMatrix:
    values: np.ndarray  # sorted distinct pairable values
    counts: np.ndarray  # o(c, c'), symmetric
    n_excluded: int = 0

    @property
    def marginals(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def total(self) -> float:
        return float(self.counts.sum())


def coincidence_matrix(table: RatingTable) -> CoincidenceMatrix:
    values = table.values
    pairable = (~np.isnan(values)).sum(axis=1) >= 2
    if not pairable.any():
        raise InsufficientPairs("no item has two or more ratings")
    values = values[pairable]
    present = ~np.isnan(values)
    uniq, inverse = np.unique(values[present], return_inverse=True)
    rows = np.nonzero(present)[0]
    per_item = np.zeros((values.shape[0], len(uniq)))
    np.add.at(per_item, (rows, inverse), 1.0)
    m = per_item.sum(axis=1)
    weighted = per_item / (m - 1)[:, None]
    counts = weighted.T @ per_item - np.diag(weighted.sum(axis=0))
    counts = (counts + counts.T) / 2
    return CoincidenceMatrix(uniq, counts, int((~pairable).sum()))


def distance_matrix(values, marginals, metric: str) -> np.ndarray:
    """Squared distances ``d(c, c')`` between all pairs of ``values``."""
    v = np.asarray(values, dtype=float)
    if metric == "nominal":
        return (v[:, None] != v[None, :]).astype(float)
    if metric == "interval":
        return (v[:, None] - v[None, :]) ** 2
    if metric == "ratio":
        num = v[:, None] - v[None, :]
        den = v[:, None] + v[None, :]
        with np.errstate(invalid="ignore", divide="ignore"):
            out = (num / den) ** 2
        return np.where(den == 0, 0.0, out)
    if metric == "ordinal":
        # rank position of c: (values below c) + half of c's own mass
        pos = np.cumsum(marginals) - np.asarray(marginals) / 2
        return (pos[:, None] - pos[None, :]) ** 2
    raise ValueError(f"unknown metric {metric!r}; expected one of {METRICS}")


def _interval_sums(table: RatingTable):
    """Coincidence-weighted squared-difference sums without building the matrix.

    For squared differences, the ordered pairs within an item sum to
    ``2 (m S2 - S1^2)`` and across all pairable values to ``2 (n S2 - S1^2)``,
    with ``S1``, ``S2`` the first two power sums. Values are centred first;
    the metric is shift-invariant and centring avoids cancellation.
    """
    values = table.values
    present = ~np.isnan(values)
    m = present.sum(axis=1)
    pairable = m >= 2
    if not pairable.any():
        raise InsufficientPairs("no item has two or more ratings")
    x = values[pairable]
    m = m[pairable].astype(float)
    mask = present[pairable]
    x = np.where(mask, x - x[mask].mean(), 0.0)
    s1 = x.sum(axis=1)
    s2 = (x * x).sum(axis=1)
    observed = float((2 * (m * s2 - s1 * s1) / (m - 1)).sum())
    n = m.sum()
    if np.ptp(values[pairable][mask]) == 0:
        return n, 0.0, 0.0, int((~pairable).sum())
    expected = float(2 * (n * s2.sum() - s1.sum() ** 2))
    return n, observed, expected, int((~pairable).sum())


def krippendorff_alpha(table: RatingTable, metric: str = "interval") -> ReliabilityReport:
    """Krippendorff's alpha over all pairable items of ``table``.

    Missing cells are allowed. Items with fewer than two ratings are excluded
    and counted in the report's warnings.
    """
    if table.categorical and metric != "nominal":
        raise ScaleMismatch(f"{metric} metric needs numeric ratings, table is nominal")
    if metric == "interval":
        n, observed, expected, n_excluded = _interval_sums(table)
    else:
        cm = coincidence_matrix(table)
        nc = cm.marginals
        n = nc.sum()
        delta = distance_matrix(cm.values, nc, metric)
        observed = float((cm.counts * delta).sum())
        expected = float((np.outer(nc, nc) * delta).sum())
        n_excluded = cm.n_excluded
    if expected <= 0:
        raise DegenerateData("expected disagreement is zero: every pairable rating is the same value")
    value = 1.0 - (n - 1) * observed / expected
    warnings = []
    if n_excluded:
        warnings.append(f"{n_excluded} items with fewer than 2 ratings excluded")
    return ReliabilityReport(
        "alpha", k=1, value=value, n_items=table.n - n_excluded,
        coefficient=f"alpha-{metric}", warnings=tuple(warnings),
    )


def _labels(col):
    if isinstance(col, AggregateVector):
        if col.kind in ("mean", "median"):
            raise ScaleMismatch(f"kappa needs categorical ratings, got {col.kind} aggregates")
        return col.labels()
    out = list(col)
    if any(v is None or (isinstance(v, float) and np.isnan(v)) for v in out):
        raise IncompleteData("kappa needs a label for every item in both columns")
    return out


def cohens_kappa(col_a, col_b, k: Optional[int] = None) -> ReliabilityReport:
    """Cohen's kappa between two label columns over the same items."""
    a, b = _labels(col_a), _labels(col_b)
    if len(a) != len(b) or not a:
        raise ValueError(f"columns must have equal non-zero length, got {len(a)} and {len(b)}")
    labels = sorted(set(a) | set(b), key=str)
    index = {c: i for i, c in enumerate(labels)}
    confusion = np.zeros((len(labels), len(labels)))
    np.add.at(confusion, ([index[x] for x in a], [index[y] for y in b]), 1.0)
    n = confusion.sum()
    p_o = np.trace(confusion) / n
    p_e = float(confusion.sum(axis=1) @ confusion.sum(axis=0)) / n**2
    if p_e >= 1.0:
        raise DegenerateData("chance agreement is 1: both columns use one identical label")
    if k is None:
        k = getattr(col_a, "k", 1)
    return ReliabilityReport(
        "kappa", k=k, value=(p_o - p_e) / (1 - p_e), n_items=len(a), coefficient="kappa"
    )
