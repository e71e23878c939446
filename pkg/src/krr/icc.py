"""One-way random-effects intraclass correlation.

Ratings are modelled as ``x_ij = mu + phi_i + eps_ij`` with interchangeable
raters. With ``n`` items and ``k`` ratings each::

    SSW = sum_ij (x_ij - xbar_i.)^2
    SSB = k sum_i (xbar_i. - xbar_..)^2
    sigma2_eps = SSW / (n (k - 1))
    sigma2_phi = SSB / (k (n - 1)) - sigma2_eps / k
    ICC(k) = sigma2_phi / (sigma2_phi + sigma2_eps / k)

ICC(1) is the reliability of a single rating; ICC(k) that of the k-rating
mean. The Spearman-Brown prophecy maps one to the other.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import RatingTable, ReliabilityReport, column_subsample
from .errors import BadRedundancy, DegenerateData, InsufficientDesign, ScaleMismatch, SBDomainError

NEGATIVE_VARIANCE = "negative between-item variance estimate; ICC reported unclamped"


@dataclass(frozen=True)
class VarianceComponents:
    ssw: float
    ssb: float
    sigma2_eps: float
    sigma2_phi: float
    grand_mean: float
    n: int
    k: int

    def icc(self, k_eval: int) -> float:
        denom = self.sigma2_phi + self.sigma2_eps / k_eval
        if denom == 0:
            raise DegenerateData("ICC undefined: between-item and within-item variance are both zero")
        return self.sigma2_phi / denom


def variance_components(table: RatingTable) -> VarianceComponents:
    if table.categorical:
        raise ScaleMismatch("ICC needs numeric ratings, table is nominal")
    table.require_complete("ICC")
    n, k = table.shape
    if n < 2 or k < 2:
        raise InsufficientDesign(f"ICC needs at least 2 items and 2 ratings per item, got {n}x{k}")
    x = table.values
    # shift-invariant sums; shifting first keeps exactly-equal ratings at exactly zero spread
    within = x - x[:, :1]
    ssw = float(((within - within.mean(axis=1, keepdims=True)) ** 2).sum())
    offsets = x[:, 0] + within.mean(axis=1)
    between = offsets - offsets[0]
    ssb = float(k * ((between - between.mean()) ** 2).sum())
    grand_mean = float(x.mean())
    sigma2_eps = ssw / (n * (k - 1))
    sigma2_phi = ssb / (k * (n - 1)) - sigma2_eps / k
    return VarianceComponents(ssw, ssb, sigma2_eps, sigma2_phi, grand_mean, n, k)


def icc_k(table: RatingTable, k_eval: int, mode: str = "full", seed=None) -> ReliabilityReport:
    """Reliability of the ``k_eval``-rating mean.

    ``mode="full"`` estimates the variance components from every column and
    evaluates the formula at ``k_eval``. ``mode="subsample"`` first draws
    ``k_eval`` columns (seeded) and estimates from those alone, which needs
    ``k_eval >= 2``.
    """
    if not 1 <= k_eval <= table.k:
        raise BadRedundancy(f"k_eval={k_eval} outside 1..{table.k}")
    if mode == "full":
        vc = variance_components(table)
    elif mode == "subsample":
        vc = variance_components(column_subsample(table, k_eval, seed))
    else:
        raise ValueError(f"unknown mode {mode!r}")
    value = vc.icc(k_eval)
    warnings = (NEGATIVE_VARIANCE,) if vc.sigma2_phi < 0 else ()
    return ReliabilityReport(
        "icc", k=k_eval, value=value, n_items=vc.n,
        seed=seed if mode == "subsample" else None, coefficient="icc-oneway",
        warnings=warnings,
    )


def spearman_brown(icc1: float, k) -> float:
    """Predicted reliability of a k-rating mean from single-rating reliability."""
    if not -1.0 <= icc1 <= 1.0:
        raise SBDomainError(f"icc1={icc1} outside [-1, 1]")
    if k < 1:
        raise SBDomainError(f"k={k} must be >= 1")
    denom = 1.0 + (k - 1) * icc1
    if denom <= 0:
        raise SBDomainError(f"1 + (k-1)*icc1 = {denom} <= 0")
    return k * icc1 / denom


def sb_curve(table: RatingTable, pilot_k: int = 2, k_max: int = None, seed=0) -> list:
    """Spearman-Brown predictions for k = 1..k_max from a ``pilot_k``-column pilot.

    ICC(1) is estimated on ``pilot_k`` randomly drawn columns only, then
    extrapolated; ``k_max`` defaults to the table's redundancy.
    """
    if k_max is None:
        k_max = table.k
    if pilot_k < 2:
        raise InsufficientDesign("the pilot needs at least 2 ratings per item")
    pilot = icc_k(column_subsample(table, pilot_k, seed), 1).value
    return [(k, spearman_brown(pilot, k)) for k in range(1, k_max + 1)]
