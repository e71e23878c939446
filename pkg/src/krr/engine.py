"""k-rater reliability: agreement between replications of k-rating aggregates.

Three routes are offered. :func:`krr_empirical` compares two real
replications. :func:`krr_bootstrap` builds pseudo-replications by resampling
each item's ratings with replacement. :func:`k_curve` lines the empirical
route up against ICC(k) and Spearman-Brown predictions for k = 1..k_max.

Every stochastic repetition ``i`` draws from its own generator seeded with
``(seed, i)``, so results do not depend on evaluation order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .agreement import METRICS, cohens_kappa, krippendorff_alpha
from .core import AggregationFn, RatingTable, ReliabilityReport, aggregate, pair_aggregates
from .errors import BadRedundancy, ScaleMismatch
from .icc import icc_k, spearman_brown, variance_components
from .ingest import align_replications


@dataclass(frozen=True)
class KrrConfig:
    k: int = 1
    aggregation: AggregationFn = field(default_factory=AggregationFn)
    coefficient: str = "alpha"
    metric: str = "interval"
    draws: int = 30
    bootstrap_iterations: int = 100
    seed: int = 0
    pairing: str = "independent"

    def __post_init__(self):
        object.__setattr__(self, "aggregation", AggregationFn.coerce(self.aggregation))
        if self.k < 1 or self.draws < 1 or self.bootstrap_iterations < 1:
            raise ValueError("k, draws and bootstrap_iterations must all be >= 1")
        if self.coefficient not in ("alpha", "kappa"):
            raise ValueError(f"unknown coefficient {self.coefficient!r}")
        if self.metric not in METRICS:
            raise ValueError(f"unknown metric {self.metric!r}")
        if self.coefficient == "kappa" and self.aggregation.kind != "majority":
            raise ScaleMismatch("kappa needs categorical aggregates; use majority aggregation")
        if self.pairing not in ("independent", "consecutive"):
            raise ValueError(f"unknown pairing {self.pairing!r}")

    @property
    def coefficient_name(self) -> str:
        return "kappa" if self.coefficient == "kappa" else f"alpha-{self.metric}"


def _agreement(vec_a, vec_b, cfg: KrrConfig) -> float:
    if cfg.coefficient == "kappa":
        return cohens_kappa(vec_a, vec_b).value
    return krippendorff_alpha(pair_aggregates(vec_a, vec_b), cfg.metric).value


def _summarise(values):
    values = np.asarray(values, dtype=float)
    sd = float(values.std(ddof=1)) if len(values) > 1 else 0.0
    return float(values.mean()), sd


def _draw_k(table: RatingTable, k: int, rng) -> np.ndarray:
    """``k`` distinct ratings per item; whole columns when the table is complete."""
    if table.is_complete:
        return table.values[:, rng.permutation(table.k)[:k]]
    out = np.empty((table.n, k))
    for i, row in enumerate(table.values):
        present = row[~np.isnan(row)]
        out[i] = present[rng.permutation(len(present))[:k]]
    return out


def krr_empirical(rep_a: RatingTable, rep_b: RatingTable, cfg: KrrConfig) -> ReliabilityReport:
    """Agreement between k-rating aggregates of two replications.

    Each draw samples ``cfg.k`` ratings per item without replacement from
    each replication independently, aggregates both, and measures agreement
    between the two aggregate vectors. When ``cfg.k`` uses every rating of
    two complete tables there is nothing to sample and one draw is made.
    """
    rep_a, rep_b = align_replications(rep_a, rep_b)
    for name, rep in (("first", rep_a), ("second", rep_b)):
        short = int((rep.counts() < cfg.k).sum())
        if short:
            raise BadRedundancy(f"{short} items in the {name} replication have fewer than k={cfg.k} ratings")
    full = rep_a.is_complete and rep_b.is_complete and rep_a.k == rep_b.k == cfg.k
    draws = 1 if full else cfg.draws
    estimates = []
    if full:
        estimates.append(_agreement(aggregate(rep_a, cfg.aggregation), aggregate(rep_b, cfg.aggregation), cfg))
    for d in range(0 if full else draws):
        rng = np.random.default_rng([cfg.seed, d])
        va = aggregate(rep_a.with_values(_draw_k(rep_a, cfg.k, rng)), cfg.aggregation)
        vb = aggregate(rep_b.with_values(_draw_k(rep_b, cfg.k, rng)), cfg.aggregation)
        estimates.append(_agreement(va, vb, cfg))
    value, sd = _summarise(estimates)
    return ReliabilityReport(
        "krr_empirical", k=cfg.k, value=value, n_items=rep_a.n, dispersion=sd,
        seed=cfg.seed, draws=draws, coefficient=cfg.coefficient_name,
    )


def bootstrap_replication(table: RatingTable, rng) -> RatingTable:
    """Resample each item's k ratings with replacement, keeping k per item."""
    n, k = table.shape
    picks = rng.integers(0, k, size=(n, k))
    return table.with_values(np.take_along_axis(table.values, picks, axis=1))


def krr_bootstrap(table: RatingTable, cfg: KrrConfig) -> ReliabilityReport:
    """kRR of a single table at its full redundancy, from bootstrap pseudo-replications.

    With ``pairing="independent"`` each iteration draws two fresh
    pseudo-replications. ``pairing="consecutive"`` draws B + 1 of them and
    compares each with the next.
    """
    table.require_complete("bootstrap")
    if cfg.k != table.k:
        raise BadRedundancy(f"bootstrap resamples at the table's redundancy k={table.k}, got k={cfg.k}")
    B = cfg.bootstrap_iterations
    estimates = []
    if cfg.pairing == "independent":
        for b in range(B):
            rng = np.random.default_rng([cfg.seed, b])
            va = aggregate(bootstrap_replication(table, rng), cfg.aggregation)
            vb = aggregate(bootstrap_replication(table, rng), cfg.aggregation)
            estimates.append(_agreement(va, vb, cfg))
    else:
        vecs = [
            aggregate(bootstrap_replication(table, np.random.default_rng([cfg.seed, b])), cfg.aggregation)
            for b in range(B + 1)
        ]
        estimates = [_agreement(vecs[b], vecs[b + 1], cfg) for b in range(B)]
    value, sd = _summarise(estimates)
    return ReliabilityReport(
        "krr_bootstrap", k=table.k, value=value, n_items=table.n, dispersion=sd,
        seed=cfg.seed, bootstrap_iterations=B, coefficient=cfg.coefficient_name,
    )


@dataclass(frozen=True)
class CurvePoint:
    k: int
    method: str
    value: float
    dispersion: float


def k_curve(rep_a: RatingTable, rep_b: RatingTable = None, cfg: KrrConfig = None,
            k_max: int = None, pilot_k: int = 2) -> list:
    """Reliability against redundancy for k = 1..k_max, three ways.

    Returns one dict per k mapping method name (``"krr_empirical"``,
    ``"icc"``, ``"sb"``) to a :class:`CurvePoint`, or to ``None`` when the
    method is unavailable at that k. ICC(k) is estimated on k randomly drawn
    columns, so it does not exist at k = 1; the Spearman-Brown series
    extrapolates from a ``pilot_k``-column ICC(1). Both are averaged over
    ``cfg.draws`` column draws, and both are unavailable for nominal data.
    The empirical series needs ``rep_b``.
    """
    cfg = cfg or KrrConfig()
    if k_max is None:
        k_max = min(rep_a.k, rep_b.k) if rep_b is not None else rep_a.k
    if k_max < 1:
        raise BadRedundancy("k_max must be >= 1")
    if rep_b is not None and k_max > min(rep_a.k, rep_b.k):
        raise BadRedundancy(f"k_max={k_max} exceeds the replications' redundancy")
    numeric = not rep_a.categorical
    if numeric:
        rep_a.require_complete("ICC and Spearman-Brown series")

    pilots = []
    for d in range(cfg.draws if numeric else 0):
        sub = rep_a.take_slots(np.random.default_rng([cfg.seed, d]).permutation(rep_a.k)[:pilot_k])
        pilots.append(variance_components(sub).icc(1))

    rows = []
    for k in range(1, k_max + 1):
        row = {}
        if rep_b is not None:
            rep = krr_empirical(rep_a, rep_b, KrrConfig(
                k, cfg.aggregation, cfg.coefficient, cfg.metric, cfg.draws,
                cfg.bootstrap_iterations, cfg.seed))
            row["krr_empirical"] = CurvePoint(k, "krr_empirical", rep.value, rep.dispersion)
        if not numeric:
            row["icc"] = row["sb"] = None
            rows.append(row)
            continue
        if 2 <= k <= rep_a.k:
            iccs = [icc_k(rep_a, k, mode="subsample", seed=[cfg.seed, d]).value for d in range(cfg.draws)]
            row["icc"] = CurvePoint(k, "icc", *_summarise(iccs))
        else:
            row["icc"] = None
        row["sb"] = CurvePoint(k, "sb", *_summarise([spearman_brown(p, k) for p in pilots]))
        rows.append(row)
    return rows
