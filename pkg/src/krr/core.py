"""Rating tables, aggregation and reliability reports.

A :class:`RatingTable` is an ``n x k`` matrix: one row per annotation item and
one column per rating slot. Slots are positional. Raters are treated as
interchangeable, so slot ``j`` of one item has nothing to do with slot ``j``
of another.

Numeric scales (ordinal, interval, ratio) store ratings as floats. The nominal
scale stores integer codes into ``alphabet`` (as floats, so that missing cells
can be ``NaN`` in both cases).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import (
    AggregationTie,
    BadRedundancy,
    IncompleteData,
    ReplicationMismatch,
    ScaleMismatch,
)

SCALES = ("nominal", "ordinal", "interval", "ratio")
NUMERIC_SCALES = ("ordinal", "interval", "ratio")


def _frozen(arr):
    arr = np.array(arr, dtype=float, copy=True)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class RatingTable:
    item_ids: tuple
    values: np.ndarray
    scale: str = "interval"
    alphabet: Optional[tuple] = None

    def __post_init__(self):
        if self.scale not in SCALES:
            raise ValueError(f"unknown scale {self.scale!r}; expected one of {SCALES}")
        values = _frozen(self.values)
        if values.ndim != 2:
            raise ValueError(f"values must be 2-D, got shape {values.shape}")
        n, k = values.shape
        if n < 1 or k < 1:
            raise ValueError(f"table needs n >= 1 and k >= 1, got {n}x{k}")
        item_ids = tuple(str(i) for i in self.item_ids)
        if len(item_ids) != n:
            raise ValueError(f"{len(item_ids)} item ids for {n} rows")
        if len(set(item_ids)) != n:
            raise ValueError("item ids must be unique")
        if np.isinf(values).any():
            raise ValueError("ratings must be finite")
        present = values[~np.isnan(values)]
        if self.scale == "nominal":
            if self.alphabet is None:
                raise ValueError("nominal tables need an alphabet")
            alphabet = tuple(self.alphabet)
            ok = (present == np.round(present)) & (present >= 0) & (present < len(alphabet))
            if not ok.all():
                raise ValueError("nominal codes must index into the alphabet")
        else:
            if self.alphabet is not None:
                raise ValueError("numeric scales do not take an alphabet")
            alphabet = None
            if self.scale == "ratio" and (present < 0).any():
                raise ValueError("ratio-scale ratings must be non-negative")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "item_ids", item_ids)
        object.__setattr__(self, "alphabet", alphabet)

    @classmethod
    def from_rows(cls, rows, item_ids=None, scale="interval", alphabet=None):
        """Build a table from nested sequences; ``None`` marks a missing cell.

        Rows may be ragged; short rows are padded with missing cells. For the
        nominal scale the cells are labels and ``alphabet`` defaults to the
        sorted set of labels seen.
        """
        rows = [list(r) for r in rows]
        k = max((len(r) for r in rows), default=0)
        if item_ids is None:
            item_ids = [str(i) for i in range(len(rows))]
        values = np.full((len(rows), k), np.nan)
        if scale == "nominal":
            if alphabet is None:
                alphabet = sorted({c for r in rows for c in r if c is not None}, key=str)
            code = {label: i for i, label in enumerate(alphabet)}
            for i, r in enumerate(rows):
                for j, c in enumerate(r):
                    if c is None:
                        continue
                    if c not in code:
                        raise ValueError(f"label {c!r} not in alphabet {tuple(alphabet)}")
                    values[i, j] = code[c]
            return cls(tuple(item_ids), values, scale, tuple(alphabet))
        for i, r in enumerate(rows):
            for j, c in enumerate(r):
                if c is not None:
                    values[i, j] = float(c)
        return cls(tuple(item_ids), values, scale, None)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def k(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self):
        return self.values.shape

    @property
    def categorical(self) -> bool:
        return self.scale == "nominal"

    @property
    def missing_mask(self) -> np.ndarray:
        return np.isnan(self.values)

    @property
    def n_missing(self) -> int:
        return int(self.missing_mask.sum())

    @property
    def is_complete(self) -> bool:
        return self.n_missing == 0

    def counts(self) -> np.ndarray:
        """Number of non-missing ratings per item."""
        return (~self.missing_mask).sum(axis=1)

    def decode(self, value):
        if value is None or (isinstance(value, float) and math.isnan(value)):
            return None
        if self.categorical:
            return self.alphabet[int(value)]
        return float(value)

    def to_rows(self) -> list:
        return [[self.decode(v) for v in row] for row in self.values]

    def with_values(self, values) -> "RatingTable":
        return RatingTable(self.item_ids, values, self.scale, self.alphabet)

    def take_items(self, index) -> "RatingTable":
        index = np.asarray(index, dtype=int)
        return RatingTable(
            tuple(self.item_ids[i] for i in index), self.values[index], self.scale, self.alphabet
        )

    def take_slots(self, slots) -> "RatingTable":
        return RatingTable(self.item_ids, self.values[:, list(slots)], self.scale, self.alphabet)

    def require_complete(self, what="this computation"):
        if not self.is_complete:
            raise IncompleteData(
                f"{what} needs a complete table but {self.n_missing} cells are missing; "
                "use complete_case_filter to select complete items"
            )

    def __eq__(self, other):
        if not isinstance(other, RatingTable):
            return NotImplemented
        return (
            self.item_ids == other.item_ids
            and self.scale == other.scale
            and self.alphabet == other.alphabet
            and np.array_equal(self.values, other.values, equal_nan=True)
        )

    def __repr__(self):
        return f"RatingTable(n={self.n}, k={self.k}, scale={self.scale!r}, missing={self.n_missing})"


@dataclass(frozen=True)
class AggregationFn:
    kind: str = "mean"
    tie_break: str = "error"

    def __post_init__(self):
        if self.kind not in ("mean", "median", "majority"):
            raise ValueError(f"unknown aggregation {self.kind!r}")
        if self.tie_break not in ("error", "lowest-label"):
            raise ValueError(f"unknown tie_break {self.tie_break!r}")

    @classmethod
    def coerce(cls, fn) -> "AggregationFn":
        if isinstance(fn, cls):
            return fn
        return cls(str(fn))


@dataclass(frozen=True, eq=False)
class AggregateVector:
    item_ids: tuple
    values: np.ndarray
    k: int
    scale: str
    alphabet: Optional[tuple] = None
    kind: str = "mean"

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(self.values))
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if len(self.values) != len(self.item_ids):
            raise ValueError("values and item ids differ in length")

    def labels(self) -> list:
        if self.alphabet is None:
            return [float(v) for v in self.values]
        return [self.alphabet[int(v)] for v in self.values]

    def __len__(self):
        return len(self.values)


def _majority(values, tie_break):
    """Row-wise mode of a complete float matrix; ties resolve to the lowest value."""
    uniq, inverse = np.unique(values, return_inverse=True)
    inverse = inverse.reshape(values.shape)
    counts = np.zeros((values.shape[0], len(uniq)), dtype=int)
    rows = np.repeat(np.arange(values.shape[0]), values.shape[1])
    np.add.at(counts, (rows, inverse.ravel()), 1)
    best = counts.max(axis=1)
    if tie_break == "error":
        tied = (counts == best[:, None]).sum(axis=1) > 1
        if tied.any():
            raise AggregationTie(f"{int(tied.sum())} items have no unique majority")
    return uniq[counts.argmax(axis=1)]


def aggregate(table: RatingTable, fn="mean", slot_subset: Optional[Sequence[int]] = None) -> AggregateVector:
    """Reduce each item's ratings over the selected slots to one value.

    Even-count medians are the midpoint of the two central values. Majority
    ties raise :class:`AggregationTie` unless ``tie_break="lowest-label"``,
    which picks the smallest value (numeric scales) or the earliest label in
    the alphabet (nominal).
    """
    fn = AggregationFn.coerce(fn)
    if slot_subset is None:
        values = table.values
    else:
        slot_subset = list(slot_subset)
        if not slot_subset or any(not 0 <= s < table.k for s in slot_subset):
            raise BadRedundancy(f"slot subset must be a non-empty subset of 0..{table.k - 1}")
        values = table.values[:, slot_subset]
    if np.isnan(values).any():
        raise IncompleteData("selected slots contain missing cells")
    if fn.kind in ("mean", "median") and table.categorical:
        raise ScaleMismatch(f"{fn.kind} aggregation needs numeric ratings, table is nominal")
    if fn.kind == "mean":
        out = values.mean(axis=1)
    elif fn.kind == "median":
        out = np.median(values, axis=1)
    else:
        out = _majority(values, fn.tie_break)
    return AggregateVector(table.item_ids, out, values.shape[1], table.scale, table.alphabet, fn.kind)


def pair_aggregates(a: AggregateVector, b: AggregateVector) -> RatingTable:
    """Stack two aggregate vectors as the two slots of a table."""
    if a.item_ids != b.item_ids:
        raise ReplicationMismatch(sorted(set(a.item_ids) - set(b.item_ids)),
                                  sorted(set(b.item_ids) - set(a.item_ids)))
    if a.alphabet != b.alphabet:
        raise ScaleMismatch("aggregate vectors use different alphabets")
    return RatingTable(a.item_ids, np.column_stack([a.values, b.values]), a.scale, a.alphabet)


def column_subsample(table: RatingTable, k: int, rng_seed) -> RatingTable:
    """Pick ``k`` slots uniformly without replacement; deterministic per seed.

    ``rng_seed`` may be an int, a sequence of ints (mixed into one seed), or a
    ``numpy.random.Generator``.
    """
    if not 1 <= k <= table.k:
        raise BadRedundancy(f"k={k} outside 1..{table.k}")
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    return table.take_slots(rng.permutation(table.k)[:k])


@dataclass(frozen=True)
class ReliabilityReport:
    method: str
    k: int
    value: float
    n_items: int
    dispersion: Optional[float] = None
    seed: Optional[int] = None
    draws: Optional[int] = None
    bootstrap_iterations: Optional[int] = None
    coefficient: Optional[str] = None
    warnings: tuple = field(default_factory=tuple)

    METHODS = ("alpha", "kappa", "icc", "sb", "krr_empirical", "krr_bootstrap")
    STOCHASTIC = ("krr_empirical", "krr_bootstrap")

    def __post_init__(self):
        if self.method not in self.METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if (self.dispersion is not None) != (self.method in self.STOCHASTIC):
            raise ValueError("dispersion is reported exactly for the stochastic methods")
        object.__setattr__(self, "value", float(self.value))
        object.__setattr__(self, "warnings", tuple(self.warnings))

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "k": self.k,
            "value": self.value,
            "dispersion": self.dispersion,
            "n_items": self.n_items,
            "draws": self.draws,
            "B": self.bootstrap_iterations,
            "seed": self.seed,
            "coefficient": self.coefficient,
            "warnings": list(self.warnings),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text) -> "ReliabilityReport":
        d = json.loads(text)
        d["bootstrap_iterations"] = d.pop("B", None)
        d["warnings"] = tuple(d.get("warnings", ()))
        return cls(**d)
