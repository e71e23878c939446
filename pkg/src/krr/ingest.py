"""Reading annotation datasets from CSV.

Two shapes are accepted, both UTF-8 and comma-delimited with a header row:

* long: ``item_id,replication_id,slot,value``, one rating per row, ``slot``
  optional (empty cell);
* wide: ``item_id,r1,...,rk``, one item per row, empty cells are missing.

Both parse into :class:`LongRecord` lists; :func:`to_table` and
:func:`pair_replications` turn those into :class:`~krr.core.RatingTable`.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .core import NUMERIC_SCALES, SCALES, RatingTable
from .errors import (
    BadReplicationCount,
    DuplicateCell,
    EmptyReplication,
    ParseError,
    ReplicationMismatch,
    ValueParseError,
)

LONG_HEADER = ("item_id", "replication_id", "slot", "value")


@dataclass(frozen=True)
class LongRecord:
    item_id: str
    replication_id: str
    slot: Optional[int]
    value: object
    line: int = 0


@dataclass(frozen=True)
class DatasetManifest:
    scale: str = "interval"
    min: Optional[float] = None
    max: Optional[float] = None
    alphabet: Optional[tuple] = None
    k: Optional[int] = None
    replications: Optional[tuple] = None

    def __post_init__(self):
        if self.scale not in SCALES:
            raise ValueError(f"unknown scale {self.scale!r}")

    def check(self, value) -> Optional[str]:
        """Return a description of why ``value`` violates the manifest, or None."""
        if self.alphabet is not None and value not in self.alphabet:
            return f"label {value!r} not in declared alphabet"
        if self.scale in NUMERIC_SCALES:
            if self.min is not None and value < self.min:
                return f"value {value} below declared min {self.min}"
            if self.max is not None and value > self.max:
                return f"value {value} above declared max {self.max}"
        return None


def read_manifest(path) -> DatasetManifest:
    """Parse a ``key=value`` manifest (blank lines and ``#`` comments skipped)."""
    fields = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(lineno, f"expected key=value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        fields[key] = value
    unknown = set(fields) - {"scale", "min", "max", "alphabet", "k", "replications"}
    if unknown:
        raise ParseError(0, f"unknown manifest keys {sorted(unknown)}")
    split = lambda s: tuple(p.strip() for p in s.split(",") if p.strip())  # noqa: E731
    return DatasetManifest(
        scale=fields.get("scale", "interval"),
        min=float(fields["min"]) if "min" in fields else None,
        max=float(fields["max"]) if "max" in fields else None,
        alphabet=split(fields["alphabet"]) if "alphabet" in fields else None,
        k=int(fields["k"]) if "k" in fields else None,
        replications=split(fields["replications"]) if "replications" in fields else None,
    )


def parse_value(text: str, scale: str, line: int):
    text = text.strip()
    if scale == "nominal":
        if not text:
            raise ValueParseError(line, "empty label")
        return text
    try:
        value = float(text)
    except ValueError:
        raise ValueParseError(line, f"{text!r} is not a number ({scale} scale)") from None
    if not math.isfinite(value):
        raise ValueParseError(line, f"{text!r} is not finite")
    return value


def _rows(path):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        for row in reader:
            yield reader.line_num, row


def sniff_format(path) -> str:
    """``"long"`` or ``"wide"``, decided from the header row."""
    with open(path, newline="", encoding="utf-8") as fh:
        header = next(csv.reader(fh), None)
    if not header:
        raise ParseError(1, "missing header row")
    header = tuple(h.strip() for h in header)
    if sorted(header) == sorted(LONG_HEADER):
        return "long"
    if header[0] == "item_id" and len(header) >= 2:
        return "wide"
    raise ParseError(1, f"unrecognised header {list(header)}")


def parse_long_csv(path, scale="interval", findings=None) -> list:
    """Parse a long-format CSV into records.

    Unparseable values raise :class:`ValueParseError` unless a ``findings``
    list is given, in which case the error is appended and the row skipped.
    """
    rows = _rows(path)
    try:
        lineno, header = next(rows)
    except StopIteration:
        raise ParseError(1, "missing header row") from None
    header = [h.strip() for h in header]
    if sorted(header) != sorted(LONG_HEADER):
        raise ParseError(lineno, f"header must name {', '.join(LONG_HEADER)}; got {header}")
    col = {name: header.index(name) for name in LONG_HEADER}
    records, seen = [], set()
    for lineno, row in rows:
        if not row:
            continue
        if len(row) != len(header):
            raise ParseError(lineno, f"expected {len(header)} fields, got {len(row)}")
        item = row[col["item_id"]].strip()
        rep = row[col["replication_id"]].strip()
        slot_text = row[col["slot"]].strip()
        if not item:
            raise ParseError(lineno, "empty item_id")
        try:
            slot = int(slot_text) if slot_text else None
        except ValueError:
            raise ParseError(lineno, f"slot {slot_text!r} is not an integer") from None
        try:
            value = parse_value(row[col["value"]], scale, lineno)
        except ValueParseError as err:
            if findings is None:
                raise
            findings.append(err)
            continue
        if slot is not None:
            key = (item, rep, slot)
            if key in seen:
                raise DuplicateCell(f"line {lineno}: duplicate cell item={item} replication={rep} slot={slot}")
            seen.add(key)
        records.append(LongRecord(item, rep, slot, value, lineno))
    return records


def parse_wide_csv(path, scale="interval", replication_id="", findings=None) -> list:
    """Parse a wide-format CSV (one row per item) into records."""
    rows = _rows(path)
    try:
        lineno, header = next(rows)
    except StopIteration:
        raise ParseError(1, "missing header row") from None
    if not header or header[0].strip() != "item_id":
        raise ParseError(lineno, "wide header must start with item_id")
    records, items = [], set()
    for lineno, row in rows:
        if not row:
            continue
        if len(row) != len(header):
            raise ParseError(lineno, f"expected {len(header)} fields, got {len(row)}")
        item = row[0].strip()
        if not item:
            raise ParseError(lineno, "empty item_id")
        if item in items:
            raise DuplicateCell(f"line {lineno}: item {item} appears twice")
        items.add(item)
        for slot, text in enumerate(row[1:]):
            if not text.strip():
                continue
            try:
                value = parse_value(text, scale, lineno)
            except ValueParseError as err:
                if findings is None:
                    raise
                findings.append(err)
                continue
            records.append(LongRecord(item, replication_id, slot, value, lineno))
    return records


def read_records(path, scale="interval", findings=None) -> list:
    if sniff_format(path) == "long":
        return parse_long_csv(path, scale, findings)
    return parse_wide_csv(path, scale, replication_id=Path(path).stem, findings=findings)


def replication_ids(records) -> list:
    """Replication ids in order of first appearance."""
    return list(dict.fromkeys(r.replication_id for r in records))


def to_table(records, replication_id=None, scale="interval", alphabet=None) -> RatingTable:
    """Arrange one replication's records as an items x slots table.

    Each item's ratings are ordered by their slot (records without a slot keep
    arrival order) and packed left, so ``k`` is the largest number of ratings
    any item received and items with fewer ratings get trailing missing cells.
    """
    if replication_id is None:
        ids = replication_ids(records)
        if len(ids) > 1:
            raise BadReplicationCount(f"records hold replications {ids}; name one")
        replication_id = ids[0] if ids else ""
    by_item = {}
    for order, rec in enumerate(records):
        if rec.replication_id != replication_id:
            continue
        key = (rec.slot if rec.slot is not None else -1, order)
        by_item.setdefault(rec.item_id, []).append((key, rec.value))
    if not by_item:
        raise EmptyReplication(f"no records for replication {replication_id!r}")
    rows = [[v for _, v in sorted(cells, key=lambda c: c[0])] for cells in by_item.values()]
    return RatingTable.from_rows(rows, list(by_item), scale=scale, alphabet=alphabet)


def complete_case_filter(table: RatingTable, k_required: int) -> RatingTable:
    """Keep items with at least ``k_required`` ratings, truncated to their first ``k_required``."""
    if not 1 <= k_required <= table.k:
        raise ValueError(f"k_required={k_required} outside 1..{table.k}")
    keep = np.flatnonzero(table.counts() >= k_required)
    if keep.size == 0:
        raise EmptyReplication(f"no item has {k_required} ratings")
    rows = []
    for i in keep:
        present = table.values[i][~np.isnan(table.values[i])]
        rows.append(present[:k_required])
    return RatingTable(
        tuple(table.item_ids[i] for i in keep), np.array(rows), table.scale, table.alphabet
    )


def pair_replications(records, scale="interval", alphabet=None):
    """Split records of exactly two replications into tables with matching item order."""
    ids = replication_ids(records)
    if len(ids) != 2:
        raise BadReplicationCount(f"expected 2 replications, found {len(ids)}: {ids}")
    if scale == "nominal" and alphabet is None:
        alphabet = sorted({r.value for r in records}, key=str)
    a = to_table(records, ids[0], scale, alphabet)
    b = to_table(records, ids[1], scale, alphabet)
    return align_replications(a, b)


def align_replications(a: RatingTable, b: RatingTable):
    """Reorder ``b``'s items to follow ``a``; item sets must match."""
    only_a = [i for i in a.item_ids if i not in set(b.item_ids)]
    only_b = [i for i in b.item_ids if i not in set(a.item_ids)]
    if only_a or only_b:
        raise ReplicationMismatch(only_a, only_b)
    pos = {item: i for i, item in enumerate(b.item_ids)}
    return a, b.take_items([pos[i] for i in a.item_ids])


def _fmt(value) -> str:
    return repr(float(value)) if isinstance(value, (float, np.floating)) else str(value)


def write_long_csv(records, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(LONG_HEADER)
        for r in records:
            w.writerow([r.item_id, r.replication_id, "" if r.slot is None else r.slot, _fmt(r.value)])


def write_wide_csv(table: RatingTable, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["item_id"] + [f"r{j + 1}" for j in range(table.k)])
        for item, row in zip(table.item_ids, table.to_rows()):
            w.writerow([item] + ["" if v is None else _fmt(v) for v in row])
