"""Aggregate statistics over scored translations.

All means here are unweighted over groups: a per-category accuracy first
computes one accuracy per translation direction and then averages those, so
every direction counts the same regardless of how many records it holds.
"""

from __future__ import annotations

import csv
import io
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy import stats

from . import records
from .corpus import Sample, Tokenizer, bucket_sizes, tokenize
from .entities import EntityCategory
from .errors import DegenerateInput, EmptyGroup, InsufficientData, SchemaError
from .scoring import OutcomeKind, ScoreRecord

BY_CATEGORY = "by_category"
BY_DIRECTION = "by_direction"
AXES = (BY_CATEGORY, BY_DIRECTION)

NO_MATCH = "no_match"
BANDS = (NO_MATCH, "d=1", "d=2", "d=3", "d=4", "d=5", "d>5")


def band_of(score: ScoreRecord) -> str | None:
    """Error band of a score, or ``None`` for an exact transfer."""
    outcome = score.outcome
    if outcome.kind is OutcomeKind.EXACT:
        return None
    if outcome.kind is OutcomeKind.NO_MATCH:
        return NO_MATCH
    return f"d={outcome.distance}" if outcome.distance <= 5 else "d>5"


def _ordered(values: Iterable[str], axis: str | None = None) -> list[str]:
    values = set(values)
    if axis == BY_CATEGORY:
        known = [c.value for c in EntityCategory if c.value in values]
        return known + sorted(values - set(known))
    return sorted(values)


# accuracy tables

@dataclass(frozen=True)
class AggregateTable:
    """Accuracy percentages keyed by (system, category) or (system, direction)."""

    axis: str
    systems: tuple[str, ...]
    keys: tuple[str, ...]
    cells: Mapping[tuple[str, str], float]
    macro_row: Mapping[str, float]

    @classmethod
    def from_cells(
        cls,
        axis: str,
        cells: Mapping[tuple[str, str], float],
        systems: Sequence[str] | None = None,
        keys: Sequence[str] | None = None,
    ) -> "AggregateTable":
        if axis not in AXES:
            raise ValueError(f"axis must be one of {AXES}")
        systems = tuple(systems or dict.fromkeys(s for s, _ in cells))
        keys = tuple(keys or _ordered((k for _, k in cells), axis))
        missing = tuple((s, k) for s in systems for k in keys if (s, k) not in cells)
        if missing:
            raise EmptyGroup(
                "no records for " + ", ".join(f"{s}/{k}" for s, k in missing), missing
            )
        for value in cells.values():
            if not 0.0 <= value <= 100.0:
                raise ValueError(f"accuracy {value} outside [0, 100]")
        macro = {s: math.fsum(cells[s, k] for k in keys) / len(keys) for s in systems}
        return cls(axis, systems, keys, dict(cells), macro)

    def cell(self, system: str, key: str) -> float:
        return self.cells[system, key]

    def column(self, system: str) -> list[float]:
        return [self.cells[system, k] for k in self.keys]

    def row(self, key: str) -> list[float]:
        return [self.cells[s, key] for s in self.systems]

    def to_dict(self) -> dict:
        return {
            "axis": self.axis,
            "systems": list(self.systems),
            "keys": list(self.keys),
            "cells": {s: {k: self.cells[s, k] for k in self.keys} for s in self.systems},
            "macro": dict(self.macro_row),
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "AggregateTable":
        cells = {(s, k): float(v) for s, row in data["cells"].items() for k, v in row.items()}
        return cls.from_cells(data["axis"], cells, data["systems"], data["keys"])


def accuracy_table(scores: Sequence[ScoreRecord], axis: str = BY_CATEGORY) -> AggregateTable:
    """Percentage of exact transfers per (system, axis key).

    Each (system, category, direction) group gets its own accuracy; cells then
    average those equally over the other axis. Raises :class:`EmptyGroup` when
    a system has no records for a key some other system has.
    """
    if axis not in AXES:
        raise ValueError(f"axis must be one of {AXES}")
    if not scores:
        raise EmptyGroup("no scores to aggregate")
    exact: Counter = Counter()
    total: Counter = Counter()
    for s in scores:
        g = (s.system_id, s.category.value, str(s.direction))
        total[g] += 1
        exact[g] += s.outcome.is_exact

    per_cell: dict[tuple[str, str], list[float]] = defaultdict(list)
    for (system, category, direction), n in total.items():
        key = category if axis == BY_CATEGORY else direction
        per_cell[system, key].append(100.0 * exact[system, category, direction] / n)
    cells = {k: math.fsum(v) / len(v) for k, v in per_cell.items()}
    systems = sorted({s for s, _ in cells})
    return AggregateTable.from_cells(axis, cells, systems)


@dataclass(frozen=True)
class Spread:
    mean: float
    std: float
    n: int


def _spread(values: Sequence[float], ddof: int) -> Spread:
    arr = np.asarray(values, dtype=float)
    std = float(arr.std(ddof=ddof)) if arr.size > ddof else math.nan
    return Spread(float(arr.mean()), std, int(arr.size))


def cell_spread(table: AggregateTable, ddof: int = 1) -> Spread:
    """Mean and standard deviation over every cell of ``table``.

    ``ddof=1`` (sample formula) is the default; it matches the published
    per-direction spreads, for example 88.32 +- 9.06 for en-pl.
    """
    return _spread(list(table.cells.values()), ddof)


def key_spread(table: AggregateTable, ddof: int = 1) -> dict[str, Spread]:
    """Cross-system mean and standard deviation for every key of ``table``."""
    return {k: _spread(table.row(k), ddof) for k in table.keys}


# error distributions

@dataclass(frozen=True)
class ErrorHistogram:
    systems: tuple[str, ...]
    counts: Mapping[str, Mapping[str, int]]
    exact: Mapping[str, int]
    total: Mapping[str, int]

    def errors(self, system: str) -> int:
        return sum(self.counts[system].values())

    def to_dict(self) -> dict:
        return {
            "systems": list(self.systems),
            "counts": {s: dict(self.counts[s]) for s in self.systems},
            "exact": dict(self.exact),
            "total": dict(self.total),
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "ErrorHistogram":
        return cls(
            tuple(data["systems"]),
            {s: {b: int(data["counts"][s].get(b, 0)) for b in BANDS} for s in data["systems"]},
            {s: int(v) for s, v in data["exact"].items()},
            {s: int(v) for s, v in data["total"].items()},
        )


def error_histogram(
    scores: Iterable[ScoreRecord],
    exclude_categories: Iterable[EntityCategory | str] = (),
) -> ErrorHistogram:
    """Count failures per system in the no-match and edit-distance bands."""
    excluded = {EntityCategory(c) for c in exclude_categories}
    counts: dict[str, dict[str, int]] = {}
    exact: Counter = Counter()
    total: Counter = Counter()
    for s in scores:
        if s.category in excluded:
            continue
        row = counts.setdefault(s.system_id, dict.fromkeys(BANDS, 0))
        total[s.system_id] += 1
        band = band_of(s)
        if band is None:
            exact[s.system_id] += 1
        else:
            row[band] += 1
    systems = tuple(sorted(counts))
    return ErrorHistogram(
        systems, counts, {s: exact[s] for s in systems}, {s: total[s] for s in systems}
    )


TOP_ERROR_BANDS = ("d=1", "d=2", "d>5")


def top_error_category(
    scores: Iterable[ScoreRecord], band: str
) -> dict[str, tuple[EntityCategory, int]]:
    """Per system, the category with most errors in ``band`` (ties: category name).

    Systems without any error in the band are left out.
    """
    if band not in BANDS:
        raise ValueError(f"unknown band {band!r}; expected one of {BANDS}")
    counts: dict[str, Counter] = defaultdict(Counter)
    for s in scores:
        if band_of(s) == band:
            counts[s.system_id][s.category] += 1
    return {
        system: min(c.items(), key=lambda kv: (-kv[1], kv[0].value))
        for system, c in sorted(counts.items())
    }


@dataclass(frozen=True)
class TopErrorTable:
    bands: tuple[str, ...]
    systems: tuple[str, ...]
    entries: Mapping[str, Mapping[str, tuple[str, int]]]

    def to_dict(self) -> dict:
        return {
            "bands": list(self.bands),
            "systems": list(self.systems),
            "entries": {
                s: {b: list(v) for b, v in self.entries[s].items()} for s in self.systems
            },
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "TopErrorTable":
        return cls(
            tuple(data["bands"]),
            tuple(data["systems"]),
            {s: {b: (v[0], int(v[1])) for b, v in row.items()} for s, row in data["entries"].items()},
        )


def top_error_table(
    scores: Sequence[ScoreRecord], bands: Sequence[str] = TOP_ERROR_BANDS
) -> TopErrorTable:
    per_band = {b: top_error_category(scores, b) for b in bands}
    systems = tuple(sorted({s.system_id for s in scores}))
    entries = {
        s: {b: (per_band[b][s][0].value, per_band[b][s][1]) for b in bands if s in per_band[b]}
        for s in systems
    }
    return TopErrorTable(tuple(bands), systems, entries)


# correlation

PEARSON = "pearson"
SPEARMAN = "spearman"


@dataclass(frozen=True)
class CorrelationResult:
    method: str
    coefficient: float
    p_value: float
    n: int

    def to_dict(self) -> dict:
        return {"method": self.method, "coefficient": self.coefficient,
                "p_value": self.p_value, "n": self.n}


def average_ranks(values: Sequence[float]) -> np.ndarray:
    """1-based ranks; tied values share the mean of the ranks they span."""
    arr = np.asarray(values, dtype=float)
    order = np.argsort(arr, kind="mergesort")
    ranks = np.empty(arr.size, dtype=float)
    i = 0
    while i < arr.size:
        j = i
        while j + 1 < arr.size and arr[order[j + 1]] == arr[order[i]]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def _pearson_r(x: np.ndarray, y: np.ndarray) -> float:
    xc = x - x.mean()
    yc = y - y.mean()
    r = float(np.dot(xc, yc) / math.sqrt(float(np.dot(xc, xc)) * float(np.dot(yc, yc))))
    return max(-1.0, min(1.0, r))


def correlate(xs: Sequence[float], ys: Sequence[float], method: str = PEARSON) -> CorrelationResult:
    """Pearson or Spearman correlation with a two-sided p-value.

    Both methods take the p-value from Student's t with n - 2 degrees of
    freedom, t = r * sqrt((n - 2) / (1 - r^2)).
    """
    if method not in (PEARSON, SPEARMAN):
        raise ValueError(f"unknown method {method!r}")
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise DegenerateInput(f"series lengths differ ({x.size} vs {y.size})")
    n = x.size
    if n < 3:
        raise DegenerateInput(f"need at least 3 pairs, got {n}")
    if not (np.isfinite(x).all() and np.isfinite(y).all()):
        raise DegenerateInput("series contain non-finite values")
    if np.all(x == x[0]) or np.all(y == y[0]):
        raise DegenerateInput("a constant series has no correlation")
    if method == SPEARMAN:
        x, y = average_ranks(x), average_ranks(y)
    r = _pearson_r(x, y)
    if abs(r) >= 1.0:
        p = 0.0
    else:
        t = r * math.sqrt((n - 2) / (1.0 - r * r))
        p = float(min(1.0, 2.0 * stats.t.sf(abs(t), n - 2)))
    return CorrelationResult(method, r, p, n)


# length bins

@dataclass(frozen=True)
class LengthBin:
    index: int
    min_tokens: int
    max_tokens: int
    samples: int
    records: int
    accuracy: float
    modified: float
    no_match: float


@dataclass(frozen=True)
class LengthBinReport:
    bins: tuple[LengthBin, ...]
    system_id: str | None = None

    def to_dict(self) -> dict:
        return {"system_id": self.system_id, "bins": [vars(b) for b in self.bins]}

    @classmethod
    def from_dict(cls, data: Mapping) -> "LengthBinReport":
        return cls(tuple(LengthBin(**b) for b in data["bins"]), data.get("system_id"))


def length_bin_analysis(
    scores: Sequence[ScoreRecord],
    corpus: Iterable[Sample] | Mapping[str, Sample],
    tokenizer: Tokenizer | None = None,
    k: int = 5,
) -> LengthBinReport:
    """Outcome rates over ``k`` equal-size bins of source sentence length.

    Sentences behind ``scores`` are sorted by token count (ties by sample id)
    and cut into contiguous bins, earlier bins taking any surplus.
    """
    if k < 1:
        raise ValueError("k must be positive")
    by_id = corpus if isinstance(corpus, Mapping) else {s.id: s for s in corpus}
    tokenizer = tokenizer or tokenize
    ids = sorted({s.sample_id for s in scores})
    missing = [i for i in ids if i not in by_id]
    if missing:
        raise InsufficientData("scores reference samples missing from the corpus: " + ", ".join(missing[:10]))
    if len(ids) < k:
        raise InsufficientData(f"{len(ids)} sentences cannot fill {k} bins")
    length = {i: len(tokenizer(by_id[i].text)) for i in ids}
    ids.sort(key=lambda i: (length[i], i))

    per_sample: dict[str, list[ScoreRecord]] = defaultdict(list)
    for s in scores:
        per_sample[s.sample_id].append(s)

    bins, pos = [], 0
    for index, size in enumerate(bucket_sizes(len(ids), k)):
        members = ids[pos:pos + size]
        pos += size
        kinds = Counter(s.outcome.kind for i in members for s in per_sample[i])
        n = sum(kinds.values())
        bins.append(LengthBin(
            index=index,
            min_tokens=length[members[0]],
            max_tokens=length[members[-1]],
            samples=len(members),
            records=n,
            accuracy=100.0 * kinds[OutcomeKind.EXACT] / n,
            modified=100.0 * kinds[OutcomeKind.MODIFIED] / n,
            no_match=100.0 * kinds[OutcomeKind.NO_MATCH] / n,
        ))
    systems = {s.system_id for s in scores}
    return LengthBinReport(tuple(bins), systems.pop() if len(systems) == 1 else None)


def length_bins_by_system(
    scores: Sequence[ScoreRecord],
    corpus: Iterable[Sample] | Mapping[str, Sample],
    tokenizer: Tokenizer | None = None,
    k: int = 5,
) -> dict[str, LengthBinReport]:
    by_id = corpus if isinstance(corpus, Mapping) else {s.id: s for s in corpus}
    grouped: dict[str, list[ScoreRecord]] = defaultdict(list)
    for s in scores:
        grouped[s.system_id].append(s)
    return {
        system: length_bin_analysis(grouped[system], by_id, tokenizer, k)
        for system in sorted(grouped)
    }


# subtoken counts vs errors

def subtoken_error_correlation(
    scores: Iterable[ScoreRecord],
    entity_token_counts: Mapping[str, int],
    category: EntityCategory | str,
    grouping: str = "rate",
) -> CorrelationResult:
    """Pearson correlation between entity subtoken count and error likelihood.

    ``grouping="rate"`` groups scores by token count and correlates the count
    with each group's error rate (one point per distinct count).
    ``grouping="sample"`` correlates count with the 0/1 error indicator of
    every score directly.
    """
    category = EntityCategory(category)
    picked = [s for s in scores if s.category is category]
    missing = sorted({s.sample_id for s in picked if s.sample_id not in entity_token_counts})
    if missing:
        raise InsufficientData("no token count for: " + ", ".join(missing[:10]))
    if grouping == "sample":
        xs = [entity_token_counts[s.sample_id] for s in picked]
        ys = [0.0 if s.outcome.is_exact else 1.0 for s in picked]
        return correlate(xs, ys, PEARSON)
    if grouping != "rate":
        raise ValueError("grouping must be 'rate' or 'sample'")
    total: Counter = Counter()
    errors: Counter = Counter()
    for s in picked:
        c = entity_token_counts[s.sample_id]
        total[c] += 1
        errors[c] += not s.outcome.is_exact
    counts = sorted(total)
    return correlate(counts, [errors[c] / total[c] for c in counts], PEARSON)


def whitespace_token_count(text: str) -> int:
    return len(text.split())


def read_token_counts(source: records.Source) -> dict[str, int]:
    out: dict[str, int] = {}
    for lineno, rec in records.iter_records(source):
        sid = records.require(rec, "sample_id", str, lineno)
        count = records.require(rec, "token_count", int, lineno)
        if count < 0:
            raise SchemaError("token_count must be non-negative", lineno)
        out[sid] = count
    return out


def write_token_counts(path: records.PathLike, counts: Mapping[str, int]) -> None:
    records.write_records(
        path, ({"sample_id": k, "token_count": counts[k]} for k in sorted(counts))
    )


# shipped reference tables

def _read_data_csv(name: str) -> list[dict[str, str]]:
    text = resources.files("entity_guard.data").joinpath(name).read_text(encoding="utf-8")
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(lines))))


@dataclass(frozen=True)
class ReferenceTable:
    table: AggregateTable
    published_macro: Mapping[str, float] = field(default_factory=dict)


def load_reference_table(axis: str) -> ReferenceTable:
    """Published accuracy matrix for ``axis``, with its published macro row."""
    name = {BY_CATEGORY: "accuracy_by_category.csv",
            BY_DIRECTION: "accuracy_by_direction.csv"}[axis]
    rows = _read_data_csv(name)
    key_col = "category" if axis == BY_CATEGORY else "direction"
    systems = [c for c in rows[0] if c != key_col]
    cells, macro, keys = {}, {}, []
    for row in rows:
        key = row[key_col]
        if key == "macro avg.":
            macro = {s: float(row[s]) for s in systems}
            continue
        keys.append(key)
        for s in systems:
            cells[s, key] = float(row[s])
    return ReferenceTable(AggregateTable.from_cells(axis, cells, systems, keys), macro)


def load_model_characteristics() -> list[dict[str, float | str]]:
    out = []
    for row in _read_data_csv("model_characteristics.csv"):
        out.append({k: (v if k == "model" else float(v)) for k, v in row.items()})
    return out
