"""Per-translation verdicts: exact transfer, modified entity, or no match."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from . import records
from .corpus import Sample
from .entities import EntityCategory, PatternRegistry, detect_entities
from .errors import SchemaError, UnknownSampleId
from .translation import Direction, TranslationRecord


def levenshtein(a: str, b: str) -> int:
    """Unit-cost edit distance between two strings, counted in code points."""
    if a == b:
        return 0
    # shared prefix and suffix never change the distance
    lo = 0
    limit = min(len(a), len(b))
    while lo < limit and a[lo] == b[lo]:
        lo += 1
    a, b = a[lo:], b[lo:]
    hi = 0
    limit = min(len(a), len(b))
    while hi < limit and a[-1 - hi] == b[-1 - hi]:
        hi += 1
    if hi:
        a, b = a[:-hi], b[:-hi]
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)

    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(
                prev[j] + 1,               # delete from a
                cur[j - 1] + 1,            # insert into a
                prev[j - 1] + (ca != cb),  # substitute
            ))
        prev = cur
    return prev[-1]


class OutcomeKind(str, enum.Enum):
    EXACT = "exact"
    MODIFIED = "modified"
    NO_MATCH = "no_match"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class TransferOutcome:
    kind: OutcomeKind
    distance: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", OutcomeKind(self.kind))
        if self.kind is OutcomeKind.MODIFIED:
            if self.distance is None or self.distance < 1:
                raise ValueError("a modified transfer needs a distance >= 1")
        elif self.distance is not None:
            raise ValueError(f"{self.kind.value} outcome carries no distance")

    @classmethod
    def exact(cls) -> "TransferOutcome":
        return cls(OutcomeKind.EXACT)

    @classmethod
    def modified(cls, distance: int) -> "TransferOutcome":
        return cls(OutcomeKind.MODIFIED, distance)

    @classmethod
    def no_match(cls) -> "TransferOutcome":
        return cls(OutcomeKind.NO_MATCH)

    @property
    def is_exact(self) -> bool:
        return self.kind is OutcomeKind.EXACT

    def __str__(self) -> str:
        if self.kind is OutcomeKind.MODIFIED:
            return f"modified({self.distance})"
        return self.kind.value


@dataclass(frozen=True)
class ScoreRecord:
    sample_id: str
    direction: Direction
    system_id: str
    category: EntityCategory
    source_entity: str
    outcome: TransferOutcome
    target_entity: str | None = None

    def __post_init__(self):
        kind = self.outcome.kind
        if kind is OutcomeKind.NO_MATCH and self.target_entity is not None:
            raise ValueError("no-match outcome cannot carry a target entity")
        if kind is not OutcomeKind.NO_MATCH and self.target_entity is None:
            raise ValueError(f"{kind.value} outcome needs the matched target entity")
        if kind is OutcomeKind.EXACT and self.target_entity != self.source_entity:
            raise ValueError("exact outcome with differing entities")

    def sort_key(self):
        return (self.system_id, str(self.direction), self.sample_id)

    def to_record(self) -> dict:
        rec = {
            "sample_id": self.sample_id,
            "system_id": self.system_id,
            "source_lang": self.direction.source.value,
            "target_lang": self.direction.target.value,
            "category": self.category.value,
            "outcome": self.outcome.kind.value,
        }
        if self.outcome.distance is not None:
            rec["distance"] = self.outcome.distance
        rec["source_entity"] = self.source_entity
        if self.target_entity is not None:
            rec["target_entity"] = self.target_entity
        return rec

    @classmethod
    def from_record(cls, rec: Mapping, lineno: int | None = None) -> "ScoreRecord":
        req = records.require
        try:
            kind = OutcomeKind(req(rec, "outcome", str, lineno))
            distance = req(rec, "distance", int, lineno) if kind is OutcomeKind.MODIFIED else None
            target = rec.get("target_entity")
            source = rec.get("source_entity")
            if kind is OutcomeKind.EXACT and source is None:
                source = target
            return cls(
                sample_id=req(rec, "sample_id", str, lineno),
                direction=Direction(req(rec, "source_lang", str, lineno), req(rec, "target_lang", str, lineno)),
                system_id=req(rec, "system_id", str, lineno),
                category=EntityCategory(req(rec, "category", str, lineno)),
                source_entity=source if source is not None else "",
                outcome=TransferOutcome(kind, distance),
                target_entity=target,
            )
        except ValueError as exc:
            raise SchemaError(str(exc), lineno) from None


def score_pair(
    sample: Sample,
    target_text: str,
    registry: PatternRegistry | None = None,
) -> tuple[TransferOutcome, str | None]:
    """Judge one translation against its source sample.

    Returns the outcome and the target-side entity it was based on. When the
    target holds several candidates the closest one counts, leftmost on ties.
    """
    source = sample.entity.surface
    matches = detect_entities(target_text, sample.category, registry)
    if not matches:
        return TransferOutcome.no_match(), None
    best, best_d = None, None
    for m in matches:
        if m.surface == source:
            return TransferOutcome.exact(), m.surface
        d = levenshtein(source, m.surface)
        if best_d is None or d < best_d:
            best, best_d = m.surface, d
    return TransferOutcome.modified(best_d), best


def score_corpus(
    corpus: Iterable[Sample] | Mapping[str, Sample],
    translations: Iterable[TranslationRecord],
    registry: PatternRegistry | None = None,
) -> list[ScoreRecord]:
    """One :class:`ScoreRecord` per translation, ordered by (system, direction, sample).

    Raises :class:`UnknownSampleId` naming every translation without a sample.
    """
    by_id = corpus if isinstance(corpus, Mapping) else {s.id: s for s in corpus}
    translations = list(translations)
    unknown = sorted({t.sample_id for t in translations if t.sample_id not in by_id})
    if unknown:
        raise UnknownSampleId(unknown)
    out = []
    for t in translations:
        sample = by_id[t.sample_id]
        outcome, matched = score_pair(sample, t.target_text, registry)
        out.append(ScoreRecord(
            t.sample_id, t.direction, t.system_id, sample.category,
            sample.entity.surface, outcome, matched,
        ))
    out.sort(key=ScoreRecord.sort_key)
    return out


def write_scores(path: records.PathLike, scores: Sequence[ScoreRecord]) -> None:
    ordered = sorted(scores, key=ScoreRecord.sort_key)
    records.write_records(path, (s.to_record() for s in ordered))


def read_scores(source: records.Source) -> list[ScoreRecord]:
    return [ScoreRecord.from_record(rec, n) for n, rec in records.iter_records(source)]
