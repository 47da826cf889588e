"""Getting corpora to translation systems and translations back.

Systems are never embedded. A backend is anything with a ``translate(texts,
direction)`` method; two ship here: :class:`ExternalCommandBackend` (spawns a
process per batch) and :class:`ReplayBackend` (serves precomputed output).
"""

from __future__ import annotations

import itertools
import shlex
import subprocess
from dataclasses import dataclass
from typing import Iterable, Mapping, Protocol, Sequence

from . import records
from .corpus import LanguageCode, Sample
from .errors import (
    BackendError,
    CountMismatch,
    RecordError,
    SchemaError,
    SeparatorCollision,
    UnknownSampleId,
)

SEPARATOR = "\n\n"


@dataclass(frozen=True, order=True)
class Direction:
    source: LanguageCode
    target: LanguageCode

    def __post_init__(self):
        object.__setattr__(self, "source", LanguageCode(self.source))
        object.__setattr__(self, "target", LanguageCode(self.target))
        if self.source == self.target:
            raise ValueError(f"direction needs two different languages, got {self.source}")

    def __str__(self) -> str:
        return f"{self.source.value}-{self.target.value}"

    @classmethod
    def parse(cls, text: str) -> "Direction":
        """Parse ``"en-de"``, ``"en>de"`` or ``"en→de"``."""
        for sep in ("->", "→", ">", "-", "_"):
            if sep in text:
                src, _, tgt = text.partition(sep)
                return cls(LanguageCode(src.strip()), LanguageCode(tgt.strip()))
        raise ValueError(f"cannot parse direction {text!r}")


def all_directions() -> list[Direction]:
    return [Direction(a, b) for a, b in itertools.permutations(LanguageCode, 2)]


@dataclass(frozen=True)
class TranslationRecord:
    sample_id: str
    direction: Direction
    system_id: str
    target_text: str

    def sort_key(self):
        return (self.system_id, str(self.direction), self.sample_id)

    def to_record(self) -> dict:
        return {
            "sample_id": self.sample_id,
            "source_lang": self.direction.source.value,
            "target_lang": self.direction.target.value,
            "system_id": self.system_id,
            "target_text": self.target_text,
        }


class TranslatorBackend(Protocol):
    def translate(self, texts: Sequence[str], direction: Direction) -> list[str]:
        """Return one translation per input text, in input order."""
        ...


def batch_documents(texts: Sequence[str], separator: str = SEPARATOR) -> str:
    """Join sentences into one document for document-level translation.

    Raises :class:`SeparatorCollision` if the document would not split back
    into the same sentences, which covers a separator inside a text and one
    formed across a boundary (``"a\\n"`` followed by ``"\\nb"``).
    """
    texts = [t.text if isinstance(t, Sample) else t for t in texts]
    for i, text in enumerate(texts):
        if separator in text:
            raise SeparatorCollision(f"text {i} contains the separator")
    document = separator.join(texts)
    if texts and document.split(separator) != texts:
        raise SeparatorCollision("separator formed across a sentence boundary")
    return document


def unbatch_document(document: str, expected_count: int, separator: str = SEPARATOR) -> list[str]:
    """Split a translated document back into ``expected_count`` sentences."""
    if expected_count < 1:
        raise ValueError("expected_count must be positive")
    parts = document.split(separator)
    if len(parts) != expected_count:
        raise CountMismatch(
            f"expected {expected_count} segments, got {len(parts)}",
            expected=expected_count, actual=len(parts),
        )
    return parts


def _escape_line(text: str) -> str:
    return text.replace("\\", "\\\\").replace("\n", "\\n").replace("\r", "\\r")


def _unescape_line(line: str) -> str:
    out, chars = [], iter(line)
    for ch in chars:
        if ch == "\\":
            nxt = next(chars, "")
            out.append({"n": "\n", "r": "\r", "\\": "\\"}.get(nxt, "\\" + nxt))
        else:
            out.append(ch)
    return "".join(out)


class ExternalCommandBackend:
    """Run an external translator once per batch.

    The process gets ``--source-lang X --target-lang Y`` appended to its
    arguments and one sentence per line on stdin (newlines escaped as ``\\n``),
    and must print one translation per line. A non-zero exit fails the batch.
    """

    def __init__(self, command: str | Sequence[str], timeout: float | None = None):
        self.command = shlex.split(command) if isinstance(command, str) else list(command)
        self.timeout = timeout

    def translate(self, texts: Sequence[str], direction: Direction) -> list[str]:
        argv = self.command + [
            "--source-lang", direction.source.value,
            "--target-lang", direction.target.value,
        ]
        stdin = "".join(_escape_line(t) + "\n" for t in texts)
        try:
            proc = subprocess.run(
                argv, input=stdin.encode("utf-8"), capture_output=True, timeout=self.timeout
            )
        except (OSError, subprocess.TimeoutExpired) as exc:
            raise BackendError(f"{argv[0]}: {exc}") from exc
        if proc.returncode != 0:
            err = proc.stderr.decode("utf-8", "replace").strip()
            raise BackendError(f"{argv[0]} exited with {proc.returncode}: {err}")
        lines = proc.stdout.decode("utf-8").split("\n")
        if lines and lines[-1] == "":
            lines.pop()
        return [_unescape_line(ln) for ln in lines]


class ReplayBackend:
    """Serve translations looked up by (direction, source text)."""

    def __init__(self, table: Mapping[tuple[str, str], str]):
        self.table = dict(table)

    @classmethod
    def from_records(cls, translations: Iterable[TranslationRecord], corpus: Iterable[Sample]):
        by_id = {s.id: s for s in corpus}
        return cls({
            (str(t.direction), by_id[t.sample_id].text): t.target_text
            for t in translations if t.sample_id in by_id
        })

    def translate(self, texts: Sequence[str], direction: Direction) -> list[str]:
        try:
            return [self.table[str(direction), t] for t in texts]
        except KeyError as exc:
            raise BackendError(f"no stored translation for {exc.args[0]!r}") from None


def translate_samples(
    samples: Sequence[Sample],
    direction: Direction,
    backend: TranslatorBackend,
    system_id: str,
    batch_size: int | None = None,
    as_document: bool = False,
) -> list[TranslationRecord]:
    """Translate ``samples`` (all in ``direction.source``) batch by batch.

    With ``as_document`` each batch goes out as a single blank-line separated
    document. A batch that comes back with the wrong number of segments is
    retried one sentence at a time.
    """
    for s in samples:
        if s.language != direction.source:
            raise ValueError(f"sample {s.id} is {s.language}, not {direction.source}")
    size = batch_size or max(len(samples), 1)
    out: list[TranslationRecord] = []
    for start in range(0, len(samples), size):
        chunk = samples[start:start + size]
        texts = [s.text for s in chunk]
        try:
            if as_document:
                doc = backend.translate([batch_documents(texts)], direction)
                if len(doc) != 1:
                    raise CountMismatch("backend returned several documents", 1, len(doc))
                targets = unbatch_document(doc[0], len(texts))
            else:
                targets = backend.translate(texts, direction)
                if len(targets) != len(texts):
                    raise CountMismatch(
                        f"expected {len(texts)} translations, got {len(targets)}",
                        len(texts), len(targets),
                    )
        except (CountMismatch, SeparatorCollision):
            targets = []
            for text in texts:
                single = backend.translate([text], direction)
                if len(single) != 1:
                    raise CountMismatch(
                        "per-sentence fallback also misaligned", 1, len(single)
                    ) from None
                targets.append(single[0])
        out.extend(
            TranslationRecord(s.id, direction, system_id, t) for s, t in zip(chunk, targets)
        )
    return out


def translate_corpus(
    corpus: Sequence[Sample],
    backend: TranslatorBackend,
    system_id: str,
    directions: Iterable[Direction] | None = None,
    batch_size: int | None = None,
    as_document: bool = False,
) -> list[TranslationRecord]:
    """Translate every sample into every target language of ``directions``."""
    result: list[TranslationRecord] = []
    for direction in directions or all_directions():
        # one batch stream per (language, category), mirroring per-topic documents
        todo = [s for s in corpus if s.language == direction.source]
        for _, group in itertools.groupby(
            sorted(todo, key=lambda s: (s.category.value, s.id)), key=lambda s: s.category
        ):
            result.extend(
                translate_samples(list(group), direction, backend, system_id, batch_size, as_document)
            )
    result.sort(key=TranslationRecord.sort_key)
    return result


# translation files

@dataclass
class ImportResult:
    records: list[TranslationRecord]
    errors: list[RecordError]

    def check(self) -> list[TranslationRecord]:
        """Return the records, or raise the first error if there were any."""
        if self.errors:
            unknown = [e for e in self.errors if isinstance(e, UnknownSampleId)]
            if len(unknown) == len(self.errors):
                raise UnknownSampleId([i for e in unknown for i in e.sample_ids])
            raise self.errors[0]
        return self.records


def import_translations(source: records.Source, corpus: Iterable[Sample]) -> ImportResult:
    """Read a translation file and join every record to its sample.

    Problems are collected rather than raised, so a single pass reports every
    bad line; ``len(records) + len(errors)`` equals the number of records read.
    """
    by_id = {s.id: s for s in corpus}
    out: list[TranslationRecord] = []
    errors: list[RecordError] = []
    for lineno, rec in records.iter_records(source, errors):
        try:
            record = _translation_from_record(rec, lineno)
        except (SchemaError, ValueError) as exc:
            errors.append(exc if isinstance(exc, SchemaError) else SchemaError(str(exc), lineno))
            continue
        sample = by_id.get(record.sample_id)
        if sample is None:
            errors.append(UnknownSampleId(record.sample_id, lineno))
        elif sample.language != record.direction.source:
            errors.append(SchemaError(
                f"{record.sample_id} is {sample.language}, record says {record.direction.source}",
                lineno,
            ))
        else:
            out.append(record)
    out.sort(key=TranslationRecord.sort_key)
    return ImportResult(out, errors)


def _translation_from_record(rec: Mapping, lineno: int) -> TranslationRecord:
    req = records.require
    return TranslationRecord(
        sample_id=req(rec, "sample_id", str, lineno),
        direction=Direction(req(rec, "source_lang", str, lineno), req(rec, "target_lang", str, lineno)),
        system_id=req(rec, "system_id", str, lineno),
        target_text=req(rec, "target_text", str, lineno),
    )


def write_translations(path: records.PathLike, translations: Iterable[TranslationRecord]) -> None:
    ordered = sorted(translations, key=TranslationRecord.sort_key)
    records.write_records(path, (t.to_record() for t in ordered))
