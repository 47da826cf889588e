"""Representative-sample selection over raw generated sentences, plus corpus statistics.

The selection pipeline, per (language, category) group:

1. cut generator remarks after the first blank line,
2. drop sentences the language detector rejects,
3. sort by character length and split into equal buckets,
4. draw uniformly without replacement inside each bucket until ``per_bucket``
   sentences hold exactly one entity and pass the grammar check,
5. concatenate the buckets.
"""

from __future__ import annotations

import enum
import math
import os
import random
import shlex
import subprocess
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import regex

from . import records
from .entities import (
    EntityCategory,
    EntityMatch,
    PatternRegistry,
    validate_single,
)
from .errors import (
    BucketExhausted,
    EmptyCorpus,
    EntityValidationError,
    InsufficientInput,
    MultipleEntities,
    SchemaError,
)


class LanguageCode(str, enum.Enum):
    EN = "en"
    DE = "de"
    PL = "pl"
    UK = "uk"

    def __str__(self) -> str:
        return self.value


class RejectReason(str, enum.Enum):
    LANGUAGE_MISMATCH = "language_mismatch"
    ZERO_ENTITIES = "zero_entities"
    MULTIPLE_ENTITIES = "multiple_entities"
    GRAMMAR_FAIL = "grammar_fail"
    REMARK_ONLY = "remark_only"

    def __str__(self) -> str:
        return self.value


# external predicates: (text, expected language) -> accepted?
LanguagePredicate = Callable[[str, LanguageCode], bool]
GrammarPredicate = Callable[[str, LanguageCode], bool]
Tokenizer = Callable[[str], Sequence[str]]


@dataclass(frozen=True)
class CandidateSentence:
    text: str
    expected_language: LanguageCode
    expected_category: EntityCategory

    def __post_init__(self):
        object.__setattr__(self, "expected_language", LanguageCode(self.expected_language))
        object.__setattr__(self, "expected_category", EntityCategory(self.expected_category))
        if not self.text.strip():
            raise ValueError("candidate text is empty")


@dataclass(frozen=True)
class Sample:
    id: str
    language: LanguageCode
    category: EntityCategory
    text: str
    entity: EntityMatch

    def to_record(self) -> dict:
        return {
            "id": self.id,
            "language": self.language.value,
            "category": self.category.value,
            "text": self.text,
            "entity_text": self.entity.surface,
            "entity_start": self.entity.start,
            "entity_end": self.entity.end,
        }

    @classmethod
    def from_record(cls, record: Mapping, lineno: int | None = None) -> "Sample":
        req = records.require
        text = req(record, "text", str, lineno)
        start = req(record, "entity_start", int, lineno)
        end = req(record, "entity_end", int, lineno)
        surface = req(record, "entity_text", str, lineno)
        try:
            language = LanguageCode(req(record, "language", str, lineno))
            category = EntityCategory(req(record, "category", str, lineno))
            entity = EntityMatch(category, surface, (start, end))
        except ValueError as exc:
            raise SchemaError(str(exc), lineno) from None
        if text[start:end] != surface:
            raise SchemaError("entity offsets do not select entity_text", lineno)
        return cls(req(record, "id", str, lineno), language, category, text, entity)


@dataclass(frozen=True)
class Rejection:
    text: str
    reason: RejectReason

    def to_record(self) -> dict:
        return {"text": self.text, "reason": self.reason.value}


@dataclass(frozen=True)
class CorpusBuildConfig:
    bucket_count: int = 20
    per_bucket: int = 50
    rng_seed: int = 0
    language_filter_enabled: bool = True
    grammar_filter_enabled: bool = True

    def __post_init__(self):
        if self.bucket_count < 1:
            raise ValueError("bucket_count must be >= 1")
        if self.per_bucket < 1:
            raise ValueError("per_bucket must be >= 1")


@dataclass
class CorpusBuild:
    samples: list[Sample]
    rejections: list[Rejection] = field(default_factory=list)


def strip_generation_remarks(text: str) -> str:
    """Drop everything from the first blank line (``"\\n\\n"``) onwards."""
    return text.split("\n\n", 1)[0].rstrip()


def bucket_sizes(n: int, k: int) -> list[int]:
    # the first n % k buckets take one extra element
    base, extra = divmod(n, k)
    return [base + 1 if i < extra else base for i in range(k)]


def _partition(items: list, k: int) -> list[list]:
    buckets, pos = [], 0
    for size in bucket_sizes(len(items), k):
        buckets.append(items[pos:pos + size])
        pos += size
    return buckets


def bucket_by_length(sentences: Sequence[str], k: int) -> list[list[str]]:
    """Sort by character length and cut into ``k`` contiguous, near-equal buckets.

    Ties are broken by the text itself, then by input position. Sizes differ by
    at most one; when the division is uneven the earliest buckets are larger.
    """
    if k < 1:
        raise ValueError("k must be positive")
    if len(sentences) < k:
        raise InsufficientInput(f"{len(sentences)} sentences cannot fill {k} buckets")
    order = sorted(range(len(sentences)), key=lambda i: (len(sentences[i]), sentences[i], i))
    return _partition([sentences[i] for i in order], k)


def build_corpus(
    candidates: Iterable[CandidateSentence],
    config: CorpusBuildConfig = CorpusBuildConfig(),
    language_detector: LanguagePredicate | None = None,
    grammar_checker: GrammarPredicate | None = None,
    registry: PatternRegistry | None = None,
) -> CorpusBuild:
    """Select ``bucket_count * per_bucket`` samples for every (language, category) group.

    A filter whose predicate is ``None`` is skipped, as is one disabled in
    ``config``. Output order is by language, category, bucket, then draw order.
    Raises :class:`BucketExhausted` when a bucket runs out of valid sentences.
    """
    groups: dict[tuple[LanguageCode, EntityCategory], list[CandidateSentence]] = defaultdict(list)
    for cand in candidates:
        groups[cand.expected_language, cand.expected_category].append(cand)

    lang_order = list(LanguageCode)
    cat_order = list(EntityCategory)
    samples: list[Sample] = []
    rejections: list[Rejection] = []
    for language, category in sorted(
        groups, key=lambda g: (lang_order.index(g[0]), cat_order.index(g[1]))
    ):
        group_samples, group_rejections = _build_group(
            groups[language, category], language, category, config,
            language_detector if config.language_filter_enabled else None,
            grammar_checker if config.grammar_filter_enabled else None,
            registry,
        )
        samples.extend(group_samples)
        rejections.extend(group_rejections)
    return CorpusBuild(samples, rejections)


def _build_group(cands, language, category, config, detect_language, check_grammar, registry):
    rejections: list[Rejection] = []
    texts: list[str] = []
    for cand in cands:
        text = strip_generation_remarks(cand.text)
        if not text.strip():
            rejections.append(Rejection(cand.text, RejectReason.REMARK_ONLY))
        elif detect_language is not None and not detect_language(text, language):
            rejections.append(Rejection(text, RejectReason.LANGUAGE_MISMATCH))
        else:
            texts.append(text)

    try:
        buckets = bucket_by_length(texts, config.bucket_count)
    except InsufficientInput as exc:
        raise InsufficientInput(f"{language}/{category}: {exc}") from None

    # string seeds hash deterministically (sha512), independent of PYTHONHASHSEED
    rng = random.Random(f"{config.rng_seed}:{language.value}:{category.value}")
    samples = []
    for b, bucket in enumerate(buckets):
        order = list(range(len(bucket)))
        rng.shuffle(order)
        accepted = 0
        for i in order:
            if accepted == config.per_bucket:
                break
            text = bucket[i]
            try:
                entity = validate_single(text, category, registry)
            except MultipleEntities:
                rejections.append(Rejection(text, RejectReason.MULTIPLE_ENTITIES))
                continue
            except EntityValidationError:
                rejections.append(Rejection(text, RejectReason.ZERO_ENTITIES))
                continue
            if check_grammar is not None and not check_grammar(text, language):
                rejections.append(Rejection(text, RejectReason.GRAMMAR_FAIL))
                continue
            samples.append(Sample(
                f"{language.value}-{category.value}-{b:02}-{accepted:03}",
                language, category, text, entity,
            ))
            accepted += 1
        if accepted < config.per_bucket:
            raise BucketExhausted(
                f"{language}/{category} bucket {b}: only {accepted} of "
                f"{config.per_bucket} sentences passed",
                bucket=b, accepted=accepted, needed=config.per_bucket,
            )
    return samples, rejections


# external predicate adapters

class CommandPredicate:
    """Ask an external program about each sentence.

    The program is run as ``command --language xx`` with the sentence on
    stdin; exit status 0 accepts the sentence, anything else rejects it.
    """

    def __init__(self, command: str | Sequence[str]):
        self.command = shlex.split(command) if isinstance(command, str) else list(command)

    def __call__(self, text: str, language: LanguageCode) -> bool:
        proc = subprocess.run(
            self.command + ["--language", LanguageCode(language).value],
            input=text.encode("utf-8"), capture_output=True,
        )
        return proc.returncode == 0


class VerdictFilePredicate:
    """Look verdicts up in a precomputed record file of ``{text, ok}`` lines.

    Records may carry a ``language`` field to scope the verdict. Sentences
    missing from the file are rejected.
    """

    def __init__(self, verdicts: Mapping[tuple[str | None, str], bool]):
        self.verdicts = dict(verdicts)

    @classmethod
    def from_file(cls, source: records.Source) -> "VerdictFilePredicate":
        verdicts = {}
        for lineno, rec in records.iter_records(source):
            text = records.require(rec, "text", str, lineno)
            ok = records.require(rec, "ok", bool, lineno)
            verdicts[rec.get("language"), text] = ok
        return cls(verdicts)

    def __call__(self, text: str, language: LanguageCode) -> bool:
        key = (LanguageCode(language).value, text)
        if key in self.verdicts:
            return self.verdicts[key]
        return self.verdicts.get((None, text), False)


# corpus files

def write_corpus(path: records.PathLike, samples: Iterable[Sample]) -> None:
    records.write_records(path, (s.to_record() for s in samples))


def read_corpus(source: records.Source) -> list[Sample]:
    samples, seen = [], set()
    for lineno, rec in records.iter_records(source):
        sample = Sample.from_record(rec, lineno)
        if sample.id in seen:
            raise SchemaError(f"duplicate sample id {sample.id!r}", lineno)
        seen.add(sample.id)
        samples.append(sample)
    return samples


def write_rejections(path: records.PathLike, rejections: Iterable[Rejection]) -> None:
    records.write_records(path, (r.to_record() for r in rejections))


def read_candidates(
    source: records.Source,
    language: LanguageCode | str | None = None,
    category: EntityCategory | str | None = None,
) -> list[CandidateSentence]:
    """Load candidates from a record file, or from plain text (one per line).

    Plain-text input needs ``language`` and ``category``. Raw generator output
    holds blank-line remarks, so plain-text lines must already be one sentence
    each; use the record format to keep multi-line generations intact.
    """
    if isinstance(source, (str, os.PathLike)):
        with open(source, encoding="utf-8") as fh:
            return read_candidates(fh, language, category)
    lines = source.read().splitlines()
    first = next((ln for ln in lines if ln.strip()), "")
    if first.lstrip().startswith("{"):
        out = []
        for lineno, rec in records.iter_records(lines):
            try:
                out.append(CandidateSentence(
                    records.require(rec, "text", str, lineno),
                    rec.get("language", language),
                    rec.get("category", category),
                ))
            except ValueError as exc:
                raise SchemaError(str(exc), lineno) from None
        return out
    if language is None or category is None:
        raise SchemaError("plain-text candidates need an explicit language and category")
    return [CandidateSentence(ln, language, category) for ln in lines if ln.strip()]


# statistics

_PUNCT_RUN = regex.compile(r"^(\p{P}*)(.*?)(\p{P}*)$", regex.DOTALL)


def tokenize(text: str) -> list[str]:
    """Rule-based word tokenizer in the Treebank spirit.

    Splits on whitespace, then peels punctuation off both ends of each chunk.
    Punctuation inside a chunk stays, so decimals, IPs, URLs and emails survive
    as single tokens.
    """
    tokens: list[str] = []
    for chunk in text.split():
        lead, core, trail = _PUNCT_RUN.match(chunk).groups()
        if not core:
            tokens.append(chunk)
            continue
        tokens.extend(lead)
        tokens.append(core)
        if trail:
            # "..." and "?!" stay together, like most Treebank tokenizers
            tokens.append(trail)
    return tokens


@dataclass(frozen=True)
class Summary:
    count: int
    mean: float
    std: float

    @classmethod
    def of(cls, values: Sequence[float]) -> "Summary":
        n = len(values)
        if n == 0:
            return cls(0, math.nan, math.nan)
        mean = math.fsum(values) / n
        # population formula, divides by n
        var = math.fsum((v - mean) ** 2 for v in values) / n
        return cls(n, mean, math.sqrt(var))


@dataclass(frozen=True)
class CorpusStats:
    """Token counts per sentence and entity lengths in code points."""

    count: int
    tokens: Summary
    tokens_by_language: dict[str, Summary]
    tokens_by_category: dict[str, Summary]
    entity_chars: Summary
    entity_chars_by_language: dict[str, Summary]
    entity_chars_by_category: dict[str, Summary]

    def rows(self) -> list[tuple[str, str, Summary, Summary]]:
        """Flat (group, key, tokens, entity chars) rows for rendering."""
        out = [("all", "all", self.tokens, self.entity_chars)]
        for lang, s in self.tokens_by_language.items():
            out.append(("language", lang, s, self.entity_chars_by_language[lang]))
        for cat, s in self.tokens_by_category.items():
            out.append(("category", cat, s, self.entity_chars_by_category[cat]))
        return out


def corpus_stats(corpus: Sequence[Sample], tokenizer: Tokenizer | None = None) -> CorpusStats:
    if not corpus:
        raise EmptyCorpus("cannot summarise an empty corpus")
    tokenizer = tokenizer or tokenize
    tok = [len(tokenizer(s.text)) for s in corpus]
    ent = [len(s.entity.surface) for s in corpus]

    def by(attr, order, values):
        grouped: dict[str, list[int]] = defaultdict(list)
        for s, v in zip(corpus, values):
            grouped[getattr(s, attr).value].append(v)
        return {k.value: Summary.of(grouped[k.value]) for k in order if k.value in grouped}

    return CorpusStats(
        count=len(corpus),
        tokens=Summary.of(tok),
        tokens_by_language=by("language", LanguageCode, tok),
        tokens_by_category=by("category", EntityCategory, tok),
        entity_chars=Summary.of(ent),
        entity_chars_by_language=by("language", LanguageCode, ent),
        entity_chars_by_category=by("category", EntityCategory, ent),
    )
