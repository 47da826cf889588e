"""No-translate entity categories and their regex detectors.

Patterns use Unicode property classes (``\\p{L}``, ``\\p{N}`` ...), so matching
goes through the third-party :mod:`regex` engine rather than :mod:`re`.
Matching runs on the raw text; nothing is normalised or case folded.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Mapping

import regex

from .errors import MultipleEntities, ZeroEntities


class EntityCategory(str, enum.Enum):
    ALPHANUMERIC = "alphanumeric"
    EMAIL = "email"
    EMOJI = "emoji"
    IBAN = "iban"
    IP = "ip"
    ISBN = "isbn"
    PHONE = "phone"
    SOCIAL = "social"
    URL = "url"

    def __str__(self) -> str:
        return self.value


UNICODE_PROPERTIES = "unicode-property-classes"
LOOKAHEAD = "lookahead"
ANCHORS = "anchors"

_EMOJI_MODIFIERS = r"[\uFE0E\uFE0F\U0001F3FB-\U0001F3FF]"

DEFAULT_PATTERNS: dict[EntityCategory, str] = {
    EntityCategory.ALPHANUMERIC: (
        r"\b[\p{N}\p{L}][\p{N}\p{L}\p{P}]*(\p{L}\p{N}|\p{N}\p{L})[\p{N}\p{L}\p{P}]*[\p{N}\p{L}]\b"
    ),
    EntityCategory.EMAIL: r"\b[\p{L}\p{N}._%+-]+@[\p{L}\p{N}.-]+\.[\p{L}]{2,}\b",
    # a maximal run of pictographs, ZWJ-joined, each optionally followed by
    # variation selectors / skin-tone modifiers
    EntityCategory.EMOJI: (
        r"\p{Extended_Pictographic}" + _EMOJI_MODIFIERS + r"*"
        r"(?:\u200D?\p{Extended_Pictographic}" + _EMOJI_MODIFIERS + r"*)*"
    ),
    EntityCategory.IBAN: r"\b([A-Z]{2})[ \-]?([0-9]{2})[ \-]?([A-Z0-9]{9,30})\b",
    EntityCategory.IP: r"\b\d{1,3}\.\d{1,3}\.\d{1,3}\.\d{1,3}\b",
    EntityCategory.ISBN: (
        r"\b(?:ISBN(?:-13)?:?\ )?(?=[0-9]{13}$|(?=(?:[0-9]+[-\ ]){4})[-\ 0-9]{17}$)"
        r"97[89][-\ ]?[0-9]{1,5}[-\ ]?[0-9]+[-\ ]?[0-9]+[-\ ]?[0-9]\b"
    ),
    EntityCategory.PHONE: (
        r"\b[\d\+\/\=\%\^\(\)\[\]\{\}][\d\., \+\:\-*\/\=\%\^\(\)\[\]\{\}]{2,}"
        r"[\d\+\:\-*\/\=\%\^\(\)\[\]\{\}]\b"
    ),
    EntityCategory.SOCIAL: r"\@[0-9_.\p{L}]{2,24}[0-9_\p{L}]\b",
    EntityCategory.URL: (
        r"\b((imap|s3|file|ftp|https?):\/\/[\p{L}\p{N}_-]+(\.[-_/?=\p{L}\p{N}]+){1,15}"
        r"|\d{1,3}\.\d{1,3}\.\d{1,3}\.\d{1,3}"
        r"|www\.[\p{L}\p{N}_-]+(\.[-_/?=\p{L}\p{N}]+){1,15})\b"
    ),
}

# The ISBN pattern's `$` anchors sit inside a lookahead and are meant to close
# the entity, not the whole sentence. The built-in matcher therefore splits the
# pattern in two: scan for candidates, then check the lookahead's shape
# constraint against the candidate body alone. The optional "ISBN" label is
# consumed but not part of the reported entity.
_ISBN_CANDIDATE = (
    r"\b(?:ISBN(?:-13)?:?\ )?"
    r"(?P<entity>97[89][-\ ]?[0-9]{1,5}[-\ ]?[0-9]+[-\ ]?[0-9]+[-\ ]?[0-9])\b"
)
_ISBN_SHAPE = r"[0-9]{13}|(?=(?:[0-9]+[-\ ]){4})[-\ 0-9]{17}"


def _requirements(pattern_text: str) -> frozenset[str]:
    reqs = set()
    if r"\p{" in pattern_text:
        reqs.add(UNICODE_PROPERTIES)
    if "(?=" in pattern_text or "(?!" in pattern_text:
        reqs.add(LOOKAHEAD)
    if "$" in pattern_text or "^" in pattern_text.replace("[^", "").replace(r"\^", ""):
        reqs.add(ANCHORS)
    return frozenset(reqs)


@dataclass(frozen=True)
class PatternSpec:
    category: EntityCategory
    pattern_text: str
    engine_requirements: frozenset[str] = field(default=frozenset())


@dataclass(frozen=True)
class EntityMatch:
    """A located entity. ``span`` is a half-open code-point interval."""

    category: EntityCategory
    surface: str
    span: tuple[int, int]

    def __post_init__(self):
        start, end = self.span
        if not self.surface:
            raise ValueError("entity surface must be non-empty")
        if end - start != len(self.surface) or start < 0:
            raise ValueError(f"span {self.span} does not fit surface {self.surface!r}")

    @property
    def start(self) -> int:
        return self.span[0]

    @property
    def end(self) -> int:
        return self.span[1]


class _Matcher:
    def __init__(
        self,
        category: EntityCategory,
        pattern: str,
        group: str | int = 0,
        verify: Callable[[str], bool] | None = None,
    ):
        self.category = category
        self.compiled = regex.compile(pattern)
        self.group = group
        self.verify = verify

    def finditer(self, text: str):
        if self.verify is None:
            for m in self.compiled.finditer(text):
                if m.end() > m.start():
                    yield m.start(self.group), m.end(self.group)
            return
        pos = 0
        while pos <= len(text):
            m = self.compiled.search(text, pos)
            if m is None:
                return
            start, end = m.span(self.group)
            if self.verify(text[start:end]):
                yield start, end
                pos = m.end()
            else:
                pos = m.start() + 1


class PatternRegistry:
    """Compiled detectors for all nine categories.

    ``overrides`` maps category names to replacement pattern strings. An
    overridden pattern is used verbatim by the regex engine; only the built-in
    ISBN pattern gets the two-pass treatment described above.
    """

    def __init__(self, overrides: Mapping[str, str] | None = None):
        overrides = {EntityCategory(k): v for k, v in (overrides or {}).items()}
        self._specs: dict[EntityCategory, PatternSpec] = {}
        self._matchers: dict[EntityCategory, _Matcher] = {}
        for category in EntityCategory:
            text = overrides.get(category, DEFAULT_PATTERNS[category])
            self._specs[category] = PatternSpec(category, text, _requirements(text))
            if category is EntityCategory.ISBN and text == DEFAULT_PATTERNS[category]:
                shape = regex.compile(_ISBN_SHAPE)
                matcher = _Matcher(
                    category,
                    _ISBN_CANDIDATE,
                    group="entity",
                    verify=lambda body, _shape=shape: _shape.fullmatch(body) is not None,
                )
            else:
                matcher = _Matcher(category, text)
            self._matchers[category] = matcher
        self.overridden = frozenset(overrides)

    def pattern_for(self, category: EntityCategory | str) -> PatternSpec:
        return self._specs[EntityCategory(category)]

    def detect(self, text: str, category: EntityCategory | str) -> list[EntityMatch]:
        category = EntityCategory(category)
        return [
            EntityMatch(category, text[start:end], (start, end))
            for start, end in self._matchers[category].finditer(text)
        ]


DEFAULT_REGISTRY = PatternRegistry()


def pattern_for(category: EntityCategory | str) -> PatternSpec:
    return DEFAULT_REGISTRY.pattern_for(category)


def detect_entities(
    text: str,
    category: EntityCategory | str,
    registry: PatternRegistry | None = None,
) -> list[EntityMatch]:
    """All non-overlapping matches of ``category`` in ``text``, leftmost first."""
    return (registry or DEFAULT_REGISTRY).detect(text, category)


def validate_single(
    text: str,
    category: EntityCategory | str,
    registry: PatternRegistry | None = None,
) -> EntityMatch:
    """Return the only entity of ``category`` in ``text``.

    Raises :class:`ZeroEntities` or :class:`MultipleEntities` otherwise; this
    is the gate a candidate sentence must pass to enter a corpus.
    """
    matches = detect_entities(text, category, registry)
    if not matches:
        raise ZeroEntities(f"no {EntityCategory(category).value} entity found")
    if len(matches) > 1:
        surfaces = tuple(m.surface for m in matches)
        raise MultipleEntities(
            f"{len(matches)} {EntityCategory(category).value} entities found: {surfaces}",
            surfaces,
        )
    return matches[0]
