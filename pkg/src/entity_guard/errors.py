"""Exception hierarchy.

Everything raised for bad *data* derives from :class:`DataError`; the CLI maps
those to exit status 1. Programming errors (bad arguments) stay as the builtin
``ValueError``/``TypeError``.
"""

from __future__ import annotations


class EntityGuardError(Exception):
    pass


class DataError(EntityGuardError):
    pass


# entity extraction

class EntityValidationError(DataError):
    """A candidate sentence does not hold exactly one entity of its category."""


class ZeroEntities(EntityValidationError):
    pass


class MultipleEntities(EntityValidationError):
    def __init__(self, message: str, surfaces: tuple[str, ...] = ()):
        super().__init__(message)
        self.surfaces = surfaces


# corpus building

class InsufficientInput(DataError):
    pass


class BucketExhausted(DataError):
    def __init__(self, message: str, bucket: int, accepted: int, needed: int):
        super().__init__(message)
        self.bucket = bucket
        self.accepted = accepted
        self.needed = needed


class EmptyCorpus(DataError):
    pass


# translation gateway

class SeparatorCollision(DataError):
    pass


class CountMismatch(DataError):
    def __init__(self, message: str, expected: int, actual: int):
        super().__init__(message)
        self.expected = expected
        self.actual = actual


class BackendError(DataError):
    pass


class RecordError(DataError):
    """One bad line in a line-delimited input file."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class SchemaError(RecordError):
    pass


class UnknownSampleId(RecordError):
    def __init__(self, sample_ids, line: int | None = None):
        if isinstance(sample_ids, str):
            sample_ids = (sample_ids,)
        self.sample_ids = tuple(sample_ids)
        super().__init__("unknown sample id(s): " + ", ".join(self.sample_ids), line)


# analytics

class EmptyGroup(DataError):
    def __init__(self, message: str, missing: tuple = ()):
        super().__init__(message)
        self.missing = missing


class DegenerateInput(DataError):
    pass


class InsufficientData(DataError):
    pass


# reporting

class UnsupportedFormat(EntityGuardError, ValueError):
    pass
