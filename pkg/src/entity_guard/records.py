"""Line-delimited JSON records and atomic file writes."""

from __future__ import annotations

import io
import json
import os
import tempfile
from pathlib import Path
from typing import Any, Iterable, Iterator, TextIO, Union

from .errors import SchemaError

PathLike = Union[str, "os.PathLike[str]"]
Source = Union[PathLike, TextIO]


def dumps(record: dict[str, Any]) -> str:
    # json escapes embedded newlines, so a record never spans two lines
    return json.dumps(record, ensure_ascii=False, separators=(", ", ": "))


def iter_records(
    source: Source, errors: list | None = None
) -> Iterator[tuple[int, dict[str, Any]]]:
    """Yield ``(line_number, record)`` pairs, skipping blank lines.

    A line that is not a JSON object raises :class:`SchemaError`, or is
    appended to ``errors`` and skipped when a list is passed.
    """
    if isinstance(source, (str, os.PathLike)):
        with open(source, encoding="utf-8") as fh:
            yield from iter_records(fh, errors)
        return
    for lineno, line in enumerate(source, start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            problem = SchemaError(f"invalid JSON: {exc.msg}", lineno)
        else:
            if isinstance(record, dict):
                yield lineno, record
                continue
            problem = SchemaError("record is not an object", lineno)
        if errors is None:
            raise problem
        errors.append(problem)


def format_records(records: Iterable[dict[str, Any]]) -> str:
    buf = io.StringIO()
    for record in records:
        buf.write(dumps(record))
        buf.write("\n")
    return buf.getvalue()


def atomic_write(path: PathLike, data: str | bytes) -> None:
    """Write to a temp file in the target directory, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(data, str):
        data = data.encode("utf-8")
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def write_records(path: PathLike, records: Iterable[dict[str, Any]]) -> None:
    atomic_write(path, format_records(records))


def require(record: dict[str, Any], field: str, kind: type, lineno: int | None = None):
    try:
        value = record[field]
    except KeyError:
        raise SchemaError(f"missing field {field!r}", lineno) from None
    if kind is int and isinstance(value, bool) or not isinstance(value, kind):
        raise SchemaError(f"field {field!r} must be {kind.__name__}", lineno)
    return value
