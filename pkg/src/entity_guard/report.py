"""Rendering tables to CSV, JSON and Markdown, and optional SVG charts."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path

from . import records
from .analytics import (
    BANDS,
    BY_CATEGORY,
    AggregateTable,
    CorrelationResult,
    ErrorHistogram,
    LengthBinReport,
    TopErrorTable,
)
from .corpus import CorpusStats
from .errors import UnsupportedFormat

FORMATS = ("csv", "json", "markdown")
EXTENSIONS = {"csv": ".csv", "json": ".json", "markdown": ".md"}
MACRO_LABEL = "macro avg."


def round_half_up(value: float, places: int = 2) -> Decimal:
    # str() gives the shortest repr, so 69.125 stays 69.125 and rounds up
    return Decimal(str(value)).quantize(Decimal(1).scaleb(-places), rounding=ROUND_HALF_UP)


def fmt_number(value) -> str:
    if isinstance(value, bool) or value is None:
        return "" if value is None else str(value)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if value != value:
            return "nan"
        return str(round_half_up(value))
    return str(value)


def _json_value(value):
    if isinstance(value, float) and not isinstance(value, bool):
        if value != value:
            return None
        return float(round_half_up(value))
    return value


@dataclass(frozen=True)
class RenderedReport:
    format: str
    content: bytes
    shape: str

    @property
    def text(self) -> str:
        return self.content.decode("utf-8")

    def write(self, path: records.PathLike) -> None:
        records.atomic_write(path, self.content)


def _grid(table) -> tuple[str, list[str], list[list]]:
    """(shape, header, rows) with raw values for every supported table."""
    if isinstance(table, AggregateTable):
        first = "Category" if table.axis == BY_CATEGORY else "Direction"
        header = [first, *table.systems]
        rows = [[k, *table.row(k)] for k in table.keys]
        rows.append([MACRO_LABEL, *(table.macro_row[s] for s in table.systems)])
        return f"accuracy_{table.axis}", header, rows
    if isinstance(table, ErrorHistogram):
        header = ["Model", "exact", *BANDS, "total"]
        rows = [
            [s, table.exact[s], *(table.counts[s][b] for b in BANDS), table.total[s]]
            for s in table.systems
        ]
        return "error_histogram", header, rows
    if isinstance(table, TopErrorTable):
        header = ["Model"]
        for b in table.bands:
            header += [f"{b} category", f"{b} errors"]
        rows = []
        for s in table.systems:
            row = [s]
            for b in table.bands:
                cat, n = table.entries[s].get(b, ("", None))
                row += [cat, n]
            rows.append(row)
        return "top_error_categories", header, rows
    if isinstance(table, LengthBinReport):
        header = ["Bin", "min tokens", "max tokens", "samples", "records",
                  "accuracy %", "modified %", "no-match %"]
        rows = [
            [b.index + 1, b.min_tokens, b.max_tokens, b.samples, b.records,
             b.accuracy, b.modified, b.no_match]
            for b in table.bins
        ]
        return "length_bins", header, rows
    if isinstance(table, CorpusStats):
        header = ["Group", "Key", "count", "tokens mean", "tokens std",
                  "entity chars mean", "entity chars std"]
        rows = [
            [g, k, t.count, t.mean, t.std, e.mean, e.std]
            for g, k, t, e in table.rows()
        ]
        return "corpus_stats", header, rows
    if isinstance(table, CorrelationResult):
        header = ["method", "coefficient", "p-value", "n"]
        return "correlation", header, [[table.method, table.coefficient, table.p_value, table.n]]
    raise TypeError(f"cannot render {type(table).__name__}")


def render_table(table, format: str, title: str | None = None) -> RenderedReport:
    """Serialise ``table`` deterministically; numbers get 2 decimals, half-up."""
    if format not in FORMATS:
        raise UnsupportedFormat(f"unsupported format {format!r}; choose from {', '.join(FORMATS)}")
    shape, header, rows = _grid(table)
    if format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        writer.writerows([[fmt_number(v) for v in row] for row in rows])
        text = buf.getvalue()
    elif format == "json":
        doc = {"table": shape}
        if title:
            doc["title"] = title
        doc["columns"] = header
        doc["rows"] = [[_json_value(v) for v in row] for row in rows]
        text = json.dumps(doc, ensure_ascii=False, indent=2) + "\n"
    else:
        lines = []
        if title:
            lines += [f"### {title}", ""]
        lines.append("| " + " | ".join(header) + " |")
        lines.append("|" + "|".join("---" if i == 0 else "---:" for i in range(len(header))) + "|")
        for row in rows:
            lines.append("| " + " | ".join(fmt_number(v) for v in row) + " |")
        text = "\n".join(lines) + "\n"
    return RenderedReport(format, text.encode("utf-8"), shape)


# charts

def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "entity-guard"
    plt.rcParams["svg.fonttype"] = "none"
    return plt


def _save_svg(fig, path: Path) -> None:
    buf = io.BytesIO()
    fig.savefig(buf, format="svg", metadata={"Date": None, "Creator": None})
    records.atomic_write(path, buf.getvalue())


def plot_error_histogram(hist: ErrorHistogram, path: records.PathLike) -> None:
    """Grouped bars of the error share per band, one group per system."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(10, 4))
    width = 0.8 / max(len(hist.systems), 1)
    for i, system in enumerate(hist.systems):
        errors = hist.errors(system) or 1
        shares = [100.0 * hist.counts[system][b] / errors for b in BANDS]
        ax.bar([j + i * width for j in range(len(BANDS))], shares, width, label=system)
    ax.set_xticks([j + 0.4 - width / 2 for j in range(len(BANDS))])
    ax.set_xticklabels(BANDS)
    ax.set_ylabel("% of errors")
    ax.legend(fontsize="small", ncol=4)
    fig.tight_layout()
    _save_svg(fig, Path(path))
    plt.close(fig)


def plot_length_bins(reports: dict[str, LengthBinReport], path: records.PathLike,
                     metric: str = "accuracy") -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(8, 4))
    for system, rep in sorted(reports.items()):
        ax.plot([b.index + 1 for b in rep.bins], [getattr(b, metric) for b in rep.bins],
                marker="o", label=system)
    ax.set_xlabel("length bin (short to long)")
    ax.set_ylabel(f"{metric} %")
    ax.legend(fontsize="small", ncol=4)
    fig.tight_layout()
    _save_svg(fig, Path(path))
    plt.close(fig)
