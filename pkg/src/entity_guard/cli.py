"""``entity-guard`` command line.

Each subcommand runs one stage and only talks to the previous stage through
files::

    build-corpus -> corpus.jsonl -> batch -> translations.jsonl
                 -> score -> scores.jsonl -> analyze -> analysis.json -> report

Settings come from ``--config`` (or ``$ENTITY_GUARD_CONFIG``), a YAML file
whose keys mirror the long flag names; flags on the command line win.
Exit status: 0 ok, 1 bad data (details on stderr), 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Sequence

import yaml

from . import analytics, corpus as corpus_mod, records, report, scoring, translation
from .entities import EntityCategory, PatternRegistry
from .errors import DataError, UnknownSampleId

CONFIG_ENV = "ENTITY_GUARD_CONFIG"


class UsageError(Exception):
    pass


def load_config(path: str | os.PathLike | None) -> dict:
    if path is None:
        path = os.environ.get(CONFIG_ENV)
    if not path:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            data = yaml.safe_load(fh) or {}
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    except yaml.YAMLError as exc:
        raise UsageError(f"invalid config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise UsageError(f"config {path} must be a mapping")
    return {k.replace("-", "_"): v for k, v in data.items()}


def _setting(args, config: dict, name: str, default=None):
    value = getattr(args, name, None)
    if value is not None:
        return value
    return config.get(name, default)


def _input_path(args, config, name: str, required: bool = True) -> Path | None:
    value = _setting(args, config, name)
    if value is None:
        if required:
            raise UsageError(f"--{name.replace('_', '-')} is required")
        return None
    path = Path(value)
    if not path.is_file():
        raise UsageError(f"{name.replace('_', '-')} is not a readable file: {path}")
    return path


def _output_path(args, config, name: str = "out", required: bool = True) -> Path | None:
    value = _setting(args, config, name)
    if value is None and required:
        raise UsageError(f"--{name} is required")
    return None if value is None else Path(value)


def _list(value) -> list[str]:
    if value is None:
        return []
    if isinstance(value, str):
        value = [value]
    out = []
    for item in value:
        out.extend(part.strip() for part in str(item).split(",") if part.strip())
    return out


def _formats(args, config) -> list[str]:
    formats = _list(_setting(args, config, "format")) or ["markdown"]
    bad = [f for f in formats if f not in report.FORMATS]
    if bad:
        raise UsageError(f"unsupported format(s): {', '.join(bad)}")
    return list(dict.fromkeys(formats))


def _directions(args, config) -> list[translation.Direction] | None:
    names = _list(_setting(args, config, "directions"))
    if not names:
        return None
    try:
        return [translation.Direction.parse(n) for n in names]
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _registry(config) -> PatternRegistry | None:
    patterns = config.get("patterns")
    if not patterns:
        return None
    try:
        return PatternRegistry(patterns)
    except ValueError as exc:
        raise UsageError(f"bad pattern override: {exc}") from None


def _filter_scores(scores, systems, directions):
    if systems:
        scores = [s for s in scores if s.system_id in systems]
    if directions:
        wanted = set(directions)
        scores = [s for s in scores if s.direction in wanted]
    return scores


# subcommands

def cmd_build_corpus(args, config) -> int:
    build = dict(config.get("build") or {})
    cfg = corpus_mod.CorpusBuildConfig(
        bucket_count=int(_setting(args, build, "bucket_count", 20)),
        per_bucket=int(_setting(args, build, "per_bucket", 50)),
        rng_seed=int(_setting(args, config, "seed", 0)),
        language_filter_enabled=not args.no_language_filter and build.get("language_filter", True),
        grammar_filter_enabled=not args.no_grammar_filter and build.get("grammar_filter", True),
    )
    source = _input_path(args, config, "candidates")
    out = _output_path(args, config)

    def predicate(kind):
        verdicts = _setting(args, build, f"{kind}_verdicts")
        command = _setting(args, build, f"{kind}_command")
        if verdicts and command:
            raise UsageError(f"give either --{kind}-verdicts or --{kind}-command, not both")
        if verdicts:
            if not Path(verdicts).exists():
                raise UsageError(f"{kind} verdict file does not exist: {verdicts}")
            return corpus_mod.VerdictFilePredicate.from_file(verdicts)
        if command:
            return corpus_mod.CommandPredicate(command)
        return None

    language_pred, grammar_pred = predicate("language"), predicate("grammar")
    candidates = corpus_mod.read_candidates(
        source, _setting(args, config, "language"), _setting(args, config, "category")
    )
    result = corpus_mod.build_corpus(candidates, cfg, language_pred, grammar_pred, _registry(config))
    corpus_mod.write_corpus(out, result.samples)
    rejections = _setting(args, config, "rejections")
    if rejections:
        corpus_mod.write_rejections(rejections, result.rejections)
    print(f"{len(result.samples)} samples written to {out}; "
          f"{len(result.rejections)} candidates rejected", file=sys.stderr)
    return 0


def cmd_stats(args, config) -> int:
    samples = corpus_mod.read_corpus(_input_path(args, config, "corpus"))
    stats = corpus_mod.corpus_stats(samples)
    return _emit(report_items=[("corpus_stats", stats, "Corpus statistics")],
                 formats=_formats(args, config), out=_output_path(args, config, required=False))


def cmd_batch(args, config) -> int:
    samples = corpus_mod.read_corpus(_input_path(args, config, "corpus"))
    out = _output_path(args, config)
    directions = _directions(args, config)
    system = _setting(args, config, "system")
    command = _setting(args, config, "backend_command")
    docs_in = _setting(args, config, "documents_in")

    if command or docs_in:
        if not system:
            raise UsageError("--system is required when collecting translations")
    if command:
        backend = translation.ExternalCommandBackend(command)
        records_out = translation.translate_corpus(
            samples, backend, system, directions,
            batch_size=args.batch_size, as_document=args.as_document,
        )
    elif docs_in:
        records_out = _collect_documents(Path(docs_in), samples, system, directions)
    else:
        # export one document per (language, category) for document translation
        groups: dict[tuple[str, str], list] = {}
        for s in samples:
            groups.setdefault((s.language.value, s.category.value), []).append(s)
        out.mkdir(parents=True, exist_ok=True)
        manifest = []
        for (lang, cat), group in sorted(groups.items()):
            group.sort(key=lambda s: s.id)
            name = f"{lang}-{cat}.txt"
            records.atomic_write(out / name, translation.batch_documents([s.text for s in group]))
            manifest.append({"document": name, "sample_ids": [s.id for s in group]})
        records.write_records(out / "manifest.jsonl", manifest)
        print(f"{len(manifest)} documents written to {out}", file=sys.stderr)
        return 0
    translation.write_translations(out, records_out)
    print(f"{len(records_out)} translations written to {out}", file=sys.stderr)
    return 0


def _collect_documents(docs_in: Path, samples, system, directions):
    """Read translated documents named ``{src}-{tgt}-{category}.txt``."""
    manifest_path = docs_in / "manifest.jsonl"
    if not manifest_path.exists():
        raise UsageError(f"{docs_in} has no manifest.jsonl")
    ids_by_doc = {
        rec["document"]: rec["sample_ids"] for _, rec in records.iter_records(manifest_path)
    }
    out = []
    for direction in directions or translation.all_directions():
        for doc_name, ids in sorted(ids_by_doc.items()):
            lang, _, cat = doc_name[:-4].partition("-")
            if lang != direction.source.value:
                continue
            path = docs_in / f"{direction}-{cat}.txt"
            if not path.exists():
                continue
            text = path.read_text(encoding="utf-8").rstrip("\n")
            segments = translation.unbatch_document(text, len(ids))
            out.extend(
                translation.TranslationRecord(i, direction, system, seg)
                for i, seg in zip(ids, segments)
            )
    return out


def cmd_score(args, config) -> int:
    samples = corpus_mod.read_corpus(_input_path(args, config, "corpus"))
    result = translation.import_translations(_input_path(args, config, "translations"), samples)
    if result.errors:
        for err in result.errors:
            print(f"error: {err}", file=sys.stderr)
        print(f"{len(result.errors)} bad translation record(s); nothing written", file=sys.stderr)
        return 1
    trans = result.records
    systems = _list(_setting(args, config, "systems"))
    directions = _directions(args, config)
    if systems:
        trans = [t for t in trans if t.system_id in systems]
    if directions:
        trans = [t for t in trans if t.direction in set(directions)]
    scores = scoring.score_corpus(samples, trans, _registry(config))
    out = _output_path(args, config)
    scoring.write_scores(out, scores)
    exact = sum(s.outcome.is_exact for s in scores)
    print(f"{len(scores)} translations scored, {exact} exact transfers", file=sys.stderr)
    return 0


def _analysis(scores, samples, tokens, categories, bins) -> dict:
    doc: dict = {
        "records": len(scores),
        "accuracy_by_category": analytics.accuracy_table(scores, analytics.BY_CATEGORY).to_dict(),
        "accuracy_by_direction": analytics.accuracy_table(scores, analytics.BY_DIRECTION).to_dict(),
        "error_histogram": analytics.error_histogram(scores).to_dict(),
        "error_histogram_without_emoji": analytics.error_histogram(
            scores, exclude_categories=[EntityCategory.EMOJI]
        ).to_dict(),
        "top_error_categories": analytics.top_error_table(scores).to_dict(),
    }
    if samples is not None:
        doc["length_bins"] = {
            system: rep.to_dict()
            for system, rep in analytics.length_bins_by_system(scores, samples, k=bins).items()
        }
    if tokens is not None:
        subtoken = {}
        for cat in categories or [c.value for c in EntityCategory]:
            per_system = {}
            for system in sorted({s.system_id for s in scores}):
                mine = [s for s in scores if s.system_id == system]
                try:
                    per_system[system] = analytics.subtoken_error_correlation(
                        mine, tokens, cat).to_dict()
                except DataError as exc:
                    per_system[system] = {"error": str(exc)}
            subtoken[cat] = per_system
        doc["subtoken_error_correlation"] = subtoken
    return doc


def cmd_analyze(args, config) -> int:
    scores = scoring.read_scores(_input_path(args, config, "scores"))
    scores = _filter_scores(scores, _list(_setting(args, config, "systems")), _directions(args, config))
    corpus_path = _input_path(args, config, "corpus", required=False)
    samples = corpus_mod.read_corpus(corpus_path) if corpus_path else None
    tokens_path = _input_path(args, config, "tokens", required=False)
    tokens = analytics.read_token_counts(tokens_path) if tokens_path else None
    bins = int(_setting(args, config, "bins", 5))
    doc = _analysis(scores, samples, tokens, _list(_setting(args, config, "category")), bins)
    out = _output_path(args, config)
    records.atomic_write(out, json.dumps(doc, ensure_ascii=False, indent=2, sort_keys=True) + "\n")
    print(f"analysis of {len(scores)} records written to {out}", file=sys.stderr)
    return 0


def cmd_report(args, config) -> int:
    analysis_path = _input_path(args, config, "analysis", required=False)
    if analysis_path is not None:
        with open(analysis_path, encoding="utf-8") as fh:
            doc = json.load(fh)
    else:
        scores = scoring.read_scores(_input_path(args, config, "scores"))
        scores = _filter_scores(scores, _list(_setting(args, config, "systems")), _directions(args, config))
        corpus_path = _input_path(args, config, "corpus", required=False)
        samples = corpus_mod.read_corpus(corpus_path) if corpus_path else None
        doc = _analysis(scores, samples, None, [], int(_setting(args, config, "bins", 5)))

    items = [
        ("accuracy_by_category", analytics.AggregateTable.from_dict(doc["accuracy_by_category"]),
         "Accuracy per category, averaged over directions"),
        ("accuracy_by_direction", analytics.AggregateTable.from_dict(doc["accuracy_by_direction"]),
         "Accuracy per direction, macro-averaged over categories"),
        ("error_histogram", analytics.ErrorHistogram.from_dict(doc["error_histogram"]),
         "Error size distribution"),
        ("error_histogram_without_emoji",
         analytics.ErrorHistogram.from_dict(doc["error_histogram_without_emoji"]),
         "Error size distribution without emoji"),
        ("top_error_categories", analytics.TopErrorTable.from_dict(doc["top_error_categories"]),
         "Categories with most errors per edit distance"),
    ]
    bins = {
        system: analytics.LengthBinReport.from_dict(rep)
        for system, rep in (doc.get("length_bins") or {}).items()
    }
    for system, rep in bins.items():
        items.append((f"length_bins_{system}", rep, f"Outcomes by sentence length: {system}"))

    out = _output_path(args, config, required=False)
    status = _emit(items, _formats(args, config), out)
    if _setting(args, config, "emit_charts", False):
        if out is None:
            raise UsageError("--emit-charts needs --out")
        report.plot_error_histogram(items[2][1], out / "error_histogram.svg")
        report.plot_error_histogram(items[3][1], out / "error_histogram_without_emoji.svg")
        if bins:
            for metric in ("accuracy", "modified", "no_match"):
                report.plot_length_bins(bins, out / f"length_bins_{metric}.svg", metric)
    return status


def _emit(report_items, formats, out: Path | None) -> int:
    for name, table, title in report_items:
        for fmt in formats:
            rendered = report.render_table(table, fmt, title)
            if out is None:
                sys.stdout.write(rendered.text)
                sys.stdout.write("\n")
            else:
                rendered.write(out / f"{name}{report.EXTENSIONS[fmt]}")
    return 0


# argument parsing

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entity-guard",
        description="Check that machine translation keeps no-translate entities intact.",
    )
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    def common(p, *flags):
        p.add_argument("--config", help=f"YAML settings file (default: ${CONFIG_ENV})")
        for flag in flags:
            if flag == "format":
                p.add_argument("--format", action="append", choices=report.FORMATS,
                               help="output format; repeat for several")
            elif flag == "systems":
                p.add_argument("--systems", action="append", help="comma-separated system ids")
            elif flag == "directions":
                p.add_argument("--directions", action="append",
                               help="comma-separated directions such as en-de")
            else:
                p.add_argument("--" + flag.replace("_", "-"))

    p = sub.add_parser("build-corpus", help="select representative samples from candidates")
    common(p, "candidates", "out", "language", "category", "rejections")
    p.add_argument("--seed", type=int)
    p.add_argument("--bucket-count", type=int)
    p.add_argument("--per-bucket", type=int)
    p.add_argument("--language-verdicts")
    p.add_argument("--language-command")
    p.add_argument("--grammar-verdicts")
    p.add_argument("--grammar-command")
    p.add_argument("--no-language-filter", action="store_true")
    p.add_argument("--no-grammar-filter", action="store_true")
    p.set_defaults(func=cmd_build_corpus)

    p = sub.add_parser("stats", help="token and entity length statistics of a corpus")
    common(p, "corpus", "out", "format")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("batch", help="export batch documents or run a translation backend")
    common(p, "corpus", "out", "directions", "system", "backend_command", "documents_in")
    p.add_argument("--batch-size", type=int)
    p.add_argument("--as-document", action="store_true",
                   help="send each batch as one blank-line separated document")
    p.set_defaults(func=cmd_batch)

    p = sub.add_parser("score", help="classify every translation's entity transfer")
    common(p, "corpus", "translations", "out", "systems", "directions")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("analyze", help="aggregate scores into accuracy and error statistics")
    common(p, "corpus", "scores", "out", "tokens", "systems", "directions")
    p.add_argument("--category", action="append",
                   help="categories for the subtoken/error correlation")
    p.add_argument("--bins", type=int)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("report", help="render analysis tables and charts")
    common(p, "analysis", "scores", "corpus", "out", "format", "systems", "directions")
    p.add_argument("--bins", type=int)
    p.add_argument("--emit-charts", action="store_true", default=None)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        config = load_config(args.config)
        return args.func(args, config)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog} {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except UnknownSampleId as exc:
        for sample_id in exc.sample_ids:
            print(f"error: unknown sample id {sample_id}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        # invalid settings such as a zero bucket count
        parser.print_usage(sys.stderr)
        print(f"{parser.prog} {args.command}: error: {exc}", file=sys.stderr)
        return 2


cli_main = main

if __name__ == "__main__":
    sys.exit(main())
