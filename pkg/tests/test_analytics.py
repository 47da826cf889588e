import io
import math
import random
import statistics

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats as sps

from entity_guard.analytics import (
    BANDS,
    BY_CATEGORY,
    BY_DIRECTION,
    AggregateTable,
    ErrorHistogram,
    TopErrorTable,
    accuracy_table,
    average_ranks,
    cell_spread,
    correlate,
    error_histogram,
    key_spread,
    length_bin_analysis,
    length_bins_by_system,
    load_model_characteristics,
    load_reference_table,
    read_token_counts,
    subtoken_error_correlation,
    top_error_category,
    top_error_table,
    write_token_counts,
)
from entity_guard.entities import EntityCategory
from entity_guard.errors import DegenerateInput, EmptyGroup, InsufficientData, SchemaError
from entity_guard.scoring import TransferOutcome
from entity_guard.translation import Direction, all_directions

from conftest import make_sample, random_scores, score_record

EN_DE = Direction("en", "de")


# accuracy tables

def test_published_macro_rows_reproduce():
    for axis in (BY_CATEGORY, BY_DIRECTION):
        ref = load_reference_table(axis)
        for system in ref.table.systems:
            assert abs(ref.table.macro_row[system] - ref.published_macro[system]) <= 0.005 + 1e-9


def test_single_system_macro_examples():
    ref = load_reference_table(BY_CATEGORY).table
    euro = ref.column("EuroLLM-9B")
    assert euro == [87.77, 92.12, 96.78, 98.55, 99.58, 98.41, 98.36, 96.23, 95.20]
    assert round(statistics.fmean(euro), 2) == 95.89
    assert round(ref.macro_row["OPUS"], 2) == 45.68


def test_table_shapes():
    by_cat = load_reference_table(BY_CATEGORY).table
    by_dir = load_reference_table(BY_DIRECTION).table
    assert by_cat.keys == tuple(c.value for c in EntityCategory)
    assert len(by_dir.keys) == 12 and len(by_dir.systems) == 8


def test_direction_spreads_use_sample_formula():
    table = load_reference_table(BY_DIRECTION).table
    spreads = key_spread(table)
    assert abs(spreads["en-pl"].mean - 88.32) < 0.01
    assert abs(spreads["en-pl"].std - 9.06) < 0.01
    assert abs(spreads["en-pl"].std - statistics.stdev(table.row("en-pl"))) < 1e-12


def test_cell_spread_matches_numpy():
    table = load_reference_table(BY_DIRECTION).table
    cells = np.array(list(table.cells.values()))
    assert cell_spread(table).std == pytest.approx(cells.std(ddof=1))
    assert cell_spread(table, ddof=0).std == pytest.approx(cells.std())


def test_all_exact_gives_100():
    scores = [
        score_record(f"s{i}", d, "sys", c, TransferOutcome.exact())
        for i, (c, d) in enumerate((c, d) for c in EntityCategory for d in all_directions())
    ]
    for axis in (BY_CATEGORY, BY_DIRECTION):
        table = accuracy_table(scores, axis)
        assert set(table.cells.values()) == {100.0}
        assert table.macro_row == {"sys": 100.0}


def test_accuracy_weights_directions_equally():
    d2 = Direction("pl", "uk")
    scores = [score_record("a", EN_DE, "s", "ip", TransferOutcome.exact())]
    scores += [score_record(f"b{i}", d2, "s", "ip", TransferOutcome.no_match()) for i in range(9)]
    table = accuracy_table(scores, BY_CATEGORY)
    assert table.cell("s", "ip") == 50.0


def test_missing_group_is_reported():
    scores = [
        score_record("a", EN_DE, "s1", "ip", TransferOutcome.exact()),
        score_record("b", EN_DE, "s1", "url", TransferOutcome.exact()),
        score_record("c", EN_DE, "s2", "ip", TransferOutcome.exact()),
    ]
    with pytest.raises(EmptyGroup) as info:
        accuracy_table(scores, BY_CATEGORY)
    assert info.value.missing == (("s2", "url"),)
    with pytest.raises(EmptyGroup):
        accuracy_table([], BY_CATEGORY)


def test_cells_out_of_range_rejected():
    with pytest.raises(ValueError):
        AggregateTable.from_cells(BY_CATEGORY, {("s", "ip"): 100.5})


def test_table_dict_roundtrip():
    table = load_reference_table(BY_DIRECTION).table
    assert AggregateTable.from_dict(table.to_dict()) == table


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32))
def test_macro_is_mean_of_cells(seed):
    table = accuracy_table(random_scores(random.Random(seed)), BY_DIRECTION)
    for system in table.systems:
        assert abs(table.macro_row[system] - statistics.fmean(table.column(system))) < 1e-9


def test_dual_macro_needs_balance():
    rng = random.Random(5)
    balanced = random_scores(rng, per_cell=3)
    a = accuracy_table(balanced, BY_CATEGORY).macro_row
    b = accuracy_table(balanced, BY_DIRECTION).macro_row
    assert all(abs(a[s] - b[s]) < 1e-9 for s in a)


# histograms

def test_histogram_example():
    outcomes = [TransferOutcome.modified(1), TransferOutcome.modified(2),
                TransferOutcome.modified(7), TransferOutcome.no_match()]
    hist = error_histogram([score_record(f"s{i}", EN_DE, "m", "ip", o) for i, o in enumerate(outcomes)])
    assert hist.counts["m"] == {"no_match": 1, "d=1": 1, "d=2": 1, "d=3": 0, "d=4": 0, "d=5": 0, "d>5": 1}
    assert hist.exact["m"] == 0 and hist.total["m"] == 4


def test_histogram_all_exact():
    hist = error_histogram([score_record("s", EN_DE, "m", "ip", TransferOutcome.exact())])
    assert set(hist.counts["m"].values()) == {0} and hist.exact["m"] == 1


def test_histogram_excludes_categories():
    scores = [
        score_record("a", EN_DE, "m", "emoji", TransferOutcome.no_match()),
        score_record("b", EN_DE, "m", "ip", TransferOutcome.no_match()),
    ]
    assert error_histogram(scores, exclude_categories=["emoji"]).counts["m"]["no_match"] == 1


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32))
def test_histogram_conservation(seed):
    scores = random_scores(random.Random(seed))
    hist = error_histogram(scores)
    for system in hist.systems:
        assert hist.exact[system] + sum(hist.counts[system][b] for b in BANDS) == hist.total[system]
    assert ErrorHistogram.from_dict(hist.to_dict()) == hist


def test_top_error_category():
    scores = [score_record(f"i{i}", EN_DE, "m", "iban", TransferOutcome.modified(1)) for i in range(3)]
    scores.append(score_record("u", EN_DE, "m", "url", TransferOutcome.modified(1)))
    scores.append(score_record("n", EN_DE, "other", "url", TransferOutcome.modified(2)))
    assert top_error_category(scores, "d=1") == {"m": (EntityCategory.IBAN, 3)}
    assert top_error_category(scores, "d>5") == {}


def test_top_error_ties_go_to_category_name():
    scores = [
        score_record("u", EN_DE, "m", "url", TransferOutcome.modified(2)),
        score_record("e", EN_DE, "m", "email", TransferOutcome.modified(2)),
    ]
    assert top_error_category(scores, "d=2")["m"] == (EntityCategory.EMAIL, 1)


def test_top_error_table_roundtrip():
    table = top_error_table(random_scores(random.Random(2)))
    assert TopErrorTable.from_dict(table.to_dict()) == table
    assert table.bands == ("d=1", "d=2", "d>5")


# correlation

TABLE6 = load_model_characteristics()
ACC = [r["avg_accuracy"] for r in TABLE6]
TOK = [r["avg_entity_tokens"] for r in TABLE6]


def test_pearson_against_scipy():
    res = correlate(ACC, TOK, "pearson")
    ref = sps.pearsonr(ACC, TOK)
    assert res.coefficient == pytest.approx(ref.statistic, abs=1e-12)
    assert res.p_value == pytest.approx(ref.pvalue, abs=1e-9)
    assert res.n == 7


def test_spearman_against_scipy():
    res = correlate(ACC, TOK, "spearman")
    ref = sps.spearmanr(ACC, TOK)
    assert res.coefficient == pytest.approx(ref.statistic, abs=1e-12)
    assert res.p_value == pytest.approx(ref.pvalue, abs=1e-9)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.integers(-50, 50), st.integers(-50, 50)), min_size=3, max_size=30))
def test_random_correlations_against_scipy(pairs):
    xs, ys = [p[0] for p in pairs], [p[1] for p in pairs]
    if len(set(xs)) < 2 or len(set(ys)) < 2:
        with pytest.raises(DegenerateInput):
            correlate(xs, ys)
        return
    for method, ref_fn in (("pearson", sps.pearsonr), ("spearman", sps.spearmanr)):
        res = correlate(xs, ys, method)
        ref = ref_fn(xs, ys)
        assert res.coefficient == pytest.approx(ref.statistic, abs=1e-9)
        assert res.p_value == pytest.approx(ref.pvalue, abs=1e-7)


def test_correlation_laws():
    xs = [1.0, 2.5, 3.0, 7.0, 11.0]
    assert correlate(xs, [2 * x + 1 for x in xs]).coefficient == pytest.approx(1.0)
    assert correlate(xs, xs).coefficient == pytest.approx(1.0)
    assert correlate(xs, [-x for x in xs]).coefficient == pytest.approx(-1.0)
    ys = [3.0, 1.0, 4.0, 1.5, 9.0]
    base = correlate(xs, ys).coefficient
    assert correlate([3 * x + 7 for x in xs], [0.5 * y - 2 for y in ys]).coefficient == pytest.approx(base)


def test_correlation_degenerate_inputs():
    with pytest.raises(DegenerateInput):
        correlate([1, 2, 3], [5, 5, 5])
    with pytest.raises(DegenerateInput):
        correlate([1, 2], [3, 4])
    with pytest.raises(DegenerateInput):
        correlate([1, 2, 3], [1, 2])
    with pytest.raises(DegenerateInput):
        correlate([1, 2, math.nan], [1, 2, 3])


def test_average_ranks_ties():
    assert list(average_ranks([10, 20, 20, 5])) == [2.0, 3.5, 3.5, 1.0]
    assert list(average_ranks([1, 2, 3])) == list(sps.rankdata([1, 2, 3]))


# length bins

def _bin_corpus(n):
    return [make_sample("w " * (i + 1) + f"10.0.0.{i}", "ip", "en", f"s{i:02}") for i in range(n)]


def test_length_bins_sizes_and_order():
    corpus = _bin_corpus(11)
    scores = [score_record(s.id, EN_DE, "m", "ip", TransferOutcome.exact()) for s in corpus]
    report = length_bin_analysis(scores, corpus, tokenizer=str.split, k=5)
    assert [b.samples for b in report.bins] == [3, 2, 2, 2, 2]
    assert report.bins[0].min_tokens == 2 and report.bins[-1].max_tokens == 12
    assert all(b.accuracy == 100 and b.modified == 0 and b.no_match == 0 for b in report.bins)
    assert report.system_id == "m"


def test_length_bins_ten_samples():
    corpus = _bin_corpus(10)
    scores = [score_record(s.id, EN_DE, "m", "ip", TransferOutcome.exact()) for s in corpus]
    assert [b.samples for b in length_bin_analysis(scores, corpus, k=5).bins] == [2] * 5


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32))
def test_length_bin_percentages_sum_to_100(seed):
    rng = random.Random(seed)
    corpus = _bin_corpus(rng.randint(5, 30))
    scores = [
        score_record(s.id, d, "m", "ip", TransferOutcome.exact() if rng.random() < 0.5
                     else rng.choice([TransferOutcome.no_match(), TransferOutcome.modified(2)]))
        for s in corpus for d in (EN_DE, Direction("en", "pl"))
    ]
    for b in length_bin_analysis(scores, corpus, k=5).bins:
        assert abs(b.accuracy + b.modified + b.no_match - 100) < 1e-9
        assert b.records == 2 * b.samples


def test_length_bins_errors():
    corpus = _bin_corpus(3)
    scores = [score_record(s.id, EN_DE, "m", "ip", TransferOutcome.exact()) for s in corpus]
    with pytest.raises(InsufficientData):
        length_bin_analysis(scores, corpus, k=5)
    with pytest.raises(InsufficientData):
        length_bin_analysis(scores, corpus[:2], k=1)


def test_length_bins_by_system():
    corpus = _bin_corpus(10)
    scores = [score_record(s.id, EN_DE, m, "ip", TransferOutcome.exact()) for s in corpus for m in "ab"]
    reports = length_bins_by_system(scores, corpus, k=2)
    assert sorted(reports) == ["a", "b"] and reports["a"].system_id == "a"


# subtoken correlation

def test_subtoken_rate_proportional_gives_one():
    scores, counts = [], {}
    for c in range(1, 6):
        for i in range(10):
            sid = f"c{c}-{i}"
            counts[sid] = c
            bad = i < 2 * c
            scores.append(score_record(sid, EN_DE, "m", "email",
                                       TransferOutcome.no_match() if bad else TransferOutcome.exact()))
    res = subtoken_error_correlation(scores, counts, "email")
    assert res.coefficient == pytest.approx(1.0) and res.n == 5


def test_subtoken_independent_is_near_zero():
    rng = random.Random(8)
    scores, counts = [], {}
    for i in range(5000):
        sid = f"s{i}"
        counts[sid] = rng.randint(1, 12)
        out = TransferOutcome.no_match() if rng.random() < 0.3 else TransferOutcome.exact()
        scores.append(score_record(sid, EN_DE, "m", "url", out))
    assert abs(subtoken_error_correlation(scores, counts, "url", grouping="sample").coefficient) < 0.1


def test_subtoken_filters_category_and_checks_coverage():
    scores = [score_record("a", EN_DE, "m", "ip", TransferOutcome.exact())]
    with pytest.raises(InsufficientData):
        subtoken_error_correlation(scores, {}, "ip")
    with pytest.raises(DegenerateInput):
        subtoken_error_correlation(scores, {"a": 1}, "url")


def test_token_count_sidecar(tmp_path):
    path = tmp_path / "tok.jsonl"
    write_token_counts(path, {"b": 3, "a": 1})
    assert path.read_text().splitlines()[0] == '{"sample_id": "a", "token_count": 1}'
    assert read_token_counts(path) == {"a": 1, "b": 3}
    with pytest.raises(SchemaError):
        read_token_counts(io.StringIO('{"sample_id": "a", "token_count": true}\n'))
