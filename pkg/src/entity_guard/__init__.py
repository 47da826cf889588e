"""Measure how well machine translation preserves no-translate entities."""

from .analytics import (
    AggregateTable,
    CorrelationResult,
    ErrorHistogram,
    LengthBinReport,
    accuracy_table,
    correlate,
    error_histogram,
    length_bin_analysis,
    subtoken_error_correlation,
    top_error_category,
)
from .corpus import (
    CandidateSentence,
    CorpusBuildConfig,
    CorpusStats,
    LanguageCode,
    Sample,
    bucket_by_length,
    build_corpus,
    corpus_stats,
    strip_generation_remarks,
)
from .entities import (
    EntityCategory,
    EntityMatch,
    PatternRegistry,
    PatternSpec,
    detect_entities,
    pattern_for,
    validate_single,
)
from .report import render_table
from .scoring import ScoreRecord, TransferOutcome, levenshtein, score_corpus, score_pair
from .translation import (
    Direction,
    TranslationRecord,
    batch_documents,
    import_translations,
    unbatch_document,
)

__version__ = "0.1.0"
