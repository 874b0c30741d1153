"""certpipe: post-HTR processing for historical death certificates.

Stages: corpus inventory and cleanup, HTR document ingestion with layout
classification and reading order, rule-based entity extraction, lexicon
name correction with a known-token quality gate, record linking on name and
birth-year interval, evaluation metrics, and a human review loop.
"""

from .document import (
    HtrDocument,
    LayoutClass,
    LayoutConfig,
    LayoutKind,
    TextLine,
    TextRegion,
    classify_layout,
    main_text,
    parse_document,
    reorder_lines,
    serialize_document,
)
from .extraction import (
    CueTables,
    DateCandidate,
    ExtractedRecord,
    ExtractorBackend,
    PersonMention,
    QualityFlag,
    Role,
    RuleBackend,
    correct_year,
    extract_death_dates,
    extract_mentions,
    extract_record,
    get_backend,
)
from .geometry import Point, Rect, region_bounding_rect
from .inventory import (
    DuplicateSet,
    InventoryReport,
    build_inventory,
    clean,
    find_duplicates,
)
from .lexicon import (
    CorrectionResult,
    Lexicon,
    Verdict,
    append_mother_surname,
    build_lexicon,
    closest_known,
    levenshtein,
    load_lexicon,
    names_equal_any_order,
    normalize_token,
    post_correct_name,
    quality_gate,
)
from .linking import (
    BirthInterval,
    GroupVerdict,
    LinkGroup,
    PersonRow,
    birth_interval,
    build_link_groups,
    link_stats,
    load_gold_rows,
    validate_group,
)
from .metrics import (
    AccuracyReport,
    CerReport,
    EvalPair,
    cer,
    cer_report,
    date_accuracy,
    emit_report,
    name_accuracy,
)
from .pipeline import PipelineConfig, merge_corrections, run_pipeline
from .review import ReviewStore, serve_review
from .scans import (
    District,
    DistrictSchema,
    ScanId,
    district_schema,
    format_scan_filename,
    parse_scan_filename,
)

__version__ = "0.1.0"
