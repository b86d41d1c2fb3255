"""Extraction and evaluation of social-support / social-isolation labels
from clinical notes.

Two engines produce note-level labels over a nine-category taxonomy: a
transparent lexicon/rule-based matcher and a prompt-based client for a
choice-answer inference endpoint.  Evaluation compares either engine (or
two annotators) against gold labels derived from standoff annotations.
"""

__version__ = "0.1.0"

from .brat import (
    EntityMention,
    GoldDocument,
    Source,
    Temporality,
    effective_mentions,
    gold_document_labels,
    parse_standoff,
    write_standoff,
)
from .categories import (
    CoarseCategory,
    DocumentLabels,
    FineCategory,
    MAIN_CATEGORIES,
    SI_CATEGORIES,
    SS_CATEGORIES,
    derive_document_labels,
    side_of,
)
from .errors import (
    AlignmentError,
    AnswerError,
    ConfigError,
    FilenameParseError,
    LexiconError,
    NoEmbeddingCoverageError,
    SamplingError,
    StandoffError,
    ToolkitError,
)
from .evaluation import (
    EvalReport,
    IcdCodeSet,
    align_labels,
    cohens_kappa,
    iaa_report,
    icd_comparison,
    macro_report,
    score_binary,
)
from .lexicon import (
    EmbeddingTable,
    Lexicon,
    LexiconVector,
    expansion_round,
    lexicon_vector,
    load_lexicon,
    most_similar,
)
from .llm import (
    Answer,
    ChoiceAnswer,
    InferenceEndpoint,
    NoteClassification,
    PromptInstance,
    build_prompt,
    classify_note,
    normalize_answer,
    serialize_prompt,
    slice_note,
)
from .matcher import MatchConfig, match_note, rbs_document_labels, tokenize_with_offsets
from .notes import (
    Note,
    parse_note_filename,
    remove_templates,
    segment_sentences,
)
from .sampler import IndexRow, SampleResult, read_index_csv, stratified_sample

__all__ = [
    "__version__",
    "Answer",
    "AlignmentError",
    "AnswerError",
    "ChoiceAnswer",
    "CoarseCategory",
    "ConfigError",
    "DocumentLabels",
    "EmbeddingTable",
    "EntityMention",
    "EvalReport",
    "FilenameParseError",
    "FineCategory",
    "GoldDocument",
    "IcdCodeSet",
    "IndexRow",
    "InferenceEndpoint",
    "Lexicon",
    "LexiconError",
    "LexiconVector",
    "MAIN_CATEGORIES",
    "MatchConfig",
    "NoEmbeddingCoverageError",
    "Note",
    "NoteClassification",
    "PromptInstance",
    "SI_CATEGORIES",
    "SS_CATEGORIES",
    "SampleResult",
    "SamplingError",
    "Source",
    "StandoffError",
    "Temporality",
    "ToolkitError",
    "build_prompt",
    "classify_note",
    "align_labels",
    "cohens_kappa",
    "derive_document_labels",
    "effective_mentions",
    "expansion_round",
    "gold_document_labels",
    "iaa_report",
    "icd_comparison",
    "lexicon_vector",
    "load_lexicon",
    "macro_report",
    "match_note",
    "most_similar",
    "normalize_answer",
    "parse_note_filename",
    "parse_standoff",
    "rbs_document_labels",
    "read_index_csv",
    "remove_templates",
    "score_binary",
    "segment_sentences",
    "serialize_prompt",
    "side_of",
    "slice_note",
    "stratified_sample",
    "tokenize_with_offsets",
    "write_standoff",
]
