"""Visual-frame classification for short-video corpora.

Turns per-second detector score streams into video-level frame labels with
explicit threshold/run-length rules, calibrates those rules against
hand-coded labels, and reports the corpus statistics (frequencies, Welch
t-tests, chi-square crosstabs with residual flags, Cohen's kappa).
"""

from .calibrate import (
    AccuracyReport,
    GridSpec,
    LabeledVideo,
    cohen_kappa,
    default_grid,
    evaluate,
    grid_search,
    split,
    stratified_sample,
)
from .datamodel import (
    ChiSquareResult,
    DataError,
    FaceObservation,
    FrameLabelSet,
    FrameScore,
    GroupSummary,
    KappaResult,
    RuleConfig,
    TTestResult,
    ValidationError,
    VideoMeta,
    validate_rule_config,
    validate_score_stream,
    validate_video_meta,
)
from .estimator import FrameClassifier
from .ingest import (
    CorpusFilter,
    apply_filter,
    dedupe,
    load_corpus,
    read_score_stream,
    sample_frames,
    write_score_stream,
)
from .rules import (
    RunQuery,
    classify_batch,
    classify_video,
    has_run,
    oracle_classify,
)
from .stats import (
    LengthBin,
    UserTier,
    chi_square_cdf,
    chi_square_independence,
    frequency_table,
    length_bin,
    stars,
    t_cdf,
    tier_of,
    welch_t_raw,
    welch_t_summary,
)

__version__ = "0.1.0"

__all__ = [
    "AccuracyReport",
    "ChiSquareResult",
    "CorpusFilter",
    "DataError",
    "FaceObservation",
    "FrameClassifier",
    "FrameLabelSet",
    "FrameScore",
    "GridSpec",
    "GroupSummary",
    "KappaResult",
    "LabeledVideo",
    "LengthBin",
    "RuleConfig",
    "RunQuery",
    "TTestResult",
    "UserTier",
    "ValidationError",
    "VideoMeta",
    "apply_filter",
    "chi_square_cdf",
    "chi_square_independence",
    "classify_batch",
    "classify_video",
    "cohen_kappa",
    "dedupe",
    "default_grid",
    "evaluate",
    "frequency_table",
    "grid_search",
    "has_run",
    "length_bin",
    "load_corpus",
    "oracle_classify",
    "read_score_stream",
    "sample_frames",
    "split",
    "stars",
    "stratified_sample",
    "t_cdf",
    "tier_of",
    "validate_rule_config",
    "validate_score_stream",
    "validate_video_meta",
    "welch_t_raw",
    "welch_t_summary",
    "write_score_stream",
]
