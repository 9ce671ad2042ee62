"""Shared domain types and their validation.

Every type here is an immutable value object: once validated it can be
shared freely between threads or worker processes. Serialization lives in
:mod:`protestframes.ingest`; this module only defines semantics.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from datetime import date


class DataError(ValueError):
    """Base class for every rejected-input condition in the package."""


class ValidationError(DataError):
    """A record or stream violated a domain invariant.

    The message always names the offending field (and frame index, for
    streams) so callers can aggregate or surface it directly.
    """


@dataclass(frozen=True)
class VideoMeta:
    """Identity, source and engagement metadata for one video."""

    video_id: str
    author_id: str
    verified: bool
    follower_count: int
    duration_s: int
    play_count: int
    like_count: int
    comment_count: int
    share_count: int
    hashtags: frozenset[str] = field(default_factory=frozenset)
    posted_at: date = date(1970, 1, 1)


_COUNT_FIELDS = ("follower_count", "play_count", "like_count", "comment_count", "share_count")


def validate_video_meta(record: VideoMeta) -> VideoMeta:
    """Return ``record`` unchanged iff all its invariants hold.

    Raises:
        ValidationError: empty video_id, duration_s < 1, a negative count,
            or a hashtag that is not lowercase. The message names the field.
    """
    if not record.video_id:
        raise ValidationError("video_id must be nonempty")
    if record.duration_s < 1:
        raise ValidationError(f"duration_s < 1 (got {record.duration_s})")
    for name in _COUNT_FIELDS:
        value = getattr(record, name)
        if value < 0:
            raise ValidationError(f"negative count: {name} = {value}")
    for tag in record.hashtags:
        if tag != tag.lower():
            raise ValidationError(f"hashtags must be lowercase (got {tag!r})")
    return record


@dataclass(frozen=True)
class FaceObservation:
    """One detected face: share of image area its head box covers, plus the
    detector's Black/non-Black identity label."""

    head_area_fraction: float
    is_black: bool


@dataclass(frozen=True)
class FrameScore:
    """Detector outputs for the image sampled at second ``t_index``."""

    t_index: int
    violence: float
    police_conf: float
    protest_conf: float | None
    crowd_count: int
    faces: tuple[FaceObservation, ...] = ()


def _check_unit_interval(value: float, what: str, frame: int) -> None:
    if not 0.0 <= value <= 1.0:
        raise ValidationError(f"confidence out of range at frame {frame}: {what} = {value}")


def validate_score_stream(frames: list[FrameScore]) -> list[FrameScore]:
    """Return ``frames`` unchanged iff it is a well-formed score stream.

    Well-formed means t_index is nonnegative and strictly increasing, every
    confidence lies in [0, 1], crowd counts are nonnegative and every face's
    head_area_fraction lies in [0, 1]. Errors name the frame index.
    """
    prev = -1
    for i, f in enumerate(frames):
        if f.t_index < 0:
            raise ValidationError(f"t_index negative at frame {i}: {f.t_index}")
        if f.t_index <= prev:
            raise ValidationError(
                f"t_index not strictly increasing at frame {i}: {f.t_index} after {prev}"
            )
        prev = f.t_index
        _check_unit_interval(f.violence, "violence", i)
        _check_unit_interval(f.police_conf, "police_conf", i)
        if f.protest_conf is not None:
            _check_unit_interval(f.protest_conf, "protest_conf", i)
        if f.crowd_count < 0:
            raise ValidationError(f"negative count: crowd_count at frame {i}")
        for face in f.faces:
            if not 0.0 <= face.head_area_fraction <= 1.0:
                raise ValidationError(f"head_area_fraction out of range at frame {i}")
    return frames


@dataclass(frozen=True)
class FrameLabelSet:
    """Video-level classification: the four visual frames plus identity flags."""

    riot: bool = False
    confrontation: bool = False
    spectacle: bool = False
    debate: bool = False
    black_presence: bool = False
    black_group_presence: bool = False


def validate_label_set(labels: FrameLabelSet) -> FrameLabelSet:
    """Check the one internal consistency rule: group presence implies presence."""
    if labels.black_group_presence and not labels.black_presence:
        raise ValidationError("black_group_presence requires black_presence")
    return labels


@dataclass(frozen=True)
class RuleConfig:
    """Every threshold and minimum-run-length parameter of the four rules.

    Defaults are the fine-tuned operating point. Boundary semantics are owned
    by :mod:`protestframes.rules`; this type just carries the numbers.
    """

    riot_violence_threshold: float = 0.5
    riot_min_run: int = 3
    confront_police_threshold: float = 0.85
    confront_min_run: int = 4
    confront_excludes_debate: bool = True
    confront_requires_protest: bool = False
    spectacle_crowd_threshold: int = 150
    spectacle_min_run: int = 3
    debate_max_people: int = 5
    debate_area_low: float = 0.03
    debate_run_low: int = 6
    debate_area_high: float = 0.20
    debate_run_high: int = 3
    black_group_min: int = 3


_UNIT_FIELDS = (
    "riot_violence_threshold",
    "confront_police_threshold",
    "debate_area_low",
    "debate_area_high",
)
_RUN_FIELDS = (
    "riot_min_run",
    "confront_min_run",
    "spectacle_min_run",
    "debate_run_low",
    "debate_run_high",
)
_COUNT_CFG_FIELDS = ("spectacle_crowd_threshold", "debate_max_people", "black_group_min")


def validate_rule_config(cfg: RuleConfig) -> RuleConfig:
    """Return ``cfg`` iff every parameter is in its valid range."""
    for name in _UNIT_FIELDS:
        value = getattr(cfg, name)
        if not 0.0 <= value <= 1.0:
            raise ValidationError(f"{name} must be in [0, 1] (got {value})")
    for name in _RUN_FIELDS + _COUNT_CFG_FIELDS:
        value = getattr(cfg, name)
        if value < 1:
            raise ValidationError(f"{name} must be >= 1 (got {value})")
    return cfg


def rule_config_fields() -> tuple[str, ...]:
    """Names of all tunable/serializable RuleConfig parameters, in order."""
    return tuple(f.name for f in fields(RuleConfig))


@dataclass(frozen=True)
class GroupSummary:
    """Published summary statistics for one comparison group."""

    n: int
    mean: float
    sd: float


@dataclass(frozen=True)
class TTestResult:
    t: float
    df: float
    p: float
    stars: str  # "", "*", "**" or "***"


@dataclass(frozen=True)
class CellStat:
    """One contingency cell with its adjusted standardized residual."""

    observed: int
    expected: float
    adj_residual: float
    flag: str  # "none", "below" or "above"


@dataclass(frozen=True)
class ChiSquareResult:
    chi2: float
    df: int
    p: float
    cells: tuple[tuple[CellStat, ...], ...]


@dataclass(frozen=True)
class KappaResult:
    kappa: float
    observed_agreement: float
    expected_agreement: float
