"""Corpus file formats and corpus-shaping operations.

All corpus files are line-delimited JSON, one record per line:

* metadata   — ``video_id, author_id, verified, follower_count, duration_s,
  play_count, like_count, comment_count, share_count, hashtags (array),
  posted_at (ISO-8601 date)``
* score stream — ``video_id, t_index, violence, police_conf,
  protest_conf (nullable), crowd_count, faces (array of
  {head_area_fraction, is_black})``
* labels     — ``video_id`` plus the six boolean labels

Frame images extracted from raw video land at
``<out_dir>/<video_id>/<t_index padded to 5 digits>.jpg``.
"""

from __future__ import annotations

import json
import logging
import math
import os
import subprocess
import tempfile
from dataclasses import dataclass
from datetime import date
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .datamodel import (
    DataError,
    FaceObservation,
    FrameLabelSet,
    FrameScore,
    RuleConfig,
    ValidationError,
    VideoMeta,
    rule_config_fields,
    validate_label_set,
    validate_rule_config,
    validate_score_stream,
    validate_video_meta,
)

log = logging.getLogger(__name__)


class ParseError(DataError):
    """A line could not be decoded; the message names the line number."""


class ToolError(DataError):
    """The external frame-extraction tool failed or is missing."""


# --- low-level line handling -------------------------------------------------


def _iter_json_lines(path: Path) -> Iterable[tuple[int, dict]]:
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}: line {lineno}: invalid JSON: {exc}") from exc
            if not isinstance(obj, dict):
                raise ParseError(f"{path}: line {lineno}: expected an object")
            yield lineno, obj


def _field(obj: dict, key: str, kind, where: str):
    if key not in obj:
        raise ValidationError(f"{where}: missing field {key}")
    value = obj[key]
    if kind is int:
        # bool is an int subclass; reject it explicitly
        if isinstance(value, bool) or not isinstance(value, int):
            raise ValidationError(f"{where}: field {key} must be an integer")
    elif kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ValidationError(f"{where}: field {key} must be a number")
        value = float(value)
    elif not isinstance(value, kind):
        raise ValidationError(f"{where}: field {key} must be {kind.__name__}")
    return value


def write_text_atomic(path: Path, text: str) -> None:
    """Write via a temp file in the same directory, then rename into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


# --- video metadata ----------------------------------------------------------


def meta_to_dict(meta: VideoMeta) -> dict:
    return {
        "video_id": meta.video_id,
        "author_id": meta.author_id,
        "verified": meta.verified,
        "follower_count": meta.follower_count,
        "duration_s": meta.duration_s,
        "play_count": meta.play_count,
        "like_count": meta.like_count,
        "comment_count": meta.comment_count,
        "share_count": meta.share_count,
        "hashtags": sorted(meta.hashtags),
        "posted_at": meta.posted_at.isoformat(),
    }


def meta_from_dict(obj: dict, where: str = "record") -> VideoMeta:
    hashtags = _field(obj, "hashtags", list, where)
    for tag in hashtags:
        if not isinstance(tag, str):
            raise ValidationError(f"{where}: field hashtags must contain strings")
    raw_date = _field(obj, "posted_at", str, where)
    try:
        posted = date.fromisoformat(raw_date)
    except ValueError as exc:
        raise ValidationError(f"{where}: field posted_at is not an ISO date: {raw_date!r}") from exc
    meta = VideoMeta(
        video_id=_field(obj, "video_id", str, where),
        author_id=_field(obj, "author_id", str, where),
        verified=_field(obj, "verified", bool, where),
        follower_count=_field(obj, "follower_count", int, where),
        duration_s=_field(obj, "duration_s", int, where),
        play_count=_field(obj, "play_count", int, where),
        like_count=_field(obj, "like_count", int, where),
        comment_count=_field(obj, "comment_count", int, where),
        share_count=_field(obj, "share_count", int, where),
        hashtags=frozenset(tag.lower() for tag in hashtags),
        posted_at=posted,
    )
    return validate_video_meta(meta)


def load_corpus(meta_path: Path) -> list[VideoMeta]:
    """Parse and validate a metadata file, in file order.

    JSON syntax problems fail fast naming the line; records that parse but
    violate invariants are aggregated into one error with per-line detail.
    """
    records: list[VideoMeta] = []
    bad: list[str] = []
    for lineno, obj in _iter_json_lines(Path(meta_path)):
        try:
            records.append(meta_from_dict(obj, where=f"line {lineno}"))
        except ValidationError as exc:
            bad.append(str(exc))
    if bad:
        shown = "; ".join(bad[:10])
        more = "" if len(bad) <= 10 else f" (and {len(bad) - 10} more)"
        raise ValidationError(f"{meta_path}: {len(bad)} invalid record(s): {shown}{more}")
    return records


def write_corpus(meta_path: Path, records: Sequence[VideoMeta]) -> None:
    lines = [json.dumps(meta_to_dict(m)) for m in records]
    write_text_atomic(Path(meta_path), "".join(line + "\n" for line in lines))


def dedupe(records: Sequence[VideoMeta]) -> list[VideoMeta]:
    """Keep the first occurrence of each video_id, preserving order."""
    seen: set[str] = set()
    out: list[VideoMeta] = []
    for record in records:
        if record.video_id not in seen:
            seen.add(record.video_id)
            out.append(record)
    return out


@dataclass(frozen=True)
class CorpusFilter:
    """Date window, hashtag membership, and optional per-hashtag top-N cap."""

    date_from: date
    date_to: date
    hashtags_any: frozenset[str] = frozenset()
    top_n_per_hashtag: int | None = None


def apply_filter(records: Sequence[VideoMeta], flt: CorpusFilter) -> list[VideoMeta]:
    """Records inside the window, matching any listed hashtag, capped to the
    top N by play count per hashtag (ties broken by ascending video_id). A
    video that ranks under several hashtags is kept once; input order is
    otherwise preserved."""
    if flt.date_from > flt.date_to:
        raise DataError(f"date_from {flt.date_from} is after date_to {flt.date_to}")
    if flt.top_n_per_hashtag is not None and flt.top_n_per_hashtag < 1:
        raise DataError(f"top_n_per_hashtag must be >= 1 (got {flt.top_n_per_hashtag})")

    survivors = [
        r
        for r in records
        if flt.date_from <= r.posted_at <= flt.date_to
        and (not flt.hashtags_any or r.hashtags & flt.hashtags_any)
    ]
    if flt.top_n_per_hashtag is None:
        return survivors

    universe = flt.hashtags_any or frozenset(tag for r in survivors for tag in r.hashtags)
    kept: set[str] = set()
    for tag in sorted(universe):
        ranked = sorted(
            (r for r in survivors if tag in r.hashtags),
            key=lambda r: (-r.play_count, r.video_id),
        )
        kept.update(r.video_id for r in ranked[: flt.top_n_per_hashtag])
    return [r for r in survivors if r.video_id in kept]


# --- score streams -----------------------------------------------------------


def frame_to_dict(video_id: str, frame: FrameScore) -> dict:
    return {
        "video_id": video_id,
        "t_index": frame.t_index,
        "violence": frame.violence,
        "police_conf": frame.police_conf,
        "protest_conf": frame.protest_conf,
        "crowd_count": frame.crowd_count,
        "faces": [
            {"head_area_fraction": face.head_area_fraction, "is_black": face.is_black}
            for face in frame.faces
        ],
    }


def frame_from_dict(obj: dict, where: str = "record") -> tuple[str, FrameScore]:
    raw_faces = _field(obj, "faces", list, where)
    faces = []
    for k, raw in enumerate(raw_faces):
        if not isinstance(raw, dict):
            raise ValidationError(f"{where}: field faces[{k}] must be an object")
        faces.append(
            FaceObservation(
                head_area_fraction=_field(raw, "head_area_fraction", float, f"{where} faces[{k}]"),
                is_black=_field(raw, "is_black", bool, f"{where} faces[{k}]"),
            )
        )
    if "protest_conf" not in obj:
        raise ValidationError(f"{where}: missing field protest_conf")
    protest = obj["protest_conf"]
    if protest is not None:
        protest = _field(obj, "protest_conf", float, where)
    frame = FrameScore(
        t_index=_field(obj, "t_index", int, where),
        violence=_field(obj, "violence", float, where),
        police_conf=_field(obj, "police_conf", float, where),
        protest_conf=protest,
        crowd_count=_field(obj, "crowd_count", int, where),
        faces=tuple(faces),
    )
    return _field(obj, "video_id", str, where), frame


def read_score_stream(scores_path: Path) -> dict[str, list[FrameScore]]:
    """Streams grouped by video_id (first-appearance order), each validated."""
    streams: dict[str, list[FrameScore]] = {}
    for lineno, obj in _iter_json_lines(Path(scores_path)):
        video_id, frame = frame_from_dict(obj, where=f"line {lineno}")
        streams.setdefault(video_id, []).append(frame)
    for video_id, frames in streams.items():
        try:
            validate_score_stream(frames)
        except ValidationError as exc:
            raise ValidationError(f"{scores_path}: video {video_id}: {exc}") from exc
    return streams


def write_score_stream(scores_path: Path, streams: Mapping[str, Sequence[FrameScore]]) -> None:
    lines = []
    for video_id, frames in streams.items():
        for frame in frames:
            lines.append(json.dumps(frame_to_dict(video_id, frame)))
    write_text_atomic(Path(scores_path), "".join(line + "\n" for line in lines))


# --- label files -------------------------------------------------------------

_LABEL_FIELDS = (
    "riot",
    "confrontation",
    "spectacle",
    "debate",
    "black_presence",
    "black_group_presence",
)


def labels_to_line(video_id: str, labels: FrameLabelSet) -> str:
    obj = {"video_id": video_id}
    obj.update({name: getattr(labels, name) for name in _LABEL_FIELDS})
    return json.dumps(obj)


def read_labels(labels_path: Path) -> dict[str, FrameLabelSet]:
    out: dict[str, FrameLabelSet] = {}
    for lineno, obj in _iter_json_lines(Path(labels_path)):
        where = f"line {lineno}"
        video_id = _field(obj, "video_id", str, where)
        labels = FrameLabelSet(**{name: _field(obj, name, bool, where) for name in _LABEL_FIELDS})
        out[video_id] = validate_label_set(labels)
    return out


def write_labels(labels_path: Path, labels: Mapping[str, FrameLabelSet]) -> None:
    lines = [labels_to_line(vid, lab) for vid, lab in labels.items()]
    write_text_atomic(Path(labels_path), "".join(line + "\n" for line in lines))


# --- rule configuration ------------------------------------------------------


def load_rule_config(config_path: Path) -> RuleConfig:
    """Flat key/value JSON; every key optional, unknown keys rejected."""
    path = Path(config_path)
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise ParseError(f"{path}: expected a flat object")
    known = set(rule_config_fields())
    unknown = sorted(set(obj) - known)
    if unknown:
        raise DataError(f"{path}: unknown config key(s): {', '.join(unknown)}")
    return validate_rule_config(RuleConfig(**obj))


def dump_rule_config(config_path: Path, cfg: RuleConfig) -> None:
    obj = {name: getattr(cfg, name) for name in rule_config_fields()}
    write_text_atomic(Path(config_path), json.dumps(obj, indent=2) + "\n")


# --- frame extraction --------------------------------------------------------


def _run_tool(argv: list[str]) -> subprocess.CompletedProcess:
    try:
        return subprocess.run(argv, capture_output=True, text=True)
    except FileNotFoundError as exc:
        raise ToolError(f"frame-extraction tool not found: {argv[0]}") from exc


def probe_duration(video_path: Path, ffprobe: str = "ffprobe") -> float:
    argv = [
        ffprobe,
        "-v",
        "error",
        "-show_entries",
        "format=duration",
        "-of",
        "default=noprint_wrappers=1:nokey=1",
        str(video_path),
    ]
    proc = _run_tool(argv)
    if proc.returncode != 0:
        raise ToolError(f"{ffprobe} failed on {video_path}: {proc.stderr.strip()}")
    try:
        return float(proc.stdout.strip())
    except ValueError as exc:
        raise ToolError(f"{ffprobe} returned no duration for {video_path}") from exc


def sample_frames(
    video_path: Path,
    out_dir: Path,
    ffmpeg: str = "ffmpeg",
    ffprobe: str = "ffprobe",
) -> list[Path]:
    """Extract one JPEG per whole second of video into
    ``out_dir/<stem>/00000.jpg ...``; never resizes.

    Returns the image paths in t_index order. A clip shorter than one second
    yields no images and a warning.
    """
    video_path = Path(video_path)
    duration = probe_duration(video_path, ffprobe=ffprobe)
    count = math.floor(duration)
    if count < 1:
        log.warning("%s is shorter than one second (%.3fs); no frames sampled", video_path, duration)
        return []
    dest = Path(out_dir) / video_path.stem
    dest.mkdir(parents=True, exist_ok=True)
    argv = [
        ffmpeg,
        "-v",
        "error",
        "-y",
        "-i",
        str(video_path),
        "-vf",
        "fps=1",
        "-start_number",
        "0",
        "-frames:v",
        str(count),
        str(dest / "%05d.jpg"),
    ]
    proc = _run_tool(argv)
    if proc.returncode != 0:
        raise ToolError(f"{ffmpeg} failed on {video_path}: {proc.stderr.strip()}")
    produced = sorted(dest.glob("*.jpg"))
    if len(produced) != count:
        log.warning(
            "%s: expected %d frames, tool produced %d", video_path, count, len(produced)
        )
    return produced
