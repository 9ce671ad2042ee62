"""The four visual-frame rules plus identity rules.

Each rule asks the same question: does a per-second predicate hold on
enough *consecutive* seconds? Missing seconds (gaps in t_index) break a
run, because the run lengths are defined in wall-clock seconds.

Boundary semantics, per rule:

* riot        — violence strictly greater than the threshold, run >= riot_min_run
* confrontation — police confidence strictly greater than the threshold,
                  run >= confront_min_run, and (by default) not a debate video
* spectacle   — crowd count >= threshold (inclusive), run >= spectacle_min_run
* debate      — max face count over the video strictly below debate_max_people,
                and the largest head in frame strictly greater than the low
                area cut for a long run OR the high area cut for a short run
* identity    — presence: any frame with >= 1 Black face; group presence: any
                frame with >= black_group_min Black faces

``oracle_classify`` re-derives the same labels by enumerating every
contiguous window; it exists so the single-pass implementation can be
checked against something with no shared code path.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

from .datamodel import DataError, FrameLabelSet, FrameScore, RuleConfig


class RuleConfigError(DataError):
    """The configuration demands data the stream does not carry."""


@dataclass(frozen=True)
class RunQuery:
    """A per-frame predicate that must hold for ``min_run`` consecutive seconds."""

    predicate: Callable[[FrameScore], bool]
    min_run: int


def has_run(frames: Sequence[FrameScore], query: RunQuery) -> bool:
    """True iff some run of consecutively-timestamped frames all satisfying
    the predicate has length >= min_run. Single pass; empty stream is False."""
    if query.min_run < 1:
        raise ValueError(f"min_run must be >= 1 (got {query.min_run})")
    run = 0
    prev_t = None
    for frame in frames:
        if query.predicate(frame):
            contiguous = prev_t is not None and frame.t_index == prev_t + 1
            run = run + 1 if (contiguous and run > 0) else 1
            if run >= query.min_run:
                return True
        else:
            run = 0
        prev_t = frame.t_index
    return False


def largest_head_area(frame: FrameScore) -> float:
    """Area fraction of the most prominent head in the frame; 0 with no faces."""
    return max((face.head_area_fraction for face in frame.faces), default=0.0)


def classify_riot(frames: Sequence[FrameScore], cfg: RuleConfig) -> bool:
    return has_run(
        frames,
        RunQuery(lambda f: f.violence > cfg.riot_violence_threshold, cfg.riot_min_run),
    )


def classify_spectacle(frames: Sequence[FrameScore], cfg: RuleConfig) -> bool:
    return has_run(
        frames,
        RunQuery(lambda f: f.crowd_count >= cfg.spectacle_crowd_threshold, cfg.spectacle_min_run),
    )


def classify_debate(frames: Sequence[FrameScore], cfg: RuleConfig) -> bool:
    # The few-people gate uses face counts, not the crowd estimate: the rule
    # is about who is on screen talking, and it gates both area branches.
    max_people = max((len(f.faces) for f in frames), default=0)
    if max_people >= cfg.debate_max_people:
        return False
    low = RunQuery(lambda f: largest_head_area(f) > cfg.debate_area_low, cfg.debate_run_low)
    high = RunQuery(lambda f: largest_head_area(f) > cfg.debate_area_high, cfg.debate_run_high)
    return has_run(frames, low) or has_run(frames, high)


def _require_protest_scores(frames: Sequence[FrameScore]) -> None:
    for i, frame in enumerate(frames):
        if frame.protest_conf is None:
            raise RuleConfigError(
                "confront_requires_protest is set but the stream has no "
                f"protest_conf at frame {i}"
            )


def classify_confrontation(
    frames: Sequence[FrameScore], debate: bool, cfg: RuleConfig
) -> bool:
    """Sustained high police presence, minus videos already read as debate.

    ``debate`` must be the verdict already computed for this video; the rule
    consumes it rather than recomputing so callers can hold it fixed.
    """
    if cfg.confront_requires_protest:
        _require_protest_scores(frames)
    if cfg.confront_excludes_debate and debate:
        return False
    police = RunQuery(
        lambda f: f.police_conf > cfg.confront_police_threshold, cfg.confront_min_run
    )
    if not has_run(frames, police):
        return False
    if cfg.confront_requires_protest:
        protest = RunQuery(lambda f: f.protest_conf > 0.5, cfg.confront_min_run)
        if not has_run(frames, protest):
            return False
    return True


def classify_black_identity(
    frames: Sequence[FrameScore], cfg: RuleConfig
) -> tuple[bool, bool]:
    """(presence, group presence): any frame with one Black face; any frame
    with at least black_group_min of them."""
    presence = False
    group = False
    for frame in frames:
        black_faces = sum(1 for face in frame.faces if face.is_black)
        if black_faces >= 1:
            presence = True
        if black_faces >= cfg.black_group_min:
            group = True
            if presence:
                break
    return presence, group


def classify_video(frames: Sequence[FrameScore], cfg: RuleConfig) -> FrameLabelSet:
    """All six labels for one validated stream. Pure function of its inputs;
    debate is evaluated first because confrontation consumes its verdict."""
    debate = classify_debate(frames, cfg)
    confrontation = classify_confrontation(frames, debate, cfg)
    riot = classify_riot(frames, cfg)
    spectacle = classify_spectacle(frames, cfg)
    presence, group = classify_black_identity(frames, cfg)
    return FrameLabelSet(
        riot=riot,
        confrontation=confrontation,
        spectacle=spectacle,
        debate=debate,
        black_presence=presence,
        black_group_presence=group,
    )


def classify_batch(
    streams: Mapping[str, Sequence[FrameScore]],
    cfg: RuleConfig,
    workers: int | None = None,
) -> dict[str, FrameLabelSet]:
    """Classify many videos. Results are keyed by video id, so the output is
    identical no matter how the work is scheduled."""
    ids = list(streams)
    if workers is not None and workers > 1 and len(ids) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            verdicts = list(pool.map(lambda vid: classify_video(streams[vid], cfg), ids))
        return dict(zip(ids, verdicts))
    return {vid: classify_video(streams[vid], cfg) for vid in ids}


# --- brute-force oracle ----------------------------------------------------


def _window_satisfies(
    frames: Sequence[FrameScore],
    start: int,
    end: int,
    predicate: Callable[[FrameScore], bool],
    min_run: int,
) -> bool:
    # A window counts iff it is long enough, covers consecutive seconds,
    # and the predicate holds on every frame in it.
    if end - start + 1 < min_run:
        return False
    for k in range(start, end + 1):
        if k > start and frames[k].t_index != frames[k - 1].t_index + 1:
            return False
        if not predicate(frames[k]):
            return False
    return True


def _oracle_has_run(
    frames: Sequence[FrameScore], predicate: Callable[[FrameScore], bool], min_run: int
) -> bool:
    n = len(frames)
    for start in range(n):
        for end in range(start, n):
            if _window_satisfies(frames, start, end, predicate, min_run):
                return True
    return False


def oracle_classify(frames: Sequence[FrameScore], cfg: RuleConfig) -> FrameLabelSet:
    """Same contract as :func:`classify_video`, answered by checking every
    contiguous window of every length. Quadratic and proud of it."""
    max_people = max((len(f.faces) for f in frames), default=0)
    debate = max_people < cfg.debate_max_people and (
        _oracle_has_run(frames, lambda f: largest_head_area(f) > cfg.debate_area_low, cfg.debate_run_low)
        or _oracle_has_run(frames, lambda f: largest_head_area(f) > cfg.debate_area_high, cfg.debate_run_high)
    )

    if cfg.confront_requires_protest:
        _require_protest_scores(frames)
    confrontation = _oracle_has_run(
        frames, lambda f: f.police_conf > cfg.confront_police_threshold, cfg.confront_min_run
    )
    if cfg.confront_excludes_debate and debate:
        confrontation = False
    if confrontation and cfg.confront_requires_protest:
        confrontation = _oracle_has_run(frames, lambda f: f.protest_conf > 0.5, cfg.confront_min_run)

    riot = _oracle_has_run(
        frames, lambda f: f.violence > cfg.riot_violence_threshold, cfg.riot_min_run
    )
    spectacle = _oracle_has_run(
        frames, lambda f: f.crowd_count >= cfg.spectacle_crowd_threshold, cfg.spectacle_min_run
    )

    presence = any(any(face.is_black for face in f.faces) for f in frames)
    group = any(
        sum(1 for face in f.faces if face.is_black) >= cfg.black_group_min for f in frames
    )
    return FrameLabelSet(
        riot=riot,
        confrontation=confrontation,
        spectacle=spectacle,
        debate=debate,
        black_presence=presence,
        black_group_presence=group,
    )
