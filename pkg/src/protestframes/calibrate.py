"""Fitting rule parameters to hand-coded labels.

The five coded elements are riot, confrontation, spectacle, debate and
black_identity. Each rule's parameters only influence its own label, so the
grid search tunes element by element; the one ordering constraint is that
confrontation is tuned after debate, because its rule consumes the debate
verdict.
"""

from __future__ import annotations

import itertools
import json
import logging
import random
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping, Sequence

from .datamodel import (
    DataError,
    FrameLabelSet,
    FrameScore,
    KappaResult,
    RuleConfig,
    validate_rule_config,
)
from .ingest import ParseError, _field, _iter_json_lines, write_text_atomic
from .rules import (
    classify_black_identity,
    classify_confrontation,
    classify_debate,
    classify_riot,
    classify_spectacle,
    classify_video,
)

log = logging.getLogger(__name__)

ELEMENTS = ("riot", "confrontation", "spectacle", "debate", "black_identity")

# Which RuleConfig fields each element's rule reads. Tuning order matters only
# for confrontation, which must come after debate.
PARAM_GROUPS: dict[str, tuple[str, ...]] = {
    "riot": ("riot_violence_threshold", "riot_min_run"),
    "spectacle": ("spectacle_crowd_threshold", "spectacle_min_run"),
    "debate": (
        "debate_max_people",
        "debate_area_low",
        "debate_run_low",
        "debate_area_high",
        "debate_run_high",
    ),
    "black_identity": ("black_group_min",),
    "confrontation": ("confront_police_threshold", "confront_min_run"),
}

_TUNE_ORDER = ("debate", "riot", "spectacle", "black_identity", "confrontation")


class CalibrationError(DataError):
    """Calibration was asked for something the data cannot support."""


@dataclass(frozen=True)
class LabeledVideo:
    """A hand-coded video: its id and the coders' gold labels."""

    video_id: str
    gold: FrameLabelSet


def gold_value(labels: FrameLabelSet, element: str) -> bool:
    """The boolean a coded element refers to (black_identity means presence)."""
    if element == "black_identity":
        return labels.black_presence
    if element in ("riot", "confrontation", "spectacle", "debate"):
        return getattr(labels, element)
    raise CalibrationError(f"unknown element: {element}")


def predicted_value(
    element: str, frames: Sequence[FrameScore], cfg: RuleConfig
) -> bool:
    """One element's rule verdict, computing only what that rule needs."""
    if element == "riot":
        return classify_riot(frames, cfg)
    if element == "spectacle":
        return classify_spectacle(frames, cfg)
    if element == "debate":
        return classify_debate(frames, cfg)
    if element == "confrontation":
        return classify_confrontation(frames, classify_debate(frames, cfg), cfg)
    if element == "black_identity":
        return classify_black_identity(frames, cfg)[0]
    raise CalibrationError(f"unknown element: {element}")


@dataclass(frozen=True)
class AccuracyReport:
    """Per-element accuracy plus their unweighted mean."""

    per_element: Mapping[str, float]
    overall: float
    n: int
    balanced: bool = False


def _element_accuracy(gold: list[bool], pred: list[bool], balanced: bool) -> float:
    if not balanced:
        return sum(1 for g, p in zip(gold, pred) if g == p) / len(gold)
    pos = [p for g, p in zip(gold, pred) if g]
    neg = [p for g, p in zip(gold, pred) if not g]
    rates = []
    if pos:
        rates.append(sum(1 for p in pos if p) / len(pos))
    if neg:
        rates.append(sum(1 for p in neg if not p) / len(neg))
    return sum(rates) / len(rates)


def overall_accuracy(per_element: Mapping[str, float]) -> float:
    """Unweighted arithmetic mean of the five per-element accuracies."""
    return sum(per_element[e] for e in ELEMENTS) / len(ELEMENTS)


def evaluate(
    cfg: RuleConfig,
    labeled: Sequence[LabeledVideo],
    streams: Mapping[str, Sequence[FrameScore]],
    balanced: bool = False,
) -> AccuracyReport:
    """Accuracy of ``cfg`` against gold labels, per element and overall.

    Plain accuracy by default; ``balanced=True`` weighs positive and negative
    gold classes equally instead.
    """
    if not labeled:
        raise CalibrationError("no labeled videos to evaluate")
    for video in labeled:
        if video.video_id not in streams:
            raise CalibrationError(f"no score stream for labeled video {video.video_id}")
    predictions = {v.video_id: classify_video(streams[v.video_id], cfg) for v in labeled}
    per_element: dict[str, float] = {}
    for element in ELEMENTS:
        gold = [gold_value(v.gold, element) for v in labeled]
        pred = [gold_value(predictions[v.video_id], element) for v in labeled]
        per_element[element] = _element_accuracy(gold, pred, balanced)
    return AccuracyReport(
        per_element=per_element,
        overall=overall_accuracy(per_element),
        n=len(labeled),
        balanced=balanced,
    )


def split(
    labeled: Sequence[LabeledVideo], n_train: int, seed: int
) -> tuple[list[LabeledVideo], list[LabeledVideo]]:
    """Deterministic shuffle-split into (train, test); disjoint and exhaustive."""
    if n_train < 0:
        raise CalibrationError(f"n_train must be >= 0 (got {n_train})")
    if n_train >= len(labeled):
        raise CalibrationError(
            f"n_train ({n_train}) must be smaller than the labeled set ({len(labeled)})"
        )
    order = list(labeled)
    random.Random(seed).shuffle(order)
    return order[:n_train], order[n_train:]


def stratified_sample(
    corpus_ids: Sequence[str],
    provisional_labels: Mapping[str, FrameLabelSet],
    k: int,
    min_prevalence: float,
    seed: int = 0,
) -> list[str]:
    """k video ids in which every coded element appears in more than
    ``min_prevalence * k`` of the selected videos.

    Stratifies on provisional (default-config) labels; deterministic for a
    given seed. Raises naming the scarce element when the corpus cannot
    satisfy a constraint.
    """
    if k > len(corpus_ids):
        raise CalibrationError(f"k ({k}) exceeds corpus size ({len(corpus_ids)})")
    if not 0.0 <= min_prevalence < 1.0:
        raise CalibrationError(f"min_prevalence must be in [0, 1) (got {min_prevalence})")
    for vid in corpus_ids:
        if vid not in provisional_labels:
            raise CalibrationError(f"no provisional labels for video {vid}")

    rng = random.Random(seed)
    need = int(min_prevalence * k) + 1  # strictly more than the floor
    chosen: list[str] = []
    chosen_set: set[str] = set()

    def count(element: str) -> int:
        return sum(1 for vid in chosen if gold_value(provisional_labels[vid], element))

    for element in ELEMENTS:
        have = count(element)
        if have >= need:
            continue
        pool = [
            vid
            for vid in corpus_ids
            if vid not in chosen_set and gold_value(provisional_labels[vid], element)
        ]
        if have + len(pool) < need:
            raise CalibrationError(
                f"cannot reach {need} videos with {element}: corpus has only "
                f"{have + len(pool)} positives"
            )
        picks = rng.sample(pool, need - have)
        chosen.extend(picks)
        chosen_set.update(picks)

    if len(chosen) > k:
        raise CalibrationError(
            f"element constraints require {len(chosen)} videos but k = {k}"
        )
    rest = [vid for vid in corpus_ids if vid not in chosen_set]
    filler = rng.sample(rest, k - len(chosen))
    return chosen + filler


@dataclass(frozen=True)
class GridSpec:
    """Candidate values per RuleConfig parameter, and which elements to tune."""

    values: Mapping[str, tuple] = field(default_factory=dict)
    target_elements: tuple[str, ...] = ("riot", "confrontation", "spectacle", "debate")

    def candidates(self, param: str, base: RuleConfig) -> tuple:
        got = self.values.get(param)
        return got if got else (getattr(base, param),)


def default_grid() -> GridSpec:
    """A sensible search space when none is given: confidence cuts in 0.05
    steps, run lengths 1..8, a handful of crowd sizes and head-area cuts."""
    conf = tuple(round(0.05 * i, 2) for i in range(1, 20))
    runs = tuple(range(1, 9))
    return GridSpec(
        values={
            "riot_violence_threshold": conf,
            "riot_min_run": runs,
            "confront_police_threshold": conf,
            "confront_min_run": runs,
            "spectacle_crowd_threshold": (50, 100, 150, 200, 300),
            "spectacle_min_run": runs,
            "debate_max_people": (3, 4, 5, 6, 8),
            "debate_area_low": (0.01, 0.02, 0.03, 0.05, 0.10),
            "debate_run_low": runs,
            "debate_area_high": (0.10, 0.15, 0.20, 0.25, 0.30),
            "debate_run_high": runs,
        }
    )


def load_grid_spec(grid_path: Path) -> GridSpec:
    """Grid file: flat JSON of parameter -> list of candidate values, plus an
    optional ``target_elements`` list."""
    path = Path(grid_path)
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise ParseError(f"{path}: expected a flat object")
    targets = obj.pop("target_elements", list(GridSpec().target_elements))
    if not isinstance(targets, list) or not all(t in ELEMENTS for t in targets):
        raise DataError(f"{path}: target_elements must be a list drawn from {ELEMENTS}")
    tunable = {p for group in PARAM_GROUPS.values() for p in group}
    unknown = sorted(set(obj) - tunable)
    if unknown:
        raise DataError(f"{path}: unknown grid key(s): {', '.join(unknown)}")
    values = {}
    for key, raw in obj.items():
        if not isinstance(raw, list) or not raw:
            raise DataError(f"{path}: grid key {key} must map to a nonempty list")
        values[key] = tuple(raw)
    spec = GridSpec(values=values, target_elements=tuple(targets))
    # every candidate must itself be a legal config value
    base = RuleConfig()
    for key, cands in spec.values.items():
        for value in cands:
            validate_rule_config(replace(base, **{key: value}))
    return spec


def grid_search(
    train: Sequence[LabeledVideo],
    streams: Mapping[str, Sequence[FrameScore]],
    grid: GridSpec,
    base: RuleConfig | None = None,
) -> tuple[RuleConfig, AccuracyReport]:
    """Exhaustive per-element search for the most accurate parameters.

    Ties go first to the shipped default parameter values, then to the
    lexicographically smallest candidate tuple, so results are reproducible.
    Returns the winning config and its train-set accuracy report.
    """
    if not train:
        raise CalibrationError("empty training set")
    if not grid.target_elements:
        raise CalibrationError("grid has no target elements")
    for video in train:
        if video.video_id not in streams:
            raise CalibrationError(f"no score stream for labeled video {video.video_id}")

    defaults = RuleConfig()
    current = base if base is not None else defaults
    for element in _TUNE_ORDER:
        if element not in grid.target_elements:
            continue
        gold = [gold_value(v.gold, element) for v in train]
        if len(set(gold)) == 1:
            log.warning("element %s has no variation in gold labels", element)
        params = PARAM_GROUPS[element]
        default_point = tuple(getattr(defaults, p) for p in params)
        candidate_lists = [grid.candidates(p, current) for p in params]
        best_point = None
        best_key = None
        for point in itertools.product(*candidate_lists):
            trial = replace(current, **dict(zip(params, point)))
            pred = [predicted_value(element, streams[v.video_id], trial) for v in train]
            accuracy = sum(1 for g, p in zip(gold, pred) if g == p) / len(train)
            key = (-accuracy, 0 if point == default_point else 1, point)
            if best_key is None or key < best_key:
                best_key = key
                best_point = point
        current = replace(current, **dict(zip(PARAM_GROUPS[element], best_point)))

    return current, evaluate(current, train, streams)


# --- hand-coded label files ---------------------------------------------------

_GOLD_FIELDS = ("riot", "confrontation", "spectacle", "debate", "black_identity")


def read_labeled(labeled_path: Path) -> list[LabeledVideo]:
    """Gold-label file: one object per line with video_id and the five
    element booleans."""
    out: list[LabeledVideo] = []
    for lineno, obj in _iter_json_lines(Path(labeled_path)):
        where = f"line {lineno}"
        values = {name: _field(obj, name, bool, where) for name in _GOLD_FIELDS}
        gold = FrameLabelSet(
            riot=values["riot"],
            confrontation=values["confrontation"],
            spectacle=values["spectacle"],
            debate=values["debate"],
            black_presence=values["black_identity"],
            black_group_presence=False,
        )
        out.append(LabeledVideo(video_id=_field(obj, "video_id", str, where), gold=gold))
    return out


def write_labeled(labeled_path: Path, labeled: Sequence[LabeledVideo]) -> None:
    lines = []
    for video in labeled:
        obj = {"video_id": video.video_id}
        for name in _GOLD_FIELDS:
            obj[name] = gold_value(video.gold, name)
        lines.append(json.dumps(obj))
    write_text_atomic(Path(labeled_path), "".join(line + "\n" for line in lines))


# --- intercoder reliability ----------------------------------------------------


def cohen_kappa(coder_a: Sequence[bool], coder_b: Sequence[bool]) -> KappaResult:
    """Cohen's kappa for two coders' binary judgements.

    kappa = (p_o - p_e) / (1 - p_e), with chance agreement p_e from each
    coder's marginal label frequencies.
    """
    if len(coder_a) != len(coder_b):
        raise CalibrationError(
            f"coders judged different numbers of items ({len(coder_a)} vs {len(coder_b)})"
        )
    n = len(coder_a)
    if n < 1:
        raise CalibrationError("need at least one judged item")
    agree = sum(1 for a, b in zip(coder_a, coder_b) if a == b)
    a_true = sum(1 for a in coder_a if a)
    b_true = sum(1 for b in coder_b if b)
    p_o = agree / n
    p_e = (a_true * b_true + (n - a_true) * (n - b_true)) / (n * n)
    if p_e == 1.0:
        if p_o == 1.0:
            return KappaResult(kappa=1.0, observed_agreement=1.0, expected_agreement=1.0)
        raise CalibrationError("expected agreement is 1 but coders disagree")
    kappa = (p_o - p_e) / (1.0 - p_e)
    return KappaResult(kappa=kappa, observed_agreement=p_o, expected_agreement=p_e)
