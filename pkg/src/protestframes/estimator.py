"""Estimator-style front door for the rule engine.

``FrameClassifier`` follows the scikit-learn parameter protocol
(``get_params`` / ``set_params``, keyword-only constructor params, fitted
attributes with a trailing underscore) without depending on scikit-learn,
so it drops into pipelines and grid-search tooling that only relies on the
protocol. X is a sequence of score streams, one per video; y is a sequence
of gold label sets.

Unlike most estimators it is usable before ``fit``: the rule parameters
have complete defaults, and ``fit`` merely re-tunes them against gold
labels.
"""

from __future__ import annotations

import inspect
from typing import Sequence

from .calibrate import (
    AccuracyReport,
    GridSpec,
    LabeledVideo,
    evaluate,
    grid_search,
)
from .datamodel import FrameLabelSet, FrameScore, RuleConfig, validate_score_stream
from .rules import classify_video


class FrameClassifier:
    """Rule-based visual-frame classifier with a tunable operating point."""

    def __init__(
        self,
        *,
        riot_violence_threshold: float = 0.5,
        riot_min_run: int = 3,
        confront_police_threshold: float = 0.85,
        confront_min_run: int = 4,
        confront_excludes_debate: bool = True,
        confront_requires_protest: bool = False,
        spectacle_crowd_threshold: int = 150,
        spectacle_min_run: int = 3,
        debate_max_people: int = 5,
        debate_area_low: float = 0.03,
        debate_run_low: int = 6,
        debate_area_high: float = 0.20,
        debate_run_high: int = 3,
        black_group_min: int = 3,
        grid: GridSpec | None = None,
        validate: bool = True,
    ):
        self.riot_violence_threshold = riot_violence_threshold
        self.riot_min_run = riot_min_run
        self.confront_police_threshold = confront_police_threshold
        self.confront_min_run = confront_min_run
        self.confront_excludes_debate = confront_excludes_debate
        self.confront_requires_protest = confront_requires_protest
        self.spectacle_crowd_threshold = spectacle_crowd_threshold
        self.spectacle_min_run = spectacle_min_run
        self.debate_max_people = debate_max_people
        self.debate_area_low = debate_area_low
        self.debate_run_low = debate_run_low
        self.debate_area_high = debate_area_high
        self.debate_run_high = debate_run_high
        self.black_group_min = black_group_min
        self.grid = grid
        self.validate = validate

    # -- scikit-learn parameter protocol --------------------------------

    @classmethod
    def _param_names(cls) -> list[str]:
        signature = inspect.signature(cls.__init__)
        return [name for name in signature.parameters if name != "self"]

    def get_params(self, deep: bool = True) -> dict:
        return {name: getattr(self, name) for name in self._param_names()}

    def set_params(self, **params) -> "FrameClassifier":
        valid = set(self._param_names())
        for name, value in params.items():
            if name not in valid:
                raise ValueError(
                    f"invalid parameter {name!r} for {type(self).__name__}; "
                    f"valid parameters are {sorted(valid)}"
                )
            setattr(self, name, value)
        return self

    # -- configuration plumbing ------------------------------------------

    def _init_config(self) -> RuleConfig:
        kwargs = {
            name: getattr(self, name)
            for name in self._param_names()
            if name not in ("grid", "validate")
        }
        return RuleConfig(**kwargs)

    @property
    def config(self) -> RuleConfig:
        """The operating point predictions use: fitted if available."""
        return getattr(self, "config_", self._init_config())

    def _streams(self, X: Sequence[Sequence[FrameScore]]) -> list[Sequence[FrameScore]]:
        if self.validate:
            for stream in X:
                validate_score_stream(list(stream))
        return list(X)

    # -- estimator API -----------------------------------------------------

    def fit(
        self, X: Sequence[Sequence[FrameScore]], y: Sequence[FrameLabelSet]
    ) -> "FrameClassifier":
        """Grid-search the rule parameters against gold labels.

        With ``grid=None`` the current parameters are kept and only scored.
        Sets ``config_`` and ``report_``.
        """
        if len(X) != len(y):
            raise ValueError(f"X has {len(X)} streams but y has {len(y)} label sets")
        streams = {str(i): stream for i, stream in enumerate(self._streams(X))}
        labeled = [LabeledVideo(video_id=str(i), gold=gold) for i, gold in enumerate(y)]
        base = self._init_config()
        if self.grid is None:
            self.config_ = base
            self.report_ = evaluate(base, labeled, streams)
        else:
            self.config_, self.report_ = grid_search(labeled, streams, self.grid, base)
        return self

    def predict(self, X: Sequence[Sequence[FrameScore]]) -> list[FrameLabelSet]:
        cfg = self.config
        return [classify_video(stream, cfg) for stream in self._streams(X)]

    def score(
        self, X: Sequence[Sequence[FrameScore]], y: Sequence[FrameLabelSet]
    ) -> float:
        """Mean per-element accuracy on (X, y)."""
        return self._report(X, y).overall

    def _report(
        self, X: Sequence[Sequence[FrameScore]], y: Sequence[FrameLabelSet]
    ) -> AccuracyReport:
        if len(X) != len(y):
            raise ValueError(f"X has {len(X)} streams but y has {len(y)} label sets")
        streams = {str(i): stream for i, stream in enumerate(self._streams(X))}
        labeled = [LabeledVideo(video_id=str(i), gold=gold) for i, gold in enumerate(y)]
        return evaluate(self.config, labeled, streams)

    def __repr__(self) -> str:
        diffs = []
        defaults = RuleConfig()
        for name in self._param_names():
            if name in ("grid", "validate"):
                continue
            value = getattr(self, name)
            if value != getattr(defaults, name):
                diffs.append(f"{name}={value!r}")
        return f"{type(self).__name__}({', '.join(diffs)})"
