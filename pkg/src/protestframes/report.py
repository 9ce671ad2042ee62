"""Report assembly and rendering.

Builds the full analysis bundle for a classified corpus (frequency table,
t-test battery, the two crosstab families, duration histogram) and the
replication report that recomputes test statistics from published group
summaries and cell counts.

All statistics are computed in raw units; the display scales (millions of
followers or plays, thousands of comments or shares) are applied only when
rendering.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from .datamodel import (
    ChiSquareResult,
    DataError,
    FrameLabelSet,
    GroupSummary,
    TTestResult,
    VideoMeta,
)
from .ingest import _field, _iter_json_lines
from .stats import (
    FrequencyRow,
    LengthBin,
    StatsError,
    UserTier,
    chi_square_independence,
    frequency_table,
    length_bin,
    split_value,
    summarize,
    tier_of,
    welch_t_summary,
)

# metric name -> (VideoMeta field, display divisor, display unit)
METRICS: tuple[tuple[str, str, float, str], ...] = (
    ("follower", "follower_count", 1e6, "million"),
    ("duration", "duration_s", 1.0, "second"),
    ("play", "play_count", 1e6, "million"),
    ("like", "like_count", 1e6, "million"),
    ("comment", "comment_count", 1e3, "thousand"),
    ("share", "share_count", 1e3, "thousand"),
)

TTEST_SPLITS = ("riot", "confrontation", "spectacle", "debate", "verified", "black")
CHI_FRAMES = ("riot", "confrontation", "spectacle", "debate")

USER_TIER_ORDER = (UserTier.ORDINARY, UserTier.MID_TIER, UserTier.CELEBRITY)
LENGTH_BIN_ORDER = (LengthBin.S1_15, LengthBin.S16_45, LengthBin.S46_60)

# "within rounding" tolerances for replication deltas: published summaries
# carry 2-decimal means/SDs and integer-rounded expecteds.
T_TOLERANCE = 0.35
DF_TOLERANCE = 20.0
CHI2_TOLERANCE = 1.0
EXPECTED_TOLERANCE = 1.0


@dataclass(frozen=True)
class TTestRow:
    split: str
    metric: str
    unit: str
    with_group: GroupSummary | None
    without_group: GroupSummary | None
    result: TTestResult | None
    note: str = ""


@dataclass(frozen=True)
class ReportBundle:
    n: int
    frequency: list[FrequencyRow]
    ttests: list[TTestRow]
    chi_user: dict[str, ChiSquareResult | None]
    chi_length: dict[str, ChiSquareResult | None]
    histogram: list[tuple[int, int]]


def join_corpus(
    labels: Mapping[str, FrameLabelSet], meta: Sequence[VideoMeta]
) -> list[tuple[VideoMeta, FrameLabelSet]]:
    """Pair every metadata record with its labels; any orphan id on either
    side is an error naming the ids."""
    meta_ids = {m.video_id for m in meta}
    missing = sorted(m.video_id for m in meta if m.video_id not in labels)[:10]
    if missing:
        raise DataError(f"videos without labels: {', '.join(missing)}")
    orphans = sorted(set(labels) - meta_ids)[:10]
    if orphans:
        raise DataError(f"labels without metadata: {', '.join(orphans)}")
    return [(m, labels[m.video_id]) for m in meta]


def build_report(
    labels: Mapping[str, FrameLabelSet], meta: Sequence[VideoMeta]
) -> ReportBundle:
    pairs = join_corpus(labels, meta)
    label_list = [lab for _, lab in pairs]
    meta_list = [m for m, _ in pairs]

    ttests: list[TTestRow] = []
    for split in TTEST_SPLITS:
        members = [split_value(split, lab, m) for m, lab in pairs]
        for metric, attr, _, unit in METRICS:
            with_vals = [float(getattr(m, attr)) for m, keep in zip(meta_list, members) if keep]
            without_vals = [
                float(getattr(m, attr)) for m, keep in zip(meta_list, members) if not keep
            ]
            if len(with_vals) < 2 or len(without_vals) < 2:
                ttests.append(
                    TTestRow(split, metric, unit, None, None, None, note="insufficient n")
                )
                continue
            a, b = summarize(with_vals), summarize(without_vals)
            try:
                result = welch_t_summary(a, b)
                note = ""
            except StatsError as exc:
                result, note = None, str(exc)
            ttests.append(TTestRow(split, metric, unit, a, b, result, note=note))

    chi_user: dict[str, ChiSquareResult | None] = {}
    for frame in CHI_FRAMES:
        observed = []
        for tier in USER_TIER_ORDER:
            in_tier = [
                (m, lab) for m, lab in pairs if tier_of(m.follower_count) is tier
            ]
            yes = sum(1 for m, lab in in_tier if split_value(frame, lab, m))
            observed.append([yes, len(in_tier) - yes])
        chi_user[frame] = _chi_or_none(observed)

    short_enough = [
        (m, lab) for m, lab in pairs if length_bin(m.duration_s) is not LengthBin.OVERFLOW
    ]
    chi_length: dict[str, ChiSquareResult | None] = {}
    for frame in CHI_FRAMES:
        observed = []
        for bin_ in LENGTH_BIN_ORDER:
            in_bin = [(m, lab) for m, lab in short_enough if length_bin(m.duration_s) is bin_]
            yes = sum(1 for m, lab in in_bin if split_value(frame, lab, m))
            observed.append([yes, len(in_bin) - yes])
        chi_length[frame] = _chi_or_none(observed)

    histogram: list[tuple[int, int]] = []
    if meta_list:
        counts: dict[int, int] = {}
        for m in meta_list:
            counts[m.duration_s] = counts.get(m.duration_s, 0) + 1
        histogram = [(s, counts.get(s, 0)) for s in range(1, max(counts) + 1)]

    return ReportBundle(
        n=len(pairs),
        frequency=frequency_table(label_list, meta_list),
        ttests=ttests,
        chi_user=chi_user,
        chi_length=chi_length,
        histogram=histogram,
    )


def _chi_or_none(observed: list[list[int]]) -> ChiSquareResult | None:
    try:
        return chi_square_independence(observed)
    except StatsError:
        return None


# --- rendering ---------------------------------------------------------------


def _fixed_width(headers: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    widths = [len(h) for h in headers]
    for row in rows:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    def fmt(cells: Sequence[str]) -> str:
        return "  ".join(cell.ljust(widths[i]) for i, cell in enumerate(cells)).rstrip()
    lines = [fmt(headers), fmt(["-" * w for w in widths])]
    lines.extend(fmt(row) for row in rows)
    return "\n".join(lines) + "\n"


def _tsv(headers: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    lines = ["\t".join(headers)]
    lines.extend("\t".join(row) for row in rows)
    return "\n".join(lines) + "\n"


def _scaled(value: float, divisor: float) -> str:
    return f"{value / divisor:.2f}"


def frequency_rows(bundle: ReportBundle) -> list[list[str]]:
    return [[row.label, str(row.count), f"{row.percent:.2f}"] for row in bundle.frequency]


def render_frequency_tsv(bundle: ReportBundle) -> str:
    return _tsv(["label", "count", "percent"], frequency_rows(bundle))


def render_frequency_text(bundle: ReportBundle) -> str:
    return _fixed_width(["label", "count", "percent"], frequency_rows(bundle))


def ttest_rows(bundle: ReportBundle) -> list[list[str]]:
    rows = []
    for row in bundle.ttests:
        divisor = next(d for name, _, d, _ in METRICS if name == row.metric)
        if row.result is None:
            cells = [row.split, row.metric, row.unit] + ["-"] * 9 + [row.note]
            if row.with_group is not None:
                cells[3:6] = [
                    str(row.with_group.n),
                    _scaled(row.with_group.mean, divisor),
                    _scaled(row.with_group.sd, divisor),
                ]
            if row.without_group is not None:
                cells[6:9] = [
                    str(row.without_group.n),
                    _scaled(row.without_group.mean, divisor),
                    _scaled(row.without_group.sd, divisor),
                ]
            rows.append(cells)
            continue
        rows.append(
            [
                row.split,
                row.metric,
                row.unit,
                str(row.with_group.n),
                _scaled(row.with_group.mean, divisor),
                _scaled(row.with_group.sd, divisor),
                str(row.without_group.n),
                _scaled(row.without_group.mean, divisor),
                _scaled(row.without_group.sd, divisor),
                f"{row.result.t:.2f}",
                f"{row.result.df:.0f}",
                f"{row.result.p:.6g}",
                row.result.stars or "none",
            ]
        )
    return rows


_TTEST_HEADERS = [
    "split",
    "metric",
    "unit",
    "n_with",
    "mean_with",
    "sd_with",
    "n_without",
    "mean_without",
    "sd_without",
    "t",
    "df",
    "p",
    "stars",
]


def render_ttests_tsv(bundle: ReportBundle) -> str:
    return _tsv(_TTEST_HEADERS, ttest_rows(bundle))


def render_ttests_text(bundle: ReportBundle) -> str:
    return _fixed_width(_TTEST_HEADERS, ttest_rows(bundle))


def _chi_rows(
    tables: dict[str, ChiSquareResult | None], row_names: Sequence[str]
) -> list[list[str]]:
    rows = []
    for frame, result in tables.items():
        if result is None:
            rows.append([frame, "-", "-", "-", "-", "-", "-", "-", "insufficient n"])
            continue
        for name, cell_row in zip(row_names, result.cells):
            yes, non = cell_row
            rows.append(
                [
                    frame,
                    name,
                    str(yes.observed),
                    f"{yes.expected:.1f}",
                    yes.flag,
                    str(non.observed),
                    f"{non.expected:.1f}",
                    non.flag,
                    "",
                ]
            )
        rows.append(
            [
                frame,
                "chi2",
                f"{result.chi2:.2f}",
                f"df={result.df}",
                f"p={result.p:.6g}",
                _stars_word(result.p),
                "",
                "",
                "",
            ]
        )
    return rows


def _stars_word(p: float) -> str:
    from .stats import stars

    return stars(p) or "none"


_CHI_HEADERS = [
    "frame",
    "row",
    "yes_obs",
    "yes_exp",
    "yes_flag",
    "non_obs",
    "non_exp",
    "non_flag",
    "note",
]


def render_chi_tsv(tables: dict[str, ChiSquareResult | None], row_names: Sequence[str]) -> str:
    return _tsv(_CHI_HEADERS, _chi_rows(tables, row_names))


def render_chi_text(tables: dict[str, ChiSquareResult | None], row_names: Sequence[str]) -> str:
    return _fixed_width(_CHI_HEADERS, _chi_rows(tables, row_names))


def render_histogram_tsv(bundle: ReportBundle) -> str:
    return _tsv(
        ["duration_s", "count"], [[str(s), str(c)] for s, c in bundle.histogram]
    )


def render_report_text(bundle: ReportBundle) -> str:
    user_names = [tier.value for tier in USER_TIER_ORDER]
    length_names = [bin_.value for bin_ in LENGTH_BIN_ORDER]
    parts = [
        f"corpus: {bundle.n} videos",
        "",
        "== frequency ==",
        render_frequency_text(bundle),
        "== t-tests (welch) ==",
        render_ttests_text(bundle),
        "== crosstab: user type ==",
        render_chi_text(bundle.chi_user, user_names),
        "== crosstab: video length (videos over 60s excluded) ==",
        render_chi_text(bundle.chi_length, length_names),
        "== duration histogram ==",
        _fixed_width(["duration_s", "count"], [[str(s), str(c)] for s, c in bundle.histogram]),
    ]
    return "\n".join(parts)


def bundle_to_json(bundle: ReportBundle) -> str:
    """Machine-readable twin of the rendered reports."""
    def ttest(row: TTestRow):
        return {
            "split": row.split,
            "metric": row.metric,
            "unit": row.unit,
            "with": None
            if row.with_group is None
            else {"n": row.with_group.n, "mean": row.with_group.mean, "sd": row.with_group.sd},
            "without": None
            if row.without_group is None
            else {
                "n": row.without_group.n,
                "mean": row.without_group.mean,
                "sd": row.without_group.sd,
            },
            "t": None if row.result is None else row.result.t,
            "df": None if row.result is None else row.result.df,
            "p": None if row.result is None else row.result.p,
            "stars": None if row.result is None else row.result.stars,
            "note": row.note,
        }

    def chi(result: ChiSquareResult | None):
        if result is None:
            return None
        return {
            "chi2": result.chi2,
            "df": result.df,
            "p": result.p,
            "cells": [
                [
                    {
                        "observed": cell.observed,
                        "expected": cell.expected,
                        "adj_residual": cell.adj_residual,
                        "flag": cell.flag,
                    }
                    for cell in row
                ]
                for row in result.cells
            ],
        }

    obj = {
        "n": bundle.n,
        "frequency": [
            {"label": r.label, "count": r.count, "percent": r.percent} for r in bundle.frequency
        ],
        "ttests": [ttest(row) for row in bundle.ttests],
        "chi_user": {frame: chi(result) for frame, result in bundle.chi_user.items()},
        "chi_length": {frame: chi(result) for frame, result in bundle.chi_length.items()},
        "histogram": [{"duration_s": s, "count": c} for s, c in bundle.histogram],
    }
    return json.dumps(obj, indent=2) + "\n"


# --- replication from published aggregates ------------------------------------


@dataclass(frozen=True)
class SummaryRow:
    """One published two-group comparison: the M/SD/N of both groups plus the
    reported statistic, if any, for the delta column."""

    split: str
    metric: str
    unit_scale: str
    group_a: GroupSummary
    group_b: GroupSummary
    reported_t: float | None = None
    reported_df: float | None = None


def read_summary_rows(summary_path: Path) -> list[SummaryRow]:
    rows = []
    for lineno, obj in _iter_json_lines(Path(summary_path)):
        where = f"line {lineno}"
        def group(key: str) -> GroupSummary:
            raw = _field(obj, key, dict, where)
            return GroupSummary(
                n=_field(raw, "n", int, f"{where} {key}"),
                mean=_field(raw, "mean", float, f"{where} {key}"),
                sd=_field(raw, "sd", float, f"{where} {key}"),
            )
        rows.append(
            SummaryRow(
                split=obj.get("split", ""),
                metric=_field(obj, "metric", str, where),
                unit_scale=_field(obj, "unit_scale", str, where),
                group_a=group("group_a"),
                group_b=group("group_b"),
                reported_t=None if obj.get("reported_t") is None else float(obj["reported_t"]),
                reported_df=None if obj.get("reported_df") is None else float(obj["reported_df"]),
            )
        )
    return rows


@dataclass(frozen=True)
class CountsBlock:
    """One published contingency block: observed counts plus whatever the
    source printed (chi2, expecteds, flagged cells) for comparison."""

    table: str
    frame: str
    row_labels: tuple[str, ...]
    observed: tuple[tuple[int, ...], ...]
    reported_chi2: float | None = None
    reported_expected: tuple[tuple[float, ...], ...] | None = None
    reported_flagged: tuple[tuple[bool, ...], ...] | None = None


def read_counts_blocks(counts_path: Path) -> list[CountsBlock]:
    blocks = []
    for lineno, obj in _iter_json_lines(Path(counts_path)):
        where = f"line {lineno}"
        observed = _field(obj, "observed", list, where)
        labels = obj.get("row_labels", [f"row{i}" for i in range(len(observed))])
        expected = obj.get("reported_expected")
        flagged = obj.get("reported_flagged")
        blocks.append(
            CountsBlock(
                table=_field(obj, "table", str, where),
                frame=_field(obj, "frame", str, where),
                row_labels=tuple(labels),
                observed=tuple(tuple(int(v) for v in row) for row in observed),
                reported_chi2=None if obj.get("reported_chi2") is None else float(obj["reported_chi2"]),
                reported_expected=None
                if expected is None
                else tuple(tuple(float(v) for v in row) for row in expected),
                reported_flagged=None
                if flagged is None
                else tuple(tuple(bool(v) for v in row) for row in flagged),
            )
        )
    return blocks


def replicate_ttests(rows: Sequence[SummaryRow]) -> list[list[str]]:
    out = []
    for row in rows:
        result = welch_t_summary(row.group_a, row.group_b)
        if row.reported_t is None:
            delta_t, verdict = "-", "no reported value"
        else:
            delta = abs(result.t - row.reported_t)
            delta_t = f"{delta:.2f}"
            verdict = "within rounding" if delta <= T_TOLERANCE else "beyond tolerance"
        if row.reported_df is not None and abs(result.df - row.reported_df) > DF_TOLERANCE:
            verdict = "beyond tolerance"
        out.append(
            [
                row.split,
                row.metric,
                f"{result.t:.2f}",
                "-" if row.reported_t is None else f"{row.reported_t:.2f}",
                delta_t,
                f"{result.df:.0f}",
                "-" if row.reported_df is None else f"{row.reported_df:.0f}",
                result.stars or "none",
                verdict,
            ]
        )
    return out


def replicate_chi(blocks: Sequence[CountsBlock]) -> list[list[str]]:
    out = []
    for block in blocks:
        result = chi_square_independence([list(row) for row in block.observed])
        if block.reported_chi2 is None:
            delta_chi, verdict = "-", "no reported value"
        else:
            delta = abs(result.chi2 - block.reported_chi2)
            delta_chi = f"{delta:.2f}"
            verdict = "within rounding" if delta <= CHI2_TOLERANCE else "beyond tolerance"
        expected_ok = "-"
        if block.reported_expected is not None:
            worst = max(
                abs(cell.expected - block.reported_expected[i][j])
                for i, row in enumerate(result.cells)
                for j, cell in enumerate(row)
            )
            expected_ok = f"max|dE|={worst:.2f}"
            if worst > EXPECTED_TOLERANCE:
                verdict = "beyond tolerance"
        flags_ok = "-"
        if block.reported_flagged is not None:
            agree = all(
                (cell.flag != "none") == block.reported_flagged[i][j]
                for i, row in enumerate(result.cells)
                for j, cell in enumerate(row)
            )
            flags_ok = "flags match" if agree else "FLAGS DIFFER"
            if not agree:
                verdict = "beyond tolerance"
        out.append(
            [
                block.table,
                block.frame,
                f"{result.chi2:.2f}",
                "-" if block.reported_chi2 is None else f"{block.reported_chi2:.2f}",
                delta_chi,
                str(result.df),
                expected_ok,
                flags_ok,
                verdict,
            ]
        )
    return out


_REPL_T_HEADERS = ["split", "metric", "t", "t_reported", "delta_t", "df", "df_reported", "stars", "verdict"]
_REPL_CHI_HEADERS = ["table", "frame", "chi2", "chi2_reported", "delta", "df", "expected", "flags", "verdict"]


def render_replication_tsv(rows: Sequence[SummaryRow], blocks: Sequence[CountsBlock]) -> str:
    return _tsv(_REPL_T_HEADERS, replicate_ttests(rows)) + "\n" + _tsv(
        _REPL_CHI_HEADERS, replicate_chi(blocks)
    )


def render_replication_text(rows: Sequence[SummaryRow], blocks: Sequence[CountsBlock]) -> str:
    parts = []
    if rows:
        parts += ["== t-tests recomputed from published summaries ==",
                  _fixed_width(_REPL_T_HEADERS, replicate_ttests(rows))]
    if blocks:
        parts += ["== chi-square recomputed from published counts ==",
                  _fixed_width(_REPL_CHI_HEADERS, replicate_chi(blocks))]
    return "\n".join(parts)
