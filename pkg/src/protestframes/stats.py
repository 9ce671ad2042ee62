"""Inferential statistics over classified corpora.

Welch's unequal-variance t-test (from raw samples or from published group
summaries), chi-square tests of independence with adjusted standardized
residuals per cell, significance stars, frequency tables, and the
follower-count / duration taxonomies used by the crosstab reports.

Everything here is a pure function; computation is always in raw units,
display scaling belongs to :mod:`protestframes.report`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import Sequence

from .datamodel import (
    CellStat,
    ChiSquareResult,
    DataError,
    FrameLabelSet,
    GroupSummary,
    TTestResult,
    VideoMeta,
)
from .special import reg_inc_beta, reg_lower_gamma

RESIDUAL_CUTOFF = 1.96  # two-sided .05 level for adjusted residual flags


class StatsError(DataError):
    """A statistic was requested on input it is not defined for."""


def stars(p: float) -> str:
    """Significance annotation: *** p<.001, ** p<.01, * p<.05, else ""."""
    if not 0.0 <= p <= 1.0:
        raise StatsError(f"p-value out of range: {p}")
    if p < 0.001:
        return "***"
    if p < 0.01:
        return "**"
    if p < 0.05:
        return "*"
    return ""


def t_cdf(x: float, df: float) -> float:
    """Cumulative distribution function of Student's t with ``df`` degrees
    of freedom, via the regularized incomplete beta function."""
    if df <= 0.0:
        raise StatsError(f"degrees of freedom must be positive (got {df})")
    if x == 0.0:
        return 0.5
    # Keep the beta argument away from 1 so its log stays well-conditioned:
    # below the distribution shoulder use the mirrored identity.
    xx = x * x
    if xx < df:
        tail = 0.5 * (1.0 - reg_inc_beta(0.5, 0.5 * df, xx / (df + xx)))
    else:
        tail = 0.5 * reg_inc_beta(0.5 * df, 0.5, df / (df + xx))
    return 1.0 - tail if x > 0.0 else tail


def chi_square_cdf(x: float, df: float) -> float:
    """Chi-square CDF via the regularized lower incomplete gamma function."""
    if x < 0.0:
        raise StatsError(f"chi-square statistic must be nonnegative (got {x})")
    if df <= 0.0:
        raise StatsError(f"degrees of freedom must be positive (got {df})")
    return reg_lower_gamma(0.5 * df, 0.5 * x)


def welch_t_summary(a: GroupSummary, b: GroupSummary) -> TTestResult:
    """Welch's two-sample t-test from group summaries (n, mean, sample sd).

    t = (m_a - m_b) / sqrt(sd_a^2/n_a + sd_b^2/n_b), with degrees of freedom
    by Welch-Satterthwaite and a two-sided p-value.
    """
    for name, g in (("a", a), ("b", b)):
        if g.n < 2:
            raise StatsError(f"group {name} needs n >= 2 (got {g.n})")
        if g.sd < 0.0:
            raise StatsError(f"group {name} has negative sd ({g.sd})")
    var_a = a.sd * a.sd / a.n
    var_b = b.sd * b.sd / b.n
    se2 = var_a + var_b
    if se2 <= 0.0:
        raise StatsError("zero pooled standard error: both groups have zero variance")
    t = (a.mean - b.mean) / math.sqrt(se2)
    df = se2 * se2 / (var_a * var_a / (a.n - 1) + var_b * var_b / (b.n - 1))
    p = 2.0 * t_cdf(-abs(t), df)
    return TTestResult(t=t, df=df, p=p, stars=stars(p))


def summarize(sample: Sequence[float]) -> GroupSummary:
    """n, mean and sample (n-1 denominator) standard deviation."""
    n = len(sample)
    if n < 2:
        raise StatsError(f"sample needs at least 2 values (got {n})")
    mean = math.fsum(sample) / n
    ss = math.fsum((v - mean) ** 2 for v in sample)
    return GroupSummary(n=n, mean=mean, sd=math.sqrt(ss / (n - 1)))


def welch_t_raw(sample_a: Sequence[float], sample_b: Sequence[float]) -> TTestResult:
    """Welch's t-test from raw samples; summarizes then delegates."""
    return welch_t_summary(summarize(sample_a), summarize(sample_b))


def chi_square_independence(observed: Sequence[Sequence[int]]) -> ChiSquareResult:
    """Chi-square test of independence on an r x c table of counts.

    Expected counts come from the margins (row_i * col_j / N); each cell also
    gets its adjusted standardized residual
    (O - E) / sqrt(E * (1 - row_i/N) * (1 - col_j/N)), flagged ``below`` or
    ``above`` when its magnitude exceeds 1.96 (two-sided .05 level).
    """
    r = len(observed)
    if r < 2:
        raise StatsError(f"need at least 2 rows (got {r})")
    c = len(observed[0])
    if c < 2:
        raise StatsError(f"need at least 2 columns (got {c})")
    for i, row in enumerate(observed):
        if len(row) != c:
            raise StatsError(f"ragged table: row {i} has {len(row)} columns, expected {c}")
        for j, value in enumerate(row):
            if isinstance(value, bool) or not isinstance(value, int):
                raise StatsError(f"non-integer count at cell ({i}, {j}): {value!r}")
            if value < 0:
                raise StatsError(f"negative count at cell ({i}, {j}): {value}")

    row_margin = [sum(row) for row in observed]
    col_margin = [sum(observed[i][j] for i in range(r)) for j in range(c)]
    total = sum(row_margin)
    for i, m in enumerate(row_margin):
        if m == 0:
            raise StatsError(f"zero margin: row {i}")
    for j, m in enumerate(col_margin):
        if m == 0:
            raise StatsError(f"zero margin: column {j}")

    chi2 = 0.0
    cells: list[tuple[CellStat, ...]] = []
    for i in range(r):
        row_cells = []
        for j in range(c):
            expected = row_margin[i] * col_margin[j] / total
            diff = observed[i][j] - expected
            chi2 += diff * diff / expected
            denom = math.sqrt(
                expected * (1.0 - row_margin[i] / total) * (1.0 - col_margin[j] / total)
            )
            residual = diff / denom
            if abs(residual) > RESIDUAL_CUTOFF:
                flag = "below" if diff < 0 else "above"
            else:
                flag = "none"
            row_cells.append(
                CellStat(observed=observed[i][j], expected=expected, adj_residual=residual, flag=flag)
            )
        cells.append(tuple(row_cells))

    df = (r - 1) * (c - 1)
    p = 1.0 - chi_square_cdf(chi2, df)
    return ChiSquareResult(chi2=chi2, df=df, p=p, cells=tuple(cells))


@enum.unique
class UserTier(enum.Enum):
    ORDINARY = "ordinary"
    MID_TIER = "mid_tier"
    CELEBRITY = "celebrity"


MID_TIER_MIN = 50_000
MID_TIER_MAX = 2_500_000


def tier_of(follower_count: int) -> UserTier:
    """Creator tier by follower count: <50k ordinary, 50k-2.5M mid-tier,
    >2.5M celebrity."""
    if follower_count < 0:
        raise StatsError(f"negative count: follower_count = {follower_count}")
    if follower_count < MID_TIER_MIN:
        return UserTier.ORDINARY
    if follower_count <= MID_TIER_MAX:
        return UserTier.MID_TIER
    return UserTier.CELEBRITY


@enum.unique
class LengthBin(enum.Enum):
    S1_15 = "1~15s"
    S16_45 = "16~45s"
    S46_60 = "46~60s"
    OVERFLOW = ">60s"


def length_bin(duration_s: int) -> LengthBin:
    """Duration bin; videos over 60 s fall in OVERFLOW and are excluded from
    the length crosstabs."""
    if duration_s < 1:
        raise StatsError(f"duration_s < 1 (got {duration_s})")
    if duration_s <= 15:
        return LengthBin.S1_15
    if duration_s <= 45:
        return LengthBin.S16_45
    if duration_s <= 60:
        return LengthBin.S46_60
    return LengthBin.OVERFLOW


def round_percent(count: int, total: int) -> float:
    """count/total as a percentage, rounded half-up to two decimals."""
    if total <= 0:
        raise StatsError(f"total must be positive (got {total})")
    pct = Decimal(count) * 100 / Decimal(total)
    return float(pct.quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


@dataclass(frozen=True)
class FrequencyRow:
    """One labelled count with its share of the corpus."""

    label: str
    count: int
    percent: float


# presence rows rendered by frequency_table: (label, complement label, getter)
_FREQUENCY_SPLITS: tuple[tuple[str, str], ...] = (
    ("riot", "non_riot"),
    ("confrontation", "non_confrontation"),
    ("spectacle", "non_spectacle"),
    ("debate", "non_debate"),
    ("black", "non_black"),
    ("verified", "unverified"),
)


def split_value(split: str, labels: FrameLabelSet, meta: VideoMeta) -> bool:
    """True/false membership of one video for a named split."""
    if split == "black":
        return labels.black_presence
    if split == "black_group":
        return labels.black_group_presence
    if split == "verified":
        return meta.verified
    if split in ("riot", "confrontation", "spectacle", "debate"):
        return getattr(labels, split)
    raise StatsError(f"unknown split: {split}")


def frequency_table(
    labels: Sequence[FrameLabelSet], meta: Sequence[VideoMeta]
) -> list[FrequencyRow]:
    """Count and percentage rows for each visual element, identity presence
    and source type, each followed by its complement row."""
    if len(labels) != len(meta):
        raise StatsError(f"labels ({len(labels)}) and meta ({len(meta)}) differ in length")
    if not labels:
        return []
    total = len(labels)
    rows: list[FrequencyRow] = []
    for split, complement in _FREQUENCY_SPLITS:
        count = sum(1 for lab, m in zip(labels, meta) if split_value(split, lab, m))
        rows.append(FrequencyRow(split, count, round_percent(count, total)))
        rows.append(FrequencyRow(complement, total - count, round_percent(total - count, total)))
    return rows
