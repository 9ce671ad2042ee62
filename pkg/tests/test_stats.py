import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats as sp_stats

from protestframes.datamodel import FrameLabelSet, GroupSummary
from protestframes.stats import (
    LengthBin,
    StatsError,
    UserTier,
    chi_square_cdf,
    chi_square_independence,
    frequency_table,
    length_bin,
    round_percent,
    stars,
    t_cdf,
    tier_of,
    welch_t_raw,
    welch_t_summary,
)
from test_datamodel import make_meta


class TestTCdf:
    def test_center_is_half(self):
        for df in (1, 2.5, 117, 8171):
            assert t_cdf(0.0, df) == 0.5

    def test_symmetry(self):
        for df in (1, 3, 117.4, 1721):
            for x in (0.1, 1.0, 4.2, 30.0):
                assert t_cdf(x, df) + t_cdf(-x, df) == pytest.approx(1.0, abs=1e-13)

    def test_monotone_in_x(self):
        xs = np.linspace(-20, 20, 81)
        values = [t_cdf(float(x), 5.0) for x in xs]
        assert all(a <= b for a, b in zip(values, values[1:]))

    def test_against_scipy(self):
        for df in (1, 2, 27, 117, 1721, 8171, 1e6):
            for x in np.linspace(-50, 50, 41):
                assert t_cdf(float(x), float(df)) == pytest.approx(
                    float(sp_stats.t.cdf(x, df)), abs=1e-10
                )

    def test_rejects_bad_df(self):
        with pytest.raises(StatsError):
            t_cdf(1.0, 0.0)


class TestChiSquareCdf:
    def test_zero(self):
        assert chi_square_cdf(0.0, 4) == 0.0

    def test_monotone(self):
        xs = np.linspace(0, 50, 51)
        values = [chi_square_cdf(float(x), 3) for x in xs]
        assert all(a <= b for a, b in zip(values, values[1:]))

    def test_against_scipy(self):
        for df in (1, 2, 117, 1000, 8171):
            for x in np.linspace(0.0, 10000.0, 41):
                assert chi_square_cdf(float(x), df) == pytest.approx(
                    float(sp_stats.chi2.cdf(x, df)), abs=1e-10
                )

    def test_rejects_negative_x(self):
        with pytest.raises(StatsError):
            chi_square_cdf(-0.1, 2)


class TestWelch:
    def test_identical_samples_give_zero_t(self):
        a = [1.0, 2.0, 3.0, 4.0]
        result = welch_t_raw(a, list(a))
        assert result.t == 0.0
        assert result.p == pytest.approx(1.0)
        assert result.stars == ""

    def test_antisymmetry(self):
        rng = random.Random(3)
        a = [rng.gauss(0, 1) for _ in range(20)]
        b = [rng.gauss(0.5, 2) for _ in range(30)]
        fwd, rev = welch_t_raw(a, b), welch_t_raw(b, a)
        assert fwd.t == -rev.t
        assert fwd.df == rev.df
        assert fwd.p == rev.p

    def test_against_scipy_raw(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            a = rng.normal(0, 1, size=rng.integers(2, 40)).tolist()
            b = rng.normal(0.3, 2, size=rng.integers(2, 40)).tolist()
            mine = welch_t_raw(a, b)
            ref = sp_stats.ttest_ind(a, b, equal_var=False)
            assert mine.t == pytest.approx(float(ref.statistic), abs=1e-9)
            assert mine.p == pytest.approx(float(ref.pvalue), abs=1e-9)

    def test_against_scipy_summary(self):
        a = GroupSummary(n=648, mean=0.17, sd=0.67)
        b = GroupSummary(n=7525, mean=0.39, sd=1.86)
        mine = welch_t_summary(a, b)
        ref = sp_stats.ttest_ind_from_stats(
            a.mean, a.sd, a.n, b.mean, b.sd, b.n, equal_var=False
        )
        assert mine.t == pytest.approx(float(ref.statistic), abs=1e-12)
        assert mine.p == pytest.approx(float(ref.pvalue), abs=1e-12)

    def test_matches_published_riot_follower_row(self):
        result = welch_t_summary(
            GroupSummary(648, 0.17, 0.67), GroupSummary(7525, 0.39, 1.86)
        )
        assert result.t == pytest.approx(-6.48, abs=0.01)
        assert result.df == pytest.approx(1725, abs=1)
        assert abs(result.t - (-6.68)) <= 0.35
        assert abs(result.df - 1721) <= 20
        assert result.stars == "***"

    def test_matches_published_debate_play_row(self):
        result = welch_t_summary(
            GroupSummary(3709, 1.09, 2.96), GroupSummary(4464, 1.65, 3.20)
        )
        assert result.t == pytest.approx(-8.21, abs=0.01)
        assert abs(result.t - (-8.23)) <= 0.35
        assert abs(result.df - 8077) <= 20

    def test_df_between_group_bounds(self):
        rng = np.random.default_rng(9)
        for _ in range(100):
            n_a, n_b = int(rng.integers(2, 50)), int(rng.integers(2, 50))
            a = GroupSummary(n_a, float(rng.normal()), float(rng.uniform(0.1, 3)))
            b = GroupSummary(n_b, float(rng.normal()), float(rng.uniform(0.1, 3)))
            df = welch_t_summary(a, b).df
            assert min(n_a, n_b) - 1 <= df <= n_a + n_b - 2 + 1e-9

    def test_undersized_sample_rejected(self):
        with pytest.raises(StatsError):
            welch_t_raw([1.0], [1.0, 2.0])

    def test_zero_variance_both_rejected(self):
        with pytest.raises(StatsError, match="zero pooled standard error"):
            welch_t_raw([2.0, 2.0, 2.0], [2.0, 2.0])


class TestChiSquareIndependence:
    def test_riot_by_user_type_counts(self):
        observed = [[486, 4128], [149, 3160], [13, 237]]
        result = chi_square_independence(observed)
        ref = sp_stats.chi2_contingency(np.array(observed), correction=False)
        assert result.chi2 == pytest.approx(float(ref.statistic), abs=1e-9)
        assert result.df == 2
        assert abs(result.chi2 - 98.62) <= 1.0

    def test_debate_by_length_counts(self):
        observed = [[1281, 2346], [990, 1373], [1438, 745]]
        result = chi_square_independence(observed)
        assert abs(result.chi2 - 529.56) <= 1.0
        assert result.df == 2
        assert result.p < 0.001

    def test_uniform_table_is_zero(self):
        result = chi_square_independence([[10, 20], [10, 20], [10, 20]])
        assert result.chi2 == pytest.approx(0.0, abs=1e-12)
        assert all(cell.flag == "none" for row in result.cells for cell in row)

    def test_expected_sums_match_margins(self):
        observed = [[5, 9, 2], [11, 3, 8], [4, 4, 4]]
        result = chi_square_independence(observed)
        for i, row in enumerate(result.cells):
            assert sum(cell.expected for cell in row) == pytest.approx(sum(observed[i]), abs=1e-9)
        for j in range(3):
            col = sum(result.cells[i][j].expected for i in range(3))
            assert col == pytest.approx(sum(observed[i][j] for i in range(3)), abs=1e-9)

    def test_adjusted_residuals_flag_flagged_cells(self):
        # ordinary and mid-tier riot cells are far off expectation; celebrity is not
        result = chi_square_independence([[486, 4128], [149, 3160], [13, 237]])
        assert result.cells[0][0].flag == "above"
        assert result.cells[0][1].flag == "below"
        assert result.cells[1][0].flag == "below"
        assert result.cells[2][0].flag == "none"

    def test_zero_margin_rejected(self):
        with pytest.raises(StatsError, match="zero margin"):
            chi_square_independence([[0, 5], [0, 7]])

    def test_non_integer_count_rejected(self):
        with pytest.raises(StatsError, match="non-integer"):
            chi_square_independence([[1.5, 2], [3, 4]])

    def test_single_row_rejected(self):
        with pytest.raises(StatsError):
            chi_square_independence([[1, 2]])


class TestStars:
    @pytest.mark.parametrize(
        "p,expected",
        [
            (0.0005, "***"),
            (0.001, "**"),
            (0.009, "**"),
            (0.01, "*"),
            (0.02, "*"),
            (0.05, ""),
            (0.5, ""),
        ],
    )
    def test_cutpoints(self, p, expected):
        assert stars(p) == expected

    def test_out_of_range_rejected(self):
        with pytest.raises(StatsError):
            stars(1.5)


class TestFrequencyTable:
    def test_published_percentages(self):
        assert round_percent(648, 8173) == 7.93
        assert round_percent(65, 8173) == 0.80
        assert round_percent(103, 8173) == 1.26
        assert round_percent(3709, 8173) == 45.38
        assert round_percent(4386, 8173) == 53.66
        assert round_percent(489, 8173) == 5.98

    def test_empty_input_gives_empty_table(self):
        assert frequency_table([], []) == []

    def test_pairs_sum_to_corpus(self):
        labels = [
            FrameLabelSet(riot=True, debate=True, black_presence=True),
            FrameLabelSet(debate=True),
            FrameLabelSet(),
        ]
        meta = [make_meta(video_id=f"v{i}", verified=(i == 0)) for i in range(3)]
        rows = frequency_table(labels, meta)
        by_label = {row.label: row for row in rows}
        assert by_label["riot"].count + by_label["non_riot"].count == 3
        assert by_label["debate"].count == 2
        for name, comp in [("riot", "non_riot"), ("debate", "non_debate"), ("verified", "unverified")]:
            assert by_label[name].percent + by_label[comp].percent == pytest.approx(100.0, abs=0.01)

    def test_length_mismatch_rejected(self):
        with pytest.raises(StatsError):
            frequency_table([FrameLabelSet()], [])


class TestTaxonomies:
    @pytest.mark.parametrize(
        "followers,tier",
        [
            (0, UserTier.ORDINARY),
            (49_999, UserTier.ORDINARY),
            (50_000, UserTier.MID_TIER),
            (2_500_000, UserTier.MID_TIER),
            (2_500_001, UserTier.CELEBRITY),
        ],
    )
    def test_tier_boundaries(self, followers, tier):
        assert tier_of(followers) is tier

    @pytest.mark.parametrize(
        "duration,bin_",
        [
            (1, LengthBin.S1_15),
            (15, LengthBin.S1_15),
            (16, LengthBin.S16_45),
            (45, LengthBin.S16_45),
            (46, LengthBin.S46_60),
            (60, LengthBin.S46_60),
            (61, LengthBin.OVERFLOW),
        ],
    )
    def test_length_boundaries(self, duration, bin_):
        assert length_bin(duration) is bin_

    @given(st.integers(min_value=0, max_value=10**12))
    @settings(max_examples=200)
    def test_tier_total(self, followers):
        assert tier_of(followers) in UserTier

    @given(st.integers(min_value=1, max_value=10**6))
    @settings(max_examples=200)
    def test_length_total(self, duration):
        assert length_bin(duration) in LengthBin
