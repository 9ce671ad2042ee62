import random
from pathlib import Path

import pytest

from protestframes.datamodel import DataError, FrameLabelSet
from protestframes.report import (
    build_report,
    bundle_to_json,
    read_counts_blocks,
    read_summary_rows,
    render_frequency_tsv,
    render_report_text,
    render_ttests_tsv,
    replicate_chi,
    replicate_ttests,
)
from protestframes.stats import stars
from test_datamodel import make_meta

FIXTURES = Path(__file__).parent / "fixtures"


def small_corpus(n=40, seed=6):
    rng = random.Random(seed)
    meta = []
    labels = {}
    for i in range(n):
        vid = f"v{i:03d}"
        meta.append(
            make_meta(
                video_id=vid,
                verified=rng.random() < 0.1,
                follower_count=rng.choice([100, 60_000, 3_000_000]),
                duration_s=rng.choice([10, 15, 30, 50, 61]),
                play_count=rng.randrange(0, 5_000_000),
                like_count=rng.randrange(0, 400_000),
                comment_count=rng.randrange(0, 9_000),
                share_count=rng.randrange(0, 20_000),
            )
        )
        labels[vid] = FrameLabelSet(
            riot=rng.random() < 0.3,
            confrontation=False,
            spectacle=rng.random() < 0.2,
            debate=rng.random() < 0.5,
            black_presence=rng.random() < 0.5,
        )
    return meta, labels


class TestBuildReport:
    def test_histogram_sums_to_corpus(self):
        meta, labels = small_corpus()
        bundle = build_report(labels, meta)
        assert sum(c for _, c in bundle.histogram) == bundle.n == len(meta)

    def test_frequency_pairs_sum(self):
        meta, labels = small_corpus()
        bundle = build_report(labels, meta)
        by_label = {row.label: row.count for row in bundle.frequency}
        assert by_label["riot"] + by_label["non_riot"] == len(meta)

    def test_star_annotations_match_p(self):
        meta, labels = small_corpus(n=80)
        bundle = build_report(labels, meta)
        for row in bundle.ttests:
            if row.result is not None:
                assert row.result.stars == stars(row.result.p)

    def test_chi_tables_cover_four_frames(self):
        meta, labels = small_corpus()
        bundle = build_report(labels, meta)
        assert set(bundle.chi_user) == {"riot", "confrontation", "spectacle", "debate"}
        assert set(bundle.chi_length) == set(bundle.chi_user)
        # no confrontation positives anywhere -> zero margin -> marked unavailable
        assert bundle.chi_user["confrontation"] is None

    def test_length_crosstab_excludes_long_videos(self):
        meta, labels = small_corpus()
        bundle = build_report(labels, meta)
        short = sum(1 for m in meta if m.duration_s <= 60)
        for result in bundle.chi_length.values():
            if result is not None:
                total = sum(cell.observed for row in result.cells for cell in row)
                assert total == short

    def test_orphan_meta_named(self):
        meta, labels = small_corpus(n=5)
        del labels["v002"]
        with pytest.raises(DataError, match="v002"):
            build_report(labels, meta)

    def test_orphan_labels_named(self):
        meta, labels = small_corpus(n=5)
        labels["ghost"] = FrameLabelSet()
        with pytest.raises(DataError, match="ghost"):
            build_report(labels, meta)

    def test_single_video_degenerate_but_renderable(self):
        meta, labels = small_corpus(n=1)
        bundle = build_report(labels, meta)
        assert all(row.result is None for row in bundle.ttests)
        assert all(note == "insufficient n" for note in {r.note for r in bundle.ttests})
        text = render_report_text(bundle)
        assert "insufficient n" in text


class TestRendering:
    def test_follower_scaled_to_millions(self):
        meta, labels = small_corpus()
        bundle = build_report(labels, meta)
        tsv = render_ttests_tsv(bundle)
        line = next(
            l for l in tsv.splitlines() if l.startswith("riot\tfollower")
        )
        cells = line.split("\t")
        mean_with = float(cells[4])
        assert mean_with < 5  # raw counts are up to 3e6; rendered in millions

    def test_frequency_tsv_shape(self):
        meta, labels = small_corpus()
        tsv = render_frequency_tsv(build_report(labels, meta))
        lines = tsv.strip().splitlines()
        assert lines[0] == "label\tcount\tpercent"
        assert len(lines) == 1 + 12  # six splits, each with complement

    def test_json_bundle_is_consistent(self):
        import json

        meta, labels = small_corpus()
        bundle = build_report(labels, meta)
        obj = json.loads(bundle_to_json(bundle))
        assert obj["n"] == bundle.n
        assert len(obj["ttests"]) == len(bundle.ttests)


class TestReplication:
    def test_acceptance_rows_within_rounding(self):
        rows = read_summary_rows(FIXTURES / "table2_summary.ndjson")
        rendered = {(r[0], r[1]): r for r in replicate_ttests(rows)}
        for key in [
            ("riot", "follower"),
            ("riot", "share"),
            ("riot", "comment"),
            ("debate", "play"),
            ("verified", "play"),
            ("spectacle", "play"),
        ]:
            assert rendered[key][-1] == "within rounding", key

    def test_all_chi_blocks_reproduce(self):
        blocks = read_counts_blocks(FIXTURES / "table3_counts.ndjson")
        for row in replicate_chi(blocks):
            assert row[-1] == "within rounding"
            assert row[-2] == "flags match"

    def test_corrupted_report_detected(self):
        rows = read_summary_rows(FIXTURES / "table2_summary.ndjson")
        from dataclasses import replace

        bad = [replace(rows[0], reported_t=rows[0].reported_t + 5.0)]
        assert replicate_ttests(bad)[0][-1] == "beyond tolerance"
