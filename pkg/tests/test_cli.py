import json
import random
from pathlib import Path

import pytest

from protestframes.cli import main
from protestframes.datamodel import RuleConfig
from protestframes.ingest import (
    read_labels,
    write_corpus,
    write_score_stream,
)
from protestframes.calibrate import write_labeled, LabeledVideo
from protestframes.rules import oracle_classify
from streamgen import random_stream
from test_datamodel import make_meta
from test_ingest import FAKE_FFMPEG, FAKE_FFPROBE

FIXTURES = Path(__file__).parent / "fixtures"


def dict_frame(t, violence=0.0, police=0.0, crowd=0, face_area=None, black=False):
    from protestframes.datamodel import FaceObservation, FrameScore

    faces = () if face_area is None else (FaceObservation(face_area, black),)
    return FrameScore(
        t_index=t, violence=violence, police_conf=police, protest_conf=None,
        crowd_count=crowd, faces=faces,
    )


@pytest.fixture
def corpus(tmp_path):
    rng = random.Random(20)
    streams = {f"v{i}": random_stream(rng, max_len=12, min_len=1) for i in range(30)}
    meta = [
        make_meta(
            video_id=vid,
            verified=rng.random() < 0.2,
            follower_count=rng.choice([500, 70_000, 2_600_000]),
            duration_s=rng.choice([12, 15, 40, 59, 70]),
            play_count=rng.randrange(0, 10**6),
        )
        for vid in streams
    ]
    scores_path = tmp_path / "scores.ndjson"
    meta_path = tmp_path / "meta.ndjson"
    write_score_stream(scores_path, streams)
    write_corpus(meta_path, meta)
    return tmp_path, scores_path, meta_path, streams, meta


class TestClassify:
    def test_labels_match_oracle(self, corpus):
        tmp_path, scores_path, _, streams, _ = corpus
        out = tmp_path / "labels.ndjson"
        assert main(["classify", "--scores", str(scores_path), "--out", str(out)]) == 0
        labels = read_labels(out)
        cfg = RuleConfig()
        assert labels == {vid: oracle_classify(frames, cfg) for vid, frames in streams.items()}

    def test_empty_corpus_ok(self, tmp_path):
        scores = tmp_path / "scores.ndjson"
        scores.write_text("")
        out = tmp_path / "labels.ndjson"
        assert main(["classify", "--scores", str(scores), "--out", str(out)]) == 0
        assert out.read_text() == ""

    def test_missing_scores_file_names_path(self, tmp_path, capsys):
        missing = tmp_path / "nope.ndjson"
        code = main(["classify", "--scores", str(missing), "--out", str(tmp_path / "o")])
        assert code == 1
        assert "nope.ndjson" in capsys.readouterr().err

    def test_byte_identical_reruns(self, corpus):
        tmp_path, scores_path, _, _, _ = corpus
        out1, out2 = tmp_path / "a.ndjson", tmp_path / "b.ndjson"
        main(["classify", "--scores", str(scores_path), "--out", str(out1)])
        main(["classify", "--scores", str(scores_path), "--out", str(out2), "--workers", "4"])
        assert out1.read_bytes() == out2.read_bytes()

    def test_meta_restriction_requires_streams(self, corpus, capsys):
        tmp_path, scores_path, meta_path, _, meta = corpus
        extra = meta + [make_meta(video_id="ghost")]
        write_corpus(meta_path, extra)
        code = main(
            ["classify", "--scores", str(scores_path), "--meta", str(meta_path),
             "--out", str(tmp_path / "o.ndjson")]
        )
        assert code == 1
        assert "ghost" in capsys.readouterr().err

    def test_config_flag_changes_labels(self, corpus):
        tmp_path, scores_path, _, streams, _ = corpus
        config_path = tmp_path / "strict.json"
        config_path.write_text('{"riot_violence_threshold": 0.99, "riot_min_run": 8}')
        out = tmp_path / "strict_labels.ndjson"
        assert main(["classify", "--scores", str(scores_path), "--config", str(config_path), "--out", str(out)]) == 0
        labels = read_labels(out)
        assert not any(lab.riot for lab in labels.values())


class TestCalibrate:
    def test_identity_grid_reports_default_accuracy(self, corpus, capsys):
        tmp_path, scores_path, _, streams, _ = corpus
        labeled_path = tmp_path / "gold.ndjson"
        cfg = RuleConfig()
        write_labeled(
            labeled_path,
            [LabeledVideo(vid, oracle_classify(frames, cfg)) for vid, frames in streams.items()],
        )
        grid_path = tmp_path / "grid.json"
        grid_path.write_text('{"target_elements": ["riot"], "riot_violence_threshold": [0.5], "riot_min_run": [3]}')
        out_dir = tmp_path / "calib"
        code = main(
            ["calibrate", "--labeled", str(labeled_path), "--scores", str(scores_path),
             "--grid", str(grid_path), "--out", str(out_dir)]
        )
        assert code == 0
        best = json.loads((out_dir / "best_config.json").read_text())
        assert best["riot_violence_threshold"] == 0.5
        assert "overall=1.0000" in (out_dir / "accuracy.txt").read_text()

    def test_unknown_video_id_fails(self, corpus, capsys):
        tmp_path, scores_path, _, _, _ = corpus
        labeled_path = tmp_path / "gold.ndjson"
        write_labeled(labeled_path, [LabeledVideo("phantom", oracle_classify([], RuleConfig()))])
        code = main(
            ["calibrate", "--labeled", str(labeled_path), "--scores", str(scores_path),
             "--out", str(tmp_path / "calib")]
        )
        assert code == 1
        assert "phantom" in capsys.readouterr().err

    def test_propose_sample_writes_ids(self, tmp_path):
        # craft streams so every element has plenty of provisional positives
        rng = random.Random(3)
        streams = {}
        for i in range(60):
            vid = f"v{i}"
            if i % 4 == 0:
                streams[vid] = [
                    dict_frame(t, violence=0.9) for t in range(4)
                ]
            elif i % 4 == 1:
                streams[vid] = [dict_frame(t, police=0.95) for t in range(5)]
            elif i % 4 == 2:
                streams[vid] = [dict_frame(t, crowd=200) for t in range(4)]
            else:
                streams[vid] = [dict_frame(t, face_area=0.3, black=True) for t in range(4)]
        scores_path = tmp_path / "scores.ndjson"
        write_score_stream(scores_path, streams)
        out_dir = tmp_path / "sample"
        code = main(
            ["calibrate", "--scores", str(scores_path), "--propose-sample", "20",
             "--min-prevalence", "0.2", "--seed", "5", "--out", str(out_dir)]
        )
        assert code == 0
        ids = (out_dir / "sample_ids.txt").read_text().split()
        assert len(ids) == 20
        assert len(set(ids)) == 20

    def test_propose_sample_infeasible_names_element(self, corpus, capsys):
        tmp_path, scores_path, _, _, _ = corpus
        code = main(
            ["calibrate", "--scores", str(scores_path), "--propose-sample", "29",
             "--min-prevalence", "0.9", "--out", str(tmp_path / "s")]
        )
        assert code == 1
        assert "cannot reach" in capsys.readouterr().err

    def test_split_produces_validation_report(self, corpus):
        tmp_path, scores_path, _, streams, _ = corpus
        labeled_path = tmp_path / "gold.ndjson"
        cfg = RuleConfig()
        write_labeled(
            labeled_path,
            [LabeledVideo(vid, oracle_classify(frames, cfg)) for vid, frames in streams.items()],
        )
        grid_path = tmp_path / "grid.json"
        grid_path.write_text('{"target_elements": ["riot"], "riot_violence_threshold": [0.5]}')
        out_dir = tmp_path / "calib"
        code = main(
            ["calibrate", "--labeled", str(labeled_path), "--scores", str(scores_path),
             "--grid", str(grid_path), "--n-train", "20", "--seed", "7", "--out", str(out_dir)]
        )
        assert code == 0
        text = (out_dir / "accuracy.txt").read_text()
        assert "train (n=20)" in text
        assert "validation (n=10)" in text


class TestStats:
    def test_writes_all_reports(self, corpus):
        tmp_path, scores_path, meta_path, _, meta = corpus
        labels_path = tmp_path / "labels.ndjson"
        main(["classify", "--scores", str(scores_path), "--out", str(labels_path)])
        out_dir = tmp_path / "reports"
        code = main(["stats", "--labels", str(labels_path), "--meta", str(meta_path), "--out", str(out_dir)])
        assert code == 0
        for name in (
            "frequency.tsv",
            "ttests.tsv",
            "chi_user.tsv",
            "chi_length.tsv",
            "duration_histogram.tsv",
            "report.txt",
            "report.json",
        ):
            assert (out_dir / name).exists(), name
        histogram = (out_dir / "duration_histogram.tsv").read_text().strip().splitlines()[1:]
        assert sum(int(line.split("\t")[1]) for line in histogram) == len(meta)

    def test_byte_identical_reruns(self, corpus):
        tmp_path, scores_path, meta_path, _, _ = corpus
        labels_path = tmp_path / "labels.ndjson"
        main(["classify", "--scores", str(scores_path), "--out", str(labels_path)])
        out1, out2 = tmp_path / "r1", tmp_path / "r2"
        main(["stats", "--labels", str(labels_path), "--meta", str(meta_path), "--out", str(out1)])
        main(["stats", "--labels", str(labels_path), "--meta", str(meta_path), "--out", str(out2)])
        for name in ("frequency.tsv", "ttests.tsv", "report.txt", "report.json"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_single_video_corpus_exits_zero(self, tmp_path):
        streams = {"only": random_stream(random.Random(1))}
        meta = [make_meta(video_id="only")]
        scores_path, meta_path = tmp_path / "s.ndjson", tmp_path / "m.ndjson"
        write_score_stream(scores_path, streams)
        write_corpus(meta_path, meta)
        labels_path = tmp_path / "l.ndjson"
        main(["classify", "--scores", str(scores_path), "--out", str(labels_path)])
        out_dir = tmp_path / "reports"
        assert main(["stats", "--labels", str(labels_path), "--meta", str(meta_path), "--out", str(out_dir)]) == 0
        assert "insufficient n" in (out_dir / "report.txt").read_text()

    def test_join_failure_names_orphan(self, corpus, capsys):
        tmp_path, scores_path, meta_path, _, meta = corpus
        labels_path = tmp_path / "labels.ndjson"
        main(["classify", "--scores", str(scores_path), "--out", str(labels_path)])
        write_corpus(meta_path, meta + [make_meta(video_id="orphan")])
        code = main(["stats", "--labels", str(labels_path), "--meta", str(meta_path), "--out", str(tmp_path / "r")])
        assert code == 1
        assert "orphan" in capsys.readouterr().err


class TestReplicateTables:
    def test_published_fixtures(self, tmp_path, capsys):
        out_dir = tmp_path / "repl"
        code = main(
            ["replicate-tables",
             "--summary", str(FIXTURES / "table2_summary.ndjson"),
             "--counts", str(FIXTURES / "table3_counts.ndjson"),
             "--out", str(out_dir)]
        )
        assert code == 0
        text = capsys.readouterr().out
        assert "within rounding" in text
        assert (out_dir / "replication.tsv").exists()
        assert (out_dir / "replication.txt").exists()

    def test_requires_some_input(self, capsys):
        assert main(["replicate-tables"]) == 1


class TestKappa:
    def test_reports_per_element(self, tmp_path, capsys):
        rng = random.Random(9)
        ids = [f"v{i}" for i in range(40)]
        a = [
            LabeledVideo(vid, oracle_classify(random_stream(rng), RuleConfig()))
            for vid in ids
        ]
        # second coder: mostly agrees
        from dataclasses import replace as dc_replace

        b = [
            LabeledVideo(v.video_id, dc_replace(v.gold, riot=not v.gold.riot) if rng.random() < 0.2 else v.gold)
            for v in a
        ]
        pa, pb = tmp_path / "a.ndjson", tmp_path / "b.ndjson"
        write_labeled(pa, a)
        write_labeled(pb, b)
        assert main(["kappa", "--coder-a", str(pa), "--coder-b", str(pb)]) == 0
        out = capsys.readouterr().out
        assert out.count("kappa=") == 5

    def test_disjoint_files_rejected(self, tmp_path, capsys):
        write_labeled(tmp_path / "a.ndjson", [LabeledVideo("x", oracle_classify([], RuleConfig()))])
        write_labeled(tmp_path / "b.ndjson", [LabeledVideo("y", oracle_classify([], RuleConfig()))])
        assert main(["kappa", "--coder-a", str(tmp_path / "a.ndjson"), "--coder-b", str(tmp_path / "b.ndjson")]) == 1


class TestSampleFrames:
    def test_fake_tool_pipeline(self, tmp_path, capsys):
        ffprobe = tmp_path / "fp"
        ffprobe.write_text(FAKE_FFPROBE.format(duration="4.2"))
        ffprobe.chmod(0o755)
        ffmpeg = tmp_path / "fm"
        ffmpeg.write_text(FAKE_FFMPEG)
        ffmpeg.chmod(0o755)
        video = tmp_path / "clip.mp4"
        video.write_bytes(b"\x00")
        code = main(
            ["sample-frames", str(video), "--ffmpeg", str(ffmpeg), "--ffprobe", str(ffprobe),
             "--out", str(tmp_path / "frames")]
        )
        assert code == 0
        assert "sampled 4 frame(s)" in capsys.readouterr().out

    def test_missing_tool_is_input_error(self, tmp_path, capsys):
        video = tmp_path / "clip.mp4"
        video.write_bytes(b"\x00")
        code = main(["sample-frames", str(video), "--ffprobe", "/missing/ffprobe", "--out", str(tmp_path / "f")])
        assert code == 1
        assert "not found" in capsys.readouterr().err
