"""Command-line front end.

Subcommands: classify, calibrate, stats, replicate-tables, sample-frames,
kappa. Exit codes: 0 on success, 1 for any input problem, 2 for an internal
invariant violation.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import calibrate as cal
from . import ingest, report
from .datamodel import DataError, RuleConfig
from .rules import classify_batch


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, default=None, help="rule-config JSON file")
    parser.add_argument("--seed", type=int, default=0, help="seed for sampling/splitting")
    parser.add_argument("--out", type=Path, default=None, help="output file or directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="protestframes",
        description="Classify score streams into protest visual frames and report the statistics",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="label every video in a score-stream file")
    p.add_argument("--scores", type=Path, required=True, help="score-stream file")
    p.add_argument("--meta", type=Path, default=None, help="restrict to this metadata file")
    p.add_argument("--workers", type=int, default=None)
    _add_common(p)

    p = sub.add_parser("calibrate", help="grid-search rule parameters against gold labels")
    p.add_argument("--labeled", type=Path, default=None, help="gold-label file")
    p.add_argument("--scores", type=Path, required=True)
    p.add_argument("--grid", type=Path, default=None, help="grid-spec JSON file")
    p.add_argument("--n-train", type=int, default=None, help="train size; rest validates")
    p.add_argument(
        "--propose-sample",
        type=int,
        default=None,
        metavar="K",
        help="instead of fitting, stratified-sample K videos to annotate",
    )
    p.add_argument("--min-prevalence", type=float, default=0.25)
    _add_common(p)

    p = sub.add_parser("stats", help="frequency, t-test and crosstab reports for a labeled corpus")
    p.add_argument("--labels", type=Path, required=True, help="labels file (classify output)")
    p.add_argument("--meta", type=Path, required=True)
    _add_common(p)

    p = sub.add_parser(
        "replicate-tables", help="recompute statistics from published summaries/counts"
    )
    p.add_argument("--summary", type=Path, default=None, help="published group summaries")
    p.add_argument("--counts", type=Path, default=None, help="published contingency counts")
    _add_common(p)

    p = sub.add_parser("sample-frames", help="extract one JPEG per second from a video")
    p.add_argument("video", type=Path)
    p.add_argument("--ffmpeg", default="ffmpeg")
    p.add_argument("--ffprobe", default="ffprobe")
    _add_common(p)

    p = sub.add_parser("kappa", help="intercoder reliability between two gold-label files")
    p.add_argument("--coder-a", type=Path, required=True)
    p.add_argument("--coder-b", type=Path, required=True)
    _add_common(p)

    return parser


def _load_config(path: Path | None) -> RuleConfig:
    return ingest.load_rule_config(path) if path is not None else RuleConfig()


def _cmd_classify(args) -> int:
    cfg = _load_config(args.config)
    streams = ingest.read_score_stream(args.scores)
    if args.meta is not None:
        corpus = ingest.dedupe(ingest.load_corpus(args.meta))
        missing = [m.video_id for m in corpus if m.video_id not in streams]
        if missing:
            raise DataError(f"no score stream for video(s): {', '.join(missing[:10])}")
        ordered = {m.video_id: streams[m.video_id] for m in corpus}
    else:
        ordered = streams
    labels = classify_batch(ordered, cfg, workers=args.workers)
    out = args.out if args.out is not None else Path("labels.ndjson")
    ingest.write_labels(out, labels)
    print(f"classified {len(labels)} video(s) -> {out}")
    return 0


def _cmd_calibrate(args) -> int:
    base = _load_config(args.config)
    streams = ingest.read_score_stream(args.scores)
    out_dir = args.out if args.out is not None else Path(".")

    if args.propose_sample is not None:
        provisional = classify_batch(streams, base)
        ids = cal.stratified_sample(
            list(streams), provisional, args.propose_sample, args.min_prevalence, args.seed
        )
        out_dir.mkdir(parents=True, exist_ok=True)
        ingest.write_text_atomic(out_dir / "sample_ids.txt", "".join(i + "\n" for i in ids))
        print(f"proposed {len(ids)} video(s) to annotate -> {out_dir / 'sample_ids.txt'}")
        return 0

    if args.labeled is None:
        raise DataError("--labeled is required unless --propose-sample is given")
    labeled = cal.read_labeled(args.labeled)
    if not labeled:
        raise DataError(f"{args.labeled}: no labeled videos")
    grid = cal.load_grid_spec(args.grid) if args.grid is not None else cal.default_grid()

    if args.n_train is not None:
        train, validation = cal.split(labeled, args.n_train, args.seed)
    else:
        train, validation = list(labeled), []

    best, train_report = cal.grid_search(train, streams, grid, base)

    out_dir.mkdir(parents=True, exist_ok=True)
    ingest.dump_rule_config(out_dir / "best_config.json", best)
    reports = {"train": train_report, "train_balanced": cal.evaluate(best, train, streams, balanced=True)}
    if validation:
        reports["validation"] = cal.evaluate(best, validation, streams)
        reports["validation_balanced"] = cal.evaluate(best, validation, streams, balanced=True)
    lines = []
    for name, rep in reports.items():
        per = ", ".join(f"{e}={rep.per_element[e]:.4f}" for e in cal.ELEMENTS)
        lines.append(f"{name} (n={rep.n}): overall={rep.overall:.4f} [{per}]")
    text = "\n".join(lines) + "\n"
    ingest.write_text_atomic(out_dir / "accuracy.txt", text)
    report_obj = {
        name: {"n": rep.n, "balanced": rep.balanced, "overall": rep.overall,
               "per_element": dict(rep.per_element)}
        for name, rep in reports.items()
    }
    ingest.write_text_atomic(out_dir / "accuracy.json", json.dumps(report_obj, indent=2) + "\n")
    sys.stdout.write(text)
    print(f"best config -> {out_dir / 'best_config.json'}")
    return 0


def _cmd_stats(args) -> int:
    labels = ingest.read_labels(args.labels)
    meta = ingest.dedupe(ingest.load_corpus(args.meta))
    bundle = report.build_report(labels, meta)
    out_dir = args.out if args.out is not None else Path(".")
    out_dir.mkdir(parents=True, exist_ok=True)
    user_names = [tier.value for tier in report.USER_TIER_ORDER]
    length_names = [bin_.value for bin_ in report.LENGTH_BIN_ORDER]
    ingest.write_text_atomic(out_dir / "frequency.tsv", report.render_frequency_tsv(bundle))
    ingest.write_text_atomic(out_dir / "ttests.tsv", report.render_ttests_tsv(bundle))
    ingest.write_text_atomic(
        out_dir / "chi_user.tsv", report.render_chi_tsv(bundle.chi_user, user_names)
    )
    ingest.write_text_atomic(
        out_dir / "chi_length.tsv", report.render_chi_tsv(bundle.chi_length, length_names)
    )
    ingest.write_text_atomic(out_dir / "duration_histogram.tsv", report.render_histogram_tsv(bundle))
    ingest.write_text_atomic(out_dir / "report.txt", report.render_report_text(bundle))
    ingest.write_text_atomic(out_dir / "report.json", report.bundle_to_json(bundle))
    print(f"reports for {bundle.n} video(s) -> {out_dir}")
    return 0


def _cmd_replicate(args) -> int:
    if args.summary is None and args.counts is None:
        raise DataError("need --summary and/or --counts")
    rows = report.read_summary_rows(args.summary) if args.summary is not None else []
    blocks = report.read_counts_blocks(args.counts) if args.counts is not None else []
    text = report.render_replication_text(rows, blocks)
    out_dir = args.out
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        ingest.write_text_atomic(out_dir / "replication.txt", text)
        ingest.write_text_atomic(
            out_dir / "replication.tsv", report.render_replication_tsv(rows, blocks)
        )
    sys.stdout.write(text)
    return 0


def _cmd_sample_frames(args) -> int:
    out_dir = args.out if args.out is not None else Path("frames")
    images = ingest.sample_frames(args.video, out_dir, ffmpeg=args.ffmpeg, ffprobe=args.ffprobe)
    print(f"sampled {len(images)} frame(s) from {args.video}")
    return 0


def _cmd_kappa(args) -> int:
    coder_a = {v.video_id: v.gold for v in cal.read_labeled(args.coder_a)}
    coder_b = {v.video_id: v.gold for v in cal.read_labeled(args.coder_b)}
    shared = sorted(set(coder_a) & set(coder_b))
    if not shared:
        raise DataError("the two coder files share no video ids")
    only_a = sorted(set(coder_a) - set(coder_b))
    only_b = sorted(set(coder_b) - set(coder_a))
    if only_a or only_b:
        raise DataError(
            f"coder files must label the same videos (only in a: {only_a[:5]}, "
            f"only in b: {only_b[:5]})"
        )
    lines = []
    for element in cal.ELEMENTS:
        a = [cal.gold_value(coder_a[vid], element) for vid in shared]
        b = [cal.gold_value(coder_b[vid], element) for vid in shared]
        result = cal.cohen_kappa(a, b)
        lines.append(
            f"{element}\tkappa={result.kappa:.4f}\tp_o={result.observed_agreement:.4f}"
            f"\tp_e={result.expected_agreement:.4f}"
        )
    text = "\n".join(lines) + "\n"
    if args.out is not None:
        ingest.write_text_atomic(args.out, text)
    sys.stdout.write(text)
    return 0


_COMMANDS = {
    "classify": _cmd_classify,
    "calibrate": _cmd_calibrate,
    "stats": _cmd_stats,
    "replicate-tables": _cmd_replicate,
    "sample-frames": _cmd_sample_frames,
    "kappa": _cmd_kappa,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: file not found: {exc.filename or exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # pragma: no cover - invariant violations
        print(f"internal error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
