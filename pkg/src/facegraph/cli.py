"""Command-line entry point: generate, cluster, graph, eval."""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import logging
import os
import sys
from pathlib import Path

from . import io as fio
from .clustering import PipelineConfig
from .errors import ConfigError, EvaluationError, FaceGraphError, ParseError
from .evaluation import evaluate, reports_to_csv, EvalReport
from .graph import EXPORT_FORMATS, discover_graph, export_graph
from .pipeline import ablation_rows, run_pipeline
from .synth import SynthConfig, generate_synthetic_event

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2


def _dataset_hash(dataset_dir: Path) -> str:
    h = hashlib.sha256()
    for name in (fio.MANIFEST_NAME, fio.FACES_NAME):
        h.update((dataset_dir / name).read_bytes())
    return h.hexdigest()


def cmd_generate(args: argparse.Namespace) -> int:
    config = SynthConfig.from_mapping(fio.load_toml(args.config))
    result = generate_synthetic_event(config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    fio.save_dataset(result.dataset, out / "dataset")
    fio.save_ground_truth(result.truth, out / "truth.json")
    fio.save_planted_graph(result.planted_graph, out / "planted_graph.json")
    print(
        f"generated event {result.dataset.event_id!r}: "
        f"{len(result.dataset.faces)} faces, {len(result.dataset.images)} images, "
        f"{len(result.truth.identities)} participants, "
        f"{len(result.planted_graph.edges)} planted connections"
    )
    print(f"wrote {out / 'dataset'}, {out / 'truth.json'}, {out / 'planted_graph.json'}")
    return EXIT_OK


def cmd_cluster(args: argparse.Namespace) -> int:
    dataset = fio.load_dataset(args.dataset)
    config = PipelineConfig.from_mapping(fio.load_toml(args.config))
    out = Path(args.out)

    if args.ablation:
        out.mkdir(parents=True, exist_ok=True)
        outputs = []
        for label, row_config in ablation_rows(config):
            clustering = run_pipeline(dataset, row_config)
            path = out / f"{label}.json"
            fio.save_clustering(clustering, path)
            outputs.append(str(path))
            print(f"{label}: {len(clustering.clusters)} clusters")
        manifest = {
            "config": dataclasses.asdict(config),
            "dataset_hash": _dataset_hash(Path(args.dataset)),
            "seed": config.seed,
            "outputs": outputs,
        }
        (out / "run.json").write_text(json.dumps(manifest, indent=2) + "\n")
        return EXIT_OK

    timings: dict[str, float] = {}
    clustering = run_pipeline(dataset, config, timings=timings)
    out.parent.mkdir(parents=True, exist_ok=True)
    fio.save_clustering(clustering, out)
    manifest = {
        "config": dataclasses.asdict(config),
        "dataset_hash": _dataset_hash(Path(args.dataset)),
        "seed": config.seed,
        "timings_ms": timings,
        "outputs": [str(out)],
    }
    manifest_path = out.with_name(out.name + ".run.json")
    manifest_path.write_text(json.dumps(manifest, indent=2) + "\n")
    print(
        f"clustered {len(dataset.faces)} faces into {len(clustering.clusters)} clusters "
        f"({len(clustering.unassigned)} unassigned, {len(clustering.rejected)} rejected)"
    )
    return EXIT_OK


def cmd_graph(args: argparse.Namespace) -> int:
    clustering = fio.load_clustering(args.clustering)
    dataset = fio.load_dataset(args.dataset)
    graph = discover_graph(clustering, dataset)
    text = export_graph(graph, args.format, min_weight=args.min_weight)
    Path(args.out).write_text(text)
    print(f"graph: {len(graph.nodes)} nodes, {len(graph.edges)} edges -> {args.out}")
    return EXIT_OK


def _report_unlabeled(clustering, truth) -> None:
    """Surface faces the ground truth says nothing about.

    Such faces are excluded from the evaluation universe; when every face is
    unlabeled the evaluation itself fails, and the error should name offenders.
    """
    labeled = {f for faces in truth.identities.values() for f in faces}
    unlabeled = sorted(clustering.all_faces - labeled)
    if not unlabeled:
        return
    sample = ", ".join(unlabeled[:5])
    suffix = f" (+{len(unlabeled) - 5} more)" if len(unlabeled) > 5 else ""
    if len(unlabeled) == len(clustering.all_faces):
        raise EvaluationError(f"no face has a truth label; first missing: {sample}{suffix}")
    log.warning("%d faces lack truth labels and are skipped: %s%s", len(unlabeled), sample, suffix)


def cmd_eval(args: argparse.Namespace) -> int:
    truth = fio.load_ground_truth(args.truth)
    dataset = fio.load_dataset(args.dataset)
    clustering_path = Path(args.clustering)

    if clustering_path.is_dir():
        rows = []
        for path in sorted(clustering_path.glob("*.json")):
            if path.name == "run.json":
                continue
            clustering = fio.load_clustering(path)
            _report_unlabeled(clustering, truth)
            rows.append(evaluate(clustering, truth, dataset, label=path.stem))
        if not rows:
            raise ParseError(f"no clustering files found in {clustering_path}")
        head = next((r for r in rows if r.label == "full"), rows[-1])
        report = EvalReport(
            label=head.label,
            precision=head.precision,
            recall=head.recall,
            f1=head.f1,
            rs=head.rs,
            confusion=head.confusion,
            rows=tuple(rows),
        )
    else:
        clustering = fio.load_clustering(clustering_path)
        _report_unlabeled(clustering, truth)
        report = evaluate(clustering, truth, dataset, label=clustering_path.stem)

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(report.to_json())
    csv_path = out.with_suffix(".csv")
    csv_path.write_text(reports_to_csv([report]))
    shown = report.rows if report.rows else (report,)
    for row in shown:
        print(
            f"{row.label}: precision={row.precision:.4f} recall={row.recall:.4f} "
            f"f1={row.f1:.4f} rs={row.rs:.4f}"
        )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="facegraph",
        description="Cluster event-photo faces and discover who appears together.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate a synthetic labeled event")
    p.add_argument("--config", required=True, help="generator config (TOML)")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("cluster", help="run the clustering pipeline on a dataset")
    p.add_argument("--dataset", required=True, help="dataset directory")
    p.add_argument("--config", required=True, help="pipeline config (TOML)")
    p.add_argument("--out", required=True, help="clustering output path (directory with --ablation)")
    p.add_argument(
        "--ablation",
        action="store_true",
        help="write one clustering per ablation row instead of a single run",
    )
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("graph", help="build the co-occurrence graph from a clustering")
    p.add_argument("--clustering", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--format", default="json-nodelink", choices=EXPORT_FORMATS)
    p.add_argument("--min-weight", type=int, default=1, help="drop edges below this weight")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("eval", help="score a clustering against ground truth")
    p.add_argument("--clustering", required=True, help="clustering file, or ablation directory")
    p.add_argument("--truth", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True, help="report path (.json; .csv written alongside)")
    p.set_defaults(func=cmd_eval)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(
        level=os.environ.get("FACEGRAPH_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 on --help; pass both through
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ParseError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FaceGraphError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
