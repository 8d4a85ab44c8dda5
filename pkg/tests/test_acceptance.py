"""Top-level acceptance gates.

Each test checks one headline guarantee end to end and prints a single
PASS/FAIL line (visible even under capture) so a full run reads as a
checklist.  Tolerances and runtime budgets are asserted, not just logged.
"""

import dataclasses
import json
import math
import random
import time
from pathlib import Path

import pytest

from facegraph import io as fio
from facegraph.cli import main as cli_main
from facegraph.clustering import Clustering, PipelineConfig, cluster_initial
from facegraph.curation import CurationAction, SessionStore, replay, states_equal
from facegraph.errors import (
    CannotLinkError,
    CurationError,
    InvalidActionError,
    StaleTargetError,
)
from facegraph.evaluation import (
    evaluate,
    pair_confusion,
    precision_recall_f1,
    rs_score,
    top_participants,
)
from facegraph.graph import discover_graph
from facegraph.pipeline import ABLATION_OPS, run_pipeline
from facegraph.preprocess import filter_faces
from facegraph.records import GroundTruth
from facegraph.synth import SynthConfig, generate_synthetic_event

from conftest import EASY_CONFIG, NOISY_CONFIG


def report(capsys, name: str, ok: bool, detail: str = "") -> None:
    tail = f" ({detail})" if detail else ""
    with capsys.disabled():
        print(f"\n[{'PASS' if ok else 'FAIL'}] {name}{tail}")
    assert ok, f"{name}{tail}"


def test_metric_oracle_equivalence(capsys):
    """Contingency-table metrics equal explicit pair enumeration, exactly."""

    def enumerate_pairs(clustering, truth):
        # independent oracle: count every pair, the slow way
        universe = sorted(
            f for f in truth.label_of if f not in clustering.rejected
        )
        label = truth.label_of
        assign = clustering.assignment
        tp = fp = fn = tn = 0
        for i in range(len(universe)):
            for j in range(i + 1, len(universe)):
                a, b = universe[i], universe[j]
                same_truth = label[a] == label[b]
                ca, cb = assign.get(a), assign.get(b)
                same_cluster = ca is not None and ca == cb
                if same_cluster and same_truth:
                    tp += 1
                elif same_cluster:
                    fp += 1
                elif same_truth:
                    fn += 1
                else:
                    tn += 1
        return tp, fp, fn, tn

    start = time.perf_counter()
    instances = 0
    for ds_seed in range(12):
        config = SynthConfig(
            n_participants=6 + (ds_seed % 5) * 3,
            n_images=50 + ds_seed * 3,
            separation=(3.0, 8.0, 25.0)[ds_seed % 3],
            low_quality_prob=(0.0, 0.1, 0.2)[ds_seed % 3],
            duplicate_rate=(0.0, 0.1)[ds_seed % 2],
            burst_length=(1, 3)[ds_seed % 2],
            seed=ds_seed,
        )
        result = generate_synthetic_event(config)
        dataset, truth = result.dataset, result.truth
        assert len(dataset.faces) <= 500
        kept, rejected = filter_faces(dataset, 0.3)

        variants = []
        for eps in (30.0, 50.0, 80.0):
            variants.append(PipelineConfig(algorithm="dbscan", eps=eps))
        for k in (config.n_participants, max(2, config.n_participants // 2), config.n_participants + 5):
            variants.append(PipelineConfig(algorithm="kmeans", n_clusters=k))
        for seed in (0, 1, 2):
            variants.append(
                PipelineConfig(algorithm="random", n_clusters=config.n_participants, seed=seed)
            )

        for i, variant in enumerate(variants):
            # alternate the universe: half the instances reject blurry faces
            if i % 2:
                clustering = cluster_initial(
                    dataset, variant, participating=kept, rejected=rejected
                )
            else:
                clustering = cluster_initial(
                    dataset, variant, participating=dataset.face_ids, rejected=frozenset()
                )
            confusion = pair_confusion(clustering, truth)
            expected = enumerate_pairs(clustering, truth)
            assert (confusion.tp, confusion.fp, confusion.fn, confusion.tn) == expected
            instances += 1
    elapsed = time.perf_counter() - start
    report(
        capsys,
        "metric oracle equivalence",
        instances >= 100 and elapsed < 60.0,
        f"{instances} instances exact in {elapsed:.1f}s",
    )


def test_hand_checked_confusion(capsys):
    """Truth {a,b|c} vs predicted {a,b,c}: p=1/3, r=1, F1=0.5."""
    truth = GroundTruth({"t1": {"a", "b"}, "t2": {"c"}})
    predicted = Clustering(
        clusters={"c1": frozenset({"a", "b", "c"})},
        unassigned=frozenset(),
        rejected=frozenset(),
    )
    p, r, f1 = precision_recall_f1(pair_confusion(predicted, truth))
    ok = (p, r, f1) == (1 / 3, 1.0, 0.5)
    report(capsys, "hand-checked confusion", ok, f"p={p} r={r} f1={f1}")


def test_cannot_link_invariant(capsys):
    """No cluster ever holds two faces from the same image, on any seed."""
    violations = 0
    for seed in range(10):
        config = dataclasses.replace(NOISY_CONFIG, seed=seed)
        result = generate_synthetic_event(config)
        clustering = run_pipeline(result.dataset, PipelineConfig())
        by_id = result.dataset.faces_by_id
        for members in clustering.clusters.values():
            images = [by_id[f].image_id for f in members]
            violations += len(images) - len(set(images))
    report(capsys, "cannot-link invariant", violations == 0, f"{violations} violations over 10 seeds")


def test_easy_regime_recovery(capsys, easy_event):
    """Well-separated, clean event: near-perfect pairwise F1, everyone found."""
    start = time.perf_counter()
    ds, truth = easy_event.dataset, easy_event.truth
    clustering = run_pipeline(ds, PipelineConfig())
    rep = evaluate(clustering, truth, ds)
    elapsed = time.perf_counter() - start
    ok = rep.f1 >= 0.95 and rep.rs == 1.0 and elapsed < 30.0
    report(
        capsys,
        "easy-regime recovery",
        ok,
        f"f1={rep.f1:.4f} rs={rep.rs:.2f} in {elapsed:.1f}s",
    )


def test_ablation_direction(capsys):
    """Every cleanup operation earns its keep on noisy data, on all 10 seeds."""
    all_off = {op: False for op in ABLATION_OPS}
    worst = []
    ok = True
    for seed in range(10):
        config = dataclasses.replace(NOISY_CONFIG, seed=seed)
        result = generate_synthetic_event(config)
        ds, truth = result.dataset, result.truth

        def f1_of(pipe_config):
            clustering = run_pipeline(ds, pipe_config)
            _, _, f1 = precision_recall_f1(pair_confusion(clustering, truth))
            return f1

        full = f1_of(PipelineConfig())
        dbscan_only = f1_of(PipelineConfig(**all_off))
        random_full = f1_of(PipelineConfig(algorithm="random", n_clusters=50))
        random_only = f1_of(PipelineConfig(algorithm="random", n_clusters=50, **all_off))
        ok = ok and full >= dbscan_only and random_full > random_only
        worst.append((full - dbscan_only, random_full - random_only))
    margins = (min(m[0] for m in worst), min(m[1] for m in worst))
    report(
        capsys,
        "ablation direction",
        ok,
        f"min margins over 10 seeds: full-vs-dbscan {margins[0]:+.3f}, random+ops-vs-random {margins[1]:+.3f}",
    )


def test_graph_recovery(capsys, easy_event):
    """Perfect clusters recover the planted connection graph exactly;
    the pipeline's own clusters recover at least 90% of its edges."""
    ds, truth, planted = easy_event.dataset, easy_event.truth, easy_event.planted_graph

    perfect = Clustering(
        clusters=dict(truth.identities),
        unassigned=ds.face_ids - truth.all_faces,
        rejected=frozenset(),
    )
    g = discover_graph(perfect, ds)
    discovered = {pair for pair in g.edges}
    planted_edges = set(planted.edges)
    edge_tp = len(discovered & planted_edges)
    edge_precision = edge_tp / len(discovered) if discovered else 1.0
    edge_recall = edge_tp / len(planted_edges) if planted_edges else 1.0
    weights_match = all(
        len(g.edges[pair]) == planted.edges[pair] for pair in discovered & planted_edges
    )

    clustering = run_pipeline(ds, PipelineConfig())
    g2 = discover_graph(clustering, ds)
    face_truth = {f.face_id: f.ground_truth_id for f in ds.faces}
    mapped = set()
    for a, b in g2.edges:
        pa = _majority(face_truth, clustering.clusters[a])
        pb = _majority(face_truth, clustering.clusters[b])
        if pa != pb:
            mapped.add(tuple(sorted((pa, pb))))
    pipeline_recall = len(mapped & planted_edges) / len(planted_edges)

    ok = edge_precision == 1.0 and edge_recall == 1.0 and weights_match and pipeline_recall >= 0.9
    report(
        capsys,
        "graph recovery",
        ok,
        f"perfect p={edge_precision:.2f} r={edge_recall:.2f} weights={'=' if weights_match else '!'}; "
        f"pipeline recall={pipeline_recall:.3f}",
    )


def _majority(face_truth, members):
    counts = {}
    for f in members:
        t = face_truth.get(f)
        if t is not None:
            counts[t] = counts.get(t, 0) + 1
    return max(sorted(counts), key=counts.get)


def test_rs_boundary_behavior(capsys, easy_event):
    """Discovery-rate endpoints: 1.0 perfect, 0.0 empty, 0.7 after 3 corruptions."""
    ds, truth = easy_event.dataset, easy_event.truth
    perfect = Clustering(
        clusters={f"c{i}": v for i, v in enumerate(truth.identities.values())},
        unassigned=ds.face_ids - truth.all_faces,
        rejected=frozenset(),
    )
    rs_perfect = rs_score(perfect, truth, ds)

    nothing = Clustering(clusters={}, unassigned=ds.face_ids, rejected=frozenset())
    rs_nothing = rs_score(nothing, truth, ds)

    top = top_participants(truth, ds, k=10)
    clusters = {f"c_{pid}": set(faces) for pid, faces in truth.identities.items()}
    for n, pid in enumerate(top[:3]):
        members = clusters[f"c_{pid}"]
        strip = math.ceil(0.2 * len(members))
        moved = sorted(members)[:strip]
        members.difference_update(moved)
        clusters[f"junk{n}"] = set(moved)
    corrupted = Clustering(
        clusters={cid: frozenset(m) for cid, m in clusters.items()},
        unassigned=ds.face_ids - truth.all_faces,
        rejected=frozenset(),
    )
    rs_corrupt = rs_score(corrupted, truth, ds)

    ok = rs_perfect == 1.0 and rs_nothing == 0.0 and rs_corrupt == pytest.approx(0.7)
    report(
        capsys,
        "rs boundary behavior",
        ok,
        f"perfect={rs_perfect} empty={rs_nothing} corrupted={rs_corrupt}",
    )


GEN_TOML = """\
n_participants = 8
n_images = 60
separation = 25.0
low_quality_prob = 0.05
duplicate_rate = 0.1
burst_length = 2
seed = 4
"""


def test_cli_determinism(capsys, tmp_path):
    """Two runs of every command produce byte-identical artifacts.

    The clustering run manifest records wall-clock stage timings by design,
    so those two files are compared with timings stripped; every other
    artifact must match byte for byte.
    """

    def run_everything(root: Path) -> None:
        root.mkdir()
        cfg = root / "gen.toml"
        cfg.write_text(GEN_TOML)
        (root / "pipeline.toml").write_text("")
        assert cli_main(["generate", "--config", str(cfg), "--out", str(root / "event")]) == 0
        dataset = str(root / "event" / "dataset")
        assert (
            cli_main(
                [
                    "cluster",
                    "--dataset",
                    dataset,
                    "--config",
                    str(root / "pipeline.toml"),
                    "--out",
                    str(root / "clusters.json"),
                ]
            )
            == 0
        )
        assert (
            cli_main(
                [
                    "cluster",
                    "--dataset",
                    dataset,
                    "--config",
                    str(root / "pipeline.toml"),
                    "--out",
                    str(root / "sweep"),
                    "--ablation",
                ]
            )
            == 0
        )
        for fmt, name in (("json-nodelink", "graph.json"), ("dot", "graph.dot")):
            assert (
                cli_main(
                    [
                        "graph",
                        "--clustering",
                        str(root / "clusters.json"),
                        "--dataset",
                        dataset,
                        "--format",
                        fmt,
                        "--out",
                        str(root / name),
                    ]
                )
                == 0
            )
        for target, out in (("clusters.json", "report.json"), ("sweep", "sweep_report.json")):
            assert (
                cli_main(
                    [
                        "eval",
                        "--clustering",
                        str(root / target),
                        "--truth",
                        str(root / "event" / "truth.json"),
                        "--dataset",
                        dataset,
                        "--out",
                        str(root / out),
                    ]
                )
                == 0
            )

    run_everything(tmp_path / "a")
    run_everything(tmp_path / "b")

    compared = 0
    mismatched = []
    for path_a in sorted((tmp_path / "a").rglob("*")):
        if not path_a.is_file():
            continue
        rel = path_a.relative_to(tmp_path / "a")
        path_b = tmp_path / "b" / rel
        if path_a.name == "clusters.json.run.json":
            ma, mb = json.loads(path_a.read_text()), json.loads(path_b.read_text())
            ma.pop("timings_ms"), mb.pop("timings_ms")
            ma.pop("outputs"), mb.pop("outputs")  # embed their absolute paths
            if ma != mb:
                mismatched.append(str(rel))
        elif path_a.name == "run.json":
            ma, mb = json.loads(path_a.read_text()), json.loads(path_b.read_text())
            ma.pop("outputs"), mb.pop("outputs")
            if ma != mb:
                mismatched.append(str(rel))
        else:
            if path_a.read_bytes() != path_b.read_bytes():
                mismatched.append(str(rel))
        compared += 1
    ok = compared >= 25 and not mismatched
    report(
        capsys,
        "CLI determinism",
        ok,
        f"{compared} artifacts byte-compared" + (f", mismatched: {mismatched}" if mismatched else ""),
    )


def test_curation_replay(capsys, tmp_path):
    """200 random valid actions fold back exactly; every guard leaves state untouched."""
    config = SynthConfig(
        n_participants=30,
        n_images=150,
        separation=25.0,
        low_quality_prob=0.05,
        duplicate_rate=0.05,
        seed=11,
    )
    result = generate_synthetic_event(config)
    ds = result.dataset
    initial = run_pipeline(ds, PipelineConfig())
    fio.save_dataset(ds, tmp_path / "dataset")
    fio.save_clustering(initial, tmp_path / "clusters.json")
    store = SessionStore(tmp_path / "state")
    session = store.create(tmp_path / "dataset", tmp_path / "clusters.json")
    state = session.state

    rng = random.Random(7)
    by_id = ds.faces_by_id

    def conflict_free(a_members, b_members):
        images = [by_id[f].image_id for f in (*a_members, *b_members)]
        return len(images) == len(set(images))

    applied = 0
    while applied < 200:
        live = sorted(state.clusters)
        assert live, "action mix exhausted every cluster"
        kind = rng.choices(
            ("split_faces", "confirm_cluster", "merge_clusters", "reject_faces"),
            weights=(0.45, 0.35, 0.1, 0.1),
        )[0]
        action = None
        if kind == "split_faces":
            big = [c for c in live if len(state.clusters[c]) >= 2]
            if big:
                cid = rng.choice(big)
                members = sorted(state.clusters[cid])
                take = rng.randint(1, len(members) - 1)
                action = CurationAction(
                    kind=kind, cluster_id=cid, faces=tuple(rng.sample(members, take))
                )
        elif kind == "merge_clusters":
            if len(live) >= 2:
                for _ in range(8):
                    a, b = rng.sample(live, 2)
                    if conflict_free(state.clusters[a], state.clusters[b]):
                        action = CurationAction(kind=kind, cluster_id=a, other=b)
                        break
        elif kind == "reject_faces":
            cid = rng.choice(live)
            members = sorted(state.clusters[cid])
            take = rng.randint(1, len(members))
            action = CurationAction(
                kind=kind, cluster_id=cid, faces=tuple(rng.sample(members, take))
            )
        if action is None:
            action = CurationAction(kind="confirm_cluster", cluster_id=rng.choice(live))
        session.apply(action)
        applied += 1

    assert state.seq == 200
    rebuilt = replay(ds, initial, state.log)
    replay_ok = states_equal(state, rebuilt)

    reopened = SessionStore(tmp_path / "state").reopen(session.session_id)
    reopen_ok = states_equal(state, reopened.state)

    # guard battery: every invalid action must raise and change nothing
    def freeze():
        return (
            {c: frozenset(m) for c, m in state.clusters.items()},
            frozenset(state.unassigned),
            frozenset(state.rejected),
            dict(state.status),
            state.seq,
            len(state.log),
        )

    live = sorted(state.clusters)
    some = live[0]
    splittable = next(c for c in live if len(state.clusters[c]) >= 2)
    rejected_cid = next(
        (c for c, s in state.status.items() if s == "rejected" and c not in state.clusters),
        None,
    )
    conflicted = None
    for i, a in enumerate(live):
        for b in live[i + 1 :]:
            if not conflict_free(state.clusters[a], state.clusters[b]):
                conflicted = (a, b)
                break
        if conflicted:
            break

    guards = [
        (StaleTargetError, CurationAction(kind="confirm_cluster", cluster_id="no-such")),
        (
            StaleTargetError,
            CurationAction(kind="reject_faces", cluster_id=some, faces=("ghost-face",)),
        ),
        (InvalidActionError, CurationAction(kind="reject_faces", cluster_id=some)),
        (
            InvalidActionError,
            CurationAction(
                kind="split_faces",
                cluster_id=splittable,
                faces=tuple(sorted(state.clusters[splittable])),
            ),
        ),
        (InvalidActionError, CurationAction(kind="merge_clusters", cluster_id=some)),
        (InvalidActionError, CurationAction(kind="merge_clusters", cluster_id=some, other=some)),
    ]
    if rejected_cid is not None:
        guards.append(
            (StaleTargetError, CurationAction(kind="confirm_cluster", cluster_id=rejected_cid))
        )
    if conflicted is not None:
        guards.append(
            (
                CannotLinkError,
                CurationAction(kind="merge_clusters", cluster_id=conflicted[0], other=conflicted[1]),
            )
        )

    guards_ok = True
    for exc_type, bad_action in guards:
        before = freeze()
        with pytest.raises(exc_type):
            state.apply(bad_action)
        guards_ok = guards_ok and freeze() == before
    with pytest.raises(InvalidActionError):
        CurationAction(kind="not-a-kind", cluster_id=some)

    ok = replay_ok and reopen_ok and guards_ok
    report(
        capsys,
        "curation replay",
        ok,
        f"200 actions, replay={'=' if replay_ok else '!'} reopen={'=' if reopen_ok else '!'}, "
        f"{len(guards)} guards checked",
    )
