"""Metric correctness: confusion counts, derived scores, discovery rate."""

import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from facegraph.clustering import Clustering, PipelineConfig
from facegraph.errors import EvaluationError
from facegraph.evaluation import (
    EvalReport,
    PairConfusion,
    brute_force_pair_metrics,
    evaluate,
    jaccard_match,
    pair_confusion,
    parse_report_csv,
    precision_recall_f1,
    reports_to_csv,
    rs_score,
    top_participants,
)
from facegraph.pipeline import run_pipeline
from facegraph.records import GroundTruth

from conftest import build_event


def clustering_from(clusters, unassigned=(), rejected=()):
    return Clustering(
        clusters={cid: frozenset(m) for cid, m in clusters.items()},
        unassigned=frozenset(unassigned),
        rejected=frozenset(rejected),
    )


class TestPairConfusion:
    def test_hand_counted_overmerge(self):
        # one cluster holding two identities: the (f1,f2) pair is the only
        # true positive, both cross pairs are false positives
        truth = GroundTruth({"t1": {"f1", "f2"}, "t2": {"f3"}})
        clustering = clustering_from({"c1": {"f1", "f2", "f3"}})
        c = pair_confusion(clustering, truth)
        assert (c.tp, c.fp, c.fn, c.tn) == (1, 2, 0, 0)
        p, r, f1 = precision_recall_f1(c)
        assert (p, r, f1) == (1 / 3, 1.0, 0.5)

    def test_all_singletons_miss_every_true_pair(self):
        truth = GroundTruth({"t1": {"f1", "f2", "f3"}})
        clustering = clustering_from({"c1": {"f1"}, "c2": {"f2"}, "c3": {"f3"}})
        c = pair_confusion(clustering, truth)
        assert (c.tp, c.fp, c.fn, c.tn) == (0, 0, 3, 0)
        p, r, f1 = precision_recall_f1(c)
        assert (p, r, f1) == (1.0, 0.0, 0.0)

    def test_perfect_clustering(self):
        truth = GroundTruth({"t1": {"f1", "f2"}, "t2": {"f3", "f4"}})
        clustering = clustering_from({"a": {"f1", "f2"}, "b": {"f3", "f4"}})
        c = pair_confusion(clustering, truth)
        assert (c.tp, c.fp, c.fn, c.tn) == (2, 0, 0, 4)
        assert precision_recall_f1(c) == (1.0, 1.0, 1.0)

    def test_unassigned_faces_act_as_singletons(self):
        truth = GroundTruth({"t1": {"f1", "f2"}})
        clustering = clustering_from({"c1": {"f1"}}, unassigned={"f2"})
        c = pair_confusion(clustering, truth)
        assert (c.tp, c.fp, c.fn, c.tn) == (0, 0, 1, 0)

    def test_rejected_faces_leave_the_universe(self):
        truth = GroundTruth({"t1": {"f1", "f2"}})
        clustering = clustering_from({"c1": {"f1"}}, rejected={"f2"})
        c = pair_confusion(clustering, truth)
        assert c.total == 0
        assert precision_recall_f1(c) == (1.0, 1.0, 1.0)

    def test_unlabeled_faces_leave_the_universe(self):
        # f3 is clustered but carries no truth label: no pair involving it counts
        truth = GroundTruth({"t1": {"f1", "f2"}})
        clustering = clustering_from({"c1": {"f1", "f2", "f3"}})
        c = pair_confusion(clustering, truth)
        assert (c.tp, c.fp, c.fn, c.tn) == (1, 0, 0, 0)

    def test_every_rejected_face_raises(self):
        truth = GroundTruth({"t1": {"f1", "f2"}})
        clustering = clustering_from({}, rejected={"f1", "f2"})
        with pytest.raises(EvaluationError, match="rejected"):
            pair_confusion(clustering, truth)

    def test_empty_truth_raises(self):
        clustering = clustering_from({"c1": {"f1"}})
        with pytest.raises(EvaluationError):
            pair_confusion(clustering, GroundTruth({}))

    def test_total_is_all_universe_pairs(self):
        truth = GroundTruth({"t1": {"f1", "f2", "f3"}, "t2": {"f4", "f5"}})
        clustering = clustering_from({"a": {"f1", "f4"}, "b": {"f2", "f5"}}, unassigned={"f3"})
        c = pair_confusion(clustering, truth)
        assert c.total == math.comb(5, 2)

    def test_negative_counts_rejected(self):
        with pytest.raises(EvaluationError, match="negative"):
            PairConfusion(tp=-1, fp=0, fn=0, tn=0)


class TestDualRouteEquivalence:
    def _random_instance(self, rng):
        n = rng.randint(2, 14)
        faces = [f"f{i}" for i in range(n)]
        truth_ids = [f"t{rng.randint(0, 3)}" for _ in faces]
        identities: dict[str, set[str]] = {}
        for fid, tid in zip(faces, truth_ids):
            identities.setdefault(tid, set()).add(fid)
        clusters: dict[str, set[str]] = {}
        unassigned = set()
        rejected = set()
        for fid in faces:
            roll = rng.random()
            if roll < 0.15:
                unassigned.add(fid)
            elif roll < 0.25:
                rejected.add(fid)
            else:
                clusters.setdefault(f"c{rng.randint(0, 3)}", set()).add(fid)
        truth = GroundTruth(identities)
        clustering = clustering_from(clusters, unassigned, rejected)
        return clustering, truth

    def test_contingency_equals_explicit_enumeration(self):
        rng = random.Random(17)
        checked = 0
        while checked < 12:
            clustering, truth = self._random_instance(rng)
            if truth.all_faces <= clustering.rejected:
                continue
            fast = precision_recall_f1(pair_confusion(clustering, truth))
            slow = brute_force_pair_metrics(clustering, truth)
            assert fast == slow
            checked += 1

    @settings(max_examples=60, deadline=None)
    @given(st.data())
    def test_routes_agree_on_arbitrary_partitions(self, data):
        n = data.draw(st.integers(min_value=1, max_value=10))
        faces = [f"f{i}" for i in range(n)]
        truth_label = data.draw(
            st.lists(st.integers(0, 2), min_size=n, max_size=n)
        )
        cluster_label = data.draw(
            st.lists(st.integers(-1, 2), min_size=n, max_size=n)
        )
        identities: dict[str, set[str]] = {}
        for fid, t in zip(faces, truth_label):
            identities.setdefault(f"t{t}", set()).add(fid)
        clusters: dict[str, set[str]] = {}
        unassigned = set()
        for fid, c in zip(faces, cluster_label):
            if c < 0:
                unassigned.add(fid)
            else:
                clusters.setdefault(f"c{c}", set()).add(fid)
        truth = GroundTruth(identities)
        clustering = clustering_from(clusters, unassigned)
        fast = precision_recall_f1(pair_confusion(clustering, truth))
        slow = brute_force_pair_metrics(clustering, truth)
        assert fast == slow

    def test_correcting_a_face_never_lowers_tp(self):
        # moving f3 into the cluster holding the rest of its identity
        truth = GroundTruth({"t1": {"f1", "f2", "f3"}, "t2": {"f4"}})
        before = clustering_from({"a": {"f1", "f2"}, "b": {"f3", "f4"}})
        after = clustering_from({"a": {"f1", "f2", "f3"}, "b": {"f4"}})
        assert pair_confusion(after, truth).tp > pair_confusion(before, truth).tp


class TestJaccard:
    def test_identical_sets_match(self):
        assert jaccard_match({"a", "b"}, {"a", "b"}) == 1

    def test_two_of_three_fails(self):
        assert jaccard_match({"a", "b", "c"}, {"a", "b"}) == 0

    def test_disjoint_fails(self):
        assert jaccard_match({"a"}, {"b"}) == 0

    def test_threshold_is_strict_at_exactly_point_eight(self):
        # |A∩B|=4, |A∪B|=5 -> J = 0.8 exactly: not a match
        a = {"f1", "f2", "f3", "f4"}
        b = {"f1", "f2", "f3", "f4", "f5"}
        assert jaccard_match(a, b) == 0

    def test_just_above_threshold_matches(self):
        # |A∩B|=5, |A∪B|=6 -> J ≈ 0.833
        a = {"f1", "f2", "f3", "f4", "f5"}
        b = {"f1", "f2", "f3", "f4", "f5", "f6"}
        assert jaccard_match(a, b) == 1

    def test_custom_threshold(self):
        assert jaccard_match({"a", "b"}, {"a"}, t_j=0.4) == 1

    def test_empty_truth_set_rejected(self):
        with pytest.raises(EvaluationError, match="non-empty"):
            jaccard_match(set(), {"a"})


class TestTopParticipants:
    def test_ranked_by_degree_weight_then_id(self):
        # p1 meets p2 twice and p3 once; p2 and p3 tie on degree,
        # p2 wins on total weight
        ds = build_event(
            [
                ("i1", 0, [("a1", 0.0, 0.9, "p1"), ("b1", 50.0, 0.9, "p2")]),
                ("i2", 10, [("a2", 0.1, 0.9, "p1"), ("b2", 50.1, 0.9, "p2")]),
                ("i3", 20, [("a3", 0.2, 0.9, "p1"), ("c1", 99.0, 0.9, "p3")]),
            ]
        )
        truth = GroundTruth(
            {"p1": {"a1", "a2", "a3"}, "p2": {"b1", "b2"}, "p3": {"c1"}}
        )
        assert top_participants(truth, ds, k=3) == ["p1", "p2", "p3"]

    def test_k_truncates(self):
        ds = build_event(
            [("i1", 0, [("a1", 0.0, 0.9, "p1"), ("b1", 50.0, 0.9, "p2")])]
        )
        truth = GroundTruth({"p1": {"a1"}, "p2": {"b1"}})
        assert top_participants(truth, ds, k=1) == ["p1"]

    def test_empty_truth_gives_empty_ranking(self):
        ds = build_event([("i1", 0, [("a1", 0.0, 0.9)])])
        assert top_participants(GroundTruth({}), ds) == []


class TestRsScore:
    def test_perfect_clusters_discover_everyone(self, easy_event):
        ds, truth = easy_event.dataset, easy_event.truth
        clustering = clustering_from(
            {f"c{i}": faces for i, faces in enumerate(truth.identities.values())}
        )
        assert rs_score(clustering, truth, ds) == 1.0

    def test_nothing_assigned_discovers_nobody(self, easy_event):
        ds, truth = easy_event.dataset, easy_event.truth
        clustering = clustering_from({}, unassigned=ds.face_ids)
        assert rs_score(clustering, truth, ds) == 0.0

    def test_corrupting_three_of_top_ten_gives_point_seven(self, easy_event):
        ds, truth = easy_event.dataset, easy_event.truth
        top = top_participants(truth, ds, k=10)
        assert len(top) == 10
        clusters = {
            f"c_{pid}": set(faces) for pid, faces in truth.identities.items()
        }
        junk: dict[str, set[str]] = {}
        for n, pid in enumerate(top[:3]):
            members = clusters[f"c_{pid}"]
            strip = math.ceil(0.2 * len(members))
            moved = sorted(members)[:strip]
            members.difference_update(moved)
            junk[f"junk{n}"] = set(moved)
        clusters.update(junk)
        clustering = clustering_from(clusters)
        assert rs_score(clustering, truth, ds) == pytest.approx(0.7)

    def test_invariant_under_cluster_relabeling(self, easy_event):
        ds, truth = easy_event.dataset, easy_event.truth
        base = {f"c{i}": faces for i, faces in enumerate(sorted(truth.identities))}
        a = clustering_from(
            {f"c{i}": truth.identities[p] for i, p in enumerate(sorted(truth.identities))}
        )
        b = clustering_from(
            {f"zz{i}": truth.identities[p] for i, p in enumerate(sorted(truth.identities))}
        )
        assert rs_score(a, truth, ds) == rs_score(b, truth, ds)

    def test_vacuous_when_no_participants(self):
        ds = build_event([("i1", 0, [("f1", 0.0, 0.9)])])
        clustering = clustering_from({"c1": {"f1"}})
        assert rs_score(clustering, GroundTruth({}), ds) == 1.0

    def test_one_cluster_claims_only_one_participant(self):
        # a single giant cluster cannot match two participants even if its
        # jaccard against each were high; here it matches neither anyway,
        # and the one-to-one rule is exercised with twin participants
        ds = build_event(
            [
                ("i1", 0, [("a1", 0.0, 0.9, "p1"), ("b1", 50.0, 0.9, "p2")]),
                ("i2", 10, [("a2", 0.1, 0.9, "p1"), ("b2", 50.1, 0.9, "p2")]),
            ]
        )
        truth = GroundTruth({"p1": {"a1", "a2"}, "p2": {"b1", "b2"}})
        merged = clustering_from({"all": {"a1", "a2", "b1", "b2"}})
        assert rs_score(merged, truth, ds) == 0.0
        half = clustering_from({"x": {"a1", "a2"}, "y": {"b1"}}, unassigned={"b2"})
        assert rs_score(half, truth, ds) == 0.5


class TestEvaluateAndCsv:
    def test_evaluate_full_pipeline_easy_regime(self, easy_event):
        ds, truth = easy_event.dataset, easy_event.truth
        clustering = run_pipeline(ds, PipelineConfig())
        report = evaluate(clustering, truth, ds)
        assert report.f1 == 1.0
        assert report.rs == 1.0
        assert report.label == "full"

    def test_report_dict_shape(self):
        truth = GroundTruth({"t1": {"f1", "f2"}})
        clustering = clustering_from({"c1": {"f1", "f2"}})
        ds = build_event(
            [("i1", 0, [("f1", 0.0, 0.9, "t1")]), ("i2", 5, [("f2", 0.1, 0.9, "t1")])]
        )
        d = evaluate(clustering, truth, ds, label="demo").to_dict()
        assert d["configuration"] == "demo"
        assert d["pair_confusion"] == {"tp": 1, "fp": 0, "fn": 0, "tn": 0}
        assert d["f1"] == 1.0

    def test_csv_round_trip_is_exact(self):
        reports = [
            EvalReport(
                label="full",
                precision=1 / 3,
                recall=2 / 7,
                f1=0.30769230769230765,
                rs=0.7,
                confusion=PairConfusion(tp=1, fp=2, fn=3, tn=4),
            ),
            EvalReport(
                label="none",
                precision=1.0,
                recall=0.0,
                f1=0.0,
                rs=0.1,
                confusion=PairConfusion(tp=0, fp=0, fn=9, tn=0),
            ),
        ]
        text = reports_to_csv(reports)
        assert text.splitlines()[0] == "configuration,precision,recall,f1,rs,tp,fp,fn,tn"
        parsed = parse_report_csv(text)
        assert parsed == list(reports)

    def test_csv_flattens_sweep_rows(self):
        row = EvalReport(
            label="only_knn",
            precision=0.5,
            recall=0.5,
            f1=0.5,
            rs=0.2,
            confusion=PairConfusion(1, 1, 1, 1),
        )
        sweep = EvalReport(
            label="sweep",
            precision=1.0,
            recall=1.0,
            f1=1.0,
            rs=1.0,
            confusion=PairConfusion(0, 0, 0, 0),
            rows=(row,),
        )
        text = reports_to_csv([sweep])
        lines = text.splitlines()
        assert len(lines) == 2
        assert lines[1].startswith("only_knn,")

    def test_evaluate_rejects_truth_with_unknown_faces(self):
        ds = build_event([("i1", 0, [("f1", 0.0, 0.9)])])
        truth = GroundTruth({"t1": {"f1", "ghost"}})
        clustering = clustering_from({"c1": {"f1"}})
        from facegraph.errors import IntegrityError

        with pytest.raises(IntegrityError, match="ghost"):
            evaluate(clustering, truth, ds)
