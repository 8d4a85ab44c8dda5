"""Clustering quality metrics: pairwise confusion and top-participant recovery."""

from __future__ import annotations

import csv
import dataclasses
import io as _io
import json
from collections import Counter
from collections.abc import Iterable, Sequence
from math import comb

from .clustering import Clustering
from .errors import EvaluationError
from .graph import discover_graph, top_k_by_degree
from .records import EventDataset, GroundTruth


@dataclasses.dataclass(frozen=True)
class PairConfusion:
    """Counts over all unordered pairs of evaluated faces."""

    tp: int
    fp: int
    fn: int
    tn: int

    def __post_init__(self) -> None:
        for name in ("tp", "fp", "fn", "tn"):
            if getattr(self, name) < 0:
                raise EvaluationError(f"negative {name} count")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


def _universe(clustering: Clustering, truth: GroundTruth) -> list[str]:
    """Faces under evaluation: truth-labeled and not rejected, sorted."""
    universe = [f for f in sorted(truth.label_of) if f not in clustering.rejected]
    if not universe:
        raise EvaluationError(
            "no faces to evaluate: every truth-labeled face was rejected "
            "(or the ground truth is empty)"
        )
    return universe


def pair_confusion(clustering: Clustering, truth: GroundTruth) -> PairConfusion:
    """Contingency-table pair counts.

    A pair is TP when both faces share a truth identity and a predicted
    cluster, FP when same cluster but different identities, FN when same
    identity but different clusters, TN otherwise.  Unassigned faces act as
    singleton predicted clusters; rejected faces are outside the universe.
    """
    universe = _universe(clustering, truth)
    label_of = truth.label_of
    assignment = clustering.assignment

    truth_counts: Counter[str] = Counter()
    cluster_counts: Counter[str] = Counter()
    cell_counts: Counter[tuple[str, str]] = Counter()
    for f in universe:
        t = label_of[f]
        truth_counts[t] += 1
        c = assignment.get(f)
        if c is not None:
            cluster_counts[c] += 1
            cell_counts[(c, t)] += 1

    tp = sum(comb(v, 2) for v in cell_counts.values())
    same_cluster = sum(comb(v, 2) for v in cluster_counts.values())
    same_truth = sum(comb(v, 2) for v in truth_counts.values())
    all_pairs = comb(len(universe), 2)
    fp = same_cluster - tp
    fn = same_truth - tp
    return PairConfusion(tp=tp, fp=fp, fn=fn, tn=all_pairs - tp - fp - fn)


def precision_recall_f1(confusion: PairConfusion) -> tuple[float, float, float]:
    """(precision, recall, f1); empty denominators count as perfect."""
    p = 1.0 if confusion.tp + confusion.fp == 0 else confusion.tp / (confusion.tp + confusion.fp)
    r = 1.0 if confusion.tp + confusion.fn == 0 else confusion.tp / (confusion.tp + confusion.fn)
    f1 = 0.0 if p + r == 0 else 2.0 * p * r / (p + r)
    return p, r, f1


def brute_force_pair_metrics(
    clustering: Clustering, truth: GroundTruth
) -> tuple[float, float, float]:
    """Oracle twin of the contingency route: count every pair explicitly.

    Deliberately the dumbest possible implementation — the two routes must
    agree exactly on every input.
    """
    universe = _universe(clustering, truth)
    label_of = truth.label_of
    assignment = clustering.assignment

    tp = fp = fn = 0
    for i in range(len(universe)):
        fi = universe[i]
        ti = label_of[fi]
        ci = assignment.get(fi)
        for j in range(i + 1, len(universe)):
            fj = universe[j]
            same_truth = ti == label_of[fj]
            cj = assignment.get(fj)
            same_cluster = ci is not None and ci == cj
            if same_cluster and same_truth:
                tp += 1
            elif same_cluster:
                fp += 1
            elif same_truth:
                fn += 1

    p = 1.0 if tp + fp == 0 else tp / (tp + fp)
    r = 1.0 if tp + fn == 0 else tp / (tp + fn)
    f1 = 0.0 if p + r == 0 else 2.0 * p * r / (p + r)
    return p, r, f1


def jaccard_match(
    truth_faces: Iterable[str], cluster_faces: Iterable[str], t_j: float = 0.8
) -> int:
    """1 iff |A∩B| / |A∪B| strictly exceeds the threshold."""
    a = frozenset(truth_faces)
    b = frozenset(cluster_faces)
    if not a:
        raise EvaluationError("jaccard_match requires a non-empty truth face set")
    j = len(a & b) / len(a | b)
    return int(j > t_j)


def top_participants(truth: GroundTruth, dataset: EventDataset, k: int = 10) -> list[str]:
    """The k most-connected participants of the truth co-occurrence graph."""
    nonempty = {pid: faces for pid, faces in truth.identities.items() if faces}
    if not nonempty:
        return []
    as_clustering = Clustering(
        clusters=nonempty,
        unassigned=dataset.face_ids - frozenset().union(*nonempty.values()),
        rejected=frozenset(),
    )
    return top_k_by_degree(discover_graph(as_clustering, dataset), k)


def rs_score(
    clustering: Clustering,
    truth: GroundTruth,
    dataset: EventDataset,
    k: int = 10,
    t_j: float = 0.8,
) -> float:
    """Fraction of the top-k connected participants matched by some cluster.

    A participant counts as discovered when a cluster's face set exceeds the
    Jaccard threshold against theirs; clusters are claimed one-to-one,
    best match first.
    """
    u_top = top_participants(truth, dataset, k)
    if not u_top:
        return 1.0  # vacuously: nobody to discover
    candidates: list[tuple[float, str, str]] = []
    for pid in u_top:
        faces = truth.identities[pid]
        for cid, members in clustering.clusters.items():
            j = len(faces & members) / len(faces | members)
            if j > t_j:
                candidates.append((-j, pid, cid))
    matched: set[str] = set()
    used_clusters: set[str] = set()
    for _, pid, cid in sorted(candidates):
        if pid in matched or cid in used_clusters:
            continue
        matched.add(pid)
        used_clusters.add(cid)
    return len(matched) / len(u_top)


@dataclasses.dataclass(frozen=True)
class EvalReport:
    """Metrics for one clustering (plus per-configuration rows for sweeps)."""

    label: str
    precision: float
    recall: float
    f1: float
    rs: float
    confusion: PairConfusion
    rows: tuple["EvalReport", ...] = ()

    def to_dict(self) -> dict:
        out = {
            "configuration": self.label,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "rs": self.rs,
            "pair_confusion": {
                "tp": self.confusion.tp,
                "fp": self.confusion.fp,
                "fn": self.confusion.fn,
                "tn": self.confusion.tn,
            },
        }
        if self.rows:
            out["rows"] = [row.to_dict() for row in self.rows]
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def evaluate(
    clustering: Clustering,
    truth: GroundTruth,
    dataset: EventDataset,
    *,
    label: str = "full",
    k: int = 10,
    t_j: float = 0.8,
) -> EvalReport:
    truth.validate_against(dataset)
    confusion = pair_confusion(clustering, truth)
    p, r, f1 = precision_recall_f1(confusion)
    rs = rs_score(clustering, truth, dataset, k=k, t_j=t_j)
    return EvalReport(label=label, precision=p, recall=r, f1=f1, rs=rs, confusion=confusion)


CSV_FIELDS = ("configuration", "precision", "recall", "f1", "rs", "tp", "fp", "fn", "tn")


def reports_to_csv(reports: Sequence[EvalReport]) -> str:
    """One CSV row per report (sweep rows flattened); floats round-trip exactly."""
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_FIELDS)

    def write_row(report: EvalReport) -> None:
        writer.writerow(
            [
                report.label,
                repr(report.precision),
                repr(report.recall),
                repr(report.f1),
                repr(report.rs),
                report.confusion.tp,
                report.confusion.fp,
                report.confusion.fn,
                report.confusion.tn,
            ]
        )

    for report in reports:
        if report.rows:
            for row in report.rows:
                write_row(row)
        else:
            write_row(report)
    return buf.getvalue()


def parse_report_csv(text: str) -> list[EvalReport]:
    """Inverse of :func:`reports_to_csv` (flat rows, no nesting)."""
    reader = csv.DictReader(_io.StringIO(text))
    out = []
    for row in reader:
        out.append(
            EvalReport(
                label=row["configuration"],
                precision=float(row["precision"]),
                recall=float(row["recall"]),
                f1=float(row["f1"]),
                rs=float(row["rs"]),
                confusion=PairConfusion(
                    tp=int(row["tp"]), fp=int(row["fp"]), fn=int(row["fn"]), tn=int(row["tn"])
                ),
            )
        )
    return out
