"""facegraph: face clustering and social-graph discovery for event photo sets.

The package turns per-face embedding records into identity clusters, mines
who-appears-with-whom relations from the result, and ships the surrounding
tooling: a synthetic event generator with planted ground truth, pairwise
evaluation metrics, an ablation harness, a CLI, and an HTTP curation service.
"""

from .clustering import INITIAL_ALGORITHMS, Clustering, PipelineConfig, cluster_initial
from .errors import (
    CannotLinkError,
    ConfigError,
    CurationError,
    EvaluationError,
    FaceGraphError,
    IntegrityError,
    InvalidActionError,
    ParseError,
    StaleTargetError,
)
from .evaluation import (
    EvalReport,
    PairConfusion,
    evaluate,
    jaccard_match,
    pair_confusion,
    precision_recall_f1,
    rs_score,
)
from .graph import SocialGraph, discover_graph, export_graph, top_k_by_degree
from .pipeline import ABLATION_OPS, ablation_rows, run_pipeline
from .preprocess import (
    DuplicateMap,
    QualityModel,
    deduplicate_images,
    filter_faces,
    time_group_links,
    train_quality_classifier,
)
from .records import EventDataset, FaceRecord, GroundTruth, ImageRecord, PlantedGraph
from .synth import SynthConfig, SynthResult, generate_synthetic_event

__version__ = "0.1.0"

__all__ = [
    "ABLATION_OPS",
    "INITIAL_ALGORITHMS",
    "CannotLinkError",
    "Clustering",
    "ConfigError",
    "CurationError",
    "DuplicateMap",
    "EvalReport",
    "EvaluationError",
    "EventDataset",
    "FaceGraphError",
    "FaceRecord",
    "GroundTruth",
    "ImageRecord",
    "IntegrityError",
    "InvalidActionError",
    "PairConfusion",
    "ParseError",
    "PipelineConfig",
    "PlantedGraph",
    "QualityModel",
    "SocialGraph",
    "StaleTargetError",
    "SynthConfig",
    "SynthResult",
    "ablation_rows",
    "cluster_initial",
    "deduplicate_images",
    "discover_graph",
    "evaluate",
    "export_graph",
    "filter_faces",
    "generate_synthetic_event",
    "jaccard_match",
    "pair_confusion",
    "precision_recall_f1",
    "rs_score",
    "run_pipeline",
    "time_group_links",
    "top_k_by_degree",
    "train_quality_classifier",
    "__version__",
]
