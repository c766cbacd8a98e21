"""Similarity-fusion head over frozen camera-trap embeddings.

The library ingests precomputed image and caption embeddings (the WING
binary format), builds per-class text centroids, trains a small
residual MLP on the caption branch with a temperature-scaled
contrastive loss, and evaluates zero-shot against an arbitrary test
class catalog.
"""

from .errors import WingfuseError
from .evaluator import EvalReport, EvalSplit, evaluate, macro_f1, sweep
from .fusion import (
    FusionGrads,
    FusionHeadParams,
    backward,
    forward,
    init_params,
    load_model,
    save_model,
)
from .objective import contrastive_loss, loss_gradient
from .similarity import (
    SimilarityTriplet,
    cosine_backward,
    cosine_matrix,
    fuse,
    predict,
    similarity_triplet,
)
from .store import (
    ClassEntry,
    ClassPack,
    EmbeddingMatrix,
    SampleManifest,
    SynthDataset,
    load_class_pack,
    load_embedding_file,
    load_manifest,
    synth_dataset,
    write_class_pack,
    write_embedding_file,
    write_manifest,
    write_synth_dataset,
)
from .text_head import (
    ClassCentroids,
    blend,
    build_class_matrix,
    compute_centroid,
    load_class_centroids,
    write_class_centroids,
)
from .trainer import (
    SearchResult,
    SearchSpace,
    TrainConfig,
    TrainReport,
    monte_carlo_partition,
    random_search,
    train,
)

__version__ = "0.1.0"

__all__ = [
    "ClassCentroids",
    "ClassEntry",
    "ClassPack",
    "EmbeddingMatrix",
    "EvalReport",
    "EvalSplit",
    "FusionGrads",
    "FusionHeadParams",
    "SampleManifest",
    "SearchResult",
    "SearchSpace",
    "SimilarityTriplet",
    "SynthDataset",
    "TrainConfig",
    "TrainReport",
    "WingfuseError",
    "backward",
    "blend",
    "build_class_matrix",
    "compute_centroid",
    "contrastive_loss",
    "cosine_backward",
    "cosine_matrix",
    "evaluate",
    "forward",
    "fuse",
    "init_params",
    "load_class_centroids",
    "load_class_pack",
    "load_embedding_file",
    "load_manifest",
    "load_model",
    "loss_gradient",
    "macro_f1",
    "monte_carlo_partition",
    "predict",
    "random_search",
    "save_model",
    "similarity_triplet",
    "sweep",
    "synth_dataset",
    "train",
    "write_class_centroids",
    "write_class_pack",
    "write_embedding_file",
    "write_manifest",
    "write_synth_dataset",
]
