"""choralegraph: similarity graphs over chord-sequence corpora, node
embeddings by SGNS / skip-gram / CBOW over biased random walks, and
collective label inference."""

from .chords import (
    ChordEmbeddings,
    chord_similarity,
    load_embeddings,
    save_embeddings,
    train_chord_embeddings,
)
from .classify import (
    ExperimentReport,
    LabelState,
    accuracy,
    init_state,
    propagate_step,
    run_experiment,
    threshold_labels,
)
from .corpus import ChoraleRecord, Corpus, Selector, load_corpus, save_corpus, segment
from .embedding import (
    EncoderMatrix,
    TrainConfig,
    load_encoder,
    save_encoder,
    softmax_prob,
    top_k_similar,
    train_node_embedding,
    train_sgns,
    train_softmax,
)
from .evaluate import AgreementReport, common_count, mean_node_similarity, run_agreement_study
from .graph import (
    ChoraleGraph,
    build_graph,
    graph_stats,
    load_graph,
    save_graph,
    sequence_similarity,
)
from .walks import WalkSet, generate_walks, negative_samples, positive_pairs, step_distribution

__version__ = "0.1.0"

__all__ = [
    "AgreementReport",
    "ChoraleGraph",
    "ChoraleRecord",
    "ChordEmbeddings",
    "Corpus",
    "EncoderMatrix",
    "ExperimentReport",
    "LabelState",
    "Selector",
    "TrainConfig",
    "WalkSet",
    "accuracy",
    "build_graph",
    "chord_similarity",
    "common_count",
    "generate_walks",
    "graph_stats",
    "init_state",
    "load_corpus",
    "load_embeddings",
    "load_encoder",
    "load_graph",
    "mean_node_similarity",
    "negative_samples",
    "positive_pairs",
    "propagate_step",
    "run_agreement_study",
    "run_experiment",
    "save_corpus",
    "save_embeddings",
    "save_encoder",
    "save_graph",
    "segment",
    "sequence_similarity",
    "softmax_prob",
    "step_distribution",
    "threshold_labels",
    "top_k_similar",
    "train_chord_embeddings",
    "train_node_embedding",
    "train_sgns",
    "train_softmax",
]
