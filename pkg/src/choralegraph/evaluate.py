"""Cross-model comparison: top-10 neighbor agreement between the three
trainers and mean harmonic similarity of each model's suggestions."""

import csv
import logging
from dataclasses import dataclass

from .chords import ChordEmbeddings
from .corpus import Corpus, Selector, segment
from .embedding import EncoderMatrix, TrainConfig, top_k_similar, train_node_embedding
from .graph import ChoraleGraph, sequence_similarity
from .walks import generate_walks

logger = logging.getLogger(__name__)

MODEL_PAIRS = (("sgns", "sg"), ("sgns", "cbow"), ("sg", "cbow"))


@dataclass
class AgreementReport:
    """Agreement and similarity summary for one (p, q) walk setting."""

    p: float
    q: float
    pair_counts: dict[str, list[int]]
    pair_means: dict[str, float]
    model_mean_similarity: dict[str, float]


def common_count(list_a, list_b) -> int:
    """Number of nodes two suggestion lists share; both must be duplicate-free."""
    set_a, set_b = set(list_a), set(list_b)
    if len(set_a) != len(list_a):
        raise ValueError("first list contains duplicate nodes")
    if len(set_b) != len(list_b):
        raise ValueError("second list contains duplicate nodes")
    if len(list_a) != len(list_b):
        raise ValueError(f"list sizes differ: {len(list_a)} vs {len(list_b)}")
    return len(set_a & set_b)


def mean_node_similarity(
    model: EncoderMatrix,
    g: ChoraleGraph,
    corpus: Corpus,
    e: ChordEmbeddings,
    selector: Selector,
    top_k: int = 10,
) -> float:
    """Grand mean of S(u, v) over every node u and its top-k embedding neighbors.

    S is the same attention-weighted sequence similarity used to build the
    graph, with the same selector.
    """
    if model.num_nodes != g.num_nodes:
        raise ValueError(
            f"model covers {model.num_nodes} nodes but graph has {g.num_nodes}"
        )
    by_id = {rec.id: rec for rec in corpus.records}
    segments = []
    for rid in g.ids:
        if rid not in by_id:
            raise ValueError(f"graph node {rid} missing from corpus")
        segments.append(segment(by_id[rid], selector))
    total = 0.0
    count = 0
    for u in range(g.num_nodes):
        for v, _ in top_k_similar(model, u, top_k):
            for seg_u, seg_v in zip(segments[u], segments[v]):
                total += sequence_similarity(seg_u, seg_v, e)
            count += 1
    return total / count


def top_lists(model: EncoderMatrix, top_k: int = 10) -> list[list[int]]:
    """Top-k suggestion list for every node, node order."""
    return [[v for v, _ in top_k_similar(model, u, top_k)] for u in range(model.num_nodes)]


def run_agreement_study(
    g: ChoraleGraph,
    corpus: Corpus,
    e: ChordEmbeddings,
    selector: Selector,
    grid=((1.0, 1.0), (0.7, 1.0), (1.0, 0.7)),
    cfg: TrainConfig | None = None,
    walks_per_node: int = 10,
    walk_length: int = 10,
    top_k: int = 10,
    methods: tuple[str, str, str] = ("sgns", "sg", "cbow"),
) -> list[AgreementReport]:
    """Train the three models per (p, q) grid point on one shared walk set
    and report pairwise top-k agreement plus per-model mean similarity.

    `methods` names the trainers behind the (sgns, sg, cbow) report slots;
    overriding it is mainly for sanity checks (identical methods must agree
    perfectly).
    """
    if g.num_nodes == 0:
        raise ValueError("graph is empty")
    if cfg is None:
        cfg = TrainConfig()
    reports = []
    for p, q in grid:
        ws = generate_walks(
            g, walks_per_node=walks_per_node, walk_length=walk_length, p=p, q=q, seed=cfg.seed
        )
        slots = ("sgns", "sg", "cbow")
        models = {
            slot: train_node_embedding(g, ws, method, cfg)
            for slot, method in zip(slots, methods)
        }
        lists = {slot: top_lists(models[slot], top_k) for slot in slots}
        pair_counts = {}
        pair_means = {}
        for a, b in MODEL_PAIRS:
            counts = [common_count(la, lb) for la, lb in zip(lists[a], lists[b])]
            pair_counts[f"{a}-{b}"] = counts
            pair_means[f"{a}-{b}"] = sum(counts) / len(counts)
        sims = {
            slot: mean_node_similarity(models[slot], g, corpus, e, selector, top_k)
            for slot in slots
        }
        logger.info(
            "agreement at p=%g q=%g: %s", p, q,
            " ".join(f"{k}={v:.2f}" for k, v in pair_means.items()),
        )
        reports.append(
            AgreementReport(
                p=p, q=q,
                pair_counts=pair_counts,
                pair_means=pair_means,
                model_mean_similarity=sims,
            )
        )
    return reports


def write_agreement_csv(reports: list[AgreementReport], path) -> None:
    """One row per grid point per metric."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["p", "q", "metric", "value"])
        for rep in reports:
            for pair, mean in rep.pair_means.items():
                writer.writerow([rep.p, rep.q, f"mean_common_{pair}", repr(mean)])
            for slot, sim in rep.model_mean_similarity.items():
                writer.writerow([rep.p, rep.q, f"mean_similarity_{slot}", repr(sim)])


def format_agreement_table(reports: list[AgreementReport]) -> str:
    """Human-readable summary table."""
    lines = []
    lines.append("mean common nodes               mean node similarity")
    lines.append("p     q     sgns-sg sgns-cbow sg-cbow   sgns   sg     cbow")
    for rep in reports:
        pm = rep.pair_means
        ms = rep.model_mean_similarity
        lines.append(
            f"{rep.p:<5g} {rep.q:<5g} "
            f"{pm['sgns-sg']:<7.2f} {pm['sgns-cbow']:<9.2f} {pm['sg-cbow']:<7.2f}   "
            f"{ms['sgns']:<6.2f} {ms['sg']:<6.2f} {ms['cbow']:<6.2f}"
        )
    return "\n".join(lines)
