import math

import numpy as np
import pytest

from choralegraph.chords import train_chord_embeddings
from choralegraph.corpus import ChoraleRecord, Corpus, Selector
from choralegraph.embedding import EncoderMatrix, TrainConfig
from choralegraph.evaluate import (
    common_count,
    format_agreement_table,
    mean_node_similarity,
    run_agreement_study,
    write_agreement_csv,
)
from choralegraph.graph import build_graph
from synth import synthetic_corpus


def test_common_count_identical_lists():
    nodes = list(range(10))
    assert common_count(nodes, nodes) == 10


def test_common_count_disjoint_lists():
    assert common_count(list(range(10)), list(range(10, 20))) == 0


def test_common_count_partial_overlap():
    a = [0, 1, 2, 3, 4, 5, 6, 7, 8, 9]
    b = [0, 1, 2, 30, 40, 50, 60, 70, 80, 90]
    assert common_count(a, b) == 3


def test_common_count_symmetric_and_bounded():
    rng = np.random.default_rng(3)
    for _ in range(30):
        a = list(rng.choice(40, size=10, replace=False))
        b = list(rng.choice(40, size=10, replace=False))
        ab = common_count(a, b)
        assert ab == common_count(b, a)
        assert 0 <= ab <= 10


def test_common_count_rejects_duplicates():
    with pytest.raises(ValueError, match="duplicate"):
        common_count([1, 1, 2], [3, 4, 5])
    with pytest.raises(ValueError, match="duplicate"):
        common_count([1, 2, 3], [4, 4, 5])


def test_common_count_rejects_size_mismatch():
    with pytest.raises(ValueError, match="sizes differ"):
        common_count([1, 2], [1, 2, 3])


# ------------------------------------------------- mean node similarity


def uniform_corpus(n=12):
    """All records share the same intro: every pairwise S is identical."""
    records = []
    for i in range(n):
        chords = ("I", "V", "I", "V", "I", "V", "vi", "ii")
        records.append(
            ChoraleRecord(id=f"U{i}", mode="major", chords=chords, cadence=chords[-6:])
        )
    return Corpus.from_records(records)


def test_all_ties_case_mean_equals_the_common_similarity():
    corpus = uniform_corpus(12)
    emb = train_chord_embeddings(corpus, dim=4, epochs=3, seed=0)
    selector = Selector.intro(6)
    g = build_graph(corpus, emb, selector, xi=float("-inf"))
    common = g.edges[0][2]
    rng = np.random.default_rng(5)
    model = EncoderMatrix(
        vectors=rng.normal(size=(12, 4)), method="sgns", config=TrainConfig(dim=4)
    )
    mean = mean_node_similarity(model, g, corpus, emb, selector, top_k=10)
    assert mean == pytest.approx(common, abs=1e-12)


def brute_force_mean_similarity(model, g, corpus, emb, selector, top_k):
    """Independent recomputation: cosine ranking and raw double-loop S."""
    by_id = {r.id: r for r in corpus.records}
    units = model.vectors / np.linalg.norm(model.vectors, axis=1, keepdims=True)
    total = 0.0
    count = 0
    for u in range(g.num_nodes):
        cos = units @ units[u]
        ranked = sorted(
            ((v, cos[v]) for v in range(g.num_nodes) if v != u),
            key=lambda t: (-t[1], t[0]),
        )[:top_k]
        for v, _ in ranked:
            rec_u, rec_v = by_id[g.ids[u]], by_id[g.ids[v]]
            if selector.kind == "intro":
                pairs = [(rec_u.chords[: selector.n], rec_v.chords[: selector.n])]
            else:
                raise NotImplementedError
            for seq_u, seq_v in pairs:
                for i, ci in enumerate(seq_u):
                    for j, cj in enumerate(seq_v):
                        a = emb.vectors[emb.index[ci]]
                        b = emb.vectors[emb.index[cj]]
                        cosv = float(a @ b / (np.linalg.norm(a) * np.linalg.norm(b)))
                        total += cosv * math.exp(-abs(i - j))
            count += 1
    return total / count


def test_mean_similarity_matches_brute_force():
    corpus = synthetic_corpus(14, seed=51)
    emb = train_chord_embeddings(corpus, dim=6, epochs=4, seed=2)
    selector = Selector.intro(6)
    g = build_graph(corpus, emb, selector, xi=float("-inf"))
    rng = np.random.default_rng(9)
    model = EncoderMatrix(
        vectors=rng.normal(size=(g.num_nodes, 5)), method="sg", config=TrainConfig(dim=5)
    )
    got = mean_node_similarity(model, g, corpus, emb, selector, top_k=10)
    want = brute_force_mean_similarity(model, g, corpus, emb, selector, 10)
    assert got == pytest.approx(want, abs=1e-12)


def test_mean_similarity_validates_coverage():
    corpus = synthetic_corpus(14, seed=53)
    emb = train_chord_embeddings(corpus, dim=4, epochs=3, seed=1)
    selector = Selector.intro(6)
    g = build_graph(corpus, emb, selector, xi=float("-inf"))
    model = EncoderMatrix(
        vectors=np.zeros((g.num_nodes - 1, 4)), method="sg", config=TrainConfig(dim=4)
    )
    with pytest.raises(ValueError, match="covers"):
        mean_node_similarity(model, g, corpus, emb, selector)


# ---------------------------------------------------------- agreement study


def small_study_inputs():
    corpus = synthetic_corpus(20, seed=57)
    emb = train_chord_embeddings(corpus, method="skipgram", dim=6, epochs=8, seed=3)
    selector = Selector.intro(6)
    g = build_graph(corpus, emb, selector, xi=0.0)
    assert g.num_nodes >= 12  # top-10 queries need headroom
    return corpus, emb, selector, g


def test_report_shape():
    corpus, emb, selector, g = small_study_inputs()
    cfg = TrainConfig(dim=4, epochs=2, lr=0.05, negatives=2, window=2, seed=0)
    grid = ((1.0, 1.0), (0.7, 1.0), (1.0, 0.7))
    reports = run_agreement_study(
        g, corpus, emb, selector, grid=grid, cfg=cfg,
        walks_per_node=2, walk_length=5, top_k=10,
    )
    assert len(reports) == 3
    for rep, (p, q) in zip(reports, grid):
        assert (rep.p, rep.q) == (p, q)
        assert set(rep.pair_means) == {"sgns-sg", "sgns-cbow", "sg-cbow"}
        assert set(rep.model_mean_similarity) == {"sgns", "sg", "cbow"}
        for counts in rep.pair_counts.values():
            assert len(counts) == g.num_nodes
            assert all(0 <= c <= 10 for c in counts)
        for mean in rep.pair_means.values():
            assert 0.0 <= mean <= 10.0


def test_identical_methods_agree_perfectly():
    corpus, emb, selector, g = small_study_inputs()
    cfg = TrainConfig(dim=4, epochs=2, lr=0.05, negatives=2, window=2, seed=0)
    reports = run_agreement_study(
        g, corpus, emb, selector, grid=((1.0, 1.0),), cfg=cfg,
        walks_per_node=2, walk_length=5, top_k=10,
        methods=("sg", "sg", "sg"),
    )
    assert all(m == 10.0 for m in reports[0].pair_means.values())


def test_csv_and_table_outputs(tmp_path):
    corpus, emb, selector, g = small_study_inputs()
    cfg = TrainConfig(dim=4, epochs=2, lr=0.05, negatives=2, window=2, seed=0)
    reports = run_agreement_study(
        g, corpus, emb, selector, grid=((1.0, 1.0),), cfg=cfg,
        walks_per_node=2, walk_length=5, top_k=10,
    )
    path = tmp_path / "agree.csv"
    write_agreement_csv(reports, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "p,q,metric,value"
    assert len(lines) == 1 + 6  # 3 pair means + 3 model similarities
    table = format_agreement_table(reports)
    assert "sg-cbow" in table
