import numpy as np
import pytest

from choralegraph.chords import (
    ChordEmbeddings,
    chord_similarity,
    load_embeddings,
    save_embeddings,
    train_chord_embeddings,
)
from choralegraph.corpus import ChoraleRecord, Corpus
from synth import ab_contrast_corpus, synthetic_corpus


def hand_embeddings():
    return ChordEmbeddings(
        tokens=["a", "b", "c"],
        vectors=np.array([[1.0, 0.0], [0.0, 1.0], [3.0, 4.0]]),
    )


@pytest.mark.parametrize("method", ["cbow", "skipgram"])
def test_cooccurrence_orders_similarity(method):
    # A and B always share a window; C only ever appears with itself
    corpus = ab_contrast_corpus()
    for seed in range(10):
        emb = train_chord_embeddings(
            corpus, method=method, dim=8, window=2, epochs=20, lr=0.05, seed=seed
        )
        ab = chord_similarity(emb, "A", "B")
        ac = chord_similarity(emb, "A", "C")
        assert ab > ac, f"seed {seed}: cosine(A,B)={ab} <= cosine(A,C)={ac}"


@pytest.mark.parametrize("method", ["cbow", "skipgram"])
def test_training_is_deterministic(method):
    corpus = synthetic_corpus(20, seed=4)
    a = train_chord_embeddings(corpus, method=method, dim=4, epochs=3, seed=11)
    b = train_chord_embeddings(corpus, method=method, dim=4, epochs=3, seed=11)
    assert np.array_equal(a.vectors, b.vectors)
    c = train_chord_embeddings(corpus, method=method, dim=4, epochs=3, seed=12)
    assert not np.array_equal(a.vectors, c.vectors)


def test_parameter_validation():
    corpus = synthetic_corpus(10, seed=0)
    with pytest.raises(ValueError, match="epochs"):
        train_chord_embeddings(corpus, epochs=0)
    with pytest.raises(ValueError, match="dim"):
        train_chord_embeddings(corpus, dim=1)
    with pytest.raises(ValueError, match="window"):
        train_chord_embeddings(corpus, window=0)
    with pytest.raises(ValueError, match="lr"):
        train_chord_embeddings(corpus, lr=0.0)
    with pytest.raises(ValueError, match="method"):
        train_chord_embeddings(corpus, method="glove")


def test_tiny_vocabulary_rejected():
    rec = ChoraleRecord(id="solo", mode="major", chords=("I", "I"), cadence=("I",))
    corpus = Corpus.from_records([rec])
    with pytest.raises(ValueError, match="vocabulary"):
        train_chord_embeddings(corpus)


def test_epoch_loss_non_increasing_for_small_lr():
    corpus = ab_contrast_corpus()
    for method in ("cbow", "skipgram"):
        emb = train_chord_embeddings(
            corpus, method=method, dim=8, window=2, epochs=15, lr=0.01, seed=0
        )
        losses = emb.epoch_losses
        assert len(losses) == 15
        for before, after in zip(losses, losses[1:]):
            assert after <= before + 1e-12


def test_self_similarity_is_one():
    emb = hand_embeddings()
    for tok in emb.tokens:
        assert chord_similarity(emb, tok, tok) == pytest.approx(1.0, abs=1e-12)


def test_similarity_symmetric():
    emb = hand_embeddings()
    for ci in emb.tokens:
        for cj in emb.tokens:
            assert chord_similarity(emb, ci, cj) == chord_similarity(emb, cj, ci)


def test_orthogonal_vectors_score_zero():
    emb = hand_embeddings()
    assert chord_similarity(emb, "a", "b") == pytest.approx(0.0, abs=1e-12)


def test_unknown_token_named_in_error():
    emb = hand_embeddings()
    with pytest.raises(KeyError, match="zz7"):
        chord_similarity(emb, "a", "zz7")


def test_positive_scaling_leaves_similarity_unchanged():
    rng = np.random.default_rng(8)
    vectors = rng.normal(size=(5, 6))
    tokens = list("abcde")
    base = ChordEmbeddings(tokens=tokens, vectors=vectors.copy())
    scaled_rows = vectors * rng.uniform(0.1, 9.0, size=(5, 1))
    scaled = ChordEmbeddings(tokens=tokens, vectors=scaled_rows)
    for ci in tokens:
        for cj in tokens:
            assert chord_similarity(base, ci, cj) == pytest.approx(
                chord_similarity(scaled, ci, cj), abs=1e-12
            )


def test_similarity_range():
    corpus = synthetic_corpus(15, seed=6)
    emb = train_chord_embeddings(corpus, dim=4, epochs=5, seed=0)
    for ci in corpus.tokens:
        for cj in corpus.tokens:
            assert -1.0 - 1e-12 <= chord_similarity(emb, ci, cj) <= 1.0 + 1e-12


def test_every_token_has_finite_vector():
    corpus = synthetic_corpus(20, seed=9)
    emb = train_chord_embeddings(corpus, dim=6, epochs=3, seed=0)
    assert set(emb.tokens) == set(corpus.tokens)
    assert np.all(np.isfinite(emb.vectors))


def test_save_load_round_trip(tmp_path):
    corpus = synthetic_corpus(12, seed=10)
    emb = train_chord_embeddings(corpus, dim=5, epochs=4, seed=3)
    path = tmp_path / "chords.vec"
    save_embeddings(emb, path)
    reloaded = load_embeddings(path)
    assert reloaded.tokens == emb.tokens
    assert np.array_equal(reloaded.vectors, emb.vectors)


def test_load_rejects_bad_header(tmp_path):
    path = tmp_path / "bad.vec"
    path.write_text("3\n", encoding="utf-8")
    with pytest.raises(ValueError, match="header"):
        load_embeddings(path)
