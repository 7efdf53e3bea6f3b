"""Chord-token embeddings learned from the corpus's chord sequences.

Each record's full chord sequence plays the role of a training sentence;
the trainer is the same CBOW / skip-gram machinery used for node embeddings.
The resulting vectors back the chord-pair cosine similarity that the graph
builder sums under its attention kernel.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from .corpus import Corpus
from .train_core import train_softmax_encoder

logger = logging.getLogger(__name__)

CHORD_METHODS = ("cbow", "skipgram")


@dataclass(eq=False)
class ChordEmbeddings:
    """One vector per vocabulary token, row-aligned with `tokens`."""

    tokens: list[str]
    vectors: np.ndarray
    epoch_losses: list[float] = field(default_factory=list, repr=False)

    def __post_init__(self):
        self.index = {t: i for i, t in enumerate(self.tokens)}
        if self.vectors.shape[0] != len(self.tokens):
            raise ValueError(
                f"{self.vectors.shape[0]} vectors for {len(self.tokens)} tokens"
            )
        if not np.all(np.isfinite(self.vectors)):
            raise ValueError("chord embedding vectors must be finite")

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def vector(self, token: str) -> np.ndarray:
        try:
            return self.vectors[self.index[token]]
        except KeyError:
            raise KeyError(f"unknown chord token {token!r}") from None

    def unit_vectors(self) -> np.ndarray:
        """Row-normalized copy; zero-norm rows stay zero (cosine 0 by convention)."""
        norms = np.linalg.norm(self.vectors, axis=1, keepdims=True)
        safe = np.where(norms == 0.0, 1.0, norms)
        return self.vectors / safe


def train_chord_embeddings(
    corpus: Corpus,
    method: str = "cbow",
    dim: int = 32,
    window: int = 4,
    epochs: int = 50,
    lr: float = 0.025,
    lr_min: float = 0.0001,
    seed: int = 0,
) -> ChordEmbeddings:
    """Train chord vectors over the corpus with CBOW or skip-gram.

    Deterministic for a fixed seed. Tokens appearing only in cadence fields
    get vectors too (the vocabulary covers them) but receive no gradient
    unless they also occur in a chords sequence.
    """
    if method not in CHORD_METHODS:
        raise ValueError(f"method must be one of {CHORD_METHODS}, got {method!r}")
    if dim < 2:
        raise ValueError(f"dim must be >= 2, got {dim}")
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    if epochs < 1:
        raise ValueError(f"epochs must be >= 1, got {epochs}")
    if lr <= 0:
        raise ValueError(f"lr must be positive, got {lr}")
    if len(corpus.tokens) < 2:
        raise ValueError("vocabulary has fewer than 2 tokens; nothing to contrast")
    sequences = [[corpus.vocab[t] for t in rec.chords] for rec in corpus.records]
    core_method = "sg" if method == "skipgram" else "cbow"
    Z, losses = train_softmax_encoder(
        sequences,
        n_rows=len(corpus.tokens),
        method=core_method,
        dim=dim,
        window=window,
        epochs=epochs,
        lr=lr,
        lr_min=lr_min,
        seed=seed,
    )
    return ChordEmbeddings(tokens=list(corpus.tokens), vectors=Z, epoch_losses=losses)


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity; 0.0 if either vector has zero norm."""
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.dot(a, b) / (na * nb))


def chord_similarity(e: ChordEmbeddings, ci: str, cj: str) -> float:
    """Cosine similarity between two chord tokens' vectors, in [-1, 1]."""
    return cosine(e.vector(ci), e.vector(cj))


def save_embeddings(e: ChordEmbeddings, path) -> None:
    """Text format: first line "<count> <dim>", then "<token> <v1> ... <vd>"."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(e.tokens)} {e.dim}\n")
        for tok, row in zip(e.tokens, e.vectors):
            fh.write(tok + " " + " ".join(repr(float(v)) for v in row) + "\n")


def load_embeddings(path) -> ChordEmbeddings:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ValueError(f"{path}: bad embedding header")
        count, dim = int(header[0]), int(header[1])
        tokens = []
        rows = []
        for lineno, line in enumerate(fh, start=2):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != dim + 1:
                raise ValueError(f"{path}: line {lineno}: expected {dim + 1} fields, got {len(parts)}")
            tokens.append(parts[0])
            rows.append([float(v) for v in parts[1:]])
    if len(tokens) != count:
        raise ValueError(f"{path}: header promised {count} tokens, found {len(tokens)}")
    return ChordEmbeddings(tokens=tokens, vectors=np.array(rows, dtype=float))
