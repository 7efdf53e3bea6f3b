"""Node encoder matrix trained by SGNS, skip-gram or CBOW, plus top-k queries.

A single shared matrix holds one vector per graph node (no separate
input/output matrices). The full-softmax trainers normalize over all nodes,
which is fine at the few-hundred-node scale this targets. The SGNS loss uses
the standard noise-contrastive form with sigmoid(-z_u.z_n) on negatives.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from .graph import ChoraleGraph
from .train_core import (
    epoch_learning_rates,
    init_encoder,
    log_sigmoid,
    sigmoid,
    sgns_step,
    train_softmax_encoder,
)
from .walks import NegativeSampler, WalkSet, positive_pairs

logger = logging.getLogger(__name__)

METHODS = ("sgns", "sg", "cbow")


@dataclass
class TrainConfig:
    """Hyperparameters shared by the three node-embedding trainers."""

    dim: int = 64
    epochs: int = 100
    lr: float = 0.025
    negatives: int = 5
    window: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError(f"dim must be >= 2, got {self.dim}")
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if self.lr <= 0:
            raise ValueError(f"lr must be positive, got {self.lr}")
        if self.negatives < 1:
            raise ValueError(f"negatives must be >= 1, got {self.negatives}")
        if self.window < 1:
            raise ValueError(f"window must be >= 1, got {self.window}")

    @property
    def lr_min(self) -> float:
        return self.lr / 100.0


@dataclass(eq=False)
class EncoderMatrix:
    """One embedding vector per graph node; vectors[u] is node u's vector."""

    vectors: np.ndarray
    method: str
    config: TrainConfig
    epoch_losses: list[float] = field(default_factory=list, repr=False)

    @property
    def num_nodes(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def column(self, u: int) -> np.ndarray:
        return self.vectors[u]

    def unit_vectors(self) -> np.ndarray:
        norms = np.linalg.norm(self.vectors, axis=1, keepdims=True)
        safe = np.where(norms == 0.0, 1.0, norms)
        return self.vectors / safe


def _matrix(Z) -> np.ndarray:
    return Z.vectors if isinstance(Z, EncoderMatrix) else np.asarray(Z, dtype=float)


def softmax_prob(Z, u: int, w: int) -> float:
    """P(w | z_u) = exp(z_u.z_w) / sum_n exp(z_u.z_n), max-shifted for safety."""
    mat = _matrix(Z)
    scores = mat @ mat[u]
    scores -= scores.max()
    ex = np.exp(scores)
    return float(ex[w] / ex.sum())


def sgns_loss_and_grads(Z, u: int, w: int, negatives):
    """Loss -log sig(z_u.z_w) - sum_i log sig(-z_u.z_ni) and its exact gradients.

    Returns (loss, {node index: gradient vector}); contributions accumulate
    when a node plays several roles (e.g. a repeated negative).
    """
    negs = list(negatives)
    if not negs:
        raise ValueError("need at least one negative sample")
    if w in negs:
        raise ValueError(f"negative samples must be distinct from the context node {w}")
    mat = _matrix(Z)
    zu = mat[u].copy()
    dw = float(zu @ mat[w])
    dn = mat[negs] @ zu
    loss = float(-(log_sigmoid(dw) + log_sigmoid(-dn).sum()))
    cw = sigmoid(dw) - 1.0
    cn = sigmoid(dn)
    grads = {}

    def add(node, vec):
        if node in grads:
            grads[node] = grads[node] + vec
        else:
            grads[node] = np.array(vec, dtype=float)

    add(u, cw * mat[w] + cn @ mat[negs])
    add(w, cw * zu)
    for i, n in enumerate(negs):
        add(n, cn[i] * zu)
    return loss, grads


def _softmax_coefs(mat: np.ndarray, query: np.ndarray, positive: int):
    scores = mat @ query
    m = scores.max()
    ex = np.exp(scores - m)
    ssum = ex.sum()
    loss = float(-(scores[positive] - m - np.log(ssum)))
    coef = ex / ssum
    coef[positive] -= 1.0
    return loss, coef


def sg_loss_and_grads(Z, u: int, c: int):
    """Loss -log P(c|u) under the full softmax, with gradients for every node."""
    mat = _matrix(Z)
    zu = mat[u].copy()
    loss, coef = _softmax_coefs(mat, zu, c)
    grads = {n: coef[n] * zu for n in range(mat.shape[0]) if coef[n] != 0.0}
    gu = coef @ mat
    grads[u] = grads.get(u, 0.0) + gu
    return loss, grads


def cbow_loss_and_grads(Z, target: int, context):
    """Loss -log P(target|h) with h the mean of the context vectors."""
    ctx = list(context)
    if not ctx:
        raise ValueError("context must be non-empty")
    mat = _matrix(Z)
    h = mat[ctx].mean(axis=0)
    loss, coef = _softmax_coefs(mat, h, target)
    grads = {n: coef[n] * h for n in range(mat.shape[0]) if coef[n] != 0.0}
    gh = coef @ mat
    for c in ctx:
        grads[c] = grads.get(c, 0.0) + gh / len(ctx)
    return loss, grads


def _walk_list(walks) -> list[list[int]]:
    return walks.walks if isinstance(walks, WalkSet) else list(walks)


def build_sgns_dataset(
    g: ChoraleGraph,
    ws,
    window: int,
    negatives: int,
    seed: int,
    exclude_walk: bool = True,
) -> list[tuple[int, int, tuple[int, ...]]]:
    """Positive pairs with k pre-drawn negatives each.

    Negatives are degree^0.75-biased draws excluding the walk the pair came
    from (so a negative never lies on the path), or just the pair itself
    when exclude_walk is off. Drawn once; epochs reuse the same dataset.
    """
    sampler = NegativeSampler(g)
    rng = np.random.default_rng([seed, 1])
    dataset = []
    for walk in _walk_list(ws):
        walk_nodes = set(walk)
        n = len(walk)
        for t in range(n):
            lo = max(0, t - window)
            hi = min(n, t + window + 1)
            for s in range(lo, hi):
                if s == t:
                    continue
                u, w = walk[t], walk[s]
                exclude = walk_nodes if exclude_walk else {u, w}
                negs = sampler.sample(u, negatives, rng, exclude=exclude)
                dataset.append((u, w, tuple(negs)))
    return dataset


def train_sgns(samples, num_nodes: int, cfg: TrainConfig) -> EncoderMatrix:
    """SGD over (target, context, negatives) triples against the SGNS loss.

    Samples are processed in a fixed order each epoch; the learning rate
    decays linearly to lr/100. Deterministic for a fixed config.
    """
    if not samples:
        raise ValueError("empty SGNS training set")
    Z = init_encoder(num_nodes, cfg.dim, cfg.seed)
    epoch_losses = []
    for lr_e in epoch_learning_rates(cfg.lr, cfg.lr_min, cfg.epochs):
        total = 0.0
        for u, w, negs in samples:
            total += sgns_step(Z, u, w, negs, lr_e)
        mean_loss = total / len(samples)
        if not np.isfinite(mean_loss):
            raise RuntimeError(
                f"SGNS training diverged: epoch mean loss {mean_loss}; lower the learning rate"
            )
        epoch_losses.append(mean_loss)
    return EncoderMatrix(vectors=Z, method="sgns", config=cfg, epoch_losses=epoch_losses)


def train_softmax(ws, num_nodes: int, method: str, cfg: TrainConfig) -> EncoderMatrix:
    """Full-softmax skip-gram or CBOW over the walk corpus."""
    if method not in ("sg", "cbow"):
        raise ValueError(f"method must be 'sg' or 'cbow', got {method!r}")
    Z, losses = train_softmax_encoder(
        _walk_list(ws),
        n_rows=num_nodes,
        method=method,
        dim=cfg.dim,
        window=cfg.window,
        epochs=cfg.epochs,
        lr=cfg.lr,
        lr_min=cfg.lr_min,
        seed=cfg.seed,
    )
    return EncoderMatrix(vectors=Z, method=method, config=cfg, epoch_losses=losses)


def train_node_embedding(g: ChoraleGraph, ws, method: str, cfg: TrainConfig) -> EncoderMatrix:
    """Dispatch to the right trainer; SGNS builds its negative-sampled dataset."""
    if method == "sgns":
        samples = build_sgns_dataset(g, ws, cfg.window, cfg.negatives, cfg.seed)
        return train_sgns(samples, g.num_nodes, cfg)
    if method in ("sg", "cbow"):
        return train_softmax(ws, g.num_nodes, method, cfg)
    raise ValueError(f"method must be one of {METHODS}, got {method!r}")


def top_k_similar(Z: EncoderMatrix, u: int, k: int = 10) -> list[tuple[int, float]]:
    """The k nodes most cosine-similar to u, descending; ties by node index."""
    n = Z.num_nodes
    if not 0 <= u < n:
        raise ValueError(f"node {u} out of range for {n} nodes")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if k >= n:
        raise ValueError(f"k={k} must be smaller than the node count {n}")
    units = Z.unit_vectors()
    cos = units @ units[u]
    cos[u] = -np.inf
    order = np.lexsort((np.arange(n), -cos))
    return [(int(v), float(cos[v])) for v in order[:k]]


def save_encoder(Z: EncoderMatrix, path) -> None:
    """Chord-embedding text format with node indices for tokens, preceded by
    a header line recording the method and training configuration."""
    cfg = Z.config
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(
            f"#method {Z.method} dim {cfg.dim} epochs {cfg.epochs} lr {cfg.lr!r} "
            f"negatives {cfg.negatives} window {cfg.window} seed {cfg.seed}\n"
        )
        fh.write(f"{Z.num_nodes} {Z.dim}\n")
        for i, row in enumerate(Z.vectors):
            fh.write(f"{i} " + " ".join(repr(float(v)) for v in row) + "\n")


def load_encoder(path) -> EncoderMatrix:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if not header or header[0] != "#method":
            raise ValueError(f"{path}: missing '#method' header")
        method = header[1]
        fields = dict(zip(header[2::2], header[3::2]))
        cfg = TrainConfig(
            dim=int(fields["dim"]),
            epochs=int(fields["epochs"]),
            lr=float(fields["lr"]),
            negatives=int(fields["negatives"]),
            window=int(fields["window"]),
            seed=int(fields["seed"]),
        )
        counts = fh.readline().split()
        if len(counts) != 2:
            raise ValueError(f"{path}: bad size line")
        n, dim = int(counts[0]), int(counts[1])
        rows = np.empty((n, dim))
        for i in range(n):
            parts = fh.readline().split()
            if len(parts) != dim + 1 or int(parts[0]) != i:
                raise ValueError(f"{path}: bad vector line for node {i}")
            rows[i] = [float(v) for v in parts[1:]]
    return EncoderMatrix(vectors=rows, method=method, config=cfg)
