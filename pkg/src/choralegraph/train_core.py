"""Shared SGD machinery for the softmax and negative-sampling encoders.

All trainers here work on a plain (rows, dim) float64 matrix whose row i is
the embedding of item i (chord token or graph node). Updates are per-sample
and in-place; everything is seeded and single-threaded so results are
bit-reproducible.
"""

import logging

import numpy as np

logger = logging.getLogger(__name__)


def init_encoder(n_rows: int, dim: int, seed: int) -> np.ndarray:
    """Uniform init in [-0.5/dim, 0.5/dim) per entry, from the seed."""
    rng = np.random.default_rng(seed)
    return (rng.random((n_rows, dim)) - 0.5) / dim


def epoch_learning_rates(lr: float, lr_min: float, epochs: int) -> list[float]:
    """Linear decay from lr at the first epoch to lr_min at the last."""
    if epochs == 1:
        return [lr]
    return [lr + (lr_min - lr) * e / (epochs - 1) for e in range(epochs)]


def sigmoid(x):
    z = np.exp(-np.abs(x))
    return np.where(np.asarray(x) >= 0, 1.0 / (1.0 + z), z / (1.0 + z))


def log_sigmoid(x):
    return -np.logaddexp(0.0, -np.asarray(x, dtype=float))


def window_context(seq, t: int, window: int) -> list:
    """Items of seq within `window` positions of t, excluding t itself."""
    lo = max(0, t - window)
    hi = min(len(seq), t + window + 1)
    return [seq[j] for j in range(lo, hi) if j != t]


def sg_step(Z: np.ndarray, u: int, c: int, lr: float) -> float:
    """One skip-gram descent step on -log P(c|u) with full softmax over rows.

    Returns the sample loss at the pre-update parameters. The normalization
    term makes every row participate, so the whole matrix is updated.
    """
    zu = Z[u].copy()
    scores = Z @ zu
    m = scores.max()
    ex = np.exp(scores - m)
    ssum = ex.sum()
    loss = -(scores[c] - m - np.log(ssum))
    coef = ex / ssum
    coef[c] -= 1.0
    gu = coef @ Z
    Z -= lr * np.outer(coef, zu)
    Z[u] -= lr * gu
    return float(loss)


def cbow_step(Z: np.ndarray, target: int, context: list, lr: float) -> float:
    """One CBOW descent step on -log P(target|mean of context rows)."""
    ctx = np.asarray(context, dtype=np.intp)
    h = Z[ctx].mean(axis=0)
    scores = Z @ h
    m = scores.max()
    ex = np.exp(scores - m)
    ssum = ex.sum()
    loss = -(scores[target] - m - np.log(ssum))
    coef = ex / ssum
    coef[target] -= 1.0
    gh = coef @ Z
    Z -= lr * np.outer(coef, h)
    np.add.at(Z, ctx, -lr * gh / len(ctx))
    return float(loss)


def sgns_step(Z: np.ndarray, u: int, w: int, negatives, lr: float) -> float:
    """One negative-sampling step: pull (u, w) together, push negatives away.

    Loss is -log sigmoid(z_u.z_w) - sum_i log sigmoid(-z_u.z_ni); the target,
    the positive context and every negative row are updated.
    """
    negs = np.asarray(negatives, dtype=np.intp)
    zu = Z[u].copy()
    zw = Z[w].copy()
    dw = float(zu @ zw)
    dn = Z[negs] @ zu
    loss = -(log_sigmoid(dw) + log_sigmoid(-dn).sum())
    cw = sigmoid(dw) - 1.0
    cn = sigmoid(dn)
    gu = cw * zw + cn @ Z[negs]
    Z[w] -= lr * cw * zu
    np.add.at(Z, negs, -lr * np.outer(cn, zu))
    Z[u] -= lr * gu
    return float(loss)


def train_softmax_encoder(
    sequences,
    n_rows: int,
    method: str,
    dim: int,
    window: int,
    epochs: int,
    lr: float,
    lr_min: float,
    seed: int,
) -> tuple[np.ndarray, list[float]]:
    """Train an encoder matrix with skip-gram ("sg") or CBOW ("cbow").

    `sequences` is a list of integer index sequences (chord sentences or
    random walks). Samples are processed in fixed order; returns the matrix
    and the per-epoch mean loss. Aborts if the loss goes non-finite.
    """
    if method not in ("sg", "cbow"):
        raise ValueError(f"unknown training method {method!r}")
    Z = init_encoder(n_rows, dim, seed)
    epoch_losses = []
    for lr_e in epoch_learning_rates(lr, lr_min, epochs):
        total = 0.0
        count = 0
        for seq in sequences:
            for t in range(len(seq)):
                ctx = window_context(seq, t, window)
                if not ctx:
                    continue
                if method == "sg":
                    for c in ctx:
                        total += sg_step(Z, seq[t], c, lr_e)
                        count += 1
                else:
                    total += cbow_step(Z, seq[t], ctx, lr_e)
                    count += 1
        if count == 0:
            raise ValueError("no training samples: every sequence is shorter than 2 tokens")
        mean_loss = total / count
        if not np.isfinite(mean_loss):
            raise RuntimeError(
                f"{method} training diverged: epoch mean loss {mean_loss}; lower the learning rate"
            )
        epoch_losses.append(mean_loss)
    return Z, epoch_losses
