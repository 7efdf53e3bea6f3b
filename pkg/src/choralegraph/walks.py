"""Second-order biased random walks and walk-derived training samples.

The next-step bias follows the return/in-out scheme used for the chorale
graph: from current node v with previous node u, candidate w gets bias 1 if
w == u, 1/p if w neighbors u, else 1/q; biases are multiplied by the edge
weight (v,w) and normalized. Note this differs from the original node2vec
convention, where the return edge gets 1/p.
"""

import logging
from dataclasses import dataclass

import numpy as np

from .graph import ChoraleGraph

logger = logging.getLogger(__name__)

NEGATIVE_EXPONENT = 0.75


@dataclass
class WalkSet:
    """Walks as node-index sequences, plus the parameters that produced them."""

    walks: list[list[int]]
    walk_length: int
    walks_per_node: int
    p: float
    q: float
    seed: int


def step_distribution(g: ChoraleGraph, prev: int, cur: int, p: float, q: float) -> np.ndarray:
    """Transition probabilities over g.neighbors(cur), given the previous node.

    Entries align with the adjacency order of `cur` (ascending neighbor
    index) and sum to 1.
    """
    if p <= 0 or q <= 0:
        raise ValueError(f"p and q must be positive, got p={p}, q={q}")
    if prev not in g.neighbor_sets[cur]:
        raise ValueError(f"previous node {prev} is not a neighbor of {cur}")
    prev_nbrs = g.neighbor_sets[prev]
    probs = np.empty(len(g.adjacency[cur]))
    for i, (w, weight) in enumerate(g.adjacency[cur]):
        if w == prev:
            bias = 1.0
        elif w in prev_nbrs:
            bias = 1.0 / p
        else:
            bias = 1.0 / q
        probs[i] = bias * weight
    total = probs.sum()
    if probs.min() < 0 or total <= 0:
        raise ValueError(
            f"invalid step distribution at node {cur}: edge weights must be non-negative"
        )
    return probs / total


def _first_step_distribution(g: ChoraleGraph, start: int) -> np.ndarray:
    probs = np.array([w for _, w in g.adjacency[start]], dtype=float)
    total = probs.sum()
    if probs.min() < 0 or total <= 0:
        raise ValueError(
            f"invalid start distribution at node {start}: edge weights must be non-negative"
        )
    return probs / total


def sample_next(g: ChoraleGraph, prev, cur: int, p: float, q: float, rng) -> int:
    """Draw the next node; prev=None means the walk is on its first step."""
    if prev is None:
        probs = _first_step_distribution(g, cur)
    else:
        probs = step_distribution(g, prev, cur, p, q)
    choice = rng.choice(len(probs), p=probs)
    return g.adjacency[cur][choice][0]


def generate_walks(
    g: ChoraleGraph,
    walks_per_node: int = 10,
    walk_length: int = 10,
    p: float = 1.0,
    q: float = 1.0,
    seed: int = 0,
) -> WalkSet:
    """walks_per_node walks from every node, each walk_length nodes long.

    Every (start node, repeat) pair gets its own derived seed stream, so the
    output is reproducible and independent of scheduling; walks are listed
    in (node index, repeat) order.
    """
    if walk_length < 2:
        raise ValueError(f"walk_length must be >= 2, got {walk_length}")
    if walks_per_node < 1:
        raise ValueError(f"walks_per_node must be >= 1, got {walks_per_node}")
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    walks = []
    for node in range(g.num_nodes):
        for rep in range(walks_per_node):
            rng = np.random.default_rng([seed, node, rep])
            walk = [node]
            prev = None
            while len(walk) < walk_length:
                nxt = sample_next(g, prev, walk[-1], p, q, rng)
                prev = walk[-1]
                walk.append(nxt)
            walks.append(walk)
    return WalkSet(
        walks=walks,
        walk_length=walk_length,
        walks_per_node=walks_per_node,
        p=p,
        q=q,
        seed=seed,
    )


def positive_pairs(ws: WalkSet, window: int = 5) -> list[tuple[int, int, int]]:
    """(target, context, 1) for every within-window pair in every walk.

    For each position t all positions t' != t with |t - t'| <= window
    contribute, in both directions. Passing window >= walk length pairs
    every node with every other node on its walk.
    """
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    pairs = []
    for walk in ws.walks:
        n = len(walk)
        for t in range(n):
            lo = max(0, t - window)
            hi = min(n, t + window + 1)
            for s in range(lo, hi):
                if s != t:
                    pairs.append((walk[t], walk[s], 1))
    return pairs


class NegativeSampler:
    """Degree-biased negative sampling: P(n) proportional to degree(n)^0.75."""

    def __init__(self, g: ChoraleGraph):
        self.num_nodes = g.num_nodes
        self.weights = g.degrees() ** NEGATIVE_EXPONENT

    def sample(self, target: int, k: int, rng, exclude=()) -> list[int]:
        """k i.i.d. draws, never returning the target or anything in exclude.

        Raises if fewer than k distinct candidates remain after exclusion.
        """
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        weights = self.weights.copy()
        weights[target] = 0.0
        for node in exclude:
            weights[node] = 0.0
        candidates = int(np.count_nonzero(weights))
        if candidates < k:
            raise ValueError(
                f"graph too small for {k} negative samples: only {candidates} "
                f"candidates remain after exclusions"
            )
        probs = weights / weights.sum()
        return [int(n) for n in rng.choice(self.num_nodes, size=k, p=probs)]


def negative_samples(g: ChoraleGraph, target: int, k: int, rng, exclude=()) -> list[int]:
    """One-shot convenience wrapper around NegativeSampler.sample."""
    return NegativeSampler(g).sample(target, k, rng, exclude=exclude)


def save_walks(ws: WalkSet, path) -> None:
    """Walk dump: one walk per line, space-separated node indices."""
    with open(path, "w", encoding="utf-8") as fh:
        for walk in ws.walks:
            fh.write(" ".join(str(n) for n in walk) + "\n")


def load_walks(path) -> list[list[int]]:
    walks = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            try:
                walks.append([int(n) for n in parts])
            except ValueError:
                raise ValueError(f"{path}: line {lineno}: walk entries must be integers") from None
    if not walks:
        raise ValueError(f"{path}: no walks found")
    return walks
