"""Chorale graph construction: attention-weighted sequence similarity,
threshold-constrained edges, isolated-node removal, stats and persistence."""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .chords import ChordEmbeddings
from .corpus import Corpus, Selector, segment

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class ChoraleGraph:
    """Weighted undirected graph; node u carries its chorale id and mode.

    Edges are stored once per unordered pair with u < v; adjacency lists are
    sorted by neighbor index. Construction guarantees no self-loops and no
    isolated nodes.
    """

    ids: list[str]
    modes: list[str]
    edges: list[tuple[int, int, float]]
    adjacency: list[list[tuple[int, float]]] = field(repr=False)
    neighbor_sets: list[set[int]] = field(repr=False)

    @classmethod
    def from_edges(cls, ids, modes, edges) -> "ChoraleGraph":
        """Build adjacency from an edge list; validates the graph invariants."""
        n = len(ids)
        if len(modes) != n:
            raise ValueError("ids and modes must have the same length")
        adjacency = [[] for _ in range(n)]
        seen = set()
        norm_edges = []
        for u, v, w in edges:
            if u == v:
                raise ValueError(f"self-loop on node {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u},{v}) out of range for {n} nodes")
            a, b = (u, v) if u < v else (v, u)
            if (a, b) in seen:
                raise ValueError(f"duplicate edge ({a},{b})")
            seen.add((a, b))
            w = float(w)
            norm_edges.append((a, b, w))
            adjacency[a].append((b, w))
            adjacency[b].append((a, w))
        for u, nbrs in enumerate(adjacency):
            if not nbrs:
                raise ValueError(f"isolated node {u} ({ids[u]})")
            nbrs.sort()
        norm_edges.sort()
        return cls(
            ids=list(ids),
            modes=list(modes),
            edges=norm_edges,
            adjacency=adjacency,
            neighbor_sets=[{v for v, _ in nbrs} for nbrs in adjacency],
        )

    @property
    def num_nodes(self) -> int:
        return len(self.ids)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def degree(self, u: int) -> int:
        return len(self.adjacency[u])

    def degrees(self) -> np.ndarray:
        return np.array([len(nbrs) for nbrs in self.adjacency], dtype=float)

    def neighbors(self, u: int) -> list[int]:
        return [v for v, _ in self.adjacency[u]]

    def node_index(self, rec_id: str) -> int:
        try:
            return self.ids.index(rec_id)
        except ValueError:
            raise KeyError(f"no graph node with id {rec_id!r}") from None

    def flat_adjacency(self):
        """(neighbor indices, weights, row offsets, per-node weight sums) as
        flat arrays for vectorized sweeps; cached after the first call."""
        cached = getattr(self, "_flat", None)
        if cached is None:
            idx = np.array([v for nbrs in self.adjacency for v, _ in nbrs], dtype=np.intp)
            wts = np.array([w for nbrs in self.adjacency for _, w in nbrs], dtype=float)
            counts = np.array([len(nbrs) for nbrs in self.adjacency], dtype=np.intp)
            offsets = np.concatenate(([0], np.cumsum(counts)))
            wsums = np.add.reduceat(wts, offsets[:-1]) if len(wts) else np.zeros(0)
            cached = (idx, wts, offsets, wsums)
            self._flat = cached
        return cached


def attention_kernel(n: int) -> np.ndarray:
    """Position kernel K[i,j] = e^{-|i-j|} over 1-based segment positions."""
    pos = np.arange(n)
    return np.exp(-np.abs(pos[:, None] - pos[None, :]))


def _segment_matrix(seq, e: ChordEmbeddings, units: np.ndarray) -> np.ndarray:
    rows = []
    for tok in seq:
        if tok not in e.index:
            raise KeyError(f"unknown chord token {tok!r}")
        rows.append(units[e.index[tok]])
    return np.array(rows)


def _pair_similarity(a_first: np.ndarray, a_second: np.ndarray, kernel: np.ndarray) -> float:
    return float(np.sum(kernel * (a_first @ a_second.T)))


def sequence_similarity(seq_u, seq_v, e: ChordEmbeddings) -> float:
    """Attention-weighted similarity of two equal-length chord sequences.

    S = sum over positions i,j of cosine(c_i, c_j) * e^{-|i-j|}. The pair is
    evaluated in a canonical order so S(u,v) == S(v,u) exactly, not just up
    to float rounding.
    """
    if not seq_u or not seq_v:
        raise ValueError("segments must be non-empty")
    if len(seq_u) != len(seq_v):
        raise ValueError(f"segment lengths differ: {len(seq_u)} vs {len(seq_v)}")
    units = e.unit_vectors()
    if tuple(seq_v) < tuple(seq_u):
        seq_u, seq_v = seq_v, seq_u
    a = _segment_matrix(seq_u, e, units)
    b = _segment_matrix(seq_v, e, units)
    return _pair_similarity(a, b, attention_kernel(len(seq_u)))


def _modal_length(lengths: list[int]) -> int:
    # most common length; ties broken toward the shorter one
    counts = {}
    for n in lengths:
        counts[n] = counts.get(n, 0) + 1
    return min(counts, key=lambda n: (-counts[n], n))


def build_graph(corpus: Corpus, e: ChordEmbeddings, selector: Selector, xi: float) -> ChoraleGraph:
    """Build the similarity graph: edge (u,v) with weight S(u,v) iff S(u,v) > xi.

    With the intro_and_cadence selector the weight is S_intro + S_cadence.
    Records whose intro is shorter than n, or whose cadence length differs
    from the corpus's most common cadence length, are skipped with a warning
    so heterogeneous corpora still build. Isolated nodes are removed; node
    indices are re-packed densely in corpus order.
    """
    if isinstance(xi, float) and math.isnan(xi):
        raise ValueError("xi must not be NaN")
    xi = float(xi)
    if len(corpus.records) < 2:
        raise ValueError("need at least 2 records to build a graph")

    want_intro = selector.kind in ("intro", "intro_and_cadence")
    want_cadence = selector.kind in ("cadence", "intro_and_cadence")
    cadence_len = None
    if want_cadence:
        cadence_len = _modal_length([len(r.cadence) for r in corpus.records])

    units = e.unit_vectors()
    kept = []          # (record index, list of (token tuple, matrix) per segment)
    skipped = 0
    for ri, rec in enumerate(corpus.records):
        if want_intro and len(rec.chords) < selector.n:
            logger.warning(
                "skipping record %s: intro needs %d chords, record has %d",
                rec.id, selector.n, len(rec.chords),
            )
            skipped += 1
            continue
        if want_cadence and len(rec.cadence) != cadence_len:
            logger.warning(
                "skipping record %s: cadence length %d differs from corpus norm %d",
                rec.id, len(rec.cadence), cadence_len,
            )
            skipped += 1
            continue
        segs = []
        for seq in segment(rec, selector):
            segs.append((tuple(seq), _segment_matrix(seq, e, units)))
        kept.append((ri, segs))
    if skipped:
        logger.warning("skipped %d of %d records under selector %s",
                       skipped, len(corpus.records), selector)
    if len(kept) < 2:
        raise ValueError("fewer than 2 records usable under the selector")

    # one kernel per segment slot (segment lengths are uniform across kept records)
    kernels = [attention_kernel(len(seg_tokens)) for seg_tokens, _ in kept[0][1]]

    pair_edges = []   # (kept pos u, kept pos v, weight)
    for iu in range(len(kept)):
        _, segs_u = kept[iu]
        for iv in range(iu + 1, len(kept)):
            _, segs_v = kept[iv]
            total = 0.0
            for slot, kern in enumerate(kernels):
                tok_u, mat_u = segs_u[slot]
                tok_v, mat_v = segs_v[slot]
                if tok_v < tok_u:
                    total += _pair_similarity(mat_v, mat_u, kern)
                else:
                    total += _pair_similarity(mat_u, mat_v, kern)
            if total > xi:
                pair_edges.append((iu, iv, total))

    connected = sorted({u for u, _, _ in pair_edges} | {v for _, v, _ in pair_edges})
    remap = {old: new for new, old in enumerate(connected)}
    ids = [corpus.records[kept[i][0]].id for i in connected]
    modes = [corpus.records[kept[i][0]].mode for i in connected]
    edges = [(remap[u], remap[v], w) for u, v, w in pair_edges]
    if not connected:
        return ChoraleGraph(ids=[], modes=[], edges=[], adjacency=[], neighbor_sets=[])
    return ChoraleGraph.from_edges(ids, modes, edges)


@dataclass(frozen=True)
class GraphStats:
    num_nodes: int
    num_edges: int
    avg_degree: float


def graph_stats(g: ChoraleGraph) -> GraphStats:
    """Node/edge counts and average degree 2|E|/|V| (0 for the empty graph)."""
    n, m = g.num_nodes, g.num_edges
    return GraphStats(n, m, 2.0 * m / n if n else 0.0)


def save_graph(g: ChoraleGraph, path) -> None:
    """Text format: "#nodes N", node lines "<index> <id> <mode>", then
    "#edges M" and edge lines "<u> <v> <weight>" with u < v."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"#nodes {g.num_nodes}\n")
        for i, (rid, mode) in enumerate(zip(g.ids, g.modes)):
            fh.write(f"{i} {rid} {mode}\n")
        fh.write(f"#edges {g.num_edges}\n")
        for u, v, w in g.edges:
            fh.write(f"{u} {v} {w!r}\n")


def load_graph(path) -> ChoraleGraph:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2 or header[0] != "#nodes":
            raise ValueError(f"{path}: expected '#nodes N' header")
        n = int(header[1])
        ids, modes = [], []
        for i in range(n):
            parts = fh.readline().split()
            if len(parts) != 3:
                raise ValueError(f"{path}: bad node line for node {i}")
            if int(parts[0]) != i:
                raise ValueError(f"{path}: node indices out of order at {parts[0]}")
            ids.append(parts[1])
            modes.append(parts[2])
        header = fh.readline().split()
        if len(header) != 2 or header[0] != "#edges":
            raise ValueError(f"{path}: expected '#edges M' header")
        m = int(header[1])
        edges = []
        for _ in range(m):
            parts = fh.readline().split()
            if len(parts) != 3:
                raise ValueError(f"{path}: bad edge line")
            u, v, w = int(parts[0]), int(parts[1]), float(parts[2])
            if not u < v:
                raise ValueError(f"{path}: edge ({u},{v}) violates u < v")
            edges.append((u, v, w))
    return ChoraleGraph.from_edges(ids, modes, edges)
