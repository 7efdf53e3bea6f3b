"""Collective classification: weighted neighbor-label aggregation with
thresholding, and the missing-label experiment grid over several graphs."""

import csv
import logging
from dataclasses import dataclass, field

import numpy as np

from .corpus import Corpus
from .graph import ChoraleGraph, GraphStats, graph_stats

logger = logging.getLogger(__name__)

MODE_LABEL = {"minor": 0, "major": 1}
UNLABELED = 0.5


@dataclass
class LabelState:
    """Per-node label values in [0,1]; 0.5 means unlabeled.

    Observed nodes hold their ground-truth 0/1 value and are clamped: the
    propagation step never changes them.
    """

    values: np.ndarray
    observed: np.ndarray
    ground_truth: np.ndarray

    def copy(self) -> "LabelState":
        return LabelState(self.values.copy(), self.observed.copy(), self.ground_truth.copy())


def ground_truth_labels(g: ChoraleGraph, corpus: Corpus | None = None) -> np.ndarray:
    """0/1 labels (minor=0, major=1) per node, from the corpus if given,
    otherwise from the modes stored on the graph."""
    if corpus is None:
        modes = g.modes
    else:
        by_id = {rec.id: rec.mode for rec in corpus.records}
        missing = [rid for rid in g.ids if rid not in by_id]
        if missing:
            raise ValueError(f"graph nodes missing from corpus: {missing[:5]}")
        modes = [by_id[rid] for rid in g.ids]
    return np.array([MODE_LABEL[m] for m in modes], dtype=float)


def init_state(g: ChoraleGraph, missing_rate: float, seed: int, corpus: Corpus | None = None) -> LabelState:
    """Remove floor(missing_rate * |V|) labels uniformly at random.

    Removed nodes start at 0.5 and are not observed; all others hold their
    ground truth.
    """
    if not 0.0 <= missing_rate < 1.0:
        raise ValueError(f"missing_rate must be in [0, 1), got {missing_rate}")
    truth = ground_truth_labels(g, corpus)
    n = g.num_nodes
    n_missing = int(missing_rate * n)
    rng = np.random.default_rng(seed)
    removed = rng.choice(n, size=n_missing, replace=False)
    observed = np.ones(n, dtype=bool)
    observed[removed] = False
    values = truth.copy()
    values[removed] = UNLABELED
    return LabelState(values=values, observed=observed, ground_truth=truth)


def propagate_step(g: ChoraleGraph, s: LabelState) -> LabelState:
    """One synchronous sweep: every unobserved node takes the weighted mean of
    its neighbors' current values, P(y_u) = sum W_uv P(y_v) / sum W_uv."""
    idx, wts, offsets, wsums = g.flat_adjacency()
    if np.any(wsums < 0):
        bad = int(np.argmin(wsums))
        raise ValueError(
            f"negative edge-weight sum at node {bad}; propagation needs non-negative weights"
        )
    gathered = wts * s.values[idx]
    new_values = np.add.reduceat(gathered, offsets[:-1]) / wsums
    new_values = np.where(s.observed, s.values, new_values)
    return LabelState(values=new_values, observed=s.observed, ground_truth=s.ground_truth)


def threshold_labels(s: LabelState, class1_thr: float = 0.5, class0_thr: float = 0.5) -> LabelState:
    """Snap values strictly above class1_thr to 1 and strictly below
    class0_thr to 0; anything in between is left as is."""
    if class0_thr > class1_thr:
        raise ValueError(
            f"class0 threshold {class0_thr} must not exceed class1 threshold {class1_thr}"
        )
    values = s.values.copy()
    values[s.values > class1_thr] = 1.0
    values[s.values < class0_thr] = 0.0
    return LabelState(values=values, observed=s.observed, ground_truth=s.ground_truth)


def accuracy(s: LabelState, class1_thr: float = 0.5, class0_thr: float = 0.5) -> float:
    """Fraction of all nodes whose thresholded value equals ground truth.

    Values that stay strictly between the thresholds (still unlabeled) count
    as incorrect.
    """
    snapped = threshold_labels(s, class1_thr, class0_thr)
    return float(np.mean(snapped.values == s.ground_truth))


@dataclass
class CellResult:
    """One (graph, missing rate) cell: accuracy trajectory over repeats."""

    graph_name: str
    stats: GraphStats
    missing_rate: float
    mean_by_iteration: list[float]
    std_by_iteration: list[float]
    trajectories: np.ndarray = field(repr=False)   # (repeats, iterations+1)

    @property
    def final_mean(self) -> float:
        return self.mean_by_iteration[-1]

    @property
    def initial_mean(self) -> float:
        return self.mean_by_iteration[0]


@dataclass
class ExperimentReport:
    cells: list[CellResult]
    iterations: int
    repeats: int
    seed: int

    def cell(self, graph_name: str, missing_rate: float) -> CellResult:
        for c in self.cells:
            if c.graph_name == graph_name and c.missing_rate == missing_rate:
                return c
        raise KeyError(f"no cell ({graph_name}, {missing_rate})")


def run_trial(
    g: ChoraleGraph,
    missing_rate: float,
    iterations: int,
    seed: int,
    hard_threshold: bool = False,
    class1_thr: float = 0.5,
    class0_thr: float = 0.5,
) -> list[float]:
    """One trial: fresh label removal, then propagate (and optionally snap the
    state) per iteration. Returns accuracy at iterations 0..iterations.

    By default values stay continuous between iterations and thresholding is
    only applied to the copy that accuracy reads; hard_threshold snaps the
    propagating state itself each iteration.
    """
    state = init_state(g, missing_rate, seed)
    accs = [accuracy(state, class1_thr, class0_thr)]
    for _ in range(iterations):
        state = propagate_step(g, state)
        if hard_threshold:
            state = threshold_labels(state, class1_thr, class0_thr)
        accs.append(accuracy(state, class1_thr, class0_thr))
    return accs


def run_experiment(
    graphs: list[ChoraleGraph],
    rates=(0.1, 0.3, 0.5, 0.7, 0.9),
    iterations: int = 5,
    repeats: int = 30,
    seed: int = 0,
    names=None,
    hard_threshold: bool = False,
    class1_thr: float = 0.5,
    class0_thr: float = 0.5,
) -> ExperimentReport:
    """The full missing-label grid: every (graph, rate) cell, `repeats`
    independent removals each, accuracy tracked per iteration."""
    if names is None:
        names = [f"g{i + 1}" for i in range(len(graphs))]
    if len(names) != len(graphs):
        raise ValueError("need one name per graph")
    for name, g in zip(names, graphs):
        _, wts, _, _ = g.flat_adjacency()
        if len(wts) and wts.min() < 0:
            raise ValueError(
                f"graph {name} has negative edge weights; rebuild with a threshold >= 0"
            )
    cells = []
    for gi, (name, g) in enumerate(zip(names, graphs)):
        stats = graph_stats(g)
        for ri, rate in enumerate(rates):
            traj = np.empty((repeats, iterations + 1))
            for rep in range(repeats):
                trial_seed = np.random.SeedSequence([seed, gi, ri, rep]).generate_state(1)[0]
                traj[rep] = run_trial(
                    g, rate, iterations, int(trial_seed),
                    hard_threshold=hard_threshold,
                    class1_thr=class1_thr, class0_thr=class0_thr,
                )
            cells.append(
                CellResult(
                    graph_name=name,
                    stats=stats,
                    missing_rate=rate,
                    mean_by_iteration=[float(m) for m in traj.mean(axis=0)],
                    std_by_iteration=[float(sd) for sd in traj.std(axis=0)],
                    trajectories=traj,
                )
            )
            logger.info(
                "%s rate=%.0f%%: accuracy %.3f -> %.3f",
                name, 100 * rate, cells[-1].initial_mean, cells[-1].final_mean,
            )
    return ExperimentReport(cells=cells, iterations=iterations, repeats=repeats, seed=seed)


def write_experiment_csv(report: ExperimentReport, path) -> None:
    """Aggregated long-format table, one row per cell per iteration."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["graph_id", "nodes", "edges", "avg_degree", "missing_rate",
             "iteration", "mean_accuracy", "std_accuracy"]
        )
        for c in report.cells:
            for it, (mean, std) in enumerate(zip(c.mean_by_iteration, c.std_by_iteration)):
                writer.writerow(
                    [c.graph_name, c.stats.num_nodes, c.stats.num_edges,
                     repr(round(c.stats.avg_degree, 4)), repr(c.missing_rate),
                     it, repr(mean), repr(std)]
                )


def write_curves_csv(report: ExperimentReport, path) -> None:
    """Per-repeat trajectories in long format, for accuracy-vs-iteration plots."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["graph_id", "missing_rate", "repeat", "iteration", "accuracy"])
        for c in report.cells:
            for rep in range(c.trajectories.shape[0]):
                for it in range(c.trajectories.shape[1]):
                    writer.writerow(
                        [c.graph_name, repr(c.missing_rate), rep, it,
                         repr(float(c.trajectories[rep, it]))]
                    )
