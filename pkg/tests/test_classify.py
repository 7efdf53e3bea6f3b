import numpy as np
import pytest

from choralegraph.classify import (
    LabelState,
    accuracy,
    ground_truth_labels,
    init_state,
    propagate_step,
    run_experiment,
    run_trial,
    threshold_labels,
)
from choralegraph.graph import ChoraleGraph
from synth import ring_graph, two_cliques_graph


def path_graph(weights=(1.0, 1.0)):
    """A - B - C with the given edge weights."""
    return ChoraleGraph.from_edges(
        ["A", "B", "C"], ["major", "major", "minor"],
        [(0, 1, weights[0]), (1, 2, weights[1])],
    )


def state_of(g, values, observed):
    return LabelState(
        values=np.array(values, dtype=float),
        observed=np.array(observed, dtype=bool),
        ground_truth=ground_truth_labels(g),
    )


def dense_propagation_oracle(g, values, observed):
    """Independent D^-1 W recomputation on a dense matrix."""
    n = g.num_nodes
    W = np.zeros((n, n))
    for u, v, w in g.edges:
        W[u, v] = w
        W[v, u] = w
    new = W @ values / W.sum(axis=1)
    return np.where(observed, values, new)


def test_symmetric_neighbors_cancel():
    g = path_graph()
    s = state_of(g, [1.0, 0.5, 0.0], [True, False, True])
    out = propagate_step(g, s)
    assert out.values[1] == pytest.approx(0.5, abs=1e-15)


def test_weighted_mean_hand_case():
    # B's neighbors: A (value 1, weight 3) and C (value 0, weight 1) -> 0.75
    g = path_graph(weights=(3.0, 1.0))
    s = state_of(g, [1.0, 0.5, 0.0], [True, False, True])
    out = propagate_step(g, s)
    assert out.values[1] == pytest.approx(0.75, abs=1e-15)
    # and 0.75 thresholds to class 1
    snapped = threshold_labels(out, 0.5, 0.5)
    assert snapped.values[1] == 1.0


def test_unanimous_observed_neighbors_pin_the_value():
    g = ChoraleGraph.from_edges(
        ["u", "a", "b"], ["major", "major", "major"],
        [(0, 1, 2.0), (0, 2, 5.0)],
    )
    s = state_of(g, [0.5, 1.0, 1.0], [False, True, True])
    out = propagate_step(g, s)
    assert out.values[0] == 1.0


def test_observed_nodes_are_fixed_points():
    g = two_cliques_graph(4)
    s = init_state(g, missing_rate=0.5, seed=3)
    current = s
    for _ in range(10):
        current = propagate_step(g, current)
        assert np.array_equal(current.values[s.observed], s.values[s.observed])
        assert np.array_equal(current.observed, s.observed)


def test_values_stay_in_unit_interval():
    g = two_cliques_graph(5)
    s = init_state(g, missing_rate=0.7, seed=11)
    for _ in range(8):
        s = propagate_step(g, s)
        assert s.values.min() >= 0.0
        assert s.values.max() <= 1.0


def test_matches_dense_oracle():
    rng = np.random.default_rng(7)
    for trial in range(10):
        n = int(rng.integers(5, 21))
        edges = {(min(i, (i + 1) % n), max(i, (i + 1) % n)) for i in range(n)}
        for _ in range(n):
            u, v = (int(x) for x in rng.integers(n, size=2))
            if u != v:
                edges.add((min(u, v), max(u, v)))
        g = ChoraleGraph.from_edges(
            [f"N{i}" for i in range(n)],
            ["major" if i % 2 else "minor" for i in range(n)],
            [(u, v, float(rng.uniform(0.1, 5.0))) for u, v in sorted(edges)],
        )
        values = rng.uniform(size=n)
        observed = rng.random(n) < 0.5
        s = LabelState(values=values.copy(), observed=observed,
                       ground_truth=ground_truth_labels(g))
        out = propagate_step(g, s)
        expected = dense_propagation_oracle(g, values, observed)
        assert np.all(np.abs(out.values - expected) <= 1e-12)


def test_complete_graph_equal_weights_gives_global_mean():
    n = 9
    ids = [f"N{i}" for i in range(n)]
    modes = ["major"] * n
    edges = [(u, v, 1.0) for u in range(n) for v in range(u + 1, n)]
    g = ChoraleGraph.from_edges(ids, modes, edges)
    rng = np.random.default_rng(13)
    values = rng.uniform(size=n)
    observed = np.zeros(n, dtype=bool)
    s = LabelState(values=values.copy(), observed=observed, ground_truth=np.ones(n))
    out = propagate_step(g, s)
    for u in range(n):
        others = np.delete(values, u)
        assert out.values[u] == pytest.approx(others.mean(), abs=1e-12)


def test_negative_weight_sum_rejected():
    g = ChoraleGraph.from_edges(
        ["a", "b", "c"], ["major", "major", "minor"],
        [(0, 1, -2.0), (1, 2, 1.0), (0, 2, 0.5)],
    )
    s = state_of(g, [1.0, 0.5, 0.0], [True, False, True])
    with pytest.raises(ValueError, match="negative"):
        propagate_step(g, s)


# ------------------------------------------------------------- thresholding


def test_threshold_cases():
    g = path_graph()
    s = state_of(g, [0.75, 0.5, 0.2], [False, False, False])
    out = threshold_labels(s, 0.5, 0.5)
    assert list(out.values) == [1.0, 0.5, 0.0]


def test_threshold_is_strict():
    g = path_graph()
    s = state_of(g, [0.5, 0.5, 0.5], [False, False, False])
    out = threshold_labels(s, 0.5, 0.5)
    assert list(out.values) == [0.5, 0.5, 0.5]


def test_threshold_band_untouched():
    g = path_graph()
    s = state_of(g, [0.65, 0.4, 0.85], [False, False, False])
    out = threshold_labels(s, class1_thr=0.8, class0_thr=0.3)
    assert list(out.values) == [0.65, 0.4, 1.0]


def test_threshold_order_validated():
    g = path_graph()
    s = state_of(g, [0.5, 0.5, 0.5], [False, False, False])
    with pytest.raises(ValueError, match="threshold"):
        threshold_labels(s, class1_thr=0.3, class0_thr=0.6)


# ----------------------------------------------------------------- accuracy


def test_accuracy_full_observation_is_one():
    g = two_cliques_graph(4)
    s = init_state(g, missing_rate=0.0, seed=0)
    assert accuracy(s) == 1.0


def test_accuracy_at_ninety_percent_missing():
    g = ring_graph(100)
    s = init_state(g, missing_rate=0.9, seed=5)
    assert np.count_nonzero(s.values == 0.5) == 90
    assert accuracy(s) == pytest.approx(0.10, abs=1e-12)


def test_accuracy_hand_count():
    g = ChoraleGraph.from_edges(
        ["a", "b", "c", "d"], ["major", "major", "minor", "minor"],
        [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)],
    )
    # truth = [1, 1, 0, 0]; three of four correct
    s = LabelState(
        values=np.array([1.0, 1.0, 0.0, 1.0]),
        observed=np.zeros(4, dtype=bool),
        ground_truth=ground_truth_labels(g),
    )
    assert accuracy(s) == 0.75


def test_unlabeled_counts_as_incorrect():
    g = path_graph()
    s = state_of(g, [1.0, 0.5, 0.0], [True, False, True])
    assert accuracy(s) == pytest.approx(2 / 3)


# --------------------------------------------------------------- init_state


def test_init_state_counts_and_masks():
    g = two_cliques_graph(50)  # 100 nodes
    s = init_state(g, missing_rate=0.9, seed=21)
    assert np.count_nonzero(~s.observed) == 90
    assert np.all(s.values[s.observed] == s.ground_truth[s.observed])
    assert np.all(s.values[~s.observed] == 0.5)


def test_init_state_validates_rate():
    g = ring_graph(6)
    with pytest.raises(ValueError, match="missing_rate"):
        init_state(g, missing_rate=1.0, seed=0)
    with pytest.raises(ValueError, match="missing_rate"):
        init_state(g, missing_rate=-0.1, seed=0)


def test_init_state_deterministic():
    g = ring_graph(30)
    a = init_state(g, 0.5, seed=9)
    b = init_state(g, 0.5, seed=9)
    assert np.array_equal(a.observed, b.observed)


# --------------------------------------------------------------- experiment


def test_trial_trajectory_length():
    g = two_cliques_graph(6)
    accs = run_trial(g, missing_rate=0.3, iterations=5, seed=4)
    assert len(accs) == 6
    assert all(0.0 <= a <= 1.0 for a in accs)


def test_hard_threshold_mode_differs_from_soft():
    g = two_cliques_graph(6)
    soft = run_trial(g, 0.7, iterations=5, seed=2, hard_threshold=False)
    hard = run_trial(g, 0.7, iterations=5, seed=2, hard_threshold=True)
    # same removals, same first sweep; later sweeps see snapped inputs
    assert soft[0] == hard[0]
    assert soft != hard or soft[1:] == hard[1:]


def test_experiment_report_shape():
    graphs = [two_cliques_graph(5), ring_graph(12)]
    report = run_experiment(graphs, rates=(0.1, 0.5), iterations=3, repeats=4, seed=1)
    assert len(report.cells) == 4
    cell = report.cell("g1", 0.5)
    assert len(cell.mean_by_iteration) == 4
    assert cell.trajectories.shape == (4, 4)
    with pytest.raises(KeyError):
        report.cell("g9", 0.5)


def test_experiment_rejects_negative_weights():
    g = ChoraleGraph.from_edges(
        ["a", "b", "c"], ["major", "major", "minor"],
        [(0, 1, -2.0), (1, 2, 1.0), (0, 2, 0.5)],
    )
    with pytest.raises(ValueError, match="negative"):
        run_experiment([g], rates=(0.1,), iterations=1, repeats=1, seed=0)


def test_experiment_deterministic():
    graphs = [two_cliques_graph(5)]
    a = run_experiment(graphs, rates=(0.3,), iterations=3, repeats=5, seed=7)
    b = run_experiment(graphs, rates=(0.3,), iterations=3, repeats=5, seed=7)
    assert np.array_equal(a.cells[0].trajectories, b.cells[0].trajectories)
