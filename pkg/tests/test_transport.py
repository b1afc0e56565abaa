import numpy as np
import pytest

from treesliced.measures import DiscreteMeasure
from treesliced.rng import substream
from treesliced.transport import (
    AssignmentProblem,
    check_w2_bound,
    euclidean_cost,
    exact_ot,
    nn_rank_experiment,
    optimal_assignment,
    pairwise_tsw,
    slice_tw_matrices,
    sliced_wasserstein_1d,
    tree_cost_matrix,
    tree_sliced_wasserstein,
    tree_wasserstein,
)
from treesliced.tree import NodeMeasure, RootedTree
from treesliced.tree_build import BuildConfig, sample_ensemble
from treesliced.datagen import random_measure


def random_tree(rng, n):
    parent = np.full(n, -1, dtype=np.int64)
    for v in range(1, n):
        parent[v] = int(rng.integers(0, v))
    w = np.concatenate([[0.0], rng.random(n - 1) * 2])
    return RootedTree(parent=parent, edge_weight=w, root=0)


def random_node_measure(rng, tree, k):
    nodes = rng.choice(tree.n_nodes, size=k, replace=False)
    weights = rng.exponential(size=k)
    return NodeMeasure.from_assignment(tree, nodes, weights / weights.sum())


def test_tree_wasserstein_matches_exact_ot():
    # closed form against the linear program on the tree metric
    for trial in range(25):
        rng = substream(100, "tw-oracle", trial)
        tree = random_tree(rng, int(rng.integers(3, 16)))
        mu = random_node_measure(rng, tree, int(rng.integers(1, tree.n_nodes + 1)))
        nu = random_node_measure(rng, tree, int(rng.integers(1, tree.n_nodes + 1)))
        closed = tree_wasserstein(tree, mu, nu)
        nodes = np.arange(tree.n_nodes)
        costs = tree_cost_matrix(tree, nodes, nodes)
        lp = exact_ot(costs, mu.mass, nu.mass)
        assert closed == pytest.approx(lp, abs=1e-9)


def test_tree_wasserstein_identity_and_symmetry():
    rng = substream(4, "tw-props")
    tree = random_tree(rng, 12)
    mu = random_node_measure(rng, tree, 5)
    nu = random_node_measure(rng, tree, 7)
    assert tree_wasserstein(tree, mu, mu) == 0.0
    assert tree_wasserstein(tree, mu, nu) == pytest.approx(tree_wasserstein(tree, nu, mu))


def test_tree_wasserstein_triangle_inequality():
    rng = substream(5, "tw-triangle")
    tree = random_tree(rng, 10)
    a, b, c = (random_node_measure(rng, tree, 4) for _ in range(3))
    assert tree_wasserstein(tree, a, c) <= tree_wasserstein(tree, a, b) + tree_wasserstein(tree, b, c) + 1e-12


def test_tree_wasserstein_rejects_foreign_measure():
    rng = substream(6, "tw-foreign")
    t1 = random_tree(rng, 8)
    t2 = random_tree(rng, 8)
    mu = random_node_measure(rng, t1, 3)
    nu = random_node_measure(rng, t2, 3)
    with pytest.raises(ValueError):
        tree_wasserstein(t1, mu, nu)


def test_tsw_is_the_slice_average():
    rng = substream(7, "tsw-avg")
    pts = rng.random((15, 2))
    ens = sample_ensemble(pts, 3, BuildConfig(deepest_level=4), master_seed=2)
    idx_a = np.arange(0, 7)
    idx_b = np.arange(7, 15)
    w_a = np.full(7, 1 / 7)
    w_b = np.full(8, 1 / 8)
    value = tree_sliced_wasserstein(ens, (idx_a, w_a), (idx_b, w_b))
    per_slice = []
    for tree, mapping in zip(ens.trees, ens.point_to_node):
        mu = NodeMeasure.from_assignment(tree, mapping[idx_a], w_a)
        nu = NodeMeasure.from_assignment(tree, mapping[idx_b], w_b)
        per_slice.append(tree_wasserstein(tree, mu, nu))
    assert value == pytest.approx(np.mean(per_slice), abs=1e-12)


def test_slice_matrices_match_scalar_path():
    rng = substream(8, "tsw-matrix")
    pts = rng.random((24, 2))
    ens = sample_ensemble(pts, 4, BuildConfig(deepest_level=4), master_seed=9)
    assignments = []
    offset = 0
    for size in (6, 6, 6, 6):
        idx = np.arange(offset, offset + size)
        assignments.append((idx, np.full(size, 1.0 / size)))
        offset += size
    full = pairwise_tsw(ens, assignments)
    assert np.allclose(full, full.T)
    assert np.allclose(np.diag(full), 0.0)
    for i in range(4):
        for j in range(i + 1, 4):
            scalar = tree_sliced_wasserstein(ens, assignments[i], assignments[j])
            assert full[i, j] == pytest.approx(scalar, abs=1e-12)


def test_slice_matrices_threading_is_bitwise_stable():
    rng = substream(9, "tsw-threads")
    pts = rng.random((30, 3))
    ens = sample_ensemble(pts, 5, BuildConfig(deepest_level=3), master_seed=4)
    assignments = [(np.arange(i * 6, (i + 1) * 6), np.full(6, 1 / 6)) for i in range(5)]
    seq = slice_tw_matrices(ens, assignments, threads=1)
    par = slice_tw_matrices(ens, assignments, threads=3)
    for a, b in zip(seq, par):
        assert np.array_equal(a, b)


def test_tsw_unmapped_support_is_an_error():
    rng = substream(10, "tsw-unmapped")
    pts = rng.random((10, 2))
    ens = sample_ensemble(pts, 2, BuildConfig(), master_seed=1)
    good = (np.arange(5), np.full(5, 0.2))
    bad = (np.array([3, 99]), np.array([0.5, 0.5]))
    with pytest.raises(ValueError, match="not mapped"):
        tree_sliced_wasserstein(ens, good, bad)


def test_sliced_wasserstein_1d_translation():
    # translated copies: every projected quantile shifts by <dir, delta>
    rng = substream(11, "sw")
    a = rng.random((20, 2))
    delta = np.array([0.3, -0.1])
    b = a + delta
    value = sliced_wasserstein_1d(a, b, 200, substream(11, "sw-dirs"))
    # mean over random unit directions of |<dir, delta>|
    dirs = []
    rng2 = substream(11, "sw-dirs")
    raw = rng2.normal(size=(200, 2))
    raw /= np.linalg.norm(raw, axis=1, keepdims=True)
    expected = np.abs(raw @ delta).mean()
    assert value == pytest.approx(expected, abs=1e-9)


def test_exact_ot_simple_instance():
    costs = np.array([[0.0, 1.0], [1.0, 0.0]])
    assert exact_ot(costs, [0.5, 0.5], [0.5, 0.5]) == pytest.approx(0.0, abs=1e-12)
    assert exact_ot(costs, [1.0, 0.0], [0.0, 1.0]) == pytest.approx(1.0)


def test_exact_ot_validates_marginals():
    costs = np.zeros((2, 2))
    with pytest.raises(ValueError):
        exact_ot(costs, [0.7, 0.2], [0.5, 0.5])
    with pytest.raises(ValueError):
        exact_ot(np.zeros((200, 60)), np.full(200, 1 / 200), np.full(60, 1 / 60))


def test_exact_ot_guard_can_be_lifted():
    n = 110
    costs = np.abs(np.subtract.outer(np.arange(n), np.arange(n))).astype(float)
    w = np.full(n, 1.0 / n)
    value = exact_ot(costs, w, w, max_size=n * n)
    assert value == pytest.approx(0.0, abs=1e-9)


def test_optimal_assignment_agrees_with_lp_for_p1():
    rng = substream(12, "assign")
    a = rng.random((8, 3))
    b = rng.random((8, 3))
    value, perm = optimal_assignment(AssignmentProblem(a, b, 1.0))
    lp = exact_ot(euclidean_cost(a, b), np.full(8, 1 / 8), np.full(8, 1 / 8))
    assert value == pytest.approx(lp, abs=1e-9)
    assert sorted(perm.tolist()) == list(range(8))


def test_check_w2_bound_holds_and_reports_levels():
    rng = substream(13, "bound")
    a = rng.random((12, 2))
    b = rng.random((12, 2))
    report = check_w2_bound(a, b, 8, substream(13, "bound-cube"))
    assert report.holds
    assert report.w_mean <= report.w2 + 1e-12
    assert report.n == 12
    assert report.levels[-1]["q"] == 0
    for lv in report.levels:
        assert 2 * (report.n - lv["q"]) == lv["abs_diff"]


def test_check_w2_bound_identical_clouds():
    rng = substream(14, "bound-same")
    a = rng.random((6, 2))
    # identical clouds share every point, which the check must refuse
    with pytest.raises(ValueError, match="duplicate"):
        check_w2_bound(a, a.copy(), 4, rng)


def test_check_w2_bound_shape_errors():
    rng = substream(15, "bound-shape")
    with pytest.raises(ValueError):
        check_w2_bound(rng.random((4, 2)), rng.random((5, 2)), 4, rng)
    with pytest.raises(ValueError):
        check_w2_bound(rng.random((4, 2)), rng.random((4, 2)), 0, rng)


def test_nn_rank_experiment_returns_mean_ranks():
    rng = substream(16, "rank")
    clouds = [rng.random((12, 2)) for _ in range(8)]
    ranks = nn_rank_experiment(clouds, (1, 3), substream(16, "rank-run"))
    assert set(ranks) == {1, 3}
    for v in ranks.values():
        assert 1.0 <= v <= 7.0


def test_random_measure_is_on_the_simplex():
    m = random_measure(3, 20, substream(17, "rm"))
    assert isinstance(m, DiscreteMeasure)
    assert m.supports.shape == (20, 3)
    assert m.weights.sum() == pytest.approx(1.0)
    assert (m.weights > 0).all()
