import itertools

import numpy as np
import pytest

from treesliced.rng import substream
from treesliced.tree import validate_tree
from treesliced.tree_build import (
    BuildConfig,
    MAX_PARTITION_DIM,
    build_clustering_tree,
    build_partition_tree,
    expand_hypercube,
    farthest_point_clustering,
    sample_ensemble,
)


def test_expand_hypercube_contains_all_points():
    rng = np.random.default_rng(0)
    for _ in range(50):
        pts = rng.random((10, 3)) * rng.random() * 5 + rng.normal(size=3)
        cube = expand_hypercube(pts, np.random.default_rng(rng.integers(2**32)))
        assert cube.contains(pts)
        b = float(np.max(pts.max(axis=0) - pts.min(axis=0)))
        assert b < cube.side <= 2 * b + 1e-12


def test_expand_hypercube_none_is_tight():
    pts = np.array([[0.0, 0.0], [1.0, 2.0]])
    cube = expand_hypercube(pts, None, expansion="none")
    assert cube.side == pytest.approx(2.0)
    assert np.allclose(cube.min_corner, [0.0, 0.0])


def test_expand_hypercube_degenerate_floor():
    pts = np.array([[3.0, 3.0], [3.0, 3.0]])
    cube = expand_hypercube(pts, np.random.default_rng(1))
    assert cube.side > 1.0  # floor times (1+u)
    assert cube.contains(pts)


def test_partition_tree_structure_and_mapping():
    rng = np.random.default_rng(7)
    pts = rng.random((40, 2))
    tree, mapping = build_partition_tree(pts, BuildConfig(deepest_level=5), np.random.default_rng(3))
    assert validate_tree(tree) == []
    assert mapping.shape == (40,)
    assert (mapping >= 0).all() and (mapping < tree.n_nodes).all()
    # every mapped node sits at most deepest_level below the root
    assert tree.depth[mapping].max() <= 5


def test_partition_tree_single_point():
    tree, mapping = build_partition_tree(np.array([[0.5, 0.5]]), BuildConfig(), np.random.default_rng(0))
    assert tree.n_nodes == 2
    assert mapping.tolist() == [1]
    assert np.allclose(tree.embeddings[1], [0.5, 0.5])


def test_partition_tree_coincident_points_stop_early():
    pts = np.tile([[0.25, 0.75]], (6, 1))
    tree, mapping = build_partition_tree(pts, BuildConfig(deepest_level=6), np.random.default_rng(0))
    assert tree.n_nodes == 2  # root plus one shared leaf
    assert (mapping == 1).all()


def test_partition_tree_rejects_high_dimension():
    pts = np.zeros((3, MAX_PARTITION_DIM + 1))
    with pytest.raises(ValueError, match="clustering"):
        build_partition_tree(pts, BuildConfig(), np.random.default_rng(0))


def test_partition_tree_deterministic_given_seed():
    pts = np.random.default_rng(11).random((25, 3))
    t1, m1 = build_partition_tree(pts, BuildConfig(), np.random.default_rng(5))
    t2, m2 = build_partition_tree(pts, BuildConfig(), np.random.default_rng(5))
    assert np.array_equal(m1, m2)
    assert np.array_equal(t1.parent, t2.parent)
    assert np.array_equal(t1.edge_weight, t2.edge_weight)


def brute_force_radius(points, kappa):
    n = len(points)
    best = np.inf
    from scipy.spatial.distance import cdist

    d = cdist(points, points)
    for centers in itertools.combinations(range(n), kappa):
        radius = d[:, list(centers)].min(axis=1).max()
        best = min(best, radius)
    return best


def test_fpc_two_approximation_small():
    rng = np.random.default_rng(9)
    for _ in range(20):
        n = int(rng.integers(3, 9))
        kappa = int(rng.integers(1, min(4, n + 1)))
        pts = rng.random((n, 2))
        centers, assign = farthest_point_clustering(pts, kappa, first=0)
        radius = max(
            np.linalg.norm(pts[i] - pts[centers[assign[i]]]) for i in range(n)
        )
        assert radius <= 2 * brute_force_radius(pts, kappa) + 1e-12


def test_fpc_kappa_covers_all_distinct_points():
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    centers, assign = farthest_point_clustering(pts, 3, first=0)
    assert sorted(centers.tolist()) == [0, 1, 2]
    assert sorted(assign.tolist()) == [0, 1, 2]


def test_fpc_duplicate_points_stop_growing():
    pts = np.array([[0.0, 0.0], [0.0, 0.0], [1.0, 1.0]])
    centers, assign = farthest_point_clustering(pts, 3, first=0)
    # only two distinct locations exist, so only two centers appear
    assert len(centers) == 2
    assert assign[0] == assign[1]


def test_fpc_ties_pick_lowest_index():
    # two candidates at equal farthest distance from the first center
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [-1.0, 0.0]])
    centers, _ = farthest_point_clustering(pts, 2, first=0)
    assert centers.tolist() == [0, 1]
    # assignment tie at the midpoint goes to the lower point index
    pts2 = np.array([[0.0, 0.0], [2.0, 0.0], [1.0, 0.0]])
    centers2, assign2 = farthest_point_clustering(pts2, 2, first=0)
    assert assign2[2] == assign2[0]


def test_clustering_tree_root_is_centroid():
    rng = np.random.default_rng(13)
    pts = rng.random((30, 4))
    tree, mapping = build_clustering_tree(pts, BuildConfig(deepest_level=3, kappa=3), np.random.default_rng(1))
    assert validate_tree(tree) == []
    assert np.allclose(tree.embeddings[tree.root], pts.mean(axis=0))
    assert (mapping >= 0).all() and (mapping < tree.n_nodes).all()


def test_clustering_tree_handles_high_dimension():
    pts = np.random.default_rng(2).random((12, 30))
    tree, mapping = build_clustering_tree(pts, BuildConfig(deepest_level=2, kappa=2), np.random.default_rng(4))
    assert validate_tree(tree) == []
    assert mapping.shape == (12,)


def test_sample_ensemble_reproducible_and_indexed():
    pts = np.random.default_rng(3).random((20, 2))
    ens1 = sample_ensemble(pts, 4, BuildConfig(deepest_level=4, seed=77), kind="partition")
    ens2 = sample_ensemble(pts, 4, BuildConfig(deepest_level=4, seed=77), kind="partition")
    assert ens1.n_slices == 4
    assert ens1.master_seed == ens2.master_seed == 77
    for t1, t2 in zip(ens1.trees, ens2.trees):
        assert np.array_equal(t1.parent, t2.parent)
        assert np.allclose(t1.edge_weight, t2.edge_weight)
    for m1, m2 in zip(ens1.point_to_node, ens2.point_to_node):
        assert np.array_equal(m1, m2)
    # slices differ from each other almost surely
    assert any(
        ens1.trees[0].n_nodes != t.n_nodes or not np.array_equal(ens1.trees[0].parent, t.parent)
        for t in ens1.trees[1:]
    )


def test_sample_ensemble_cluster_kind():
    pts = np.random.default_rng(8).random((15, 3))
    ens = sample_ensemble(pts, 3, BuildConfig(deepest_level=3, kappa=2), kind="cluster", master_seed=5)
    assert ens.kind == "cluster"
    assert ens.n_points == 15


def test_substream_independent_of_later_keys():
    a = substream(1, "x").random(3)
    b = substream(1, "x").random(3)
    assert np.array_equal(a, b)
    c = substream(1, "y").random(3)
    assert not np.array_equal(a, c)
