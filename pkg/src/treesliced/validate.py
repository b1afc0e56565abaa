"""Validation suites certifying the closed forms against exact oracles.

Each suite is a pure function of its seed that returns a JSON-friendly
dict of deterministic results (no timing fields), so suite outputs can
be compared byte for byte across runs. The CLI and service expose them
behind the `validate` command; the acceptance tests consume them
directly.
"""

import hashlib

import numpy as np

from .datagen import OrbitConfig, generate_orbit_dataset, random_measure
from .kernel import check_negative_definite, gram, kernel_power
from .rng import substream
from .transport import (
    check_w2_bound,
    euclidean_cost,
    exact_ot,
    nn_rank_experiment,
    pairwise_tsw,
    tree_cost_matrix,
    tree_sliced_wasserstein,
    tree_wasserstein,
)
from .tree import NodeMeasure, RootedTree
from .tree_build import (
    BuildConfig,
    build_clustering_tree,
    build_partition_tree,
    farthest_point_clustering,
    sample_ensemble,
)
from .io import stack_measures

__all__ = [
    "run_oracle",
    "run_nd_kernel",
    "run_bound",
    "run_chain",
    "run_cluster",
    "run_golden",
    "run_rank",
    "run_perf",
    "run_suites",
    "ND_NEGATIVE_CONTROL",
    "GOLDEN_POINTS",
    "CLI_SUITES",
]

ORACLE_TOL = 1e-9
CHAIN_TOL = 1e-9
ND_QUAD_TOL = 1e-9
EIG_TOL = 1e-8
DIVISIBILITY_TOL = 1e-12

# line metric squared distances for points {0, 1, 2} with the 1<->2 entry
# bumped off the negative-type cone; c = (1, 1, -2) gives c^T D c = 1 > 0
ND_NEGATIVE_CONTROL = np.array(
    [
        [0.0, 4.5, 1.0],
        [4.5, 0.0, 1.0],
        [1.0, 1.0, 0.0],
    ]
)

# seven planar points whose tight-box partition tree is known exactly:
# 10 nodes, 9 edges, deepest level 3
GOLDEN_POINTS = np.array(
    [
        [1.0, 1.0],
        [0.6, 0.3],
        [0.8, 0.4],
        [0.8, 0.3],
        [0.9, 0.3],
        [0.0, 0.0],
        [0.8, 0.1],
    ]
)


def _uniform_measure_nodes(rng: np.random.Generator, n_nodes: int, max_support: int = 20):
    k = int(rng.integers(1, min(max_support, n_nodes) + 1))
    nodes = rng.choice(n_nodes, size=k, replace=False)
    weights = rng.exponential(1.0, k)
    return np.sort(nodes), weights / weights.sum()


def run_oracle(seed: int, trials: int = 200) -> dict:
    """Closed form versus exact LP on random trees and measures.

    Alternates partition- and clustering-built trees (at most 32 nodes),
    draws measures on at most 20 nodes with Dirichlet weights, and
    compares the closed-form tree distance against the transport LP over
    tree-metric costs.
    """
    max_diff = 0.0
    worst = -1
    max_nodes = 0
    for i in range(trials):
        rng = substream(seed, "oracle", i)
        d = 1 + i % 3
        n_pts = int(rng.integers(3, 11))
        pts = rng.random((n_pts, d))
        cfg = BuildConfig(deepest_level=2 + i % 2, kappa=2 + i % 3)
        if i % 2 == 0:
            tree, _ = build_partition_tree(pts, cfg, rng)
        else:
            tree, _ = build_clustering_tree(pts, cfg, rng)
        max_nodes = max(max_nodes, tree.n_nodes)
        nodes_a, w_a = _uniform_measure_nodes(rng, tree.n_nodes)
        nodes_b, w_b = _uniform_measure_nodes(rng, tree.n_nodes)
        mu = NodeMeasure.from_assignment(tree, nodes_a, w_a)
        nu = NodeMeasure.from_assignment(tree, nodes_b, w_b)
        tw = tree_wasserstein(tree, mu, nu)
        lp = exact_ot(tree_cost_matrix(tree, nodes_a, nodes_b), w_a, w_b)
        diff = abs(tw - lp)
        if diff > max_diff:
            max_diff = diff
            worst = i
    return {
        "name": "oracle",
        "trials": trials,
        "max_abs_diff": max_diff,
        "max_tree_nodes": max_nodes,
        "worst_trial": worst,
        "passed": bool(max_diff <= ORACLE_TOL),
    }


def _nd_family_matrix(seed: int, family: int):
    rng = substream(seed, "nd-measures", family)
    n_slices = (1, 4, 10)[family % 3]
    kind = "partition" if family % 2 == 0 else "cluster"
    measures = [random_measure(2, int(rng.integers(3, 9)), rng) for _ in range(10)]
    points, assignments = stack_measures(measures)
    cfg = BuildConfig(deepest_level=4, kappa=3)
    master = int(substream(seed, "nd-master", family).integers(2**63))
    ensemble = sample_ensemble(points, n_slices, cfg, kind=kind, master_seed=master)
    return pairwise_tsw(ensemble, assignments), n_slices, kind


def run_nd_kernel(seed: int, families: int = 100, nd_trials: int = 100) -> dict:
    """Negative definiteness of sliced distances, PSD of their kernels.

    For each family of 10 random measures a sliced-distance matrix is
    assembled (slice counts cycling 1/4/10, builders alternating), then
    checked for negative definiteness, kernel positive
    semidefiniteness over bandwidths {0.1, 1, 10}, and the entrywise
    divisibility identity. A constructed non-negative-definite control
    matrix must fail the same harness.
    """
    worst_quad = -np.inf
    min_centered = np.inf
    kernel_min_eig = np.inf
    max_div_gap = 0.0
    digest = hashlib.sha256()
    for f in range(families):
        matrix, _, _ = _nd_family_matrix(seed, f)
        digest.update(matrix.tobytes())
        report = check_negative_definite(matrix, nd_trials, substream(seed, "nd-c", f))
        worst_quad = max(worst_quad, report.max_quadratic_form)
        min_centered = min(min_centered, report.min_centered_eigenvalue)
        for t in (0.1, 1.0, 10.0):
            k = gram(matrix, t)
            kernel_min_eig = min(kernel_min_eig, float(np.linalg.eigvalsh(k.entries)[0]))
        base = gram(matrix, 1.0)
        for i in (2, 5):
            powered = kernel_power(gram(matrix, 1.0 / i), i)
            max_div_gap = max(max_div_gap, float(np.max(np.abs(powered.entries - base.entries))))
    control = check_negative_definite(ND_NEGATIVE_CONTROL, nd_trials, substream(seed, "nd-control"))
    nd_passed = worst_quad <= ND_QUAD_TOL and min_centered >= -EIG_TOL and not control.passed
    kernel_passed = kernel_min_eig >= -EIG_TOL and max_div_gap <= DIVISIBILITY_TOL
    return {
        "name": "nd",
        "families": families,
        "max_quadratic_form": float(worst_quad),
        "min_centered_eigenvalue": float(min_centered),
        "negative_control_failed": bool(not control.passed),
        "control_min_centered_eigenvalue": control.min_centered_eigenvalue,
        "kernel_min_eigenvalue": float(kernel_min_eig),
        "max_divisibility_gap": float(max_div_gap),
        "matrices_digest": digest.hexdigest(),
        "kernel_passed": bool(kernel_passed),
        "passed": bool(nd_passed and kernel_passed),
    }


def run_bound(seed: int, trials: int = 100, max_separation: int = 8) -> dict:
    """Quantization bound and the per-level matched-pair identity.

    Instances are rejection-sampled until the clouds separate within
    max_separation levels; the identity n - q_i = abs_diff_i / 2 is
    checked in exact integer arithmetic at every level.
    """
    violations = []
    identity_ok = True
    max_gap = -np.inf  # max of w_mean - rhs, negative when the bound holds
    max_h = 0
    for i in range(trials):
        report = None
        for attempt in range(200):
            rng = substream(seed, "bound", i, attempt)
            d = 1 + i % 3
            n_max = (8, 20, 30)[d - 1]
            n = int(rng.integers(2, n_max + 1))
            a = rng.random((n, d))
            b = rng.random((n, d))
            try:
                candidate = check_w2_bound(a, b, max_separation, rng)
            except ValueError:
                continue
            if candidate.h_used <= max_separation:
                report = candidate
                break
        if report is None:
            raise RuntimeError(f"bound instance {i}: no draw separated within {max_separation} levels")
        max_h = max(max_h, report.h_used)
        max_gap = max(max_gap, report.w_mean - report.rhs)
        if not report.holds:
            violations.append({"trial": i, "w_mean": report.w_mean, "rhs": report.rhs})
        for lv in report.levels:
            if 2 * (report.n - lv["q"]) != lv["abs_diff"]:
                identity_ok = False
    return {
        "name": "bound",
        "trials": trials,
        "max_gap": float(max_gap),
        "max_separation_used": max_h,
        "level_identity_exact": bool(identity_ok),
        "violations": violations,
        "passed": bool(not violations and identity_ok),
    }


def _chain_tree(values: np.ndarray) -> RootedTree:
    k = values.shape[0]
    parent = np.arange(-1, k - 1, dtype=np.int64)
    weight = np.concatenate([[0.0], np.diff(values)])
    return RootedTree(parent=parent, edge_weight=weight, root=0, embeddings=values[:, None])


def run_chain(seed: int, trials: int = 100) -> dict:
    """Chain-tree distance equals the sorted-projection 1-D formula."""
    max_diff = 0.0
    for i in range(trials):
        rng = substream(seed, "chain", i)
        d = 1 + i % 3
        n = int(rng.integers(2, 51))
        a = rng.random((n, d))
        b = rng.random((n, d))
        u = rng.standard_normal(d)
        u /= np.sqrt(np.sum(u**2))
        pa = a @ u
        pb = b @ u
        direct = float(np.sum(np.abs(np.sort(pa) - np.sort(pb)))) / n
        values = np.unique(np.concatenate([pa, pb]))
        tree = _chain_tree(values)
        uniform = np.full(n, 1.0 / n)
        mu = NodeMeasure.from_assignment(tree, np.searchsorted(values, pa), uniform)
        nu = NodeMeasure.from_assignment(tree, np.searchsorted(values, pb), uniform)
        max_diff = max(max_diff, abs(tree_wasserstein(tree, mu, nu) - direct))
    return {
        "name": "chain",
        "trials": trials,
        "max_abs_diff": float(max_diff),
        "passed": bool(max_diff <= CHAIN_TOL),
    }


def _optimal_radius(pts: np.ndarray, kappa: int) -> float:
    from itertools import combinations

    n = pts.shape[0]
    k = min(kappa, n)
    dist = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2))
    best = np.inf
    for centers in combinations(range(n), k):
        radius = float(dist[:, centers].min(axis=1).max())
        best = min(best, radius)
    return best


def run_cluster() -> dict:
    """Exhaustive 2-approximation check for farthest-point clustering.

    Every subset of the 3x3 integer grid with 1 to 8 points, every
    kappa in {1,2,3}, every choice of first center; the greedy radius
    must stay within twice the brute-force optimum.
    """
    from itertools import combinations

    grid = np.array([[x, y] for x in range(3) for y in range(3)], dtype=np.float64)
    max_ratio = 0.0
    sets_checked = 0
    cases = 0
    for size in range(1, 9):
        for subset in combinations(range(9), size):
            pts = grid[list(subset)]
            sets_checked += 1
            for kappa in (1, 2, 3):
                opt = _optimal_radius(pts, kappa)
                for first in range(size):
                    centers, assignment = farthest_point_clustering(pts, kappa, first=first)
                    radius = float(
                        np.sqrt(((pts - pts[centers][assignment]) ** 2).sum(axis=1)).max()
                    )
                    cases += 1
                    if opt == 0.0:
                        if radius > 0.0:
                            max_ratio = np.inf
                        continue
                    max_ratio = max(max_ratio, radius / opt)
    return {
        "name": "cluster",
        "point_sets": sets_checked,
        "cases": cases,
        "max_ratio": float(max_ratio),
        "passed": bool(max_ratio <= 2.0 + 1e-12),
    }


def run_golden() -> dict:
    """Known seven-point partition tree: 10 nodes, 9 edges, depth 3."""
    cfg = BuildConfig(deepest_level=6, expansion="none")
    tree, p2n = build_partition_tree(GOLDEN_POINTS, cfg, rng=None)
    deepest = int(tree.depth.max())
    n_edges = tree.n_nodes - 1
    return {
        "name": "golden",
        "n_nodes": int(tree.n_nodes),
        "n_edges": int(n_edges),
        "deepest_level": deepest,
        "root_embedding": [float(x) for x in tree.embeddings[tree.root]],
        "point_to_node": [int(v) for v in p2n],
        "passed": bool(tree.n_nodes == 10 and n_edges == 9 and deepest == 3),
    }


def run_rank(
    seed: int,
    slice_counts=(1, 12),
    subsample: int = 50,
    orbit_cfg: OrbitConfig = None,
    rank_slack: float = 0.5,
) -> dict:
    """Near-neighbor rank trend on the orbit dataset.

    Clouds are subsampled orbits; the mean assignment-distance rank of
    the sliced nearest neighbor must not degrade by more than
    rank_slack when going from the fewest to the most slices.
    """
    if orbit_cfg is None:
        orbit_cfg = OrbitConfig(seed=int(substream(seed, "rank-orbits").integers(2**63)))
    clouds = generate_orbit_dataset(orbit_cfg)
    sub_rng = substream(seed, "rank-subsample")
    subsampled = []
    for cloud in clouds:
        take = sub_rng.choice(cloud.points.shape[0], size=subsample, replace=False)
        subsampled.append(cloud.points[np.sort(take)])
    ranks = nn_rank_experiment(
        subsampled,
        slice_counts,
        substream(seed, "rank-ensemble"),
        cfg=BuildConfig(deepest_level=5),
        kind="partition",
    )
    counts = sorted(ranks)
    low, high = counts[0], counts[-1]
    passed = ranks[high] <= ranks[low] + rank_slack
    return {
        "name": "rank",
        "n_clouds": len(subsampled),
        "points_per_cloud": subsample,
        "mean_ranks": {str(k): float(v) for k, v in ranks.items()},
        "slack": rank_slack,
        "passed": bool(passed),
    }


def run_perf(seed: int, n_support: int = 1000, n_slices: int = 10, repeats: int = 5):
    """Sliced distance versus the exact LP at benchmark scale.

    Returns (values, timings): values holds only seed-determined
    numbers and belongs in reproducibility manifests, timings holds the
    median-of-repeats wall times and the speedup.
    """
    import time

    rng = substream(seed, "perf")
    mu = random_measure(2, n_support, rng)
    nu = random_measure(2, n_support, rng)
    points, assignments = stack_measures([mu, nu])
    cfg = BuildConfig(deepest_level=6)
    ensemble = sample_ensemble(
        points, n_slices, cfg, kind="partition", master_seed=int(rng.integers(2**63))
    )

    tsw_times = []
    tsw_value = None
    for _ in range(repeats):
        start = time.perf_counter()
        tsw_value = tree_sliced_wasserstein(ensemble, assignments[0], assignments[1])
        tsw_times.append(time.perf_counter() - start)

    costs = euclidean_cost(mu.supports, nu.supports)
    exact_times = []
    exact_value = None
    for _ in range(repeats):
        start = time.perf_counter()
        exact_value = exact_ot(costs, mu.weights, nu.weights, max_size=n_support * n_support)
        exact_times.append(time.perf_counter() - start)

    values = {
        "name": "perf",
        "n_support": n_support,
        "n_slices": n_slices,
        "tsw_value": float(tsw_value),
        "exact_value": float(exact_value),
    }
    timings = {
        "tsw_median_s": float(np.median(tsw_times)),
        "exact_median_s": float(np.median(exact_times)),
    }
    timings["speedup"] = timings["exact_median_s"] / timings["tsw_median_s"]
    return values, timings


CLI_SUITES = ("oracle", "nd", "bound", "cluster", "rank")


def run_suites(names, seed: int, trials: int = None) -> list:
    """Run the named validation suites; 'all' expands to every suite.

    The trials override applies to the suites with an instance count
    (oracle, nd, bound).
    """
    if names == "all":
        names = list(CLI_SUITES)
    elif isinstance(names, str):
        names = [names]
    results = []
    for name in names:
        if name == "oracle":
            results.append(run_oracle(seed, trials or 200))
        elif name == "nd":
            results.append(run_nd_kernel(seed, families=trials or 100))
        elif name == "bound":
            results.append(run_bound(seed, trials or 100))
        elif name == "cluster":
            results.append(run_cluster())
        elif name == "rank":
            results.append(run_rank(seed))
        else:
            raise ValueError(f"unknown suite {name!r}; choose from {('all',) + CLI_SUITES}")
    return results
