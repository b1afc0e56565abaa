"""Randomized tree metrics over point sets.

Two constructions are provided. The partition tree recursively halves a
randomly expanded bounding hypercube along every axis, keeping occupied
cells, down to a preset deepest level; it suits low dimension since each
split enumerates 2^d child cells. The clustering tree recursively splits
each node's points into kappa clusters by greedy farthest-point
clustering and suits high dimension. An ensemble bundles independently
seeded trees so distances can be averaged over slices.
"""

from dataclasses import dataclass

import numpy as np

from .rng import slice_seed
from .tree import RootedTree

__all__ = [
    "Hypercube",
    "BuildConfig",
    "TreeEnsemble",
    "expand_hypercube",
    "build_partition_tree",
    "farthest_point_clustering",
    "build_clustering_tree",
    "sample_ensemble",
]

MAX_PARTITION_DIM = 20
MIN_SIDE = 1.0  # floor for degenerate bounding boxes, in data units

EDGE_METRICS = ("euclidean", "l1")
EXPANSIONS = ("random", "none")
KINDS = ("partition", "cluster")


@dataclass(frozen=True)
class Hypercube:
    """Axis-aligned hypercube given by its minimum corner and side."""

    min_corner: np.ndarray
    side: float

    def __post_init__(self):
        corner = np.asarray(self.min_corner, dtype=np.float64)
        if corner.ndim != 1 or corner.size == 0:
            raise ValueError("min_corner must be a 1-D point")
        if not self.side > 0:
            raise ValueError("side must be positive")
        object.__setattr__(self, "min_corner", corner)
        object.__setattr__(self, "side", float(self.side))

    @property
    def center(self) -> np.ndarray:
        return self.min_corner + 0.5 * self.side

    def contains(self, point) -> bool:
        p = np.asarray(point, dtype=np.float64)
        return bool(np.all(p >= self.min_corner) and np.all(p <= self.min_corner + self.side))


@dataclass(frozen=True)
class BuildConfig:
    """Parameters shared by the tree builders.

    deepest_level is the forced-stop depth H_T, kappa the cluster count
    per split, edge_metric the distance used for edge weights, seed the
    default master seed for ensembles. expansion selects random
    hypercube growth (the default) or the tight bounding box, which is
    the deterministic mode used by golden tests.
    """

    deepest_level: int = 6
    kappa: int = 4
    edge_metric: str = "euclidean"
    seed: int = 0
    expansion: str = "random"

    def __post_init__(self):
        if self.deepest_level < 1:
            raise ValueError("deepest_level must be >= 1")
        if self.kappa < 2:
            raise ValueError("kappa must be >= 2")
        if self.edge_metric not in EDGE_METRICS:
            raise ValueError(f"edge_metric must be one of {EDGE_METRICS}")
        if self.expansion not in EXPANSIONS:
            raise ValueError(f"expansion must be one of {EXPANSIONS}")


@dataclass(frozen=True)
class TreeEnsemble:
    """Independently sampled trees plus the point-to-node map per tree."""

    trees: tuple
    point_to_node: tuple
    n_slices: int
    kind: str = "partition"
    config: BuildConfig = None
    master_seed: int = 0

    def __post_init__(self):
        trees = tuple(self.trees)
        maps = tuple(np.asarray(m, dtype=np.int64) for m in self.point_to_node)
        if self.n_slices != len(trees) or self.n_slices < 1:
            raise ValueError("n_slices must equal the number of trees and be >= 1")
        if len(maps) != len(trees):
            raise ValueError("one point_to_node map is required per tree")
        for tree, m in zip(trees, maps):
            if m.size and (m.min() < 0 or m.max() >= tree.n_nodes):
                raise ValueError("point_to_node entry out of node range")
        object.__setattr__(self, "trees", trees)
        object.__setattr__(self, "point_to_node", maps)

    @property
    def n_points(self) -> int:
        return self.point_to_node[0].shape[0]


def _as_points(points) -> np.ndarray:
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise ValueError("points must be a non-empty (n, d) array")
    if not np.all(np.isfinite(pts)):
        raise ValueError("point coordinates must be finite")
    return pts


def _edge_dist(a: np.ndarray, b: np.ndarray, metric: str) -> float:
    if metric == "l1":
        return float(np.sum(np.abs(a - b)))
    return float(np.sqrt(np.sum((a - b) ** 2)))


def expand_hypercube(points, rng: np.random.Generator, expansion: str = "random") -> Hypercube:
    """Bounding hypercube of a point set, randomly grown and shifted.

    With b the longest side of the tight bounding box, the side is drawn
    as b*(1+u) with u ~ Uniform(0,1], at most 2b, and the corner is
    shifted per axis by a uniform offset in [-(side-b), 0] so every
    point stays inside. A degenerate box falls back to side floor 1.0.
    With expansion="none" the tight box itself is returned (after the
    same floor) and the generator is not consumed.
    """
    pts = _as_points(points)
    lo = pts.min(axis=0)
    extent = float((pts.max(axis=0) - lo).max())
    b = extent if extent > 0 else MIN_SIDE
    if expansion == "none":
        return Hypercube(lo, b)
    if expansion != "random":
        raise ValueError(f"expansion must be one of {EXPANSIONS}")
    u = 1.0 - rng.random()  # in (0, 1]
    side = b * (1.0 + u)
    offset = -(side - b) * rng.random(pts.shape[1])
    return Hypercube(lo + offset, side)


class _TreeAccumulator:
    """Grows parent/weight/embedding arrays while a builder recurses."""

    def __init__(self, metric: str):
        self.metric = metric
        self.parent = []
        self.weight = []
        self.embedding = []

    def add(self, parent: int, embedding: np.ndarray) -> int:
        node = len(self.parent)
        if parent < 0:
            w = 0.0
        else:
            w = _edge_dist(self.embedding[parent], embedding, self.metric)
        self.parent.append(parent)
        self.weight.append(w)
        self.embedding.append(np.asarray(embedding, dtype=np.float64))
        return node

    def build(self) -> RootedTree:
        return RootedTree(
            parent=np.array(self.parent, dtype=np.int64),
            edge_weight=np.array(self.weight, dtype=np.float64),
            root=0,
            embeddings=np.vstack(self.embedding),
        )


def _coincident(pts: np.ndarray) -> bool:
    return bool(np.all(pts == pts[0]))


def build_partition_tree(points, cfg: BuildConfig, rng: np.random.Generator, return_cells: bool = False):
    """Quadtree-style partition tree over a point set.

    Starting from the expanded bounding hypercube, every cell is split
    into 2^d half-side cells. An occupied cell becomes a leaf at its
    data point when it holds one point (or one repeated point), a
    center-embedded node recursed further when it holds more, and a
    forced terminal center node at the deepest level. Empty cells are
    discarded. The root sits at the center of the outer hypercube.

    Returns
    -------
    (RootedTree, ndarray)
        The tree and the node index each input point maps to. With
        return_cells=True a third element lists the Hypercube each node
        represents, for containment diagnostics.
    """
    pts = _as_points(points)
    n, d = pts.shape
    if d > MAX_PARTITION_DIM:
        raise ValueError(
            f"partition trees enumerate 2^d child cells; d={d} > {MAX_PARTITION_DIM}, "
            "use clustering-based trees instead"
        )
    cube = expand_hypercube(pts, rng, expansion=cfg.expansion)
    acc = _TreeAccumulator(cfg.edge_metric)
    cells = []
    point_to_node = np.full(n, -1, dtype=np.int64)

    root = acc.add(-1, cube.center)
    cells.append(cube)

    def settle(cell: Hypercube, idx: np.ndarray, parent: int, level: int):
        # idx is nonempty; level is the depth of the node emitted here
        if idx.shape[0] == 1 or _coincident(pts[idx]):
            node = acc.add(parent, pts[idx[0]])
            cells.append(cell)
            point_to_node[idx] = node
            return
        node = acc.add(parent, cell.center)
        cells.append(cell)
        if level >= cfg.deepest_level:
            point_to_node[idx] = node
            return
        split(cell, idx, node, level)

    def split(cell: Hypercube, idx: np.ndarray, parent: int, level: int):
        half = cell.side / 2.0
        bits = pts[idx] >= cell.min_corner + half  # (k, d) child index per axis
        codes = bits @ (1 << np.arange(d))
        for code in np.unique(codes):
            sub_idx = idx[codes == code]
            corner = cell.min_corner + np.where(bits[codes == code][0], half, 0.0)
            settle(Hypercube(corner, half), sub_idx, parent, level + 1)

    all_idx = np.arange(n)
    if n == 1 or _coincident(pts):
        leaf = acc.add(root, pts[0])
        cells.append(cube)
        point_to_node[:] = leaf
    else:
        split(cube, all_idx, root, 0)

    tree = acc.build()
    if return_cells:
        return tree, point_to_node, cells
    return tree, point_to_node


def farthest_point_clustering(points, kappa: int, rng: np.random.Generator = None, first: int = None):
    """Greedy k-center clustering with the farthest-point rule.

    The first center is drawn uniformly (or fixed via ``first``); each
    further center is the point maximizing the distance to the chosen
    centers, lowest index on ties, stopping early once every point
    coincides with a center. Each point is assigned to its nearest
    center, again lowest point index on ties. The resulting radius is
    at most twice the optimal kappa-center radius.

    Returns
    -------
    (ndarray, ndarray)
        Center point indices in selection order, and per-point cluster
        ordinals into that center list.
    """
    pts = _as_points(points)
    n = pts.shape[0]
    if kappa < 1:
        raise ValueError("kappa must be >= 1")
    if first is None:
        if rng is None:
            raise ValueError("either rng or first is required")
        first = int(rng.integers(n))
    if not 0 <= first < n:
        raise ValueError("first center index out of range")

    centers = [first]
    min_dist = np.sqrt(np.sum((pts - pts[first]) ** 2, axis=1))
    while len(centers) < min(kappa, n):
        far = int(np.argmax(min_dist))
        if min_dist[far] == 0.0:
            break
        centers.append(far)
        dist = np.sqrt(np.sum((pts - pts[far]) ** 2, axis=1))
        min_dist = np.minimum(min_dist, dist)

    center_idx = np.array(centers, dtype=np.int64)
    dists = np.sqrt(((pts[:, None, :] - pts[center_idx][None, :, :]) ** 2).sum(axis=2))
    best = dists.min(axis=1, keepdims=True)
    # ties go to the center with the lowest point index, not selection order
    tied = np.where(dists == best, center_idx[None, :], n)
    winner = tied.min(axis=1)
    ordinal = np.empty(n, dtype=np.int64)
    ordinal[center_idx] = np.arange(center_idx.shape[0])
    assignment = ordinal[winner]
    return center_idx, assignment


def build_clustering_tree(points, cfg: BuildConfig, rng: np.random.Generator):
    """Hierarchy of farthest-point clusterings as a tree metric.

    The root is the arithmetic centroid of all points. Each node's point
    set splits into at most kappa clusters; singleton (or fully
    coincident) clusters become leaves at their data point, larger ones
    become nodes at their farthest-point center and recurse until the
    deepest level, where remaining points map to the cluster's center
    node.
    """
    pts = _as_points(points)
    n = pts.shape[0]
    acc = _TreeAccumulator(cfg.edge_metric)
    point_to_node = np.full(n, -1, dtype=np.int64)

    root = acc.add(-1, pts.mean(axis=0))

    def split(idx: np.ndarray, parent: int, level: int):
        centers, assignment = farthest_point_clustering(pts[idx], cfg.kappa, rng)
        for j in range(centers.shape[0]):
            sub = idx[assignment == j]
            if sub.shape[0] == 1 or _coincident(pts[sub]):
                node = acc.add(parent, pts[sub[0]])
                point_to_node[sub] = node
                continue
            node = acc.add(parent, pts[idx[centers[j]]])
            if level >= cfg.deepest_level:
                point_to_node[sub] = node
            else:
                split(sub, node, level + 1)

    if n == 1 or _coincident(pts):
        leaf = acc.add(root, pts[0])
        point_to_node[:] = leaf
    else:
        split(np.arange(n), root, 1)

    return acc.build(), point_to_node


def sample_ensemble(points, n_slices: int, cfg: BuildConfig, kind: str = "partition", master_seed: int = None) -> TreeEnsemble:
    """Sample n_slices independent trees over one point set.

    Slice i is built from its own generator seeded by a hash of
    (master_seed, i), so ensembles are reproducible and slices stay
    independent of how many are drawn.
    """
    pts = _as_points(points)
    if n_slices < 1:
        raise ValueError("n_slices must be >= 1")
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}")
    if master_seed is None:
        master_seed = cfg.seed
    builder = build_partition_tree if kind == "partition" else build_clustering_tree
    trees = []
    maps = []
    for i in range(n_slices):
        rng = np.random.default_rng(slice_seed(master_seed, i))
        tree, p2n = builder(pts, cfg, rng)
        trees.append(tree)
        maps.append(p2n)
    return TreeEnsemble(
        trees=tuple(trees),
        point_to_node=tuple(maps),
        n_slices=n_slices,
        kind=kind,
        config=cfg,
        master_seed=int(master_seed),
    )
