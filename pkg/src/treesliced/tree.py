"""Rooted trees with nonnegative edge weights and subtree mass queries.

Each non-root node owns the edge to its parent, so an edge is identified
with its deeper endpoint. The tree metric between nodes is the sum of
edge weights along the unique connecting path, and the transport
closed form needs only one bottom-up accumulation of node masses.
"""

from dataclasses import dataclass, field

import numpy as np

__all__ = ["RootedTree", "NodeMeasure", "path_length", "subtree_masses", "validate_tree"]

MASS_TOL = 1e-9


@dataclass(frozen=True)
class RootedTree:
    """Rooted tree stored as parent pointers.

    Parameters
    ----------
    parent : array-like of shape (n_nodes,)
        Parent index per node; the root carries -1.
    edge_weight : array-like of shape (n_nodes,)
        Nonnegative weight of the edge from each node to its parent;
        the root's entry is ignored and stored as 0.
    root : int
        Index of the root node.
    embeddings : array-like of shape (n_nodes, d), optional
        Node positions in R^d when the tree was built from point data.

    Notes
    -----
    ``depth`` is computed on construction by breadth-first traversal
    from the root; nodes unreachable from the root get depth -1 and are
    reported by :func:`validate_tree`. Construction itself never raises
    on structural defects so that diagnostics stay inspectable.
    """

    parent: np.ndarray
    edge_weight: np.ndarray
    root: int = 0
    embeddings: np.ndarray = None
    depth: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        parent = np.asarray(self.parent, dtype=np.int64)
        weight = np.asarray(self.edge_weight, dtype=np.float64).copy()
        n = parent.shape[0]
        if parent.ndim != 1 or n == 0:
            raise ValueError("parent must be a non-empty 1-D index array")
        if weight.shape != (n,):
            raise ValueError("edge_weight must match parent in length")
        if not 0 <= self.root < n:
            raise ValueError("root index out of range")
        weight[self.root] = 0.0
        emb = self.embeddings
        if emb is not None:
            emb = np.asarray(emb, dtype=np.float64)
            if emb.ndim != 2 or emb.shape[0] != n:
                raise ValueError("embeddings must be (n_nodes, d)")
        # BFS from the root over the child adjacency; avoids chasing
        # parent pointers through a possible cycle.
        children = [[] for _ in range(n)]
        for v in range(n):
            p = parent[v]
            if v != self.root and 0 <= p < n:
                children[p].append(v)
        depth = np.full(n, -1, dtype=np.int64)
        depth[self.root] = 0
        frontier = [self.root]
        while frontier:
            nxt = []
            for u in frontier:
                for v in children[u]:
                    if depth[v] == -1:
                        depth[v] = depth[u] + 1
                        nxt.append(v)
            frontier = nxt
        object.__setattr__(self, "parent", parent)
        object.__setattr__(self, "edge_weight", weight)
        object.__setattr__(self, "embeddings", emb)
        object.__setattr__(self, "depth", depth)

    @property
    def n_nodes(self) -> int:
        return self.parent.shape[0]

    def nodes_by_decreasing_depth(self) -> np.ndarray:
        """Node indices ordered deepest first (stable within a level)."""
        return np.argsort(-self.depth, kind="stable")


@dataclass(frozen=True)
class NodeMeasure:
    """Nonnegative mass per tree node, summing to one."""

    tree: RootedTree
    mass: np.ndarray

    def __post_init__(self):
        mass = np.asarray(self.mass, dtype=np.float64)
        if mass.shape != (self.tree.n_nodes,):
            raise ValueError("mass must assign one value per tree node")
        if np.any(mass < 0):
            raise ValueError("node masses must be nonnegative")
        if abs(float(np.sum(mass)) - 1.0) > MASS_TOL:
            raise ValueError("node masses must sum to 1")
        object.__setattr__(self, "mass", mass)

    @classmethod
    def from_assignment(cls, tree: RootedTree, nodes, weights) -> "NodeMeasure":
        """Push point weights onto tree nodes, summing shared targets."""
        nodes = np.asarray(nodes, dtype=np.int64)
        weights = np.asarray(weights, dtype=np.float64)
        if nodes.shape != weights.shape:
            raise ValueError("nodes and weights must have equal length")
        if nodes.size and (nodes.min() < 0 or nodes.max() >= tree.n_nodes):
            raise ValueError("node index out of range")
        mass = np.zeros(tree.n_nodes)
        np.add.at(mass, nodes, weights)
        return cls(tree, mass)


def path_length(tree: RootedTree, x: int, z: int) -> float:
    """Tree-metric distance between nodes x and z.

    Walks the deeper node up until depths match, then both up in
    lockstep to the lowest common ancestor, summing edge weights.
    O(depth) per query; the trees built here are shallow.
    """
    n = tree.n_nodes
    if not (0 <= x < n and 0 <= z < n):
        raise ValueError("node index out of range")
    dist = 0.0
    while tree.depth[x] > tree.depth[z]:
        dist += tree.edge_weight[x]
        x = tree.parent[x]
    while tree.depth[z] > tree.depth[x]:
        dist += tree.edge_weight[z]
        z = tree.parent[z]
    while x != z:
        dist += tree.edge_weight[x] + tree.edge_weight[z]
        x = tree.parent[x]
        z = tree.parent[z]
    return float(dist)


def subtree_masses(tree: RootedTree, nm: NodeMeasure) -> np.ndarray:
    """Total mass in the subtree below each node.

    Single bottom-up pass: children are folded into parents in order of
    decreasing depth. The root accumulates the full unit mass.
    """
    if nm.tree is not tree:
        raise ValueError("measure is defined on a different tree")
    m = nm.mass.copy()
    for v in tree.nodes_by_decreasing_depth():
        if v != tree.root and tree.depth[v] > 0:
            m[tree.parent[v]] += m[v]
    return m


def validate_tree(tree: RootedTree) -> list:
    """Check structural invariants; return diagnostics, empty when ok.

    Reported violations: parent index out of range, unreachable nodes
    (cycles or disconnection), negative edge weights, root parent not -1.
    """
    problems = []
    n = tree.n_nodes
    if tree.parent[tree.root] != -1:
        problems.append(f"root node {tree.root} must have parent -1")
    for v in range(n):
        if v == tree.root:
            continue
        p = int(tree.parent[v])
        if not 0 <= p < n:
            problems.append(f"node {v} has parent {p} out of range")
    unreachable = np.flatnonzero(tree.depth < 0)
    for v in unreachable:
        problems.append(f"node {int(v)} does not reach the root (cycle or disconnected)")
    negative = np.flatnonzero(tree.edge_weight < 0)
    for v in negative:
        problems.append(f"negative weight at edge {int(v)}")
    return problems
