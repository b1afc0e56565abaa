"""Discrete probability measures and persistence diagrams.

A measure is a weighted point set in R^d with weights on the probability
simplex; raw nonnegative weights are normalized on construction.
Persistence diagrams are point sets above the diagonal of R^2, compared
after each diagram is augmented with the diagonal projections of the
other's points so both sides carry the same mass.
"""

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "DiscreteMeasure",
    "PersistenceDiagram",
    "normalize",
    "project_diagonal",
    "augment_pair",
]

WEIGHT_TOL = 1e-9


def normalize(weights) -> np.ndarray:
    """Scale nonnegative weights to sum to one.

    Parameters
    ----------
    weights : array-like of shape (n,)
        Raw nonnegative weights, e.g. counts or frequencies.

    Returns
    -------
    ndarray of shape (n,)
        Weights divided by their sum.

    Raises
    ------
    ValueError
        If any weight is negative, all weights are zero, or any value is
        not finite.
    """
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 1 or w.size == 0:
        raise ValueError("weights must be a non-empty 1-D array")
    if not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite")
    if np.any(w < 0):
        raise ValueError("weights must be nonnegative")
    total = float(np.sum(w))
    if total <= 0.0:
        raise ValueError("weights must not be all zero")
    return w / total


@dataclass(frozen=True)
class DiscreteMeasure:
    """Discrete probability measure: support points with simplex weights.

    Parameters
    ----------
    supports : array-like of shape (n, d)
        Support points. A 1-D array of length n is treated as n points
        in R^1.
    weights : array-like of shape (n,), optional
        Raw nonnegative weights, normalized on construction. Omitted
        means uniform.
    """

    supports: np.ndarray
    weights: np.ndarray = field(default=None)

    def __post_init__(self):
        pts = np.asarray(self.supports, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] == 0:
            raise ValueError("supports must be a non-empty (n, d) array")
        if not np.all(np.isfinite(pts)):
            raise ValueError("support coordinates must be finite")
        if self.weights is None:
            w = np.full(pts.shape[0], 1.0 / pts.shape[0])
        else:
            w = normalize(self.weights)
            if w.shape[0] != pts.shape[0]:
                raise ValueError("weights and supports must have equal length")
        object.__setattr__(self, "supports", pts)
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return self.supports.shape[0]

    @property
    def dim(self) -> int:
        return self.supports.shape[1]


@dataclass(frozen=True)
class PersistenceDiagram:
    """Multiset of (birth, death) pairs with death >= birth.

    Infinite death times are rejected; truncate essential features before
    constructing a diagram.
    """

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.size == 0:
            pts = pts.reshape(0, 2)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ValueError("diagram points must be (n, 2) birth/death pairs")
        if not np.all(np.isfinite(pts)):
            raise ValueError("diagram has non-finite coordinates; truncate infinite deaths first")
        if np.any(pts[:, 1] < pts[:, 0]):
            raise ValueError("death must be >= birth for every diagram point")
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return self.points.shape[0]


def project_diagonal(point) -> tuple:
    """Orthogonal projection of a (birth, death) point onto the diagonal.

    Returns ((b + d) / 2, (b + d) / 2).
    """
    b, d = float(point[0]), float(point[1])
    mid = (b + d) / 2.0
    return (mid, mid)


def augment_pair(dg_a: PersistenceDiagram, dg_b: PersistenceDiagram):
    """Augment two diagrams into a pair of equal-mass discrete measures.

    The first measure supports dg_a's points plus the diagonal projections
    of dg_b's points; the second vice versa. Both get uniform weight
    1/(n+m) on n+m points, so any transport distance between them is
    well defined.

    Parameters
    ----------
    dg_a, dg_b : PersistenceDiagram
        Diagrams to compare. At least one must be non-empty.

    Returns
    -------
    (DiscreteMeasure, DiscreteMeasure)
    """
    n, m = len(dg_a), len(dg_b)
    if n + m == 0:
        raise ValueError("cannot augment two empty diagrams")
    proj_b = np.array([project_diagonal(p) for p in dg_b.points], dtype=np.float64).reshape(m, 2)
    proj_a = np.array([project_diagonal(p) for p in dg_a.points], dtype=np.float64).reshape(n, 2)
    supports_a = np.vstack([dg_a.points.reshape(n, 2), proj_b])
    supports_b = np.vstack([dg_b.points.reshape(m, 2), proj_a])
    mu = DiscreteMeasure(supports_a)
    nu = DiscreteMeasure(supports_b)
    return mu, nu
