"""Exponential kernel over sliced tree distances.

Because the sliced tree distance is negative definite, exp(-t*d) is a
positive-definite kernel for every bandwidth t > 0, and Gram matrices at
bandwidth t are entrywise i-th powers of the matrix at t/i. This module
assembles Gram matrices, picks bandwidths by the quantile rule, and
houses the numeric definiteness checks used by the test suites.
"""

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "GramMatrix",
    "NDReport",
    "tsw_kernel",
    "bandwidth_from_quantile",
    "gram",
    "check_negative_definite",
    "kernel_power",
    "add_diagonal",
]

SYMMETRY_TOL = 1e-9
EIG_CHECK_MAX = 2000


@dataclass(frozen=True)
class GramMatrix:
    """Symmetric distance or kernel matrix with its bandwidth.

    kind "distance" holds pairwise distances (zero diagonal); kind
    "kernel" holds exp(-t*d) entries (unit diagonal, entries in (0,1]).
    """

    entries: np.ndarray
    kind: str = "distance"
    bandwidth: float = None

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=np.float64)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
            raise ValueError("entries must be a square non-empty matrix")
        if self.kind not in ("distance", "kernel"):
            raise ValueError("kind must be 'distance' or 'kernel'")
        if np.max(np.abs(m - m.T)) > SYMMETRY_TOL:
            raise ValueError("matrix is asymmetric beyond tolerance")
        if self.kind == "kernel":
            if self.bandwidth is None or not self.bandwidth > 0:
                raise ValueError("kernel matrices need a positive bandwidth")
            if np.max(np.abs(np.diag(m) - 1.0)) > 1e-12:
                raise ValueError("kernel diagonal must be 1")
            if np.any(m <= 0) or np.any(m > 1.0 + 1e-12):
                raise ValueError("kernel entries must lie in (0, 1]")
        else:
            if np.any(m < 0):
                raise ValueError("distances must be nonnegative")
        object.__setattr__(self, "entries", m)

    @property
    def n(self) -> int:
        return self.entries.shape[0]


def tsw_kernel(tsw_value: float, t: float) -> float:
    """Kernel value exp(-t * distance) for one pair."""
    if not t > 0:
        raise ValueError("bandwidth t must be positive")
    if tsw_value < 0:
        raise ValueError("distance must be nonnegative")
    return math.exp(-t * tsw_value)


def bandwidth_from_quantile(train_distances, s: float = None) -> float:
    """Bandwidth t = 1/q_s from the s% quantile of training distances.

    Uses the nearest-rank quantile: the element at 1-based index
    ceil(s/100 * n) of the sorted list. Omitting s selects the plain
    candidate t = 1. Typical candidate grids take s in {10, 20, 50}.

    Raises
    ------
    ValueError
        On an empty list, s outside (0, 100], or a zero quantile (all
        relevant distances zero), where the bandwidth is undefined.
    """
    if s is None:
        return 1.0
    d = np.asarray(train_distances, dtype=np.float64).ravel()
    if d.size == 0:
        raise ValueError("distance list must be non-empty")
    if np.any(d < 0) or not np.all(np.isfinite(d)):
        raise ValueError("distances must be finite and nonnegative")
    if not 0 < s <= 100:
        raise ValueError("quantile percent must lie in (0, 100]")
    rank = math.ceil(s / 100.0 * d.size)
    q = float(np.sort(d)[rank - 1])
    if q <= 0.0:
        raise ValueError(f"{s}% quantile of the distances is zero; bandwidth undefined")
    return 1.0 / q


def gram(distances, t: float) -> GramMatrix:
    """Entrywise exp(-t*d) of a symmetric zero-diagonal distance matrix."""
    if isinstance(distances, GramMatrix):
        if distances.kind != "distance":
            raise ValueError("input must be a distance matrix")
        d = distances.entries
    else:
        d = np.asarray(distances, dtype=np.float64)
    if not t > 0:
        raise ValueError("bandwidth t must be positive")
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise ValueError("distance matrix must be square")
    if np.max(np.abs(d - d.T)) > SYMMETRY_TOL:
        raise ValueError("distance matrix is asymmetric beyond tolerance")
    if np.max(np.abs(np.diag(d))) > 1e-12:
        raise ValueError("distance matrix must have a zero diagonal")
    d = (d + d.T) / 2.0
    k = np.exp(-t * d)
    np.fill_diagonal(k, 1.0)
    return GramMatrix(entries=k, kind="kernel", bandwidth=float(t))


@dataclass(frozen=True)
class NDReport:
    """Outcome of the negative-definiteness harness."""

    max_quadratic_form: float
    min_centered_eigenvalue: float
    passed: bool
    trials: int


def check_negative_definite(d, trials: int, rng: np.random.Generator) -> NDReport:
    """Test a symmetric zero-diagonal matrix for negative definiteness.

    Negative definite means c^T D c <= 0 for every zero-sum c. Two
    probes are combined: the max of c^T D c over random mean-subtracted
    Gaussian vectors (pass at <= 1e-9), and the exact characterization
    that -J D J / 2 is positive semidefinite on the centered subspace,
    J = I - 11^T/n (eigenvalues >= -1e-8).
    """
    m = np.asarray(d, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("matrix must be square")
    if m.shape[0] > EIG_CHECK_MAX:
        raise ValueError(f"definiteness checks are capped at {EIG_CHECK_MAX} rows")
    if np.max(np.abs(m - m.T)) > SYMMETRY_TOL:
        raise ValueError("matrix is asymmetric beyond tolerance")
    n = m.shape[0]
    worst = -np.inf
    for _ in range(trials):
        c = rng.standard_normal(n)
        c -= c.mean()
        worst = max(worst, float(c @ m @ c))
    j = np.eye(n) - np.full((n, n), 1.0 / n)
    centered = -j @ m @ j / 2.0
    min_eig = float(np.linalg.eigvalsh(centered)[0])
    passed = worst <= 1e-9 and min_eig >= -1e-8
    return NDReport(
        max_quadratic_form=worst,
        min_centered_eigenvalue=min_eig,
        passed=passed,
        trials=int(trials),
    )


def kernel_power(k_value, i: int):
    """Entrywise i-th power, the divisibility identity for Gram matrices.

    A Gram matrix at bandwidth t equals the matrix at t/i raised
    entrywise to the i-th power, so distances need computing only once
    per dataset no matter how many bandwidths are swept.
    """
    if i < 1:
        raise ValueError("power must be a positive integer")
    if isinstance(k_value, GramMatrix):
        return GramMatrix(
            entries=k_value.entries**i,
            kind="kernel",
            bandwidth=k_value.bandwidth * i,
        )
    return np.asarray(k_value) ** i if isinstance(k_value, np.ndarray) else float(k_value) ** i


def add_diagonal(g, lam="auto") -> np.ndarray:
    """Add a diagonal shift, by default just enough to reach PSD.

    Utility for comparing against indefinite baseline kernels; the
    sliced-distance kernel itself never needs it.
    """
    m = np.asarray(g.entries if isinstance(g, GramMatrix) else g, dtype=np.float64)
    if lam == "auto":
        min_eig = float(np.linalg.eigvalsh((m + m.T) / 2.0)[0])
        lam = max(0.0, -min_eig) + 1e-10
    return m + float(lam) * np.eye(m.shape[0])
