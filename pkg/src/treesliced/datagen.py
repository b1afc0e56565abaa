"""Synthetic data: linked-twist-map orbits and random measures.

The orbit generator iterates a chaotic area-preserving map on the unit
square; different flow parameters t give distinguishable point-cloud
classes, which makes the dataset a convenient self-contained benchmark
for distance-quality experiments.
"""

import math
from dataclasses import dataclass

import numpy as np

from .measures import DiscreteMeasure
from .rng import substream

__all__ = ["OrbitConfig", "OrbitCloud", "generate_orbit", "generate_orbit_dataset", "random_measure"]

DEFAULT_CLASS_PARAMS = (2.5, 3.5, 4.0, 4.1, 4.3)


@dataclass(frozen=True)
class OrbitConfig:
    """Orbit dataset parameters.

    Defaults are desk scale (5 classes x 50 orbits x 200 points); the
    full-scale reference setting is 1000 orbits of 1000 points.
    """

    class_params: tuple = DEFAULT_CLASS_PARAMS
    orbits_per_class: int = 50
    points_per_orbit: int = 200
    seed: int = 0

    def __post_init__(self):
        params = tuple(float(t) for t in self.class_params)
        if not params or any(t <= 0 for t in params):
            raise ValueError("class parameters must be positive")
        if self.orbits_per_class < 1 or self.points_per_orbit < 1:
            raise ValueError("counts must be >= 1")
        object.__setattr__(self, "class_params", params)


@dataclass(frozen=True)
class OrbitCloud:
    """One generated orbit: its class parameter and its points."""

    label: float
    points: np.ndarray


def _mod1(x: float) -> float:
    # x - floor(x) stays correct for the occasional negative intermediate
    return x - math.floor(x)


def generate_orbit(t: float, a0: float, b0: float, n: int) -> np.ndarray:
    """Iterate the linked twist map from (a0, b0) for n points.

    The recurrence updates a before b within a step:
    a' = a + t*b*(1-b) mod 1, then b' = b + t*a'*(1-a') mod 1.
    The initial position is included as the first point.
    """
    if not (0.0 <= a0 <= 1.0 and 0.0 <= b0 <= 1.0):
        raise ValueError("initial position must lie in the unit square")
    if n < 1:
        raise ValueError("n must be >= 1")
    out = np.empty((n, 2))
    a, b = float(a0), float(b0)
    out[0] = (a, b)
    for i in range(1, n):
        a = _mod1(a + t * b * (1.0 - b))
        b = _mod1(b + t * a * (1.0 - a))
        out[i] = (a, b)
    return out


def generate_orbit_dataset(cfg: OrbitConfig) -> list:
    """Labeled orbit clouds, orbits_per_class per class parameter.

    Initial positions are drawn uniformly on the unit square from a
    substream of cfg.seed, so the dataset is reproducible and
    independent of generation order.
    """
    clouds = []
    for ci, t in enumerate(cfg.class_params):
        rng = substream(cfg.seed, "orbit-init", ci)
        starts = rng.random((cfg.orbits_per_class, 2))
        for a0, b0 in starts:
            clouds.append(OrbitCloud(label=t, points=generate_orbit(t, a0, b0, cfg.points_per_orbit)))
    return clouds


def random_measure(d: int, n: int, rng: np.random.Generator) -> DiscreteMeasure:
    """Random measure: uniform supports on [0,1]^d, Dirichlet(1) weights.

    The weights are normalized standard exponentials, which is the
    symmetric Dirichlet(1) draw.
    """
    if d < 1 or n < 1:
        raise ValueError("d and n must be >= 1")
    supports = rng.random((n, d))
    weights = rng.exponential(1.0, n)
    return DiscreteMeasure(supports, weights)
