"""Tree-Wasserstein and tree-sliced-Wasserstein distances.

Discrete measures are compared with a closed-form 1-Wasserstein distance
under tree ground metrics, averaged over ensembles of randomly sampled
trees (quadtree partitions or farthest-point clustering hierarchies).
The negative-type structure of the distance yields a positive-definite
exponential kernel. Brute-force linear-programming oracles are included
so every closed form can be certified at small scale.
"""

from .measures import DiscreteMeasure, PersistenceDiagram, augment_pair, normalize, project_diagonal
from .tree import NodeMeasure, RootedTree, path_length, subtree_masses, validate_tree
from .tree_build import (
    BuildConfig,
    Hypercube,
    TreeEnsemble,
    build_clustering_tree,
    build_partition_tree,
    expand_hypercube,
    farthest_point_clustering,
    sample_ensemble,
)
from .transport import (
    AssignmentProblem,
    CostMatrix,
    check_w2_bound,
    exact_ot,
    nn_rank_experiment,
    optimal_assignment,
    pairwise_tsw,
    sliced_wasserstein_1d,
    tree_sliced_wasserstein,
    tree_wasserstein,
)
from .kernel import (
    GramMatrix,
    add_diagonal,
    bandwidth_from_quantile,
    check_negative_definite,
    gram,
    kernel_power,
    tsw_kernel,
)
from .datagen import OrbitConfig, generate_orbit, generate_orbit_dataset, random_measure

__version__ = "0.1.0"

__all__ = [
    "DiscreteMeasure",
    "PersistenceDiagram",
    "normalize",
    "project_diagonal",
    "augment_pair",
    "RootedTree",
    "NodeMeasure",
    "path_length",
    "subtree_masses",
    "validate_tree",
    "Hypercube",
    "BuildConfig",
    "TreeEnsemble",
    "expand_hypercube",
    "build_partition_tree",
    "farthest_point_clustering",
    "build_clustering_tree",
    "sample_ensemble",
    "CostMatrix",
    "AssignmentProblem",
    "tree_wasserstein",
    "tree_sliced_wasserstein",
    "pairwise_tsw",
    "sliced_wasserstein_1d",
    "exact_ot",
    "optimal_assignment",
    "check_w2_bound",
    "nn_rank_experiment",
    "GramMatrix",
    "tsw_kernel",
    "bandwidth_from_quantile",
    "gram",
    "check_negative_definite",
    "kernel_power",
    "add_diagonal",
    "OrbitConfig",
    "generate_orbit",
    "generate_orbit_dataset",
    "random_measure",
    "__version__",
]
