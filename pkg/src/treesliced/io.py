"""File formats: measures, diagrams, trees, ensembles, CSV matrices.

All JSON is written compactly with full-precision floats (Python's
shortest round-trip repr), and CSV matrices carry 17 significant digits,
so rerunning a pipeline with the same seed reproduces files byte for
byte.
"""

import hashlib
import json

import numpy as np

from .datagen import OrbitCloud
from .measures import DiscreteMeasure, PersistenceDiagram
from .tree import RootedTree
from .tree_build import BuildConfig, TreeEnsemble

__all__ = [
    "load_measures",
    "save_measures",
    "load_diagram",
    "save_diagram",
    "tree_to_dict",
    "tree_from_dict",
    "save_ensemble",
    "load_ensemble",
    "save_orbit_dataset",
    "load_orbit_dataset",
    "save_matrix_csv",
    "load_matrix_csv",
    "save_gram_csv",
    "stack_measures",
    "sha256_file",
    "write_manifest",
]


def _dump(obj, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, separators=(",", ":"))
        fh.write("\n")


def _load(path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def measure_to_obj(m: DiscreteMeasure) -> list:
    return [
        {"point": [float(x) for x in p], "weight": float(w)}
        for p, w in zip(m.supports, m.weights)
    ]


def measure_from_obj(obj) -> DiscreteMeasure:
    if not isinstance(obj, list) or not obj:
        raise ValueError("a measure must be a non-empty JSON array of {point, weight}")
    points = [entry["point"] for entry in obj]
    weights = [entry["weight"] for entry in obj]
    return DiscreteMeasure(np.asarray(points, dtype=np.float64), np.asarray(weights, dtype=np.float64))


def save_measures(measures, path):
    """Write a list of measures as a JSON array of measure arrays."""
    _dump([measure_to_obj(m) for m in measures], path)


def load_measures(path) -> list:
    obj = _load(path)
    if not isinstance(obj, list):
        raise ValueError(f"{path}: expected a JSON array of measures")
    return [measure_from_obj(entry) for entry in obj]


def save_diagram(dg: PersistenceDiagram, path):
    """Write a diagram as 'birth death' text lines."""
    with open(path, "w", encoding="utf-8") as fh:
        for b, d in dg.points:
            fh.write(f"{float(b)!r} {float(d)!r}\n")


def load_diagram(path) -> PersistenceDiagram:
    """Read a 'birth death' per line text file; blank lines are skipped."""
    points = []
    with open(path, "r", encoding="utf-8") as fh:
        for ln, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 2:
                raise ValueError(f"{path}:{ln}: expected 'birth death', got {line.strip()!r}")
            points.append((float(parts[0]), float(parts[1])))
    return PersistenceDiagram(np.asarray(points, dtype=np.float64).reshape(-1, 2))


def tree_to_dict(tree: RootedTree) -> dict:
    nodes = []
    for v in range(tree.n_nodes):
        nodes.append(
            {
                "embedding": None if tree.embeddings is None else [float(x) for x in tree.embeddings[v]],
                "parent": int(tree.parent[v]),
                "edge_weight": float(tree.edge_weight[v]),
            }
        )
    return {"nodes": nodes, "root": int(tree.root)}


def tree_from_dict(obj) -> RootedTree:
    nodes = obj["nodes"]
    parent = np.array([n["parent"] for n in nodes], dtype=np.int64)
    weight = np.array([n["edge_weight"] for n in nodes], dtype=np.float64)
    embeddings = None
    if nodes and nodes[0]["embedding"] is not None:
        embeddings = np.array([n["embedding"] for n in nodes], dtype=np.float64)
    return RootedTree(parent=parent, edge_weight=weight, root=int(obj["root"]), embeddings=embeddings)


def config_to_dict(cfg: BuildConfig) -> dict:
    return {
        "deepest_level": cfg.deepest_level,
        "kappa": cfg.kappa,
        "edge_metric": cfg.edge_metric,
        "seed": cfg.seed,
        "expansion": cfg.expansion,
    }


def ensemble_to_dict(ens: TreeEnsemble) -> dict:
    return {
        "config": config_to_dict(ens.config) if ens.config is not None else None,
        "master_seed": int(ens.master_seed),
        "kind": ens.kind,
        "n_points": int(ens.n_points),
        "trees": [tree_to_dict(t) for t in ens.trees],
        "point_to_node": [[int(v) for v in m] for m in ens.point_to_node],
    }


def ensemble_from_dict(obj) -> TreeEnsemble:
    cfg = BuildConfig(**obj["config"]) if obj.get("config") else None
    trees = tuple(tree_from_dict(t) for t in obj["trees"])
    maps = tuple(np.asarray(m, dtype=np.int64) for m in obj["point_to_node"])
    return TreeEnsemble(
        trees=trees,
        point_to_node=maps,
        n_slices=len(trees),
        kind=obj.get("kind", "partition"),
        config=cfg,
        master_seed=int(obj.get("master_seed", 0)),
    )


def save_ensemble(ens: TreeEnsemble, path):
    _dump(ensemble_to_dict(ens), path)


def load_ensemble(path) -> TreeEnsemble:
    return ensemble_from_dict(_load(path))


def save_orbit_dataset(clouds, path):
    """Write orbit clouds as a JSON array of {label, points}."""
    obj = [
        {"label": float(c.label), "points": [[float(x) for x in p] for p in c.points]}
        for c in clouds
    ]
    _dump(obj, path)


def load_orbit_dataset(path) -> list:
    obj = _load(path)
    if not isinstance(obj, list):
        raise ValueError(f"{path}: expected a JSON array of clouds")
    return [
        OrbitCloud(label=float(c["label"]), points=np.asarray(c["points"], dtype=np.float64))
        for c in obj
    ]


def save_matrix_csv(ids, matrix, path):
    """Distance matrix CSV: a header row of ids, then value rows."""
    m = np.asarray(matrix, dtype=np.float64)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(ids) + "\n")
        for row in m:
            fh.write(",".join("%.17g" % v for v in row) + "\n")


def load_matrix_csv(path):
    """Read a matrix CSV written by save_matrix_csv; returns (ids, matrix)."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if not header:
            raise ValueError(f"{path}: missing header row of ids")
        ids = header.split(",")
        rows = []
        for ln, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            parts = line.strip().split(",")
            # tolerate a leading id column, as written for kernel matrices
            if len(parts) == len(ids) + 1 and parts[0] in ids:
                parts = parts[1:]
            if len(parts) != len(ids):
                raise ValueError(f"{path}:{ln}: expected {len(ids)} values")
            rows.append([float(v) for v in parts])
    m = np.asarray(rows, dtype=np.float64)
    if m.shape != (len(ids), len(ids)):
        raise ValueError(f"{path}: matrix shape {m.shape} does not match {len(ids)} ids")
    return ids, m


def save_gram_csv(ids, matrix, path):
    """Kernel matrix CSV: first column the sample id, then the row."""
    m = np.asarray(matrix, dtype=np.float64)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("id," + ",".join(ids) + "\n")
        for sample_id, row in zip(ids, m):
            fh.write(sample_id + "," + ",".join("%.17g" % v for v in row) + "\n")


def load_gram_csv(path):
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        if header[:1] != ["id"]:
            raise ValueError(f"{path}: expected leading 'id' column")
        ids = header[1:]
        rows = []
        for line in fh:
            if not line.strip():
                continue
            parts = line.strip().split(",")
            rows.append([float(v) for v in parts[1:]])
    return ids, np.asarray(rows, dtype=np.float64)


def stack_measures(measures):
    """Concatenate measure supports into one point set plus assignments.

    Returns (points, assignments) where assignments[k] is the
    (global_indices, weights) pair for measure k, the form the ensemble
    distance functions consume.
    """
    points = np.vstack([m.supports for m in measures])
    assignments = []
    offset = 0
    for m in measures:
        assignments.append((np.arange(offset, offset + m.n), m.weights))
        offset += m.n
    return points, assignments


def sha256_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_manifest(path, command: str, flags: dict, seed, artifacts: dict, timings: dict):
    """Run manifest: command, flags, seed, artifact hashes, timings.

    Timing values change run to run and are excluded from any hashing;
    everything else must be reproducible for a fixed seed.
    """
    manifest = {
        "command": command,
        "flags": flags,
        "master_seed": seed,
        "artifacts": {name: sha256_file(p) for name, p in artifacts.items()},
        "timings": timings,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest
