"""Service endpoints wrapping the core pipeline.

Stateless JSON-in/JSON-out wrappers: orbit generation, ensemble
building, distance matrices, kernel matrices, and the validation
suites. Domain validation errors surface as 422 responses.
"""

import numpy as np
from fastapi import FastAPI, HTTPException

from .. import __version__
from ..datagen import OrbitConfig, generate_orbit_dataset
from ..io import ensemble_from_dict, ensemble_to_dict, measure_from_obj
from ..kernel import bandwidth_from_quantile, gram
from ..measures import DiscreteMeasure
from ..rng import substream
from ..transport import (
    euclidean_cost,
    exact_ot,
    pairwise_tsw,
    sliced_wasserstein_1d,
    tree_sliced_wasserstein,
)
from ..tree_build import BuildConfig, sample_ensemble
from ..validate import run_suites
from .models import (
    DistancesRequest,
    EnsembleRequest,
    EnsembleResponse,
    GramRequest,
    GramResponse,
    HealthResponse,
    MatrixResponse,
    OrbitCloudModel,
    OrbitRequest,
    OrbitResponse,
    SuiteResult,
    ValidateRequest,
    ValidateResponse,
)

app = FastAPI(title="treesliced", version=__version__)

KIND_BY_NAME = {"quadtree": "partition", "cluster": "cluster"}


def _domain(call, *args, **kwargs):
    try:
        return call(*args, **kwargs)
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc


def _parse_measures(payload) -> list:
    measures = []
    for k, obj in enumerate(payload):
        try:
            measures.append(measure_from_obj([pm.model_dump() for pm in obj]))
        except (ValueError, KeyError) as exc:
            raise HTTPException(status_code=422, detail=f"measure {k}: {exc}") from exc
    if not measures:
        raise HTTPException(status_code=422, detail="at least one measure is required")
    return measures


@app.get("/health", response_model=HealthResponse)
def health() -> HealthResponse:
    return HealthResponse(status="ok", version=__version__)


@app.post("/orbits", response_model=OrbitResponse)
def orbits(req: OrbitRequest) -> OrbitResponse:
    cfg = _domain(
        OrbitConfig,
        class_params=tuple(req.classes),
        orbits_per_class=req.per_class,
        points_per_orbit=req.points,
        seed=req.seed,
    )
    clouds = generate_orbit_dataset(cfg)
    return OrbitResponse(
        clouds=[
            OrbitCloudModel(label=c.label, points=[[float(x) for x in p] for p in c.points])
            for c in clouds
        ]
    )


@app.post("/ensembles", response_model=EnsembleResponse)
def ensembles(req: EnsembleRequest) -> EnsembleResponse:
    measures = _parse_measures(req.measures)
    points = np.vstack([m.supports for m in measures])
    cfg = _domain(
        BuildConfig,
        deepest_level=req.depth,
        kappa=req.kappa,
        edge_metric=req.edge_metric,
        seed=req.seed,
        expansion=req.expansion,
    )
    ensemble = _domain(
        sample_ensemble,
        points,
        req.slices,
        cfg,
        kind=KIND_BY_NAME[req.kind],
        master_seed=req.seed,
    )
    doc = ensemble_to_dict(ensemble)
    doc["measure_sizes"] = [m.n for m in measures]
    return EnsembleResponse(ensemble=doc)


def _assignments_for(measures, ensemble_doc):
    sizes = [m.n for m in measures]
    recorded = ensemble_doc.get("measure_sizes")
    if recorded is not None and recorded != sizes:
        raise HTTPException(
            status_code=422,
            detail="ensemble was built on a different measure list (support counts differ)",
        )
    ensemble = _domain(ensemble_from_dict, ensemble_doc)
    if ensemble.n_points != sum(sizes):
        raise HTTPException(
            status_code=422,
            detail=f"ensemble maps {ensemble.n_points} points but the measures supply {sum(sizes)}",
        )
    assignments = []
    offset = 0
    for m in measures:
        assignments.append((np.arange(offset, offset + m.n), m.weights))
        offset += m.n
    return ensemble, assignments


def _uniform_cloud(measure: DiscreteMeasure, k: int) -> np.ndarray:
    if np.max(np.abs(measure.weights - 1.0 / measure.n)) > 1e-12:
        raise HTTPException(
            status_code=422, detail=f"measure {k}: sw mode needs uniform weights"
        )
    return measure.supports


def _pair_list(req, count):
    if req.pairs is None:
        return [(i, j) for i in range(count) for j in range(i + 1, count)], True
    pairs = []
    for i, j in req.pairs:
        if not (0 <= i < count and 0 <= j < count):
            raise HTTPException(status_code=422, detail=f"pair ({i},{j}) out of range")
        if i != j:
            pairs.append((min(i, j), max(i, j)))
    return pairs, False


@app.post("/distances", response_model=MatrixResponse)
def distances(req: DistancesRequest) -> MatrixResponse:
    measures = _parse_measures(req.measures)
    k = len(measures)
    ids = [f"m{i}" for i in range(k)]
    pairs, full = _pair_list(req, k)

    if req.mode == "tsw":
        if req.ensemble is None:
            raise HTTPException(status_code=422, detail="tsw mode requires an ensemble")
        ensemble, assignments = _assignments_for(measures, req.ensemble)
        if full:
            matrix = _domain(pairwise_tsw, ensemble, assignments, threads=max(1, req.threads))
        else:
            matrix = np.full((k, k), np.nan)
            np.fill_diagonal(matrix, 0.0)
            for i, j in pairs:
                matrix[i, j] = matrix[j, i] = _domain(
                    tree_sliced_wasserstein, ensemble, assignments[i], assignments[j]
                )
    elif req.mode == "sw":
        clouds = [_uniform_cloud(m, i) for i, m in enumerate(measures)]
        matrix = np.zeros((k, k)) if full else np.full((k, k), np.nan)
        np.fill_diagonal(matrix, 0.0)
        for i, j in pairs:
            rng = substream(req.seed, "sw", i, j)
            matrix[i, j] = matrix[j, i] = _domain(
                sliced_wasserstein_1d, clouds[i], clouds[j], req.sw_dirs, rng
            )
    else:  # exact
        matrix = np.zeros((k, k)) if full else np.full((k, k), np.nan)
        np.fill_diagonal(matrix, 0.0)
        for i, j in pairs:
            costs = euclidean_cost(measures[i].supports, measures[j].supports)
            matrix[i, j] = matrix[j, i] = _domain(
                exact_ot, costs, measures[i].weights, measures[j].weights
            )

    rows = [[None if np.isnan(v) else float(v) for v in row] for row in matrix]
    return MatrixResponse(ids=ids, matrix=rows)


@app.post("/gram", response_model=GramResponse)
def gram_endpoint(req: GramRequest) -> GramResponse:
    d = np.asarray(req.matrix, dtype=np.float64)
    if req.bandwidth_quantile is None:
        t = 1.0
    else:
        triu = d[np.triu_indices(d.shape[0], k=1)] if d.ndim == 2 else np.array([])
        t = _domain(bandwidth_from_quantile, triu, req.bandwidth_quantile)
    kernel = _domain(gram, d, t)
    return GramResponse(
        ids=req.ids,
        matrix=[[float(v) for v in row] for row in kernel.entries],
        bandwidth=t,
    )


@app.post("/validate", response_model=ValidateResponse)
def validate_endpoint(req: ValidateRequest) -> ValidateResponse:
    results = _domain(run_suites, req.suite, req.seed, req.trials)
    suites = [
        SuiteResult(name=r["name"], passed=bool(r["passed"]), details=r) for r in results
    ]
    return ValidateResponse(passed=all(s.passed for s in suites), suites=suites)
