"""Request and response schemas for the service endpoints."""

from typing import Literal, Optional

from pydantic import BaseModel, Field

from ..datagen import DEFAULT_CLASS_PARAMS


class PointMass(BaseModel):
    point: list[float]
    weight: float


class OrbitRequest(BaseModel):
    classes: list[float] = Field(default_factory=lambda: list(DEFAULT_CLASS_PARAMS))
    per_class: int = 50
    points: int = 200
    seed: int = 0


class OrbitCloudModel(BaseModel):
    label: float
    points: list[list[float]]


class OrbitResponse(BaseModel):
    clouds: list[OrbitCloudModel]


class EnsembleRequest(BaseModel):
    measures: list[list[PointMass]]
    kind: Literal["quadtree", "cluster"] = "quadtree"
    slices: int = 10
    depth: int = 6
    kappa: int = 4
    edge_metric: Literal["euclidean", "l1"] = "euclidean"
    expansion: Literal["random", "none"] = "random"
    seed: int = 0


class EnsembleResponse(BaseModel):
    ensemble: dict


class DistancesRequest(BaseModel):
    measures: list[list[PointMass]]
    mode: Literal["tsw", "sw", "exact"] = "tsw"
    ensemble: Optional[dict] = None
    pairs: Optional[list[tuple[int, int]]] = None
    threads: int = 1
    sw_dirs: int = 10
    seed: int = 0


class MatrixResponse(BaseModel):
    # entries for pairs that were not requested come back as null
    ids: list[str]
    matrix: list[list[Optional[float]]]


class GramRequest(BaseModel):
    ids: list[str]
    matrix: list[list[float]]
    bandwidth_quantile: Optional[float] = None


class GramResponse(BaseModel):
    ids: list[str]
    matrix: list[list[float]]
    bandwidth: float


class ValidateRequest(BaseModel):
    suite: str = "all"
    seed: int = 0
    trials: Optional[int] = None


class SuiteResult(BaseModel):
    name: str
    passed: bool
    details: dict


class ValidateResponse(BaseModel):
    passed: bool
    suites: list[SuiteResult]


class HealthResponse(BaseModel):
    status: str
    version: str
