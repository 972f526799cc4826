"""Request and response models shared by the HTTP service and the CLI."""
from __future__ import annotations

from typing import Any, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

Mode = Literal["single", "unit-grid", "recursive-bisection", "strip-like", "stacked"]


class _Model(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ExponentsModel(_Model):
    r: float = 4.0
    r0: Optional[float] = None
    p: float = 3.0
    q: float = 3.0
    s: Optional[float] = None
    theta1: float = 0.5


class CollectionSpec(_Model):
    mode: Mode = "stacked"
    params: dict[str, Any] = Field(default_factory=dict)


class GridModel(_Model):
    log_size: int = Field(8, ge=3, le=14)
    freq_box_radius: Optional[int] = None
    phi_decay: int = Field(10, ge=4)


class CollectionRequest(_Model):
    grid: GridModel = Field(default_factory=GridModel)
    collection: CollectionSpec = Field(default_factory=CollectionSpec)
    seed: int = 0


class CollectionResponse(_Model):
    label: str
    size: int
    count: int
    high_eccentricity: int
    disjoint: bool
    rects: list[dict[str, Any]]


class ApplyRequest(_Model):
    grid: GridModel = Field(default_factory=GridModel)
    collection: CollectionSpec = Field(default_factory=CollectionSpec)
    seed: int = 0
    operator: Literal["square", "smooth-square", "doubled-square", "carleson", "variation", "trilinear"] = "square"
    r: float = 4.0
    f: Optional[list[list[float]]] = Field(None, description="signal as [re, im] pairs; random when omitted")
    g: Optional[list[list[float]]] = None
    include_values: bool = True


class ApplyResponse(_Model):
    operator: str
    size: int
    collection: str
    norms: dict[str, Any]
    values: Optional[list[float]] = None
    form: Optional[list[float]] = None


class SweepRequest(_Model):
    exponents: list[ExponentsModel] = Field(default_factory=lambda: [ExponentsModel(p=3.0, q=3.0, s=1.5)])
    modes: list[CollectionSpec] = Field(default_factory=lambda: [CollectionSpec(mode="recursive-bisection")])
    trials: int = Field(10, ge=1)
    seed: int = 0
    log_sizes: list[int] = Field(default_factory=lambda: [8, 10])
    workers: int = Field(1, ge=1)
    allow_out_of_range: bool = False


class SweepResponse(_Model):
    rows: list[dict[str, Any]]
    cells: list[dict[str, Any]]
    growth: list[dict[str, Any]]


class DecomposeRequest(_Model):
    grid: GridModel = Field(default_factory=GridModel)
    collection: CollectionSpec = Field(default_factory=CollectionSpec)
    exponents: ExponentsModel = Field(default_factory=ExponentsModel)
    seed: int = 0
    n_shift: int = 0
    order_exponent: Optional[float] = None
    theta1: float = Field(0.5, ge=0.0, le=1.0)
    include_report: bool = False


class DecomposeResponse(_Model):
    table: list[dict[str, Any]]
    checks: dict[str, Any]
    energies: dict[str, float]
    sizes: dict[str, float]
    restarts: int
    residual: int
    generic_estimate: dict[str, Any]
    report: Optional[dict[str, Any]] = None


class RWTModel(_Model):
    c_f: float = 1.0
    c_g: float = 1.0
    decay: int = 10
    max_doublings: int = 2000
    n_shift: int = 0
    random_moduli: bool = False
    density: list[float] = Field(default_factory=lambda: [0.5, 0.5, 0.5])


class RWTRequest(_Model):
    grid: GridModel = Field(default_factory=GridModel)
    collection: CollectionSpec = Field(default_factory=CollectionSpec)
    exponents: ExponentsModel = Field(default_factory=lambda: ExponentsModel(r=4.0, r0=3.0, p=3.5, q=4.0))
    rwt: RWTModel = Field(default_factory=RWTModel)
    seed: int = 0
    trials: int = Field(5, ge=1)
    tile_analysis: bool = True


class RWTResponse(_Model):
    rows: list[dict[str, Any]]
    max_ratio: float
    all_major: bool
    envelopes: list[dict[str, Any]]
    reports: Optional[list[dict[str, Any]]] = None


class VerifyRequest(_Model):
    checks: Optional[list[str]] = None
    seed: int = 0


class VerifyResponse(_Model):
    passed: bool
    results: list[dict[str, Any]]


class ExponentRequest(_Model):
    r: float
    p: float
    q: float

    @model_validator(mode="after")
    def _range(self) -> "ExponentRequest":
        if not self.r > 2:
            raise ValueError("need r > 2")
        rp = self.r / (self.r - 1.0)
        if not (rp < self.p < self.r and rp < self.q < self.r):
            raise ValueError("need r' < p, q < r")
        return self


class ExponentResponse(_Model):
    solution: dict[str, Any]
    limit: dict[str, Any]
