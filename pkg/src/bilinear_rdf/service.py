"""HTTP service over the core package.

Handlers are plain functions from a request model to a response model;
``create_app`` mounts each one on a POST route. The CLI calls the same
handlers in-process, or posts to a running server when given its URL.
"""
from __future__ import annotations

import math
import typing
from typing import Callable

import numpy as np

from . import __version__
from .checks import QUICK, run_quick
from .decomp import check_global, generic_estimate, global_decompose
from .experiments import (
    RWTConfig,
    SetSpec,
    _jsonable,
    interpolation_exponents,
    interpolation_limit,
    norm_ratio_sweep,
    restricted_weak_type_experiment,
)
from .fourier import as_signal, signal_from_json
from .grid import GridConfig, RectangleCollection, generate_collection, validate_disjoint
from .maximal import carleson, default_breakpoints, norm_lp, variational_carleson
from .operators import (
    ExponentConfig,
    doubled_square_function,
    smooth_square_function,
    square_function,
    trilinear_form,
)
from .schemas import (
    ApplyRequest,
    ApplyResponse,
    CollectionRequest,
    CollectionResponse,
    CollectionSpec,
    DecomposeRequest,
    DecomposeResponse,
    ExponentRequest,
    ExponentResponse,
    ExponentsModel,
    GridModel,
    RWTRequest,
    RWTResponse,
    SweepRequest,
    SweepResponse,
    VerifyRequest,
    VerifyResponse,
)
from .tiles import enumerate_super_tiles


def grid_config(m: GridModel) -> GridConfig:
    return GridConfig(log_size=m.log_size, freq_box_radius=m.freq_box_radius, phi_decay=m.phi_decay)


def exponent_config(m: ExponentsModel) -> ExponentConfig:
    return ExponentConfig(r=m.r, r0=m.r0, p=m.p, q=m.q, s=m.s, theta1=m.theta1)


def _collection(grid: GridConfig, spec: CollectionSpec, seed: int) -> RectangleCollection:
    return generate_collection(spec.mode, seed, grid, spec.params)


def _signals(req, size: int):
    rng = np.random.default_rng(req.seed)
    f = signal_from_json(req.f) if req.f is not None else rng.normal(size=size) + 1j * rng.normal(size=size)
    g = signal_from_json(req.g) if req.g is not None else rng.normal(size=size) + 1j * rng.normal(size=size)
    return as_signal(f, size), as_signal(g, size)


def gen_collection(req: CollectionRequest) -> CollectionResponse:
    grid = grid_config(req.grid)
    c = _collection(grid, req.collection, req.seed)
    ok, _ = validate_disjoint(c)
    high = sum(1 for R in c.rects if R.r2.length >= R.r1.length)
    return CollectionResponse(label=c.label, size=grid.size, count=len(c), high_eccentricity=high,
                              disjoint=ok, rects=c.to_json_obj()["rects"])


def apply(req: ApplyRequest) -> ApplyResponse:
    grid = grid_config(req.grid)
    size = grid.size
    c = _collection(grid, req.collection, req.seed)
    f, g = _signals(req, size)
    norms = {"f_2": norm_lp(f, 2), "g_2": norm_lp(g, 2)}
    form = None
    op = req.operator
    if op == "square":
        out = square_function(f, g, c, req.r)
    elif op == "smooth-square":
        out = smooth_square_function(f, g, c, req.r)
    elif op == "doubled-square":
        out = doubled_square_function(f, g, c, req.r)
    elif op == "carleson":
        out = carleson(f)
    elif op == "variation":
        out = variational_carleson(g, req.r, default_breakpoints(size, c.rects))
    else:
        rng = np.random.default_rng([req.seed, 1])
        h = {R: rng.normal(size=size) + 1j * rng.normal(size=size) for R in c.rects}
        lam = trilinear_form(f, g, h, c)
        form = [lam.real, lam.imag]
        out = None
    if out is not None:
        norms |= {"out_2": norm_lp(out, 2), "out_inf": norm_lp(out, math.inf)}
    values = out.tolist() if (out is not None and req.include_values) else None
    return ApplyResponse(operator=op, size=size, collection=c.label, norms=_jsonable(norms), values=values, form=form)


def sweep(req: SweepRequest) -> SweepResponse:
    cfgs = [exponent_config(e) for e in req.exponents]
    modes = [(m.mode, m.params or None) for m in req.modes]
    rep = norm_ratio_sweep(cfgs, modes, req.trials, req.seed, req.log_sizes, req.workers, req.allow_out_of_range)
    return SweepResponse(**_jsonable(rep.to_dict()))


def decompose(req: DecomposeRequest) -> DecomposeResponse:
    grid = grid_config(req.grid)
    cfg = exponent_config(req.exponents)
    size = grid.size
    c = _collection(grid, req.collection, req.seed)
    high = [R for R in c.rects if R.r2.length >= R.r1.length]
    pool = enumerate_super_tiles(high, size)
    rng = np.random.default_rng([req.seed, 2])
    f = rng.normal(size=size) + 1j * rng.normal(size=size)
    g = rng.normal(size=size) + 1j * rng.normal(size=size)
    h = {R: rng.normal(size=size) + 1j * rng.normal(size=size) for R in high}
    rep = global_decompose(pool, f, h, req.n_shift, cfg, order_exponent=req.order_exponent)
    chk = check_global(rep, f, h, cfg)
    ge = generic_estimate(rep, f, g, h, cfg, req.theta1)
    return DecomposeResponse(
        table=_jsonable(rep.table()),
        checks=_jsonable(chk),
        energies={"f": rep.energy_f, "h": rep.energy_h},
        sizes={"f": rep.size_f, "h": rep.size_h},
        restarts=rep.restarts,
        residual=len(rep.residual),
        generic_estimate=_jsonable({k: v for k, v in ge.to_dict().items() if k != "table"} | {"table": ge.table}),
        report=_jsonable(rep.to_dict()) if req.include_report else None,
    )


def rwt(req: RWTRequest) -> RWTResponse:
    grid = grid_config(req.grid)
    cfg = exponent_config(req.exponents)
    rcfg = RWTConfig.from_dict(req.rwt.model_dump())
    rows, reps, envs = [], [], []
    for t in range(req.trials):
        seed = req.seed * 1000 + t
        rng = np.random.default_rng([req.seed, t, 9])
        spec = SetSpec.random(grid.size, rng, rcfg.density)
        c = _collection(grid, req.collection, seed)
        rep = restricted_weak_type_experiment(spec, c, cfg, rcfg, seed=seed, tile_analysis=req.tile_analysis)
        rows.append(rep.row())
        envs.append(rep.envelope)
        reps.append(rep.to_dict())
    return RWTResponse(
        rows=_jsonable(rows),
        max_ratio=max(r["ratio"] for r in rows),
        all_major=all(r["major_subset"] for r in reps),
        envelopes=_jsonable(envs),
        reports=_jsonable(reps),
    )


def verify(req: VerifyRequest) -> VerifyResponse:
    res = run_quick(req.checks, req.seed)
    return VerifyResponse(passed=all(r.passed for r in res), results=_jsonable([r.to_dict() for r in res]))


def solve_exponents(req: ExponentRequest) -> ExponentResponse:
    sol = interpolation_exponents(req.r, req.p, req.q)
    return ExponentResponse(solution=_jsonable(sol.to_dict()), limit=_jsonable(interpolation_limit(req.r, req.p, req.q)))


ROUTES: dict[str, tuple[type, Callable]] = {
    "gen-collection": (CollectionRequest, gen_collection),
    "apply": (ApplyRequest, apply),
    "sweep": (SweepRequest, sweep),
    "decompose": (DecomposeRequest, decompose),
    "rwt": (RWTRequest, rwt),
    "verify": (VerifyRequest, verify),
    "solve-exponents": (ExponentRequest, solve_exponents),
}


def create_app():
    from fastapi import FastAPI, HTTPException

    app = FastAPI(title="bilinear-rdf", version=__version__)

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "version": __version__, "checks": sorted(QUICK)}

    def _mount(path: str, model: type, fn: Callable) -> None:
        resp_model = typing.get_type_hints(fn)["return"]

        def endpoint(req):
            try:
                return fn(req)
            except ValueError as e:
                raise HTTPException(status_code=422, detail=str(e)) from e

        endpoint.__annotations__ = {"req": model, "return": resp_model}
        endpoint.__name__ = path.replace("-", "_")
        app.post(f"/{path}", response_model=resp_model)(endpoint)

    for path, (model, fn) in ROUTES.items():
        _mount(path, model, fn)
    return app
