"""Command line client.

Each subcommand builds a request model and hands it to the matching
service handler, in-process by default or over HTTP with ``--server``.
Values from ``--config`` act as defaults; explicit flags win.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Optional, Sequence

from pydantic import BaseModel, ValidationError

from . import service
from .experiments import SWEEP_COLUMNS, write_report
from .schemas import (
    ApplyRequest,
    CollectionRequest,
    CollectionSpec,
    DecomposeRequest,
    ExponentRequest,
    ExponentsModel,
    GridModel,
    RWTModel,
    RWTRequest,
    SweepRequest,
    VerifyRequest,
)

LOGGER = logging.getLogger("bilinear_rdf.cli")


def _load_config(path: Optional[str]) -> dict:
    if not path:
        return {}
    data = json.loads(Path(path).read_text())
    unknown = set(data) - {"grid", "exponents", "collection", "sweep", "rwt"}
    if unknown:
        raise SystemExit(f"unknown config keys: {sorted(unknown)}")
    return data


def _grid(args, cfg: dict) -> GridModel:
    d = dict(cfg.get("grid", {}))
    if args.grid_log_size is not None:
        d["log_size"] = args.grid_log_size
    d.pop("bump_profile", None)
    return GridModel(**d)


def _collection(args, cfg: dict) -> CollectionSpec:
    d = {"mode": "stacked", "params": {}} | dict(cfg.get("collection", {}))
    if getattr(args, "mode", None):
        d["mode"] = args.mode
    if getattr(args, "params", None):
        d["params"] = json.loads(args.params)
    return CollectionSpec(**d)


def _exponents(args, cfg: dict, defaults: Optional[dict] = None) -> ExponentsModel:
    d = dict(defaults or {}) | {k: v for k, v in cfg.get("exponents", {}).items()
                                if k in ("r", "r0", "p", "q", "s", "theta1")}
    for k in ("r", "r0", "p", "q", "s"):
        v = getattr(args, k, None)
        if v is not None:
            d[k] = v
    return ExponentsModel(**d)


def _seed(args, default: int = 0) -> int:
    return args.seed if args.seed is not None else default


# -- request builders ---------------------------------------------------------


def build_gen_collection(args, cfg) -> CollectionRequest:
    return CollectionRequest(grid=_grid(args, cfg), collection=_collection(args, cfg), seed=_seed(args))


def build_apply(args, cfg) -> ApplyRequest:
    f = json.loads(Path(args.f).read_text()) if args.f else None
    g = json.loads(Path(args.g).read_text()) if args.g else None
    return ApplyRequest(grid=_grid(args, cfg), collection=_collection(args, cfg), seed=_seed(args),
                        operator=args.operator, r=args.r if args.r is not None else 4.0, f=f, g=g,
                        include_values=not args.no_values)


def build_sweep(args, cfg) -> SweepRequest:
    sw = dict(cfg.get("sweep", {}))
    if args.exponents:
        exps = [ExponentsModel(**e) for e in json.loads(args.exponents)]
    elif "exponents" in sw:
        exps = [ExponentsModel(**e) for e in sw["exponents"]]
    else:
        exps = [_exponents(args, cfg, {"p": 3.0, "q": 3.0, "s": 1.5})]
    modes = args.modes or sw.get("modes") or [cfg.get("collection", {}).get("mode", "recursive-bisection")]
    modes = [CollectionSpec(mode=m) if isinstance(m, str) else CollectionSpec(**m) for m in modes]
    sizes = args.log_sizes or sw.get("log_sizes") or [args.grid_log_size or 8]
    return SweepRequest(exponents=exps, modes=modes, trials=args.trials or sw.get("trials", 10),
                        seed=_seed(args, sw.get("seed", 0)), log_sizes=sizes,
                        workers=args.workers or sw.get("workers", 1),
                        allow_out_of_range=args.allow_out_of_range or sw.get("allow_out_of_range", False))


def build_decompose(args, cfg) -> DecomposeRequest:
    return DecomposeRequest(grid=_grid(args, cfg), collection=_collection(args, cfg),
                            exponents=_exponents(args, cfg), seed=_seed(args), n_shift=args.n_shift,
                            order_exponent=args.order_exponent, theta1=args.theta1,
                            include_report=args.full)


def build_rwt(args, cfg) -> RWTRequest:
    rw = dict(cfg.get("rwt", {}))
    exps = _exponents(args, cfg, {"r": 4.0, "r0": 3.0, "p": 3.5, "q": 4.0})
    if args.r is not None and args.q is None:
        exps = exps.model_copy(update={"q": exps.r})
    return RWTRequest(grid=_grid(args, cfg), collection=_collection(args, cfg), exponents=exps,
                      rwt=RWTModel(**rw), seed=_seed(args), trials=args.trials,
                      tile_analysis=not args.no_tiles)


def build_verify(args, cfg) -> VerifyRequest:
    return VerifyRequest(checks=args.checks or None, seed=_seed(args))


def build_solve(args, cfg) -> ExponentRequest:
    return ExponentRequest(r=args.r, p=args.p, q=args.q)


# -- rendering -----------------------------------------------------------------


def _rows(command: str, resp: dict) -> tuple[list[dict], Optional[Sequence[str]]]:
    if command == "gen-collection":
        rows = [{"r1_scale": r["r1"]["scale"], "r1_index": r["r1"]["index"],
                 "r2_scale": r["r2"]["scale"], "r2_index": r["r2"]["index"]} for r in resp["rects"]]
        return rows, None
    if command == "apply":
        vals = resp.get("values") or []
        if vals:
            return [{"x": i, "value": v} for i, v in enumerate(vals)], None
        form = resp.get("form")
        return [resp["norms"] | ({"form_re": form[0], "form_im": form[1]} if form else {})], None
    if command == "sweep":
        return resp["rows"], SWEEP_COLUMNS
    if command == "decompose":
        return resp["table"], None
    if command == "rwt":
        return resp["rows"], None
    if command == "verify":
        return [{"criterion": r["criterion"], "name": r["name"], "passed": r["passed"],
                 "seconds": r["seconds"]} for r in resp["results"]], None
    return [resp["solution"] | {"residuals": json.dumps(resp["solution"]["residuals"]),
                                "margins": json.dumps(resp["solution"]["margins"])}], None


def _call(command: str, req: BaseModel, server: Optional[str]) -> dict:
    if server:
        import httpx

        r = httpx.post(f"{server.rstrip('/')}/{command}", json=req.model_dump(mode="json"), timeout=None)
        if r.status_code != 200:
            raise SystemExit(f"server error {r.status_code}: {r.text}")
        return r.json()
    _, fn = service.ROUTES[command]
    return fn(req).model_dump(mode="json")


BUILDERS = {
    "gen-collection": build_gen_collection,
    "apply": build_apply,
    "sweep": build_sweep,
    "decompose": build_decompose,
    "rwt": build_rwt,
    "verify": build_verify,
    "solve-exponents": build_solve,
}


def _add_collection_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mode", choices=["single", "unit-grid", "recursive-bisection", "strip-like", "stacked"])
    p.add_argument("--params", help="JSON object of generator parameters")


def _add_exponent_args(p: argparse.ArgumentParser, required: bool = False) -> None:
    for k in ("r", "p", "q"):
        p.add_argument(f"--{k}", type=float, required=required)
    if not required:
        p.add_argument("--r0", type=float)
        p.add_argument("--s", type=float)


def _add_global_args(p: argparse.ArgumentParser, suppress: bool) -> None:
    # Repeated on each subparser with suppressed defaults so the flags may
    # appear on either side of the subcommand.
    kw = {"default": argparse.SUPPRESS} if suppress else {}
    p.add_argument("--grid-log-size", type=int, help="log2 of the grid size N", **kw)
    p.add_argument("--seed", type=int, **kw)
    p.add_argument("--config", help="JSON config with keys grid, exponents, collection, sweep, rwt", **kw)
    p.add_argument("--out", help="output path (stdout when omitted)", **kw)
    p.add_argument("--format", choices=["json", "csv"], **({"default": "json"} | kw))
    p.add_argument("--server", help="base URL of a running service; in-process when omitted", **kw)
    p.add_argument("-v", "--verbose", action="store_true", **kw)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bilinear-rdf", description=__doc__.splitlines()[0])
    _add_global_args(ap, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _add_global_args(common, suppress=True)
    sub = ap.add_subparsers(dest="command", required=True)
    _add_parser = sub.add_parser
    sub.add_parser = lambda name, **kw: _add_parser(name, parents=[common], **kw)  # type: ignore[method-assign]

    p = sub.add_parser("gen-collection", help="generate a disjoint dyadic rectangle collection")
    _add_collection_args(p)

    p = sub.add_parser("apply", help="apply an operator to random or given signals")
    _add_collection_args(p)
    p.add_argument("--operator", default="square",
                   choices=["square", "smooth-square", "doubled-square", "carleson", "variation", "trilinear"])
    p.add_argument("--r", type=float)
    p.add_argument("--f", help="JSON file with [re, im] pairs")
    p.add_argument("--g", help="JSON file with [re, im] pairs")
    p.add_argument("--no-values", action="store_true")

    p = sub.add_parser("sweep", help="norm-ratio sweep across collections and grid sizes")
    _add_exponent_args(p)
    p.add_argument("--exponents", help="JSON list of exponent objects")
    p.add_argument("--modes", nargs="+")
    p.add_argument("--log-sizes", type=int, nargs="+")
    p.add_argument("--trials", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--allow-out-of-range", action="store_true")

    p = sub.add_parser("decompose", help="global decomposition with per-level table")
    _add_collection_args(p)
    _add_exponent_args(p)
    p.add_argument("--n-shift", type=int, default=0)
    p.add_argument("--order-exponent", type=float)
    p.add_argument("--theta1", type=float, default=0.5)
    p.add_argument("--full", action="store_true", help="include the full report")

    p = sub.add_parser("rwt", help="restricted weak type experiment")
    _add_collection_args(p)
    _add_exponent_args(p)
    p.add_argument("--trials", type=int, default=5)
    p.add_argument("--no-tiles", action="store_true", help="skip the tile-class analysis")

    p = sub.add_parser("verify", help="quick property checks")
    p.add_argument("--checks", nargs="+")

    p = sub.add_parser("solve-exponents", help="solve the interpolation exponent system")
    _add_exponent_args(p, required=True)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    return ap


def _print_table(rows: list[dict]) -> str:
    if not rows:
        return ""
    cols = list(rows[0])
    return "\n".join(["\t".join(cols)] + ["\t".join(str(r.get(c, "")) for c in cols) for r in rows])


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    if args.command == "serve":
        import uvicorn

        uvicorn.run(service.create_app(), host=args.host, port=args.port)
        return 0
    cfg = _load_config(args.config)
    try:
        req = BUILDERS[args.command](args, cfg)
        resp = _call(args.command, req, args.server)
    except ValidationError as e:
        print(e, file=sys.stderr)
        return 2
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    rows, cols = _rows(args.command, resp)
    inputs: dict[str, Any] = {"command": args.command, "request": req.model_dump(mode="json")}
    out = write_report(resp, rows, args.out, args.format, config=cfg, inputs=inputs, columns=cols)
    if args.out is None:
        print(out["text"])
    elif args.command == "decompose" and args.format == "json":
        print(_print_table(resp["table"]))
    if args.command == "verify":
        return 0 if resp["passed"] else 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
