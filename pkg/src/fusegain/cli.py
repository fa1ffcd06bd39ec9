"""Command-line experiment harness.

    fusegain eval      --recipe scalar --G '[[1]]'
    fusegain design    --recipe example1 --params scenario=3 --solver analytic --out out/
    fusegain sweep-rho --rhos 0.1,0.5,0.9 --out out/
    fusegain sweep-dim --recipe example1 --params scenario=3 --threshold-c 1e-3 --out out/

Exit codes: 0 ok, 2 validation failure, 3 numerical failure, 4 structure not
supported by the requested solver.
"""

from __future__ import annotations

import argparse
import json
import os
import sys as _sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from . import model
from .dimension import dimension_sweep
from .errors import NumericalError, UnsupportedStructure, ValidationError
from .gain import fd_gradient, gradient, information_gain, information_gain_snr_form, upper_bound
from .model import TwoChannelSystem, derive, validate_system
from .optimize import OptimConfig, run, run_multistart
from .waterfill import analytic_design

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_UNSUPPORTED = 0, 2, 3, 4
SEED_ENV = "FUSEGAIN_SEED"


# recipes ----------------------------------------------------------------------


def _recipe_random(seed=0, p=20, q=20, s=10, t=None, conditional="identity", P=1.0):
    return model.gen_random_system(
        int(seed), int(p), int(q), int(s), None if t is None else int(t), conditional, float(P)
    )


RECIPES = {
    "scalar": lambda P=1.0: model.gen_scalar_system(float(P)),
    "example1": lambda scenario=1, P=1.0: model.gen_example1(int(scenario), float(P)),
    "ar": lambda rho=0.5, P=1.0: model.gen_ar_system(float(rho), float(P)),
    "random": _recipe_random,
}


def _parse_params(items: Optional[List[str]]) -> Dict[str, str]:
    out = {}
    for item in items or []:
        if "=" not in item:
            raise ValidationError(f"--params expects K=V, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def load_instance(args) -> TwoChannelSystem:
    if args.instance:
        doc = json.loads(Path(args.instance).read_text())
        if "system" in doc:
            doc = doc["system"]
        try:
            sys = TwoChannelSystem.from_dict(doc)
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed instance file: {exc}") from exc
    else:
        name = args.recipe or "scalar"
        if name not in RECIPES:
            raise ValidationError(f"unknown recipe {name!r}; choose from {sorted(RECIPES)}")
        params = _parse_params(args.params)
        if args.seed is not None and name == "random":
            params.setdefault("seed", args.seed)
        try:
            sys = RECIPES[name](**params)
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ValidationError):
                raise
            raise ValidationError(f"bad parameters for recipe {name!r}: {exc}") from exc
    return validate_system(sys)


def _default_seed() -> int:
    return int(os.environ.get(SEED_ENV, "0"))


def _config(args) -> OptimConfig:
    step = args.step
    if step in ("linesearch", "line_search"):
        return OptimConfig(max_iters=args.iters, step_mode="line_search", seed=args.seed)
    if step.startswith("const:"):
        step = step.split(":", 1)[1]
    return OptimConfig(max_iters=args.iters, step_mode="constant", step=float(step), seed=args.seed)


# output -------------------------------------------------------------------------


def write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _dump(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def vessels_csv(design) -> str:
    lines = ["channel,a,b,base,mercury,water,lambda2"]
    for v, x in zip(design.vessels, design.lambda2):
        vals = (v.a, v.b, v.base, v.mercury, v.water, float(x))
        lines.append(f"{v.index}," + ",".join(repr(val) for val in vals))
    return "\n".join(lines) + "\n"


# commands -----------------------------------------------------------------------


def _load_G(args, sys: TwoChannelSystem) -> np.ndarray:
    if args.design:
        doc = json.loads(Path(args.design).read_text())
        G = np.array(doc["G"], dtype=float)
    elif args.G:
        G = np.array(json.loads(args.G), dtype=float)
    else:
        G = np.zeros((sys.t, sys.q))
    return np.atleast_2d(G)


def cmd_eval(args) -> dict:
    if args.design and not args.instance and not args.recipe:
        args.instance = args.design
    sys = load_instance(args)
    d = derive(sys)
    G = _load_G(args, sys)
    g = gradient(G, d)
    fd = fd_gradient(G, d)
    scale = max(np.linalg.norm(g), 1e-300)
    report = {
        "gain_nats": information_gain(G, d),
        "gain_snr_form_nats": information_gain_snr_form(G, d),
        "upper_bound_nats": upper_bound(d),
        "power": float(np.sum(G * G)),
        "P": sys.P,
        "grad_check_residual": float(np.linalg.norm(g - fd) / scale) if np.any(g) else float(np.linalg.norm(fd)),
    }
    text = _dump(report)
    if args.out:
        write_atomic(Path(args.out) / "eval.json", text)
    print(text, end="")
    return report


def _design_one(sys, d, solver, config, restarts):
    if solver == "analytic":
        return analytic_design(sys, d), None
    if restarts > 1:
        return run_multistart(sys, d, solver, config, restarts)
    return run(sys, d, solver, config)


def cmd_design(args) -> dict:
    sys = load_instance(args)
    d = derive(sys)
    out = Path(args.out) if args.out else None
    if args.solver == "analytic":
        design, _ = _design_one(sys, d, "analytic", None, 1)
        doc = design.to_dict()
        if out:
            write_atomic(out / "vessels.csv", vessels_csv(design))
    else:
        G, trace = _design_one(sys, d, args.solver, _config(args), args.restarts)
        doc = {
            "solver": args.solver,
            "P": sys.P,
            "gain_nats": trace.best_gain,
            "status": trace.status,
            "iterations": len(trace.records) - 1,
            "G": G.G.tolist(),
        }
        if out:
            write_atomic(out / "trace.csv", trace.to_csv())
    doc["system"] = sys.to_dict()
    if out:
        write_atomic(out / "design.json", _dump(doc))
    summary = {k: doc[k] for k in doc if k not in ("system", "vessels")}
    print(_dump(summary), end="")
    return doc


def cmd_sweep_rho(args) -> dict:
    rhos = [float(r) for r in args.rhos.split(",")]
    config = _config(args)
    jobs = [(rho, alg) for rho in rhos for alg in ("intrinsic", "extrinsic")]

    def job(item):
        rho, alg = item
        sys = validate_system(model.gen_ar_system(rho))
        d = derive(sys)
        _, trace = run(sys, d, alg, config)
        return trace, analytic_design(sys, d).gain

    with ThreadPoolExecutor(max_workers=max(1, args.workers)) as ex:
        results = list(ex.map(job, jobs))

    rows = ["rho,algorithm,final_gain_nats,best_gain_nats,analytic_gain_nats,iterations,status"]
    summary = []
    for (rho, alg), (trace, opt) in zip(jobs, results):
        if args.out:
            write_atomic(Path(args.out) / f"trace_rho{rho:g}_{alg}.csv", trace.to_csv())
        rows.append(
            f"{rho!r},{alg},{trace.final_gain!r},{trace.best_gain!r},{opt!r},"
            f"{len(trace.records) - 1},{trace.status}"
        )
        summary.append({"rho": rho, "algorithm": alg, "gain_nats": trace.best_gain, "analytic_nats": opt})
    text = "\n".join(rows) + "\n"
    if args.out:
        write_atomic(Path(args.out) / "summary.csv", text)
    print(text, end="")
    return {"runs": summary}


def cmd_sweep_dim(args) -> dict:
    sys = load_instance(args)
    sweep = dimension_sweep(
        sys,
        solver=args.solver,
        c=args.threshold_c,
        config=_config(args),
        restarts=args.restarts,
        workers=args.workers,
    )
    doc = {"t_hat": sweep.t_hat, "max_rank": sweep.max_rank, "c": sweep.c, "solver": args.solver}
    if args.out:
        write_atomic(Path(args.out) / "sweep.csv", sweep.to_csv())
        write_atomic(Path(args.out) / "sweep.json", _dump(doc))
    print(sweep.to_csv(), end="")
    print(_dump(doc), end="")
    return doc


# parser -------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fusegain", description=__doc__.split("\n\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, solver_default="analytic"):
        src = p.add_mutually_exclusive_group()
        src.add_argument("--instance", help="system JSON file")
        src.add_argument("--recipe", choices=sorted(RECIPES))
        p.add_argument("--params", nargs="*", metavar="K=V", help="recipe parameters")
        p.add_argument("--solver", choices=("analytic", "extrinsic", "intrinsic"), default=solver_default)
        p.add_argument("--step", default="const:0.1", help="const:DELTA or linesearch")
        p.add_argument("--iters", type=int, default=2000)
        p.add_argument("--seed", type=int, default=_default_seed())
        p.add_argument("--restarts", type=int, default=1)
        p.add_argument("--out", help="output directory")
        p.add_argument("--threshold-c", type=float, default=1e-3)
        p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("eval", help="evaluate a channel matrix")
    common(p)
    p.add_argument("--design", help="design JSON with a 'G' entry")
    p.add_argument("--G", help="channel matrix as a JSON nested list")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("design", help="design the secondary channel")
    common(p)
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("sweep-rho", help="AR-mixing convergence study")
    common(p, "intrinsic")
    p.add_argument("--rhos", default="0.1,0.5,0.9")
    p.set_defaults(func=cmd_sweep_rho)

    p = sub.add_parser("sweep-dim", help="output-dimension selection")
    common(p)
    p.set_defaults(func=cmd_sweep_dim)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except UnsupportedStructure as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return EXIT_UNSUPPORTED
    except ValidationError as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    _sys.exit(main())
