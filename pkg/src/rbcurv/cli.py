"""Command line front end: evaluate curvature, certify sign conditions,
run Schwarz and Monte Carlo checks, list the catalog.

Reports are JSON with a fixed top-level schema. Every numeric block names
the operation and tolerance class that produced it, and a convention block
travels with every report. Identical invocations with the same seed write
byte-identical files, so the timings section carries deterministic work
counters instead of wall-clock times.

Exit codes: 0 success, 2 usage or input error, 3 condition failure under
--fail-on.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import re
import sys

import numpy as np

from . import __version__, certify, curvature, linalg, metric, sampling, schwarz
from .certify import Budget, Region
from .metric import CatalogError, DomainError
from .schwarz import MapSpec, SchwarzBounds
from .wirtinger import EvaluationError, NotHolomorphicError, ParseError

_INPUT_ERRORS = (CatalogError, DomainError, ParseError, EvaluationError,
                 NotHolomorphicError, linalg.NotHermitianError,
                 linalg.NotPositiveDefiniteError, ValueError, OSError,
                 json.JSONDecodeError, KeyError)


def convention_block() -> dict:
    return {
        "index_pair_convention": ("R[i,jbar,k,lbar]: the first index pair "
                                  "carries the derivative directions "
                                  "d/dz_i, d/dzbar_j"),
        "torsion_form_factor": curvature.TORSION_FORM_FACTOR,
        "fs_normalization": ("affine-chart potential log(1+|z|^2); fitted "
                             "holomorphic sectional constant 2.0"),
        "tolerance_ladder": {"algebraic": linalg.TOL_ALGEBRAIC,
                             "decomposition": linalg.TOL_DECOMP,
                             "curvature_symmetry": linalg.TOL_SYMMETRY,
                             "finite_difference": linalg.TOL_FD},
        "strictness_margin": certify.STRICT_MARGIN,
    }


def jsonable(obj):
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, (np.complexfloating,)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return [jsonable(x) for x in obj.tolist()] if obj.dtype.kind == "c" \
            else obj.tolist()
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: jsonable(getattr(obj, f.name))
                for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    return obj


def make_report(command: str, seed: int, inputs: dict, results: dict,
                work: dict) -> dict:
    return {
        "tool_version": __version__,
        "command": command,
        "seed": seed,
        "convention_block": convention_block(),
        "inputs": inputs,
        "results": results,
        "timings": {"note": ("deterministic work counters; wall-clock omitted "
                             "so identical seeded runs are byte-identical"),
                    "work": work},
    }


def emit(report: dict, out_path: str | None) -> None:
    text = json.dumps(jsonable(report), indent=2, sort_keys=True) + "\n"
    if out_path is None:
        sys.stdout.write(text)
        return
    tmp = out_path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, out_path)


# --------------------------------------------------------------------------
# Input parsing helpers


def parse_complex(text: str) -> complex:
    s = text.strip().replace(" ", "")
    if not s:
        raise ValueError("empty complex literal")
    s = s.replace("i", "j")
    s = re.sub(r"(^|[+-])j", r"\g<1>1j", s)
    try:
        return complex(s)
    except ValueError as exc:
        raise ValueError(f"cannot parse complex literal {text!r}") from exc


def parse_point(text: str, n: int | None = None) -> np.ndarray:
    parts = [p for p in text.split(",") if p.strip() != ""]
    pt = np.array([parse_complex(p) for p in parts], dtype=complex)
    if n is not None and pt.shape[0] != n:
        raise ValueError(f"point has {pt.shape[0]} coordinates, expected {n}")
    return pt


def gather_params(args) -> dict:
    params = {}
    for key in ("eps", "b", "n", "n1", "n2"):
        v = getattr(args, key, None)
        if v is None:
            continue
        if key == "b" and not isinstance(v, (int, float)):
            continue  # mc reuses --b for weights; the metric param is --metric-b
        params[key] = v
    if getattr(args, "metric_b", None) is not None:
        params["b"] = args.metric_b
    return params


def resolve_metric(ref: str, args) -> metric.MetricSpec:
    if ref in metric.catalog_names():
        return metric.catalog(ref, gather_params(args))
    if os.path.exists(ref):
        return metric.load_metric(ref)
    raise CatalogError(f"metric {ref!r} is neither a catalog name nor a file; "
                       f"catalog: {', '.join(metric.catalog_names())}")


def resolve_map(ref: str, domain_dim: int) -> MapSpec:
    if ref == "identity":
        return MapSpec.identity(domain_dim)
    if os.path.exists(ref):
        return schwarz.load_map(ref)
    return MapSpec.from_components(domain_dim, ref.split(","))


def parse_condition(text: str) -> tuple[str, float]:
    fixed = {"pos": (">", 0.0), "nonneg": (">=", 0.0),
             "neg": ("<", 0.0), "nonpos": ("<=", 0.0)}
    if text in fixed:
        return fixed[text]
    if text.startswith("gt:"):
        return ">", float(text[3:])
    if text.startswith("lt:"):
        return "<", float(text[3:])
    raise ValueError(f"condition must be pos|nonneg|neg|nonpos|gt:c|lt:c, "
                     f"got {text!r}")


def budget_from_args(args) -> Budget:
    return Budget(samples=args.samples, starts=args.starts,
                  tol=args.opt_tol, seed=args.seed)


# --------------------------------------------------------------------------
# Subcommands


def cmd_catalog(args) -> int:
    if args.action == "list":
        entries = [metric.catalog_info(name) for name in metric.catalog_names()]
        results = {"catalog": {"op": "metric.catalog_names",
                   "count": len(entries), "entries": entries}}
    else:
        info = metric.catalog_info(args.name)
        defaults = {"flat": {"n": 2}, "fubini_study_affine": {"n": 2},
                    "example_2_2": {"eps": 0.5}, "example_2_2_dual": {"eps": 0.5},
                    "example_2_3": {"b": 1.0}, "product_flat_fs": {}}
        spec = metric.catalog(args.name, defaults[args.name])
        info["entries_upper"] = [list(r) for r in spec.upper_text]
        info["default_domain_radius"] = spec.domain_hint
        results = {"catalog": {"op": "metric.catalog_info", "entry": info}}
    report = make_report("catalog", 0, {"action": args.action,
                         "name": getattr(args, "name", None)}, results, {})
    emit(report, args.out)
    return 0


def cmd_eval(args) -> int:
    spec = resolve_metric(args.metric, args)
    point = parse_point(args.point, spec.n) if args.point else np.zeros(spec.n, complex)
    pc = curvature.at_point(spec, point)
    tol_sym = args.tol_symmetry

    sym = curvature.symmetry_report(pc.unitary, c=0.0)
    tors = curvature.torsion(pc.jet)
    ric = curvature.ricci(pc.coord, pc.jet.g)

    results = {
        "metric": {"op": "metric.jet", "tol_class": "algebraic_1e-12",
                   "name": spec.name, "params": spec.params,
                   "g": pc.jet.g,
                   "min_eigenvalue": float(np.linalg.eigvalsh(pc.jet.g)[0])},
        "curvature_symmetry": {"op": "curvature.symmetry_report",
                               "tol_class": f"symmetry_{tol_sym:g}",
                               "frame": "unitary (Cholesky)",
                               "hermitian_pair_residual": sym.hermitian_pair,
                               "kahler_like_residual": sym.kahler_like,
                               "pair_skew_residual": sym.pair_skew},
        "ricci": {"op": "curvature.ricci", "tol_class": "symmetry_1e-8",
                  "ric1": ric.ric1, "ric2": ric.ric2, "ric3": ric.ric3,
                  "max_hermitian_asymmetry": ric.max_asymmetry()},
        "torsion": {"op": "curvature.torsion", "tol_class": "decomposition_1e-10",
                    "max_torsion": tors.max_torsion, "max_eta": tors.max_eta,
                    "eta": tors.eta},
    }
    work = {"points": 1}
    if args.direction:
        v = parse_point(args.direction, spec.n)
        results["hsc_direction"] = {
            "op": "curvature.hsc", "tol_class": "symmetry_1e-8",
            "direction": v, "value": curvature.hsc(pc.coord, pc.jet.g, v)}
    if args.directions > 0:
        rng = np.random.default_rng(args.seed)
        dirs = rng.standard_normal((args.directions, spec.n)) \
            + 1j * rng.standard_normal((args.directions, spec.n))
        vals = curvature.hsc_many(pc.coord, pc.jet.g, dirs)
        results["hsc_random"] = {
            "op": "curvature.hsc_many", "tol_class": "symmetry_1e-8",
            "count": args.directions, "min": float(vals.min()),
            "max": float(vals.max()), "mean": float(vals.mean()),
            "spread": float(vals.max() - vals.min())}
        work["hsc_directions"] = args.directions
    report = make_report("eval", args.seed,
                         {"metric": args.metric, "params": spec.params,
                          "point": point}, results, work)
    emit(report, args.out)
    return 0


def _fail_exit(args, statuses: list[str]) -> int:
    if args.fail_on == "refuted" and "refuted" in statuses:
        return 3
    if args.fail_on == "inconclusive" and \
            any(s in ("refuted", "inconclusive") for s in statuses):
        return 3
    return 0


def cmd_certify(args) -> int:
    spec = resolve_metric(args.metric, args)
    op, c = parse_condition(args.cond)
    budget = budget_from_args(args)
    inputs = {"metric": args.metric, "params": spec.params, "cond": args.cond,
              "samples": budget.samples, "starts": budget.starts}
    if args.radius is not None:
        region = Region(radius=args.radius, count=args.points,
                        mode="grid" if args.grid else "random")
        result = certify.scan(spec, region, op, c, budget)
        statuses = [v.status for v in result.verdicts]
        results = {"scan": {"op": "certify.scan",
                            "tol_class": "strictness_margin_1e-9",
                            "summary": result.summary, "counts": result.counts,
                            "positive_evidence": result.positive_evidence,
                            "negative_evidence": result.negative_evidence,
                            "points": result.points,
                            "verdicts": result.verdicts}}
        work = {"points": len(result.verdicts),
                "samples": budget.samples * len(result.verdicts),
                "starts": budget.starts * len(result.verdicts)}
        inputs.update({"radius": args.radius, "points": args.points,
                       "mode": region.mode})
    else:
        point = parse_point(args.point, spec.n) if args.point \
            else np.zeros(spec.n, complex)
        t = curvature.at_point(spec, point).unitary
        verdict = certify.certify_sign(t, op, c, budget)
        statuses = [verdict.status]
        results = {"verdict": {"op": "certify.certify_sign",
                               "tol_class": "strictness_margin_1e-9",
                               **dataclasses.asdict(verdict)}}
        work = {"points": 1, "samples": budget.samples, "starts": budget.starts}
        inputs["point"] = point
    report = make_report("certify", args.seed, inputs, results, work)
    emit(report, args.out)
    return _fail_exit(args, statuses)


def cmd_schwarz(args) -> int:
    g = resolve_metric(args.g, args)
    h = resolve_metric(args.h, args)
    f = resolve_map(args.map, g.n)
    if f.m != g.n:
        raise ValueError(f"map domain dimension {f.m} does not match "
                         f"the source metric dimension {g.n}")
    if f.n_target != h.n:
        raise ValueError(f"map target dimension {f.n_target} does not match "
                         f"the target metric dimension {h.n}")
    if args.point:
        points = [parse_point(args.point, g.n)]
    else:
        points = list(metric.ball_points(g.n, args.radius, args.points,
                                         seed=args.seed))
    residuals = [schwarz.bochner_residual(g, h, f, p, step=args.step,
                                          tol=args.tol_fd) for p in points]
    bounds = SchwarzBounds(lam=args.lam, mu=args.mu, kappa=args.kappa)
    budget = Budget(samples=args.samples, starts=args.starts, seed=args.seed)
    ineq = schwarz.schwarz_inequality_report(g, h, f, points, bounds,
                                             budget=budget, step=args.step)
    results = {
        "bochner": {"op": "schwarz.bochner_residual",
                    "tol_class": f"finite_difference_{args.tol_fd:g}",
                    "step": args.step, "residuals": residuals,
                    "max_residual": max(residuals)},
        "inequalities": {"op": "schwarz.schwarz_inequality_report",
                         "tol_class": "finite_difference_1e-4",
                         "bounds": ineq.bounds,
                         "rank": ineq.bounds.r,
                         "hypotheses_verified_everywhere":
                             ineq.hypotheses_verified_everywhere,
                         "notices": ineq.notices,
                         "points": ineq.points},
    }
    if args.sup_bound:
        sup = schwarz.sup_bound_check(g, h, f, points, bounds)
        results["sup_bound"] = {"op": "schwarz.sup_bound_check",
                                "tol_class": "strictness_margin_1e-9",
                                **dataclasses.asdict(sup)}
    work = {"points": len(points),
            "stencil_evals_per_point": (2 * g.n) ** 2 * 2 + 4 * g.n + 1}
    report = make_report("schwarz", args.seed,
                         {"g": args.g, "h": args.h, "map": args.map,
                          "lam": args.lam, "mu": args.mu, "kappa": args.kappa,
                          "radius": args.radius, "points": len(points)},
                         results, work)
    emit(report, args.out)
    return 0


def cmd_mc(args) -> int:
    if args.which == "fs-moment":
        idx = [int(x) for x in args.idx.split(",")]
        if len(idx) != 4:
            raise ValueError("--idx needs four comma-separated indices")
        est = sampling.fs_moment(args.n, *idx, count=args.samples,
                                 seed=args.seed)
        results = {"estimate": {"op": "sampling.fs_moment",
                                "tol_class": "three_sigma_floor_1e-4",
                                "indices": idx, "n": args.n,
                                **dataclasses.asdict(est),
                                "gate": est.gate,
                                "within_gate": est.within_gate}}
        inputs = {"subcommand": "fs-moment", "n": args.n, "idx": args.idx,
                  "samples": args.samples}
    else:
        spec = resolve_metric(args.metric, args)
        point = parse_point(args.point, spec.n) if args.point \
            else np.zeros(spec.n, complex)
        t = curvature.at_point(spec, point).unitary
        if args.b == "uniform":
            b = np.full(spec.n, 1.0 / np.sqrt(spec.n))
        else:
            b = np.array([float(x) for x in args.b.split(",")])
        rep = sampling.berger_check(t, b, count=args.samples, seed=args.seed)
        results = {"estimate": {"op": "sampling.berger_check",
                                "tol_class": "three_sigma_floor_1e-4",
                                "weights": b, **dataclasses.asdict(rep),
                                "diff_sigma": rep.diff_sigma,
                                "gate": rep.gate, "agrees": rep.agrees}}
        inputs = {"subcommand": "berger", "metric": args.metric,
                  "b": args.b, "samples": args.samples}
    report = make_report("mc", args.seed, inputs, results,
                         {"samples": args.samples})
    emit(report, args.out)
    return 0


# --------------------------------------------------------------------------
# Parser assembly


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="report path (default stdout)")


def _add_metric_params(p: argparse.ArgumentParser) -> None:
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--b", type=float, default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--n1", type=int, default=None)
    p.add_argument("--n2", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="rbcurv",
        description=("Chern curvature data and real bisectional curvature "
                     "certification for explicit Hermitian metrics"))
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="curvature data of a metric at a point")
    p.add_argument("metric")
    p.add_argument("--point", default=None)
    p.add_argument("--directions", type=int, default=0)
    p.add_argument("--direction", default=None)
    p.add_argument("--tol-symmetry", dest="tol_symmetry", type=float,
                   default=linalg.TOL_SYMMETRY)
    _add_metric_params(p)
    _add_common(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("certify", help="certify a sign condition on B")
    p.add_argument("metric")
    p.add_argument("--cond", required=True)
    p.add_argument("--point", default=None)
    p.add_argument("--radius", type=float, default=None)
    p.add_argument("--points", type=int, default=100)
    p.add_argument("--grid", action="store_true")
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--starts", type=int, default=32)
    p.add_argument("--opt-tol", dest="opt_tol", type=float, default=1e-10)
    p.add_argument("--fail-on", dest="fail_on",
                   choices=["none", "refuted", "inconclusive"], default="none")
    _add_metric_params(p)
    _add_common(p)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("schwarz", help="Schwarz identity and inequality checks")
    p.add_argument("g")
    p.add_argument("h")
    p.add_argument("map")
    p.add_argument("--point", default=None)
    p.add_argument("--radius", type=float, default=0.05)
    p.add_argument("--points", type=int, default=10)
    p.add_argument("--step", type=float, default=1e-3)
    p.add_argument("--lam", type=float, default=0.0)
    p.add_argument("--mu", type=float, default=0.0)
    p.add_argument("--kappa", type=float, default=0.0)
    p.add_argument("--sup-bound", dest="sup_bound", action="store_true")
    p.add_argument("--samples", type=int, default=2000)
    p.add_argument("--starts", type=int, default=4)
    p.add_argument("--tol-fd", dest="tol_fd", type=float, default=linalg.TOL_FD)
    _add_metric_params(p)
    _add_common(p)
    p.set_defaults(func=cmd_schwarz)

    p = sub.add_parser("mc", help="Monte Carlo moment and averaging checks")
    p.add_argument("which", choices=["fs-moment", "berger"])
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--idx", default="1,1,2,2")
    p.add_argument("--metric", default="example_2_2")
    p.add_argument("--point", default=None)
    p.add_argument("--b", default="uniform",
                   help="berger weights: 'uniform' or comma-separated floats")
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--metric-b", dest="metric_b", type=float, default=None)
    p.add_argument("--n1", type=int, default=None)
    p.add_argument("--n2", type=int, default=None)
    p.add_argument("--samples", type=int, default=1_000_000)
    _add_common(p)
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser("catalog", help="list or show catalog metrics")
    p.add_argument("action", choices=["list", "show"])
    p.add_argument("name", nargs="?", default=None)
    _add_common(p)
    p.set_defaults(func=cmd_catalog)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.command == "catalog" and args.action == "show" and not args.name:
        print("error: catalog show needs a name", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except _INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())
