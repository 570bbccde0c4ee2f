"""Command-line entry point: ``divpack <command> ...``.

Every command writes ``report.json`` (schema 1, full config embedded) into
``--out``; ``--csv`` adds delimited per-item output and ``--figures`` adds PNGs.
Exit status: 0 success, 2 search miss, 1 error.
"""

from __future__ import annotations

import argparse
import ast
import csv
import datetime as _dt
import json
import math
import operator
import random
import secrets
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .catalog import (VARIANTS, CatalogError, FamilySpec, asymptotic_bounds, build, describe,
                      find_congruence_prime, is_probable_prime, order_discriminant)

SCHEMA = 1
EXIT_OK, EXIT_ERROR, EXIT_MISS = 0, 1, 2


class CLIError(Exception):
    pass


# --------------------------------------------------------------- helpers


def jsonable(obj):
    if isinstance(obj, Fraction):
        return str(obj.numerator) if obj.denominator == 1 else f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    if hasattr(obj, "item") and callable(obj.item):  # numpy scalars
        return obj.item()
    return obj


_INT_OPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
            ast.Pow: operator.pow, ast.BitXor: operator.pow}


def parse_int_expr(text: str) -> int:
    """Integer literal or arithmetic with + - * and ** (or ^), e.g. ``(161*132**2)**264``."""
    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, int):
            return node.value
        if isinstance(node, ast.BinOp) and type(node.op) in _INT_OPS:
            return _INT_OPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub):
            return -ev(node.operand)
        raise CLIError(f"unsupported expression: {text!r}")
    try:
        return ev(ast.parse(text.strip().replace("^", "**"), mode="eval"))
    except SyntaxError as exc:
        raise CLIError(f"cannot parse integer expression {text!r}") from exc


def family_from(args) -> FamilySpec:
    m = args.m
    if m is None:
        m = 1 if args.family in ("hurwitz", "hurwitz-rank", "cyclo-quat") else None
    if m is None:
        raise CLIError(f"--m is required for {args.family}")
    return FamilySpec(args.family, m, getattr(args, "rank", None))


def config_of(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("func",)}


class Report:
    def __init__(self, args):
        self.args = args
        self.out = Path(args.out)
        self.out.mkdir(parents=True, exist_ok=True)
        self.files: list[str] = []

    def path(self, name: str) -> Path:
        p = self.out / name
        self.files.append(str(p))
        return p

    def write_csv(self, name: str, rows: list[dict]) -> None:
        if not rows:
            return
        with self.path(name).open("w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]))
            w.writeheader()
            for row in rows:
                w.writerow(jsonable(row))

    def finish(self, command: str, result: dict) -> dict:
        payload = {
            "schema": SCHEMA,
            "version": __version__,
            "command": command,
            "config": config_of(self.args),
            "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
            "result": result,
            "files": sorted(self.files),
        }
        payload = jsonable(payload)
        (self.out / "report.json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        print(json.dumps(payload["result"], sort_keys=True, indent=2) if self.args.verbose
              else json.dumps({"command": command, "report": str(self.out / "report.json")}))
        return payload


def _seed(args) -> int:
    if args.seed is None:
        args.seed = secrets.randbits(32)
    return args.seed


# --------------------------------------------------------------- commands


def cmd_family_list(args) -> int:
    rep = Report(args)
    rows = [{"family": v, "needs_m": v in ("cyclotomic", "cyclo-quat", "dihedral-quat")} for v in VARIANTS]
    rep.finish("family list", {"families": rows})
    return EXIT_OK


def cmd_family_info(args) -> int:
    rep = Report(args)
    rep.finish("family info", describe(family_from(args)))
    return EXIT_OK


def cmd_prime_find(args) -> int:
    rep = Report(args)
    if args.modulus is not None:
        lower = parse_int_expr(args.lower)
        p = find_congruence_prime(args.modulus, lower)
        res = {
            "modulus": args.modulus,
            "p": str(p),
            "offset_from_lower": p - lower,
            "digits": len(str(p)),
            "congruent_to_one": (p - 1) % args.modulus == 0,
            "probable_prime": is_probable_prime(p),
        }
    else:
        from .residue import build_reduction, find_split_prime
        spec = family_from(args)
        sp = find_split_prime(spec, args.min_bound)
        smap = build_reduction(spec, sp.p)
        res = {"family": spec.tag, "p": sp.p, "root": smap.root, "images": smap.to_json()["images"]}
    rep.finish("prime-find", res)
    return EXIT_OK


def cmd_audit(args) -> int:
    from .codes import CodeParams, balancedness_audit
    rep = Report(args)
    spec = family_from(args)
    fam = build(spec)
    n = fam.order.n
    if args.check == "balancedness":
        res = balancedness_audit(CodeParams(n, args.t, args.k, args.prime))
        ok = res["uniform"] and res["matches_bijection"]
    elif args.check == "det":
        from .residue import build_reduction, det_compat_audit
        res = det_compat_audit(build_reduction(fam, args.prime), args.samples, random.Random(_seed(args)))
        ok = not res["violations"]
    elif args.check == "bad-point":
        res = bad_point_audit(fam, args.prime, args.radius_sq)
        ok = res["violations"] == 0
    else:
        res = symmetry_audit(fam, args.t, args.k, args.prime, random.Random(_seed(args)))
        ok = res["g0_invariant"] and not res["non_multiples"]
    res["passed"] = ok
    rep.finish("audit", res)
    return EXIT_OK if ok else EXIT_ERROR


def bad_point_audit(fam, p: int, radius_sq) -> dict:
    """Enumerate O up to ``radius_sq`` and check every point with singular reduction."""
    from . import _exact
    from .lattice import bad_point_bound, order_lattice, short_vectors, unit_form
    from .residue import build_reduction
    a = unit_form(fam.order)
    inst = order_lattice(fam.order, 1, a)
    smap = build_reduction(fam, p)
    bound = bad_point_bound(fam.order, a, p)
    singular = []
    for coeffs, nrm in short_vectors(inst, radius_sq, half=False):
        mat = smap.reduce(inst.to_ambient(coeffs))
        if _exact.rank_mod(mat.tolist(), p) < smap.n:
            singular.append((coeffs, nrm))
    min_sq = min((n for _, n in singular), default=None)
    violations = sum(1 for _, n in singular if n < bound ** 2 * (1 - 1e-12))
    return {
        "p": p, "radius_sq": radius_sq, "bound": bound, "bound_sq": bound ** 2,
        "singular_points": len(singular), "min_singular_norm_sq": min_sq,
        "attained": min_sq is not None and abs(min_sq - bound ** 2) < 1e-9,
        "witness": list(inst.to_ambient(next(c for c, n in singular if n == min_sq))) if singular else None,
        "violations": violations,
    }


def symmetry_audit(fam, t: int, k: int, p: int, rng: random.Random) -> dict:
    from .algebra import build_invariant_form
    from .codes import CodeParams, sample_code
    from .lattice import g0_invariant, lift_code, primitive_counts, svp
    from .residue import build_reduction
    a = build_invariant_form(fam.group)
    code = sample_code(CodeParams(fam.order.n, t, k, p), rng)
    inst = lift_code(build_reduction(fam, p), code, a, fam.g0_order)
    m = svp(inst).min_sq
    radii = [m, 2 * m, 3 * m]
    counts = primitive_counts(inst, radii)
    return {
        "code": code.to_json(), "g0_order": fam.g0_order, "g0_invariant": g0_invariant(inst, fam.group),
        "primitive_counts": counts,
        "non_multiples": [r for r, c in counts.items() if c % fam.g0_order],
    }


def cmd_mc_average(args) -> int:
    from .algebra import build_invariant_form
    from .search import TestFunction, ball_radius, mc_average, order_power_volume, zeta
    rep = Report(args)
    spec = family_from(args)
    fam = build(spec)
    a = build_invariant_form(fam.group)
    d = fam.order.dim_total * args.t
    vol = order_power_volume(a, args.t)
    if args.radius is not None:
        r = args.radius
    else:
        # choose r so that integral(f) / (zeta(d) vol) equals the requested target
        scale = 1.0 if args.function == "indicator" else math.e * (1 - math.exp(-args.t)) / d
        r = ball_radius(args.target * zeta(d) * vol / scale, d)
    f = TestFunction(args.function, r, d, args.t)
    est = mc_average(fam, args.k, args.t, args.prime, f, args.samples, random.Random(_seed(args)), a,
                     workers=args.workers)
    res = {"family": spec.tag, "p": args.prime, "t": args.t, "k": args.k, "radius": r, **est.to_json()}
    if args.csv:
        rep.write_csv("percode.csv", [{"code": i, "value": v} for i, v in enumerate(est.values)])
    if args.figures:
        from .plotting import mc_values
        mc_values(est.values, est.target, rep.path("mc_values.png"), f"{spec.tag} p={args.prime}")
    rep.finish("mc-average", res)
    return EXIT_OK


def cmd_search(args) -> int:
    from .lattice import write_lattice
    from .search import CodeRecord, density_search
    rep = Report(args)
    spec = family_from(args)
    seed = _seed(args)
    start, prior = 0, []
    ckpt = Path(args.checkpoint) if args.checkpoint else None
    if args.resume and ckpt and ckpt.exists():
        state = json.loads(ckpt.read_text())
        if state.get("config_key") != _ckpt_key(args):
            raise CLIError("checkpoint was written for a different configuration")
        prior = [CodeRecord.from_row(r) for r in state["records"]]
        start = state["next_index"]

    def progress(records):
        rows = [r.to_row() for r in prior + records]
        nxt = max((r["index"] for r in rows), default=start - 1) + 1
        ckpt.write_text(json.dumps({"config_key": _ckpt_key(args), "records": rows,
                                    "next_index": nxt}))

    if ckpt is not None and args.sampling != "exhaustive":
        raise CLIError("checkpointing is only supported for exhaustive scans")
    res = density_search(spec, args.t, args.k, args.prime, mode=args.mode, sampling=args.sampling,
                         budget=args.budget, seed=seed, eps=args.epsilon,
                         workers=args.workers, start=start, prior=prior,
                         progress=progress if ckpt else None)
    out = res.to_json()
    out["hits"] = sum(1 for r in res.records if r.hit)
    if res.best_instance is not None:
        write_lattice(rep.path("lattice.txt"), res.best_instance, spec.to_json())
    if args.csv:
        rep.write_csv("percode.csv", [r.to_row() for r in res.records])
    if args.figures and res.records:
        from .plotting import search_histogram
        search_histogram([r.key for r in res.records], res.target_density,
                         rep.path("densities.png"), f"{spec.tag} t={args.t} k={args.k} p={args.prime}")
    if ckpt is not None:
        prior = []
        progress(res.records)
    rep.finish("search", out)
    return EXIT_OK if res.hit else EXIT_MISS


def _ckpt_key(args) -> str:
    keys = ("family", "m", "t", "k", "prime", "mode", "sampling", "epsilon", "budget")
    return json.dumps({k: getattr(args, k) for k in keys}, sort_keys=True)


def cmd_bounds(args) -> int:
    from .lattice import order_bounds, unit_form
    rep = Report(args)
    spec = family_from(args)
    ts = list(range(2, args.t + 1)) if args.sweep else [args.t]
    rows = [{"t": t, **asymptotic_bounds(spec, t)} for t in ts]
    res = {"family": spec.tag, "bounds": rows}
    if spec.dim <= 48:
        disc = order_discriminant(spec)["composed"]
        if disc is not None:
            order = build(spec).order
            res["order_bounds_unit_form"] = order_bounds(order, unit_form(order), disc)
    if args.prime is not None:
        from .search import effective_conditions
        res["effective_conditions"] = effective_conditions(spec, args.prime, args.epsilon, args.t,
                                                           args.rank_constant)
    if args.csv:
        rep.write_csv("bounds.csv", rows)
    if args.figures:
        from .plotting import bounds_curves
        bounds_curves(rows, rep.path("bounds.png"), spec.tag)
    rep.finish("bounds", res)
    return EXIT_OK


def cmd_verify(args) -> int:
    """Quick structural checks for one family: bounds, reductions, frames."""
    from .aminima import RealAlgebra, a_gram_schmidt, orthonormality_residual
    from .lattice import (covering_radius_sample, order_bounds, order_lattice, packing_density,
                          unit_form)
    from .residue import build_reduction, det_compat_audit, find_split_prime
    import numpy as np
    rep = Report(args)
    spec = family_from(args)
    fam = build(spec)
    rng = random.Random(_seed(args))
    checks = {}
    a = unit_form(fam.order)
    inst = order_lattice(fam.order, 1, a, fam.g0_order)
    dens = packing_density(inst)
    checks["order_density"] = {"lambda1_sq": dens.lambda1_sq, "covolume_sq": dens.covolume_sq,
                               "density": dens.density, "passed": True}
    p = find_split_prime(spec, args.min_bound).p
    det = det_compat_audit(build_reduction(fam, p), args.samples, rng)
    checks["det_compat"] = {"p": p, "violations": len(det["violations"]), "passed": not det["violations"]}
    bad = bad_point_audit(fam, p, args.radius_sq if args.radius_sq else 4 * fam.order.dim_total * p)
    checks["bad_point"] = {**bad, "passed": bad["violations"] == 0}
    disc = order_discriminant(spec)["composed"]
    if disc is not None:
        ob = order_bounds(fam.order, a, disc)
        checks["lambda1_lower_bound"] = {"bound": ob["lambda1_lb"], "lambda1": math.sqrt(dens.lambda1_sq),
                                         "passed": math.sqrt(dens.lambda1_sq) >= ob["lambda1_lb"] - 1e-12}
        if fam.order.dim_total <= 8:
            cov = covering_radius_sample(inst, args.targets, rng)
            checks["covering"] = {"upper_bound": ob["covering_ub"], **cov,
                                  "passed": cov["lower_bound"] <= ob["covering_ub"]}
    alg = RealAlgebra(fam.order)
    np_rng = np.random.default_rng(rng.getrandbits(32))
    worst = 0.0
    for _ in range(args.pairs):
        vs = [np_rng.normal(size=(2, fam.order.dim_total)) for _ in range(2)]
        worst = max(worst, orthonormality_residual(alg, a_gram_schmidt(alg, vs)))
    checks["gram_schmidt"] = {"pairs": args.pairs, "max_residual": worst, "passed": worst < 1e-9}
    ok = all(c["passed"] for c in checks.values())
    if args.csv:
        rep.write_csv("checks.csv", [{"check": k, "passed": v["passed"]} for k, v in checks.items()])
    rep.finish("verify", {"family": spec.tag, "checks": checks, "passed": ok})
    return EXIT_OK if ok else EXIT_ERROR


# --------------------------------------------------------------- parser


def _family_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--family", required=True, choices=VARIANTS)
    p.add_argument("--m", type=int, default=None, help="cyclotomic level (cyclotomic, cyclo-quat, dihedral-quat)")
    p.add_argument("--rank", type=int, default=None, help="rank tag for hurwitz-rank")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", default="divpack-out", help="output directory")
    p.add_argument("--csv", action="store_true", help="also write delimited output")
    p.add_argument("--figures", action="store_true", help="also write PNG figures")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("-v", "--verbose", action="store_true", help="print the full result")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="divpack", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    fam = sub.add_parser("family", help="list or describe families")
    fsub = fam.add_subparsers(dest="action", required=True)
    fl = fsub.add_parser("list")
    _common(fl)
    fl.set_defaults(func=cmd_family_list)
    fi = fsub.add_parser("info")
    _family_args(fi)
    _common(fi)
    fi.set_defaults(func=cmd_family_info)

    pf = sub.add_parser("prime-find", help="split prime for a family, or prime = 1 mod M above a bound")
    pf.add_argument("--family", choices=VARIANTS)
    pf.add_argument("--m", type=int, default=None)
    pf.add_argument("--min-bound", type=int, default=3)
    pf.add_argument("--modulus", type=int, default=None)
    pf.add_argument("--lower", default="2", help="integer or expression such as (161*132**2)**264")
    _common(pf)
    pf.set_defaults(func=cmd_prime_find)

    au = sub.add_parser("audit", help="balancedness, nrd/det, bad-point or symmetry audit")
    _family_args(au)
    au.add_argument("--t", type=int, default=1)
    au.add_argument("--k", type=int, default=1)
    au.add_argument("--prime", type=int, required=True)
    au.add_argument("--check", choices=("balancedness", "det", "bad-point", "symmetry"), default="balancedness")
    au.add_argument("--samples", type=int, default=10_000)
    au.add_argument("--radius-sq", type=int, default=48)
    _common(au)
    au.set_defaults(func=cmd_audit)

    mc = sub.add_parser("mc-average", help="average primitive-vector sums over codes")
    _family_args(mc)
    mc.add_argument("--t", type=int, required=True)
    mc.add_argument("--k", type=int, required=True)
    mc.add_argument("--prime", type=int, required=True)
    mc.add_argument("--function", choices=("indicator", "rogers"), default="indicator")
    mc.add_argument("--target", type=float, default=5.0, help="integral(f) / (zeta(d) Vol(O^t))")
    mc.add_argument("--radius", type=float, default=None, help="explicit radius instead of --target")
    mc.add_argument("--samples", type=int, default=None, help="sample this many codes (default: all)")
    mc.add_argument("--workers", type=int, default=None, help="worker processes (default: $DIVPACK_WORKERS or 1)")
    _common(mc)
    mc.set_defaults(func=cmd_mc_average)

    se = sub.add_parser("search", help="density search over lifted codes")
    _family_args(se)
    se.add_argument("--t", type=int, required=True)
    se.add_argument("--k", type=int, required=True)
    se.add_argument("--prime", type=int, required=True)
    se.add_argument("--epsilon", type=float, default=0.01)
    se.add_argument("--mode", choices=("indicator", "rogers"), default="indicator")
    se.add_argument("--sampling", choices=("exhaustive", "sampled"), default="exhaustive")
    se.add_argument("--budget", type=int, default=None)
    se.add_argument("--workers", type=int, default=None, help="worker processes (default: $DIVPACK_WORKERS or 1)")
    se.add_argument("--checkpoint", default=None, help="checkpoint file for exhaustive scans")
    se.add_argument("--resume", action="store_true")
    _common(se)
    se.set_defaults(func=cmd_search)

    bo = sub.add_parser("bounds", help="log2 density targets and order bounds")
    _family_args(bo)
    bo.add_argument("--t", type=int, default=2)
    bo.add_argument("--sweep", action="store_true", help="tabulate t = 2..T")
    bo.add_argument("--prime", type=int, default=None, help="also check the finite-p conditions at this prime")
    bo.add_argument("--epsilon", type=float, default=0.01)
    bo.add_argument("--rank-constant", type=float, default=1.0, help="c in the condition p > c t^2")
    _common(bo)
    bo.set_defaults(func=cmd_bounds)

    ve = sub.add_parser("verify", help="quick structural checks for one family")
    _family_args(ve)
    ve.add_argument("--min-bound", type=int, default=3)
    ve.add_argument("--samples", type=int, default=2000)
    ve.add_argument("--radius-sq", type=int, default=None)
    ve.add_argument("--targets", type=int, default=20_000)
    ve.add_argument("--pairs", type=int, default=200)
    _common(ve)
    ve.set_defaults(func=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CLIError, CatalogError, ValueError, RuntimeError) as exc:
        print(f"divpack: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
