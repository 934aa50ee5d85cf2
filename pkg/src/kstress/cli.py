"""Command-line driver.

Every subcommand prints a short human summary on stdout and, with
``--output``, writes a JSON result document.  Exit codes: 0 success,
2 invalid input, 3 infeasible (no positive stress), 4 numerical ambiguity.
The default tolerance can be set through the ``KSTRESS_TOL`` environment
variable.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

import numpy as np

from . import generators as gen
from . import io
from .complex import (
    f_g_h, homology_rank_mod2, is_cycle, is_k_primitive, manifold_report, orient,
)
from .errors import KStressError, NonOrientable, NumericalAmbiguity
from .geometry import OrientedFacetCycle, lemma_residual, minkowski_residual, validate_flatness
from .reciprocal import build_reciprocal, perpendicularity_defect
from .stress import find_positive_stress, is_statically_rigid, stress_space, verify_stress
from .trace import jacobian_rank, trace

EXIT_VALIDATION, EXIT_INFEASIBLE, EXIT_AMBIGUOUS = 2, 3, 4


def default_tol() -> float:
    try:
        return float(os.environ.get("KSTRESS_TOL", "1e-8"))
    except ValueError:
        return 1e-8


class CliFailure(Exception):
    def __init__(self, code: int, message: str, result: dict | None = None):
        super().__init__(message)
        self.code = code
        self.result = result


# ------------------------------------------------------------------ helpers
def _load(args) -> io.ComplexDocument:
    if not args.input:
        raise CliFailure(EXIT_VALIDATION, "--input is required")
    return io.load(args.input)


def _exact(args, doc) -> bool:
    if args.mode == "exact":
        return True
    if args.mode == "float":
        return False
    return doc.complex.simplicial


def _orientation(doc):
    return doc.orientation if doc.orientation is not None else orient(doc.complex)


def _stress(args, doc, level: int | None = None):
    K, R = doc.complex, doc.realization
    if args.stress:
        if args.stress not in doc.stresses:
            names = ", ".join(sorted(doc.stresses)) or "none"
            raise CliFailure(EXIT_VALIDATION, f"no stress named {args.stress!r} (available: {names})")
        s = doc.stresses[args.stress]
        if level is not None and s.level != level:
            raise CliFailure(EXIT_VALIDATION, f"stress {args.stress!r} has level {s.level}, expected {level}")
        return s
    level = K.dim if level is None else level
    sp = stress_space(K, R, level, exact=_exact(args, doc))
    if sp.dim == 0:
        raise CliFailure(EXIT_VALIDATION, f"the level-{level} stress space is zero-dimensional; nothing to use")
    return sp.basis[min(args.basis_index, sp.dim - 1)]


def _stress_json(s) -> dict:
    return io.stress_to_jsonable(s)


# ----------------------------------------------------------------- commands
def cmd_check(args) -> dict:
    doc = _load(args)
    K, R = doc.complex, doc.realization
    flat = validate_flatness(K, R, strict=False)
    man = manifold_report(K)
    try:
        O = orient(K)
        orientable, cycle = True, is_cycle(K, O)
    except NonOrientable:
        orientable, cycle = False, False
    hom = [homology_rank_mod2(K, j) for j in range(K.dim + 1)]
    res = {
        "flat": flat.ok,
        "bad_cells": [[list(c), r] for c, r in flat.bad],
        "manifold": man.is_manifold,
        "closed": man.closed,
        "manifold_problems": [[list(c), why] for c, why in man.bad_cells],
        "orientable": orientable,
        "orientation_is_cycle": cycle,
        "homology_mod2": hom,
        "f_vector": list(K.f_vector().counts),
    }
    print(f"flat: {flat.ok}  manifold: {man.is_manifold}  closed: {man.closed}  orientable: {orientable}")
    print(f"f-vector: {res['f_vector']}  mod-2 Betti numbers: {hom}")
    if not flat.ok or not man.is_manifold:
        raise CliFailure(EXIT_VALIDATION, "complex failed validation", res)
    return res


def cmd_dim(args) -> dict:
    doc = _load(args)
    sp = stress_space(doc.complex, doc.realization, args.k, exact=_exact(args, doc))
    res = {"level": args.k, "dimension": sp.dim, "exact": sp.exact}
    if sp.rank_info is not None:
        res["gap"] = float(sp.rank_info.gap)
        res["ambiguous"] = sp.ambiguous
        print(f"singular-value gap {sp.rank_info.gap:.3e}", file=sys.stderr)
    print(sp.dim)
    if sp.ambiguous:
        raise CliFailure(EXIT_AMBIGUOUS, "rank decision is ambiguous (small singular-value gap)", res)
    return res


def cmd_basis(args) -> dict:
    doc = _load(args)
    sp = stress_space(doc.complex, doc.realization, args.k, exact=_exact(args, doc))
    for i, b in enumerate(sp.basis):
        doc.stresses[f"basis{args.k}_{i}"] = b
    res = {"level": args.k, "dimension": sp.dim, "basis": [_stress_json(b) for b in sp.basis]}
    print(f"level-{args.k} stresses: dimension {sp.dim}" + (f", stored as basis{args.k}_0.." if sp.dim else ""))
    if args.store:
        io.save(args.store, doc)
    if sp.ambiguous:
        raise CliFailure(EXIT_AMBIGUOUS, "rank decision is ambiguous (small singular-value gap)", res)
    return res


def cmd_verify(args) -> dict:
    doc = _load(args)
    s = _stress(args, doc, args.k)
    rep = verify_stress(s, doc.complex, doc.realization)
    ok = rep.ok(args.tol)
    res = {"level": s.level, "max_relative": rep.max_relative, "exact_zero": rep.exact_zero, "ok": ok}
    print(f"level {s.level}: max relative residual {rep.max_relative:.3e}" +
          ("" if rep.exact_zero is None else f", exactly zero: {rep.exact_zero}") + f"  -> {'ok' if ok else 'FAIL'}")
    if not ok:
        raise CliFailure(EXIT_VALIDATION, "not a stress at the requested tolerance", res)
    return res


def cmd_reciprocal(args) -> dict:
    doc = _load(args)
    K, R = doc.complex, doc.realization
    s = _stress(args, doc, K.dim)
    rec = build_reciprocal(s, K, R, _orientation(doc), exact=s.exact)
    labels = rec.labels
    res = {
        "points": {str(D): [str(x) if rec.exact else float(x) for x in rec.points[D]] for D in rec.cells},
        "edges": [[F, D1, D2] for F, D1, D2 in rec.edges],
        "labels": {str(F): lab for F, lab in labels.items()},
        "perpendicularity_defect": perpendicularity_defect(rec, K, R),
        "polyline": [[[float(x) for x in rec.points[D1]], [float(x) for x in rec.points[D2]]] for _, D1, D2 in rec.edges],
    }
    counts = {lab: list(labels.values()).count(lab) for lab in ("proper", "improper", "degenerate")}
    print(f"reciprocal: {len(rec.cells)} points, {len(rec.edges)} edges, {counts}")
    print(f"perpendicularity defect {res['perpendicularity_defect']:.3e}")
    return res


def cmd_trace(args) -> dict:
    doc = _load(args)
    K, R = doc.complex, doc.realization
    s = _stress(args, doc, K.dim)
    O = doc.orientation
    r = trace(s, K, R, args.k, O, flags=args.flags, barycenters=args.barycenters, seed=args.seed)
    ok = r.residuals.ok(args.tol)
    res = {
        "level": args.k,
        "stress": _stress_json(r.stress),
        "max_relative_residual": r.residuals.max_relative,
        "exact_zero": r.residuals.exact_zero,
        "ok": ok,
        "provenance": r.provenance,
    }
    print(f"trace to level {args.k}: {len(r.stress.cells)} coefficients, "
          f"max relative residual {r.residuals.max_relative:.3e}" +
          ("" if r.residuals.exact_zero is None else f", exactly zero: {r.residuals.exact_zero}"))
    if args.store:
        doc.stresses[f"trace{args.k}"] = r.stress
        io.save(args.store, doc)
    if not ok:
        raise CliFailure(EXIT_VALIDATION, "trace output fails equilibrium", res)
    return res


def cmd_minkowski(args) -> dict:
    doc = _load(args)
    K, R = doc.complex, doc.realization
    res: dict = {}
    if R.ambient_dim == K.dim:
        vals = [minkowski_residual(K, R, D) for D in K.cells(K.dim)]
        res["cell_residuals"] = vals
        res["max"] = max(vals)
        print(f"facet-normal sums of {len(vals)} top cells: max relative residual {res['max']:.3e}")
    elif R.ambient_dim == K.dim + 1 and K.simplicial and K.closed:
        O = _orientation(doc)
        simps = tuple(tuple(sorted(K.verts[K.dim][D])) for D in K.cells(K.dim))
        cyc = OrientedFacetCycle(R.coords, simps, tuple(O.signs))
        val = lemma_residual(cyc, np.random.default_rng(args.seed))
        res["max"] = val
        print(f"oriented closed hypersurface: relative residual {val:.3e}")
    else:
        raise CliFailure(EXIT_VALIDATION, "minkowski needs top cells in R^d or a closed simplicial hypersurface in R^(d+1)")
    if res["max"] > max(args.tol, 1e-9) * 10:
        raise CliFailure(EXIT_VALIDATION, "identity violated", res)
    return res


def cmd_spiderweb(args) -> dict:
    doc = _load(args)
    K, R = doc.complex, doc.realization
    r = find_positive_stress(K, R, args.k)
    res = {"feasible": r.feasible, "margin": r.margin}
    if r.feasible:
        res["stress"] = _stress_json(r.stress)
        print(f"positive stress found on {len(r.stress.cells)} cells (min coefficient {r.stress.weighted.min():.3e})")
        return res
    res["certificate"] = [float(x) for x in r.certificate]
    res["certificate_residual"] = r.certificate_residual
    print(f"no positive stress; certificate residual {r.certificate_residual:.3e}")
    raise CliFailure(EXIT_INFEASIBLE, "no strictly positive stress exists", res)


def cmd_jacobian(args) -> dict:
    doc = _load(args)
    K, R = doc.complex, doc.realization
    reports = []
    for i in range(args.samples):
        rep = jacobian_rank(K, R, args.k, O=doc.orientation, seed=args.seed + i)
        reports.append({
            "rank": rep.rank, "max_possible": rep.max_possible, "gap": rep.gap,
            "singular_values": [float(x) for x in rep.singular_values],
            "richardson_error": rep.richardson_error, "columns_are_stresses": rep.columns_are_stresses,
        })
        print(f"sample {i}: rank {rep.rank} (max possible {rep.max_possible}, "
              f"level-{K.dim} dim {rep.domain_dim}, level-{args.k} dim {rep.target_dim}), gap {rep.gap:.3e}")
    res = {"samples": reports}
    if any(r["gap"] < 10 for r in reports):
        raise CliFailure(EXIT_AMBIGUOUS, "singular-value gap too small to read the rank", res)
    return res


def cmd_fvector(args) -> dict:
    doc = _load(args)
    K = doc.complex
    f, g, h = f_g_h(K, args.ambient)
    res = {"f": list(f.values), "g": g, "h": h,
           "primitive": [is_k_primitive(K, j) for j in range(K.dim + 1)]}
    print(f"f (from f_-1): {list(f.values)}")
    print(f"g: {g}")
    print(f"h: {h}")
    if args.rigidity:
        rr = is_statically_rigid(K, doc.realization, exact=_exact(args, doc))
        res["rigidity"] = {"rigid": rr.rigid, "rank": rr.rank, "expected": rr.expected}
        print(f"1-skeleton statically rigid: {rr.rigid} (rank {rr.rank} of {rr.expected})")
    return res


def cmd_gen(args) -> dict:
    fam = args.family
    seed = args.seed
    if fam == "cross-polytope":
        doc = gen.gen_cross_polytope_boundary(args.n, args.ambient, seed, args.denominator)
    elif fam == "schlegel-simplex":
        doc = gen.gen_schlegel_simplex(args.n, closed=not args.open)
    elif fam in ("octahedron", "icosahedron", "torus", "rp2"):
        doc = gen.FAMILIES[fam](args.ambient or (3 if fam in ("torus", "rp2") else 2), seed, args.denominator)
    elif fam == "stacked-sphere":
        doc = gen.gen_stacked_sphere(args.n, args.ambient or 2, seed, args.denominator)
    elif fam == "lifted-window":
        doc = gen.gen_lifted_window(args.n, args.ambient or 2, seed, args.denominator or 100, args.heights)
    elif fam == "lifted":
        pts = json.loads(args.points)
        hs = json.loads(args.heights_list) if args.heights_list else [
            str(sum(Fraction(x) ** 2 for x in p)) for p in pts
        ]
        doc = gen.gen_lifted_projection(pts, hs, args.lift_mode, seed=seed)
    elif fam == "twisted-triangulation":
        doc = gen.gen_twisted_triangulation(args.twist)
    elif fam == "convex-polytope":
        doc = gen.gen_convex_polytope(args.n, args.ambient or 3, seed, args.kind, args.denominator)
    else:
        raise CliFailure(EXIT_VALIDATION, f"unknown family {fam!r}")
    K = doc.complex
    print(f"{fam}: dimension {K.dim} in R^{doc.realization.ambient_dim}, f-vector {list(K.f_vector().counts)}")
    if args.output:
        io.save(args.output, doc)
        return {}
    sys.stdout.write(io.dumps(doc))
    return {}


# ------------------------------------------------------------------ parser
def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", help="complex document (.json) or simplicial mesh (.simp)")
    common.add_argument("--mode", choices=("exact", "float", "auto"), default="auto",
                        help="arithmetic; auto = exact for simplicial complexes")
    common.add_argument("--tol", type=float, default=default_tol(), help="residual tolerance (env KSTRESS_TOL)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--output", help="write the JSON result document here")

    p = argparse.ArgumentParser(prog="kstress", description="k-stresses, reciprocals and trace maps")
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("check", parents=[common], help="flatness, manifold, orientability and homology report")
    for name, helptext in (("dim", "dimension of the level-k stress space"), ("basis", "basis of the level-k stress space")):
        q = sub.add_parser(name, parents=[common], help=helptext)
        q.add_argument("--k", type=int, required=True)
        if name == "basis":
            q.add_argument("--store", help="save the input document with the basis added")
    q = sub.add_parser("verify", parents=[common], help="equilibrium residuals of a stored stress")
    q.add_argument("--stress", required=True)
    q.add_argument("--k", type=int)
    q.add_argument("--basis-index", type=int, default=0)
    q = sub.add_parser("reciprocal", parents=[common], help="reciprocal diagram of a top-level stress")
    q.add_argument("--stress")
    q.add_argument("--basis-index", type=int, default=0)
    q = sub.add_parser("trace", parents=[common], help="level-k trace of a top-level stress")
    q.add_argument("--k", type=int, required=True)
    q.add_argument("--stress", help="stored stress name (default: a basis element of the top stress space)")
    q.add_argument("--basis-index", type=int, default=0)
    q.add_argument("--flags", choices=("first", "random"), default="first")
    q.add_argument("--barycenters", choices=("mean", "random"), default="mean")
    q.add_argument("--store", help="save the input document with the trace added as trace<k>")
    sub.add_parser("minkowski", parents=[common], help="facet-normal sum identities")
    q = sub.add_parser("spiderweb", parents=[common], help="search for a strictly positive stress")
    q.add_argument("--k", type=int, default=2)
    q = sub.add_parser("jacobian", parents=[common], help="numerical Jacobian rank of the trace")
    q.add_argument("--k", type=int, required=True)
    q.add_argument("--samples", type=int, default=1)
    q = sub.add_parser("fvector", parents=[common], help="f, g and h numbers")
    q.add_argument("--ambient", type=int, required=True)
    q.add_argument("--rigidity", action="store_true", help="also test static rigidity of the 1-skeleton")
    q = sub.add_parser("gen", parents=[common], help="generate an example complex")
    q.add_argument("family", choices=sorted(list(gen.FAMILIES) + ["lifted"]))
    q.add_argument("--n", type=int, default=4)
    q.add_argument("--ambient", type=int)
    q.add_argument("--denominator", type=int, default=1000)
    q.add_argument("--open", action="store_true", help="Schlegel diagram without the outer cell")
    q.add_argument("--kind", default="sphere", help="convex-polytope kind: sphere, lattice, prism")
    q.add_argument("--heights", default="paraboloid", help="lifted-window heights: paraboloid or convex")
    q.add_argument("--points", help="lifted: JSON list of points")
    q.add_argument("--heights-list", help="lifted: JSON list of heights (default |x|^2)")
    q.add_argument("--lift-mode", choices=("lower", "upper", "full"), default="lower")
    q.add_argument("--twist", type=int, default=1)
    return p


COMMANDS = {
    "check": cmd_check, "dim": cmd_dim, "basis": cmd_basis, "verify": cmd_verify,
    "reciprocal": cmd_reciprocal, "trace": cmd_trace, "minkowski": cmd_minkowski,
    "spiderweb": cmd_spiderweb, "jacobian": cmd_jacobian, "fvector": cmd_fvector, "gen": cmd_gen,
}


def _write_result(args, command: str, status: str, result: dict | None, message: str = "") -> None:
    if not args.output or command == "gen":
        return
    doc = {"command": command, "status": status, "result": result or {}}
    if message:
        doc["message"] = message
    io.write_text_atomic(args.output, json.dumps(doc, indent=1, sort_keys=True) + "\n")


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        result = COMMANDS[args.command](args)
    except CliFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        _write_result(args, args.command, "error", exc.result, str(exc))
        return exc.code
    except NumericalAmbiguity as exc:
        print(f"error: {exc}", file=sys.stderr)
        _write_result(args, args.command, "error", None, str(exc))
        return EXIT_AMBIGUOUS
    except (KStressError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        _write_result(args, args.command, "error", None, str(exc))
        return EXIT_VALIDATION
    _write_result(args, args.command, "ok", result)
    return 0


if __name__ == "__main__":
    sys.exit(main())
