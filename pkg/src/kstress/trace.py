"""Polynomial trace maps from top-level stresses to lower levels.

For a level-d stress s and 1 <= k <= d, the level-k coefficient of a
carrying (k-1)-cell C is the generalized (d-k+1)-volume of the
sub-reciprocal R(C), oriented by a flag in C.  The map has degree d-k+1 in
s.  Dual cells are oriented by the representative of the orientation class
that agrees with the frame of R^d on a reference top cell; with that class
the map at k = d is the identity and convex lifts give positive values.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Sequence

import numpy as np

from .complex import CellComplex, OrientationClass, orient
from .errors import NumericalAmbiguity, ValidationError
from .geometry import Realization, cell_volume_sq, frame_class, realized_orientation
from .linalg import float_rank
from .reciprocal import _Steps, dual_volume_raw, local_reciprocal, mean_barycenters, random_barycenters
from .stress import (
    StressAssignment, StressSpace, VerifyReport, carrying_cells, stress_from_density,
    stress_from_weighted, stress_space, verify_stress,
)


@dataclass
class TraceResult:
    level: int
    stress: StressAssignment
    residuals: VerifyReport | None
    provenance: dict = field(default_factory=dict)


def trace(
    s: StressAssignment,
    K: CellComplex,
    R: Realization,
    k: int,
    O: OrientationClass | None = None,
    flags: str = "first",
    barycenters: str = "mean",
    seed: int | None = None,
    verify: bool = True,
    ref_cell: int | None = None,
) -> TraceResult:
    """Level-k image of the level-d stress ``s``.

    ``flags`` ('first' or 'random') picks the flag orienting each dual cell
    and ``barycenters`` ('mean' or 'random') the virtual barycenters of the
    sub-reciprocals; neither changes the result.  Exact stresses give exact
    output densities (simplicial complexes only).  ``O`` defaults to the
    frame-agreeing class; flipping it multiplies the output by (-1)^(d-k+1).
    """
    d = K.dim
    if R.ambient_dim != d:
        raise ValidationError(f"trace needs a realization in R^{d}, got R^{R.ambient_dim}")
    if s.level != d:
        raise ValidationError(f"trace takes a level-{d} stress, got level {s.level}")
    if not 1 <= k <= d:
        raise ValidationError(f"trace level must be in 1..{d}")
    O_ref = frame_class(K, R, orient(K) if O is None else O, ref_cell)
    O = O_ref if O is None else O
    exact = s.exact
    rng = np.random.default_rng(seed)
    rho = realized_orientation(K, R, O)
    steps = _Steps(s, K, R, rho, exact)
    cells = carrying_cells(K, k)
    c = k - 1
    m = d - c
    values = []
    for C in cells:
        cell = (c, C)
        if exact and not K.is_simplex(cell):
            raise ValidationError("exact trace needs simplicial cells; use a float stress")
        rec = local_reciprocal(s, K, R, cell, O, exact=exact, steps=steps)
        fl_all = K.flags(cell)
        flag = fl_all[0] if flags == "first" else fl_all[int(rng.integers(len(fl_all)))]
        vb = mean_barycenters(rec, K) if barycenters == "mean" else random_barycenters(rec, K, rng)
        raw, A = dual_volume_raw(rec, K, R, cell, flag, vb, O_ref)
        if exact:
            values.append(raw * (c + 1) / (factorial(m) * cell_volume_sq(K, R, cell)))
        else:
            An = np.array(A, dtype=float).reshape(len(A), d)
            g = float(np.linalg.det(An @ An.T)) if len(A) else 1.0
            values.append(raw / (factorial(m) * np.sqrt(g)))
    if exact:
        out = stress_from_density(K, R, k, cells, values)
    else:
        out = stress_from_weighted(K, R, k, cells, values)
    rep = verify_stress(out, K, R) if verify else None
    prov = {"source_level": d, "flags": flags, "barycenters": barycenters, "seed": seed, "ref_cell": ref_cell}
    return TraceResult(k, out, rep, prov)


@dataclass
class HomogeneityReport:
    t: float
    degree: int
    max_relative: float
    exact_equal: bool | None


def homogeneity_check(
    s: StressAssignment, K: CellComplex, R: Realization, k: int, t, O: OrientationClass | None = None
) -> HomogeneityReport:
    """Compare trace(t s) with t^(d-k+1) trace(s) coefficient-wise."""
    deg = K.dim - k + 1
    base = trace(s, K, R, k, O, verify=False).stress
    scaled = trace(s.scaled(t), K, R, k, O, verify=False).stress
    if s.exact:
        tt = Fraction(t) ** deg
        eq = all(a == tt * b for a, b in zip(scaled.density, base.density))
        diff = np.array([float(a - tt * b) for a, b in zip(scaled.density, base.density)])
        ref = np.array([float(tt * b) for b in base.density])
    else:
        tt = float(t) ** deg
        eq = None
        diff = scaled.weighted - tt * base.weighted
        ref = tt * base.weighted
    scale = float(np.max(np.abs(ref))) if len(ref) else 0.0
    rel = float(np.max(np.abs(diff))) / scale if scale else float(np.max(np.abs(diff), initial=0.0))
    return HomogeneityReport(float(t), deg, rel, eq)


def polynomiality_probe(
    s0: StressAssignment, s1: StressAssignment, K: CellComplex, R: Realization, k: int,
    O: OrientationClass | None = None,
) -> float:
    """Fit each coefficient along s0 + t s1 by a polynomial of degree d-k+1.

    The fit uses d-k+2 nodes; the value returned is the largest relative
    interpolation error at d-k+3 further nodes.
    """
    deg = K.dim - k + 1
    fit_t = np.linspace(-1.0, 1.0, deg + 1)
    test_t = np.linspace(-0.9, 1.1, deg + 3) + 0.0173
    def val(t):
        return trace(s0 + s1.scaled(_frac_if(s0, t)), K, R, k, O, verify=False).stress.weighted
    Y = np.array([val(t) for t in fit_t])
    if Y.shape[1] == 0:
        return 0.0
    V = np.vander(fit_t, deg + 1)
    coef = np.linalg.solve(V, Y)
    worst = 0.0
    scale = max(float(np.max(np.abs(Y))), 1e-300)
    for t in test_t:
        pred = np.vander([t], deg + 1) @ coef
        worst = max(worst, float(np.max(np.abs(pred[0] - val(t)))) / scale)
    return worst


def _frac_if(s: StressAssignment, t: float):
    return Fraction(t).limit_denominator(10**6) if s.exact else t


# ------------------------------------------------------------ sign patterns
@dataclass
class SignReport:
    level: int
    interior: dict
    silhouette: dict
    interior_positive: bool
    silhouette_negative: bool
    hypothesis_cells: list
    hypothesis_violations: list
    input_positive_interior: bool


def tension_positivity(
    s: StressAssignment, K: CellComplex, R: Realization, k: int, O: OrientationClass | None = None,
    ref_cell: int | None = None,
) -> SignReport:
    """Sign pattern of trace(s) on interior and silhouette cells.

    A carrying cell is a silhouette cell when its star mixes top cells of
    both realized orientations (the fold of a projected closed surface).
    Negativity on silhouette cells is asserted only where the star has
    exactly d - k + 2 top cells; cells violating that hypothesis are listed.
    Signs are relative to the class agreeing with R^d on ``ref_cell``; for a
    projected closed surface that should be a cell of the lower lid.
    """
    O = frame_class(K, R, orient(K) if O is None else O, ref_cell)
    res = trace(s, K, R, k, O, ref_cell=ref_cell)
    rho = realized_orientation(K, R, O)
    d = K.dim
    interior, silhouette = {}, {}
    hyp, viol = [], []
    for C, w in res.stress.as_dict().items():
        tops = K.top_cofaces((k - 1, C))
        signs = {rho[D] for D in tops}
        if len(signs) == 1:
            interior[C] = w
        else:
            silhouette[C] = w
            (hyp if len(tops) == d - k + 2 else viol).append(C)
    src_rho = {}
    for F, w in s.as_dict().items():
        tops = K.top_cofaces((d - 1, F))
        if len({rho[D] for D in tops}) == 1:
            src_rho[F] = w
    return SignReport(
        level=k,
        interior=interior,
        silhouette=silhouette,
        interior_positive=all(w > 0 for w in interior.values()),
        silhouette_negative=all(silhouette[C] < 0 for C in hyp),
        hypothesis_cells=hyp,
        hypothesis_violations=viol,
        input_positive_interior=all(w > 0 for w in src_rho.values()),
    )


# --------------------------------------------------------------- Jacobian
@dataclass
class JacobianReport:
    rank: int
    singular_values: np.ndarray
    max_possible: int
    gap: float
    richardson_error: float
    domain_dim: int
    target_dim: int
    columns_are_stresses: bool


def jacobian_rank(
    K: CellComplex,
    R: Realization,
    k: int,
    coeffs: Sequence[float] | None = None,
    h: float | None = None,
    O: OrientationClass | None = None,
    space: StressSpace | None = None,
    target: StressSpace | None = None,
    seed: int = 0,
    rtol: float = 1e-8,
) -> JacobianReport:
    """Numerical Jacobian of the level-k trace over a basis of the top-level stresses.

    Central differences with step h and h/2 (Richardson comparison) are
    taken at the base point sum(coeffs[i] * basis[i]).  The rank is read
    from the singular values with cut ``rtol * sigma_max``; ``gap`` is
    sigma_r over the larger of sigma_{r+1} and that cut.
    """
    d = K.dim
    space = stress_space(K, R, d) if space is None else space
    target = stress_space(K, R, k) if target is None else target
    n = space.dim
    if coeffs is None:
        coeffs = np.random.default_rng(seed).standard_normal(n)
    coeffs = np.asarray(coeffs, dtype=float)
    B = space.weighted_matrix()
    cells = space.cells

    def p(x):
        s = stress_from_weighted(K, R, d, cells, B @ x)
        return trace(s, K, R, k, O, verify=False).stress.weighted

    norm = float(np.linalg.norm(coeffs))
    if h is None:
        h = 1e-5 * max(norm, 1.0)

    def jac(step):
        cols = []
        for i in range(n):
            e = np.zeros(n)
            e[i] = step
            cols.append((p(coeffs + e) - p(coeffs - e)) / (2 * step))
        return np.column_stack(cols) if cols else np.zeros((len(target.cells), 0))

    J1 = jac(h)
    J2 = jac(h / 2)
    scale = max(float(np.max(np.abs(J2), initial=0.0)), 1e-300)
    rich = float(np.max(np.abs(J1 - J2), initial=0.0)) / scale
    if scale > 1e-300 and rich > 1e-4:
        raise NumericalAmbiguity(f"Jacobian unstable under step halving (relative change {rich:.2e})")
    info = float_rank(J2, rtol) if J2.size else None
    r = info.rank if info else 0
    sv = info.singular_values if info else np.zeros(0)
    if r == 0:
        gap = float("inf") if not sv.size or sv[0] == 0 else 0.0
    else:
        below = sv[r] if r < sv.size else 0.0
        gap = float(sv[r - 1] / max(below, info.threshold))
    # each column must itself be a level-k stress
    cols_ok = True
    for col in J2.T:
        st = stress_from_weighted(K, R, k, target.cells, col)
        if verify_stress(st, K, R).max_relative > 1e-6:
            cols_ok = False
    return JacobianReport(r, sv, min(n, target.dim), gap, rich, n, target.dim, cols_ok)
