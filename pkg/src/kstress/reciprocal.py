"""Reciprocal diagrams of top-level stresses.

The reciprocal places one point per top cell.  Crossing an internal facet F
from D1 to D2 moves the point by the facet's stress times the normal of F
pointing out of D1, signed by rho(D1), the agreement of the orientation class
with the realized orientation of D1.  With that sign the step read from
either side agrees even where the realization folds over itself, and for an
embedding with a positive class a positive coefficient gives a properly
oriented edge.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Callable, Sequence

import numpy as np

from .complex import CellComplex, CellId, OrientationClass, homology_rank_mod2, orient
from .errors import ClosureFailure, DisconnectedDualGraph, TopologyError, ValidationError
from .geometry import (
    Realization, altitude, barycenter, cell_points, frame_class, inner_unit_normal, rational_normal,
    realized_orientation, sub,
)
from .linalg import det
from .stress import StressAssignment

CLOSURE_RTOL = 1e-9


@dataclass
class Reciprocal:
    cells: tuple[int, ...]
    points: dict
    edges: tuple[tuple[int, int, int], ...]
    base: tuple[int, tuple]
    exact: bool
    labels: dict = field(default_factory=dict)

    def array(self) -> np.ndarray:
        return np.array([[float(x) for x in self.points[D]] for D in self.cells])

    def displacement(self, D: int):
        return sub(self.points[D], self.points[self.base[0]])


class _Steps:
    """Per-facet step vectors for one stress, cached."""

    def __init__(self, s: StressAssignment, K: CellComplex, R: Realization, rho: Sequence[int], exact: bool):
        if s.level != K.dim:
            raise ValidationError(f"reciprocals need a level-{K.dim} stress, got level {s.level}")
        if exact and not s.exact:
            raise ValidationError("exact reciprocal needs an exact stress")
        self.K, self.R, self.rho, self.exact = K, R, rho, exact
        self.coef = dict(zip(s.cells, s.density if exact else s.weighted))
        self._cache: dict = {}

    def out_normal(self, F: int, D: int):
        key = (F, D)
        if key not in self._cache:
            K, R = self.K, self.R
            d = K.dim
            if self.exact:
                nu = rational_normal(cell_points(K, R, (d - 1, F)))
                a = altitude(K, R, F, (d, D))
                if sum(x * y for x, y in zip(nu, a)) > 0:
                    nu = [-x for x in nu]
                self._cache[key] = [x / factorial(d - 1) for x in nu]
            else:
                self._cache[key] = -inner_unit_normal(K, R, F, (d, D))[0]
        return self._cache[key]

    def step(self, F: int, D: int):
        c = self.coef.get(F, 0)
        n = self.out_normal(F, D)
        if self.exact:
            c = Fraction(c) * self.rho[D]
            return [c * x for x in n]
        return (c * self.rho[D]) * n


def _integrate(
    steps: _Steps, cells: Sequence[int], facet_ok: Callable[[int], bool], base_point
) -> Reciprocal:
    K = steps.K
    d = K.dim
    cellset = set(cells)
    root = min(cells)
    pts = {root: list(base_point) if steps.exact else np.asarray(base_point, dtype=float)}
    queue = deque([root])
    tree_edges, cotree = [], []
    seen_facets = set()
    while queue:
        D = queue.popleft()
        for F, E in K.dual_graph[D]:
            if E not in cellset or not facet_ok(F) or F in seen_facets:
                continue
            seen_facets.add(F)
            if E in pts:
                cotree.append((F, D, E))
                continue
            st = steps.step(F, D)
            pts[E] = [a + b for a, b in zip(pts[D], st)] if steps.exact else pts[D] + st
            tree_edges.append((F, D, E))
            queue.append(E)
    if len(pts) != len(cellset):
        raise DisconnectedDualGraph(f"dual graph reaches {len(pts)} of {len(cellset)} cells")
    scale = max((float(np.linalg.norm(np.asarray(steps.step(F, D), dtype=float))) for F, D, _ in tree_edges + cotree), default=0.0)
    for F, D, E in cotree:
        st = steps.step(F, D)
        if steps.exact:
            gap = [a + b - c for a, b, c in zip(pts[D], st, pts[E])]
            if any(gap):
                raise ClosureFailure(f"reciprocal does not close across facet {(d - 1, F)}")
        else:
            gap = pts[D] + st - pts[E]
            if np.linalg.norm(gap) > CLOSURE_RTOL * max(scale, 1e-300) * max(1, len(cells)):
                raise ClosureFailure(
                    f"reciprocal does not close across facet {(d - 1, F)} (gap {np.linalg.norm(gap):.3e})"
                )
    edges = tuple(sorted(tree_edges + cotree))
    return Reciprocal(tuple(sorted(cellset)), pts, edges, (root, tuple(base_point)), steps.exact)


def build_reciprocal(
    s: StressAssignment,
    K: CellComplex,
    R: Realization,
    O: OrientationClass | None = None,
    base_point=None,
    exact: bool | None = None,
    require_trivial_h1: bool = True,
) -> Reciprocal:
    """Global reciprocal of a top-level stress by spanning-tree integration.

    Closure is then checked on every non-tree edge of the dual graph;
    ``ClosureFailure`` signals either an H1 obstruction or an input that is
    not a stress.
    """
    exact = s.exact if exact is None else exact
    if require_trivial_h1 and homology_rank_mod2(K, 1) != 0:
        raise TopologyError("H1(K; Z/2) is nontrivial; a global reciprocal need not exist")
    O = orient(K) if O is None else O
    rho = realized_orientation(K, R, O)
    steps = _Steps(s, K, R, rho, exact)
    if base_point is None:
        base_point = [Fraction(0)] * R.ambient_dim if exact else np.zeros(R.ambient_dim)
    d = K.dim
    rec = _integrate(steps, list(K.cells(d)), lambda F: len(K.cofaces[d - 1][F]) == 2, base_point)
    rec.labels = classify_edges(rec, K, R, O)
    return rec


def local_reciprocal(
    s: StressAssignment,
    K: CellComplex,
    R: Realization,
    cell: CellId,
    O: OrientationClass,
    exact: bool | None = None,
    rho: Sequence[int] | None = None,
    steps: _Steps | None = None,
) -> Reciprocal:
    """Sub-reciprocal R(C): the reciprocal of the star of ``cell``."""
    exact = s.exact if exact is None else exact
    if steps is None:
        rho = realized_orientation(K, R, O) if rho is None else rho
        steps = _Steps(s, K, R, rho, exact)
    d = K.dim
    j, i = cell
    cells = K.top_cofaces(cell)
    inside = {f for jj, f in K.cofaces_all(cell) if jj == d - 1}
    base = [Fraction(0)] * R.ambient_dim if exact else np.zeros(R.ambient_dim)
    return _integrate(steps, cells, lambda F: F in inside and len(K.cofaces[d - 1][F]) == 2, base)


def classify_edges(rec: Reciprocal, K: CellComplex, R: Realization, O: OrientationClass, tol: float = 1e-12) -> dict:
    """Label each reciprocal edge proper, improper or degenerate.

    An edge D1 -> D2 is proper when v(D2) - v(D1) points along the normal of
    the shared facet out of D1 (taken relative to the orientation class).
    """
    d = K.dim
    rho = realized_orientation(K, R, O)
    labels = {}
    for F, D1, D2 in rec.edges:
        v = np.array([float(x) for x in sub(rec.points[D2], rec.points[D1])])
        n = -inner_unit_normal(K, R, F, (d, D1))[0] * rho[D1]
        proj = float(v @ n)
        size = float(np.linalg.norm(v))
        if size <= tol * max(1.0, float(np.abs(rec.array()).max())):
            labels[F] = "degenerate"
        else:
            labels[F] = "proper" if proj > 0 else "improper"
    return labels


def perpendicularity_defect(rec: Reciprocal, K: CellComplex, R: Realization) -> float:
    """Largest |cos| between a reciprocal edge and any edge of its facet."""
    d = K.dim
    worst = 0.0
    for F, D1, D2 in rec.edges:
        v = np.array([float(x) for x in sub(rec.points[D2], rec.points[D1])])
        nv = np.linalg.norm(v)
        if nv == 0:
            continue
        pts = np.array([[float(x) for x in p] for p in cell_points(K, R, (d - 1, F))])
        for e in pts[1:] - pts[0]:
            worst = max(worst, abs(float(v @ e)) / (nv * np.linalg.norm(e)))
    return worst


# ------------------------------------------------------ sub-reciprocal volume
def mean_barycenters(rec: Reciprocal, K: CellComplex) -> Callable[[CellId], list]:
    """Virtual barycenter of R(g): mean of the points of the top cells containing g."""
    exact = rec.exact
    cache: dict = {}

    def vb(g: CellId):
        if g not in cache:
            tops = K.top_cofaces(g)
            pts = [rec.points[D] for D in tops]
            if exact:
                cache[g] = [sum(c) / len(pts) for c in zip(*pts)]
            else:
                cache[g] = list(np.mean(np.asarray(pts, dtype=float), axis=0))
        return cache[g]

    return vb


def random_barycenters(rec: Reciprocal, K: CellComplex, rng: np.random.Generator) -> Callable[[CellId], list]:
    """Virtual barycenters drawn at random inside aff(R(g))."""
    from .geometry import random_affine_point

    exact = rec.exact
    cache: dict = {}

    def vb(g: CellId):
        if g not in cache:
            pts = [rec.points[D] for D in K.top_cofaces(g)]
            cache[g] = random_affine_point(pts, rng, exact) if len(pts) > 1 else list(pts[0])
        return cache[g]

    return vb


def dual_volume_raw(
    rec: Reciprocal,
    K: CellComplex,
    R: Realization,
    cell: CellId,
    flag: Sequence[int],
    vb: Callable[[CellId], list],
    O_ref: OrientationClass,
):
    """Signed sum over the barycentric simplices of the dual cell of ``cell``.

    Each term is tau * det[A; W]: A holds the differences of consecutive
    flag barycenters inside ``cell`` and W the edges of one dual simplex,
    drawn from virtual barycenters of the sub-reciprocal.  tau is the
    orientation of the full barycentric simplex under the reference class
    ``O_ref`` (see ``geometry.frame_class``).
    """
    j, i = cell
    d = K.dim
    if tuple(flag[-1:]) != (i,) or len(flag) != j + 1:
        raise ValidationError(f"flag {flag} does not end at cell {cell}")
    exact = rec.exact
    fb = [barycenter(K, R, (t, c)) for t, c in enumerate(flag)]
    A = [sub(fb[t], fb[t - 1]) for t in range(1, len(fb))]
    if not exact:
        A = [[float(x) for x in r] for r in A]
    centre = vb(cell)
    total = Fraction(0) if exact else 0.0
    for chain in K.upper_chains(cell):
        tau = O_ref[chain[-1] if chain else i] * K.flag_sign(tuple(flag) + chain)
        W = [sub(vb((j + 1 + t, g)), centre) for t, g in enumerate(chain)]
        if not exact:
            W = [[float(x) for x in r] for r in W]
        total += tau * det(A + W)
    return total, A


def reciprocal_volume(
    rec: Reciprocal,
    K: CellComplex,
    R: Realization,
    cell: CellId,
    flag: Sequence[int] | None = None,
    vb: Callable[[CellId], list] | None = None,
    O: OrientationClass | None = None,
    ref_cell: int | None = None,
) -> float:
    """Generalized (d - dim C)-volume of the sub-reciprocal R(C), oriented by a flag in C.

    Dual cells are oriented by the representative of the class that agrees
    with the frame of R^d on ``ref_cell``.  For a top cell the value is the
    sign +-1 of the cell under that representative.
    """
    O = orient(K) if O is None else O
    flag = K.flags(cell)[0] if flag is None else flag
    vb = mean_barycenters(rec, K) if vb is None else vb
    raw, A = dual_volume_raw(rec, K, R, cell, flag, vb, frame_class(K, R, O, ref_cell))
    m = K.dim - cell[0]
    g = float(np.linalg.det(np.array(A, dtype=float) @ np.array(A, dtype=float).T)) if A else 1.0
    return float(raw) / (factorial(m) * np.sqrt(g))
