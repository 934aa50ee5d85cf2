"""Metric layer: PL realizations, normals, generalized volumes.

Coordinates are stored exactly as Fractions.  Every routine that can be
evaluated exactly takes ``exact=True``; float routines work on the numpy
view of the same coordinates.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import factorial, sqrt
from typing import Sequence

import numpy as np

from .complex import CellComplex, CellId, OrientationClass
from .errors import DegenerateGeometry, NonFlatCell, ValidationError
from .linalg import det, float_rank, gram, rank, solve

FLAT_RTOL = 1e-9


@dataclass(frozen=True)
class Realization:
    """Vertex coordinates in R^N, stored exactly."""

    coords: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        if not self.coords:
            raise ValidationError("realization has no vertices")
        n = len(self.coords[0])
        if any(len(c) != n for c in self.coords):
            raise ValidationError("all vertices need the same number of coordinates")

    @classmethod
    def from_values(cls, coords: Sequence[Sequence]) -> "Realization":
        return cls(tuple(tuple(_to_fraction(x) for x in c) for c in coords))

    @property
    def ambient_dim(self) -> int:
        return len(self.coords[0])

    @cached_property
    def array(self) -> np.ndarray:
        return np.array([[float(x) for x in c] for c in self.coords])

    def translated(self, offset: Sequence) -> "Realization":
        off = [_to_fraction(x) for x in offset]
        return Realization(tuple(tuple(a + b for a, b in zip(c, off)) for c in self.coords))


def _to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    return Fraction(float(x)).limit_denominator(10**12)


def sub(a, b):
    return [x - y for x, y in zip(a, b)]


def dot(a, b):
    return sum(x * y for x, y in zip(a, b))


def cell_points(K: CellComplex, R: Realization, cell: CellId) -> list[tuple[Fraction, ...]]:
    j, i = cell
    return [R.coords[v] for v in sorted(K.verts[j][i])]


def barycenter(K: CellComplex, R: Realization, cell: CellId) -> list[Fraction]:
    pts = cell_points(K, R, cell)
    n = len(pts)
    return [sum(c) / n for c in zip(*pts)]


def affine_rank(points: Sequence[Sequence], exact: bool = True, rtol: float = FLAT_RTOL) -> int:
    if len(points) <= 1:
        return 0
    diffs = [sub(p, points[0]) for p in points[1:]]
    if exact:
        return rank(diffs)
    return float_rank(np.array(diffs, dtype=float), rtol).rank


def affine_basis(points: Sequence[Sequence]) -> list[list[Fraction]]:
    """Independent difference vectors from points[0] spanning the affine hull."""
    basis: list[list[Fraction]] = []
    for p in points[1:]:
        v = sub(p, points[0])
        if rank(basis + [v]) > len(basis):
            basis.append(v)
    return basis


def project_affine(x: Sequence, origin: Sequence, basis: Sequence[Sequence]) -> list[Fraction]:
    """Orthogonal projection of x onto origin + span(basis), exactly."""
    if not basis:
        return list(origin)
    rhs = [dot(b, sub(x, origin)) for b in basis]
    coef = solve(gram(basis), rhs)
    out = list(origin)
    for c, b in zip(coef, basis):
        out = [o + c * bi for o, bi in zip(out, b)]
    return out


# ------------------------------------------------------------------ flatness
@dataclass
class FlatnessReport:
    ranks: dict = field(default_factory=dict)
    bad: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.bad


def validate_flatness(
    K: CellComplex, R: Realization, exact: bool = True, strict: bool = True
) -> FlatnessReport:
    """Each j-cell must span an affine j-plane (no more, no less)."""
    if len(R.coords) != K.n_cells[0]:
        raise ValidationError(
            f"realization has {len(R.coords)} vertices, complex has {K.n_cells[0]}"
        )
    rep = FlatnessReport()
    for j in range(1, K.dim + 1):
        for i in K.cells(j):
            r = affine_rank(cell_points(K, R, (j, i)), exact)
            rep.ranks[(j, i)] = r
            if r != j:
                rep.bad.append(((j, i), r))
    if strict and rep.bad:
        raise NonFlatCell(rep.bad)
    return rep


# ------------------------------------------------------------------- normals
def altitude(K: CellComplex, R: Realization, facet: int, cell: CellId) -> list[Fraction]:
    """Rational vector in lin(C), orthogonal to aff(F), pointing into C.

    For a simplex this is the true altitude (apex minus its foot on aff F);
    otherwise it is taken from the vertex barycenter of C, which assumes C is
    star-shaped with respect to that point.
    """
    j, i = cell
    F = (j - 1, facet)
    fpts = cell_points(K, R, F)
    if K.is_simplex(cell):
        (apex_v,) = K.verts[j][i] - K.verts[j - 1][facet]
        x = list(R.coords[apex_v])
    else:
        x = barycenter(K, R, cell)
    foot = project_affine(x, fpts[0], affine_basis(fpts))
    a = sub(x, foot)
    if not any(a):
        raise DegenerateGeometry(f"cell {cell} has zero altitude over facet {F}")
    return a


def inner_unit_normal(K: CellComplex, R: Realization, facet: int, cell: CellId):
    """Inner unit normal n(F, C) as a float vector, plus the exact altitude."""
    a = altitude(K, R, facet, cell)
    v = np.array([float(x) for x in a])
    return v / np.linalg.norm(v), a


def cell_volume_sq(K: CellComplex, R: Realization, cell: CellId) -> Fraction:
    """Squared j-volume of a simplex cell, exactly."""
    j, i = cell
    if j == 0:
        return Fraction(1)
    if not K.is_simplex(cell):
        raise ValidationError(f"exact squared volume needs a simplex, {cell} is not")
    pts = cell_points(K, R, cell)
    E = [sub(p, pts[0]) for p in pts[1:]]
    return det(gram(E)) / factorial(j) ** 2


def cell_volume(K: CellComplex, R: Realization, cell: CellId) -> float:
    """Unsigned j-volume (float); non-simplicial cells via their barycentric flags."""
    j, i = cell
    if j == 0:
        return 1.0
    if K.is_simplex(cell):
        return sqrt(float(cell_volume_sq(K, R, cell)))
    total = 0.0
    for fl in K.flags(cell):
        pts = [np.array([float(x) for x in barycenter(K, R, (t, c))]) for t, c in enumerate(fl)]
        E = np.array([p - pts[0] for p in pts[1:]])
        total += sqrt(max(np.linalg.det(E @ E.T), 0.0)) / factorial(j)
    return total


def rational_normal(points: Sequence[Sequence]) -> list[Fraction]:
    """Cofactor normal of the hyperplane through d points in R^d.

    For points (p_1..p_d) the result nu satisfies det[x; p_2-p_1; ...] = nu . x
    and |nu| = (d-1)! * vol_{d-1}.
    """
    E = [sub(p, points[0]) for p in points[1:]]
    d = len(points[0])
    out = []
    for c in range(d):
        minor = [[row[t] for t in range(d) if t != c] for row in E]
        out.append((-1) ** c * det(minor))
    return out


# --------------------------------------------------- orientation and frames
def flag_barycenters(K: CellComplex, R: Realization, flag: Sequence[int], start_dim: int = 0):
    return [barycenter(K, R, (start_dim + t, c)) for t, c in enumerate(flag)]


def top_cell_sign(K: CellComplex, R: Realization, D: int) -> int:
    """Orientation of the realized top cell relative to its reference orientation.

    Requires ambient dimension == K.dim.  +1 when the reference orientation
    agrees with the coordinate frame of R^d.
    """
    d = K.dim
    if R.ambient_dim != d:
        raise ValidationError("top-cell orientation needs ambient dimension equal to the complex dimension")
    fl = K.flags((d, D))[0]
    b = flag_barycenters(K, R, fl)
    v = det([sub(p, b[0]) for p in b[1:]])
    if v == 0:
        raise DegenerateGeometry(f"top cell {(d, D)} is degenerate")
    return K.flag_sign(fl) * (1 if v > 0 else -1)


def realized_orientation(K: CellComplex, R: Realization, O: OrientationClass) -> list[int]:
    """rho(D) = O(D) * (geometric sign of D): +1 where the class agrees with R^d."""
    return [O[D] * top_cell_sign(K, R, D) for D in K.cells(K.dim)]


def frame_class(
    K: CellComplex, R: Realization, O: OrientationClass, ref_cell: int | None = None
) -> OrientationClass:
    """The representative of +-O agreeing with the frame of R^d on a reference cell.

    Each component is flipped independently; its reference is ``ref_cell``
    when that lies in the component, else its smallest top cell.
    """
    out = list(O.signs)
    for comp in K.top_components():
        ref = ref_cell if ref_cell in comp else comp[0]
        if O[ref] * top_cell_sign(K, R, ref) < 0:
            for D in comp:
                out[D] = -out[D]
    return OrientationClass(tuple(out))


def flag_normals(K: CellComplex, R: Realization, flag: Sequence[int]) -> np.ndarray:
    """Unit inner normals n(c_{t-1}, c_t) along a flag starting at a vertex."""
    return np.array(
        [inner_unit_normal(K, R, flag[t - 1], (t, flag[t]))[0] for t in range(1, len(flag))]
    ).reshape(len(flag) - 1, R.ambient_dim)


def flag_frame_sign(K: CellComplex, R: Realization, flag: Sequence[int], O: OrientationClass):
    """Sign of the frame of normals of a full flag under the orientation class.

    Returns ``(sign, normals)`` where sign = rho(D) * sign det[N] for the top
    cell D of the flag; it flips when the flag changes in one position and
    when the class is flipped globally.
    """
    d = K.dim
    if len(flag) != d + 1:
        raise ValidationError("flag must run from a vertex to a top cell")
    N = flag_normals(K, R, flag)
    dn = np.linalg.det(N)
    if abs(dn) < 1e-12:
        raise DegenerateGeometry("degenerate flag frame")
    rho = O[flag[-1]] * top_cell_sign(K, R, flag[-1])
    return rho * (1 if dn > 0 else -1), N


# -------------------------------------------------------- generalized volume
@dataclass(frozen=True)
class OrientedFacetCycle:
    """Oriented (d-1)-simplices in R^d; ``simplices`` index into ``points``."""

    points: tuple[tuple, ...]
    simplices: tuple[tuple[int, ...], ...]
    signs: tuple[int, ...] = ()

    def __post_init__(self):
        if not self.signs:
            object.__setattr__(self, "signs", tuple(1 for _ in self.simplices))

    @property
    def dim(self) -> int:
        return len(self.points[0])

    def boundary(self) -> dict:
        acc: dict = {}
        for s, sg in zip(self.simplices, self.signs):
            for p in range(len(s)):
                face = s[:p] + s[p + 1:]
                key = tuple(sorted(face))
                perm_sign = _perm_sign(face, key)
                acc[key] = acc.get(key, 0) + sg * (-1) ** p * perm_sign
        return {k: v for k, v in acc.items() if v}

    def is_closed(self) -> bool:
        return not self.boundary()


def _perm_sign(seq, target) -> int:
    pos = [target.index(x) for x in seq]
    s = 1
    for a in range(len(pos)):
        for b in range(a + 1, len(pos)):
            if pos[a] > pos[b]:
                s = -s
    return s


def _pts(cycle: OrientedFacetCycle, exact: bool):
    if exact:
        return [tuple(_to_fraction(x) for x in p) for p in cycle.points]
    return [tuple(float(x) for x in p) for p in cycle.points]


def generalized_volume(cycle: OrientedFacetCycle, base=None, exact: bool = True):
    """(1/d!) * sum of det[v_1 - p, ..., v_d - p] over the oriented facets."""
    d = cycle.dim
    pts = _pts(cycle, exact)
    for s in cycle.simplices:
        if len(s) != d:
            raise ValidationError(f"facet {s} is not a {d - 1}-simplex in R^{d}")
    if base is None:
        base = [0] * d
    base = [_to_fraction(x) for x in base] if exact else [float(x) for x in base]
    total = Fraction(0) if exact else 0.0
    for s, sg in zip(cycle.simplices, cycle.signs):
        total += sg * det([sub(pts[v], base) for v in s])
    return total / factorial(d)


def slab_volume(cycle: OrientedFacetCycle, base=None, exact: bool = True):
    """Volume as (1/d) * sum over facets of dist(p, aff F) * vol(F, p).

    vol(F, p) is the signed facet volume in aff F, oriented so that
    [v - p, frame] is positive.  In exact mode the product distance * volume
    is formed from the rational foot vector, so no square roots appear.
    """
    d = cycle.dim
    pts = _pts(cycle, exact)
    if base is None:
        base = [0] * d
    base = [_to_fraction(x) for x in base] if exact else [float(x) for x in base]
    total = Fraction(0) if exact else 0.0
    for s, sg in zip(cycle.simplices, cycle.signs):
        if len(s) != d:
            raise ValidationError(f"facet {s} is not a {d - 1}-simplex in R^{d}")
        fp = [pts[v] for v in s]
        edges = [sub(q, fp[0]) for q in fp[1:]]
        if exact:
            foot = project_affine(base, fp[0], affine_basis(fp))
            w = sub(foot, base)  # = dist * u
            if not any(w):
                continue
            total += sg * det([w] + edges) / factorial(d - 1)
        else:
            E = np.array(edges, dtype=float).reshape(d - 1, d)
            rel = np.array(fp[0]) - np.array(base)
            if d > 1:
                q, _ = np.linalg.qr(E.T)
                w = rel - q @ (q.T @ rel)
            else:
                w = rel
            dist = float(np.linalg.norm(w))
            if dist == 0.0:
                continue
            u = w / dist
            vol = np.linalg.det(np.vstack([u, E])) / factorial(d - 1)
            total += sg * dist * vol
    return total / d


# ------------------------------------------------------ Minkowski identities
def minkowski_residual(K: CellComplex, R: Realization, D: int | None = None) -> float:
    """Relative norm of sum_F vol(F) n(F, D) over the facets of a top cell."""
    d = K.dim
    D = 0 if D is None else D
    acc = np.zeros(R.ambient_dim)
    scale = 0.0
    for f in K.facets[d][D]:
        vol = cell_volume(K, R, (d - 1, f))
        n, _ = inner_unit_normal(K, R, f, (d, D))
        acc += vol * n
        scale += vol
    return float(np.linalg.norm(acc) / scale)


def oriented_facet_sum(cycle: OrientedFacetCycle, rng: np.random.Generator | None = None):
    """sum_F vol(F, n_F) n_F with an arbitrary unit normal per facet.

    The normal direction is picked at random when ``rng`` is given; the sum
    does not depend on it.  Returns (vector, sum of |facet volumes|).
    """
    d = cycle.dim
    pts = np.array(_pts(cycle, False), dtype=float)
    acc = np.zeros(d)
    scale = 0.0
    for s, sg in zip(cycle.simplices, cycle.signs):
        E = pts[list(s[1:])] - pts[s[0]]
        nu = np.array([float(x) for x in rational_normal([tuple(p) for p in pts[list(s)]])])
        n = nu / np.linalg.norm(nu)
        if rng is not None and rng.random() < 0.5:
            n = -n
        vol = sg * np.linalg.det(np.vstack([n, E])) / factorial(d - 1)
        acc += vol * n
        scale += abs(vol)
    return acc, scale


def lemma_residual(cycle: OrientedFacetCycle, rng: np.random.Generator | None = None) -> float:
    acc, scale = oriented_facet_sum(cycle, rng)
    return float(np.linalg.norm(acc) / scale) if scale else 0.0


def random_affine_point(points: Sequence[Sequence], rng: np.random.Generator, exact: bool = True):
    """A random affine combination of ``points`` (weights sum to one)."""
    n = len(points)
    if exact:
        w = [Fraction(int(rng.integers(-3, 8)), 7) for _ in range(n)]
        w[-1] = 1 - sum(w[:-1])
        return [sum(wi * p[c] for wi, p in zip(w, points)) for c in range(len(points[0]))]
    w = rng.uniform(-0.5, 1.5, size=n)
    w[-1] = 1 - w[:-1].sum()
    return list(np.asarray(points, dtype=float).T @ w)
