"""Example complexes with rational realizations.

Every generator is deterministic in its arguments (including the seed) and
returns a ``ComplexDocument`` that records the configuration it came from.
"""
from __future__ import annotations

from fractions import Fraction
from itertools import combinations, product
from math import sqrt
from typing import Sequence

import numpy as np

from .complex import CellComplex, orient
from .errors import DegenerateGeometry, ValidationError
from .geometry import Realization, frame_class, rational_normal, realized_orientation, sub, validate_flatness
from .io import ComplexDocument, GeneratorConfig
from .linalg import det, gram, rank, solve
from .stress import StressAssignment, stress_from_density

# fixed combinatorial types
TORUS_7 = [tuple(sorted(((i) % 7, (i + 1) % 7, (i + 3) % 7))) for i in range(7)] + [
    tuple(sorted((i % 7, (i + 2) % 7, (i + 3) % 7))) for i in range(7)
]
RP2_6 = [(0, 1, 2), (0, 2, 3), (0, 3, 4), (0, 4, 5), (0, 1, 5),
         (1, 2, 4), (2, 3, 5), (1, 3, 4), (2, 4, 5), (1, 3, 5)]


def _rng(seed):
    return np.random.default_rng(seed)


def _offset(rng, den: int, bound: Fraction) -> Fraction:
    m = int(bound * den)
    return Fraction(int(rng.integers(-m, m + 1)), den)


def _perturb(base, rng, den: int, bound: Fraction):
    return [[Fraction(x) + _offset(rng, den, bound) for x in p] for p in base]


def _random_points(n: int, dim: int, rng, den: int, spread: int = 1):
    m = spread * den
    return [[Fraction(int(rng.integers(-m, m + 1)), den) for _ in range(dim)] for _ in range(n)]


def _realize(K: CellComplex, make, attempts: int = 50) -> Realization:
    """Draw realizations until every cell is flat and nondegenerate."""
    for _ in range(attempts):
        R = Realization.from_values(make())
        if validate_flatness(K, R, strict=False).ok:
            return R
    raise DegenerateGeometry("could not draw a nondegenerate realization")


def _doc(K, R, cfg, **kw) -> ComplexDocument:
    validate_flatness(K, R)
    return ComplexDocument(K, R, config=cfg, **kw)


# ------------------------------------------------------------ cross-polytope
def gen_cross_polytope_boundary(
    n: int, ambient: int | None = None, seed: int = 0, denominator: int = 1000, perturbation="1/5"
) -> ComplexDocument:
    """Boundary of the n-dimensional cross-polytope, realized in R^ambient.

    Vertex 2i is +e_i and 2i+1 is -e_i.  For ambient = n-1 the last axis is
    replaced by (1, ..., 1) / 2 before the seeded perturbation.
    """
    ambient = n if ambient is None else ambient
    if n < 2 or ambient not in (n - 1, n):
        raise ValidationError("cross-polytope needs n >= 2 and ambient in {n-1, n}")
    bound = Fraction(perturbation)
    axes = [[Fraction(int(i == j)) for j in range(ambient)] for i in range(min(n, ambient))]
    if ambient == n - 1:
        axes.append([Fraction(1, 2)] * ambient)
    base = []
    for a in axes:
        base.append(a)
        base.append([-x for x in a])
    simps = [tuple(2 * i + (0 if s > 0 else 1) for i, s in enumerate(sg)) for sg in product((1, -1), repeat=n)]
    K = CellComplex.from_simplices(simps)
    rng = _rng(seed)
    R = _realize(K, lambda: _perturb(base, rng, denominator, bound))
    cfg = GeneratorConfig("cross-polytope", {"n": n}, ambient, seed, denominator, str(bound))
    return _doc(K, R, cfg)


# ------------------------------------------------------------------ Schlegel
def gen_schlegel_simplex(n: int, closed: bool = True) -> ComplexDocument:
    """Schlegel diagram of the n-simplex in R^(n-1).

    The outer facet is the simplex with vertices 0 and n*e_i; vertex n is the
    centroid.  With ``closed`` the outer facet is kept as a top cell, giving
    the whole boundary sphere folded into R^(n-1); otherwise only the n cells
    around the centre remain and the outer boundary is pinned.
    """
    if n < 2:
        raise ValidationError("Schlegel diagram needs n >= 2")
    d = n - 1
    outer = [[Fraction(0)] * d] + [[Fraction(n if j == i else 0) for j in range(d)] for i in range(d)]
    centre = [sum(p[j] for p in outer) / n for j in range(d)]
    coords = outer + [centre]
    simps = [tuple(sorted(set(range(n)) - {i} | {n})) for i in range(n)]
    if closed:
        simps.append(tuple(range(n)))
    K = CellComplex.from_simplices(simps)
    R = Realization.from_values(coords)
    cfg = GeneratorConfig("schlegel-simplex", {"n": n, "closed": closed}, d, None)
    return _doc(K, R, cfg)


# ----------------------------------------------------------- 2-sphere family
def gen_octahedron(ambient: int = 2, seed: int = 0, denominator: int = 1000) -> ComplexDocument:
    doc = gen_cross_polytope_boundary(3, ambient if ambient in (2, 3) else 3, seed, denominator)
    doc.config.family = "octahedron"
    return doc


def _hull_triangles(points: np.ndarray) -> list[tuple[int, int, int]]:
    n = len(points)
    tris = []
    for t in combinations(range(n), 3):
        nrm = np.cross(points[t[1]] - points[t[0]], points[t[2]] - points[t[0]])
        side = (points - points[t[0]]) @ nrm
        side[list(t)] = 0
        if np.all(side <= 1e-9) or np.all(side >= -1e-9):
            tris.append(t)
    return tris


def icosahedron_triangles() -> list[tuple[int, int, int]]:
    phi = (1 + sqrt(5)) / 2
    pts = []
    for a, b in product((1, -1), repeat=2):
        pts += [(0, a, b * phi), (a, b * phi, 0), (b * phi, 0, a)]
    return _hull_triangles(np.array(pts, dtype=float))


def gen_random_realization(
    simplices: Sequence[Sequence[int]], ambient: int, seed: int = 0, denominator: int = 1000,
    family: str = "custom", params: dict | None = None,
) -> ComplexDocument:
    """Seeded random rational coordinates in [-1, 1]^ambient for a fixed complex."""
    K = CellComplex.from_simplices(simplices)
    rng = _rng(seed)
    R = _realize(K, lambda: _random_points(K.n_cells[0], ambient, rng, denominator))
    cfg = GeneratorConfig(family, params or {}, ambient, seed, denominator, "1")
    return _doc(K, R, cfg)


def gen_icosahedron(ambient: int = 2, seed: int = 0, denominator: int = 1000) -> ComplexDocument:
    return gen_random_realization(icosahedron_triangles(), ambient, seed, denominator, "icosahedron")


def stacked_sphere_triangles(n_vertices: int, seed: int = 0) -> list[tuple[int, ...]]:
    """Boundary of a stacked 3-polytope: repeatedly subdivide a random triangle."""
    if n_vertices < 4:
        raise ValidationError("a stacked sphere has at least 4 vertices")
    rng = _rng(seed)
    tris = [t for t in combinations(range(4), 3)]
    for v in range(4, n_vertices):
        a, b, c = tris.pop(int(rng.integers(len(tris))))
        tris += [(a, b, v), (a, c, v), (b, c, v)]
    return sorted(tuple(sorted(t)) for t in tris)


def gen_stacked_sphere(n_vertices: int, ambient: int = 2, seed: int = 0, denominator: int = 1000) -> ComplexDocument:
    return gen_random_realization(
        stacked_sphere_triangles(n_vertices, seed), ambient, seed, denominator, "stacked-sphere", {"n": n_vertices}
    )


def gen_torus(ambient: int = 3, seed: int = 0, denominator: int = 1000) -> ComplexDocument:
    """Seven-vertex torus."""
    return gen_random_realization(TORUS_7, ambient, seed, denominator, "torus")


def gen_rp2(ambient: int = 3, seed: int = 0, denominator: int = 1000) -> ComplexDocument:
    """Six-vertex real projective plane."""
    return gen_random_realization(RP2_6, ambient, seed, denominator, "rp2")


# -------------------------------------------------------- lifted projections
def _facet_plane(pts: Sequence[Sequence[Fraction]], hs: Sequence[Fraction]):
    """Affine function a.x + b through (pts[i], hs[i]); None if pts are affinely dependent."""
    rows = [list(p) + [Fraction(1)] for p in pts]
    if rank(rows) < len(rows):
        return None
    sol = solve(rows, list(hs))
    return sol[:-1], sol[-1]


def lifted_facets(points, heights, mode: str = "lower") -> list[tuple[int, ...]]:
    """Facets of the lower/upper hull of the lifted points, by brute force.

    Raises ``DegenerateGeometry`` when a hull facet contains more than d+1
    points or is vertical, and ``ValidationError`` when the points do not
    span R^d.
    """
    pts = [[Fraction(x) for x in p] for p in points]
    hs = [Fraction(h) for h in heights]
    n, d = len(pts), len(pts[0])
    if rank([sub(p, pts[0]) for p in pts[1:]]) < d:
        raise ValidationError(f"points do not span R^{d}")
    arr = np.array(pts, dtype=float)
    harr = np.array(hs, dtype=float)
    out = {"lower": [], "upper": []}
    for S in combinations(range(n), d + 1):
        plane = _facet_plane([pts[i] for i in S], [hs[i] for i in S])
        if plane is None:
            continue
        a, b = plane
        # float prefilter, then exact decision
        approx = harr - (arr @ np.array(a, dtype=float) + float(b))
        approx[list(S)] = 0
        if np.any(approx > 1e-9) and np.any(approx < -1e-9):
            continue
        gaps = [hs[j] - (sum(x * y for x, y in zip(a, pts[j])) + b) for j in range(n) if j not in S]
        if any(g == 0 for g in gaps) and (all(g >= 0 for g in gaps) or all(g <= 0 for g in gaps)):
            raise DegenerateGeometry(f"lifted points {S} and another point span a non-simplicial facet")
        if all(g > 0 for g in gaps):
            out["lower"].append(S)
        if all(g < 0 for g in gaps):
            out["upper"].append(S)
    if mode == "lower":
        return out["lower"]
    if mode == "upper":
        return out["upper"]
    if mode == "full":
        return out["lower"] + out["upper"]
    raise ValidationError(f"mode must be lower, upper or full, not {mode!r}")


def lift_gradients(K: CellComplex, R: Realization, heights) -> list[list[Fraction]]:
    """Gradient of the affine piece over each top cell."""
    d = K.dim
    hs = [Fraction(h) for h in heights]
    out = []
    for D in K.cells(d):
        vs = sorted(K.verts[d][D])[: d + 1]
        a, _ = _facet_plane([R.coords[v] for v in vs], [hs[v] for v in vs])
        out.append(a)
    return out


def lift_stress(K: CellComplex, R: Realization, heights, sign_cell: int = 0) -> StressAssignment:
    """Exact d-stress induced by a lifting, positive where the lift is convex.

    Across a facet F from D1 to D2 the coefficient is the jump of the
    gradient along the normal of F pointing out of D1, signed by the realized
    orientation of D1; the global sign makes cells on the side of
    ``sign_cell`` count convexity as positive.
    """
    d = K.dim
    O = orient(K)
    rho = realized_orientation(K, R, O)
    grads = lift_gradients(K, R, heights)
    sigma = rho[sign_cell]
    from .stress import carrying_cells
    from .geometry import altitude, cell_points
    from math import factorial

    cells = carrying_cells(K, d)
    dens = []
    for F in cells:
        D1, D2 = K.cofaces[d - 1][F]
        fp = cell_points(K, R, (d - 1, F))
        nu = rational_normal(fp)
        if sum(x * y for x, y in zip(nu, altitude(K, R, F, (d, D1)))) > 0:
            nu = [-x for x in nu]
        jump = sum((g2 - g1) * x for g1, g2, x in zip(grads[D1], grads[D2], nu))
        G = det(gram([sub(p, fp[0]) for p in fp[1:]]))
        dens.append(sigma * rho[D1] * jump * factorial(d - 1) / G)
    return stress_from_density(K, R, d, cells, dens)


def silhouette_cells(K: CellComplex, R: Realization, j: int, O=None) -> list[int]:
    """j-cells whose star mixes top cells of both realized orientations."""
    O = orient(K) if O is None else O
    rho = realized_orientation(K, R, O)
    return [c for c in K.cells(j) if len({rho[D] for D in K.top_cofaces((j, c))}) > 1]


def gen_lifted_projection(
    points, heights, mode: str = "lower", pin_boundary: bool = True, family: str = "lifted-projection",
    seed: int | None = None,
) -> ComplexDocument:
    """Regular subdivision induced by lifting ``points`` to ``heights``.

    ``mode`` picks the lower hull, the upper hull or the full boundary of the
    lifted hull (a closed sphere folded over its projection).  The induced
    d-stress is stored under the name ``lift``; it is positive on interior
    facets of a convex lower lift.  The stored orientation agrees with R^d
    on the lower lid, whose first cell is recorded as ``meta['lower_cell']``.
    """
    pts = [[Fraction(x) for x in p] for p in points]
    hs = [Fraction(h) for h in heights]
    facets = lifted_facets(pts, hs, mode)
    used = sorted({v for f in facets for v in f})
    if used != list(range(len(pts))):
        missing = sorted(set(range(len(pts))) - set(used))
        raise DegenerateGeometry(f"points {missing} are not vertices of the {mode} hull")
    K = CellComplex.from_simplices(facets, auto_pin_boundary=pin_boundary)
    R = Realization.from_values(pts)
    sign_cell = 0
    if mode == "full":
        lower = {tuple(sorted(f)) for f in lifted_facets(pts, hs, "lower")}
        sign_cell = next(D for D in K.cells(K.dim) if tuple(sorted(K.verts[K.dim][D])) in lower)
    s = lift_stress(K, R, hs, sign_cell)
    cfg = GeneratorConfig(
        family, {"mode": mode, "heights": [str(h) for h in hs]}, len(pts[0]), seed,
    )
    O = frame_class(K, R, orient(K), sign_cell)
    return _doc(K, R, cfg, stresses={"lift": s}, orientation=O, meta={"lower_cell": sign_cell})


def gen_lifted_window(
    n_points: int, dim: int, seed: int = 0, denominator: int = 100, heights: str = "paraboloid"
) -> ComplexDocument:
    """Convex-lift decomposition of seeded random points, boundary pinned.

    ``heights`` is ``paraboloid`` (|x|^2, a Delaunay subdivision) or
    ``convex`` (|x|^2 plus a small random term, a generic regular one).
    """
    rng = _rng(seed)
    for _ in range(100):
        pts = _random_points(n_points, dim, rng, denominator)
        hs = [sum(x * x for x in p) for p in pts]
        if heights == "convex":
            hs = [h + Fraction(int(rng.integers(0, 20)), 1000) for h in hs]
        try:
            doc = gen_lifted_projection(pts, hs, "lower", family="lifted-window", seed=seed)
        except (DegenerateGeometry, ValidationError):
            continue
        doc.config.params.update({"n_points": n_points, "heights_kind": heights})
        doc.config.denominator = denominator
        return doc
    raise DegenerateGeometry("could not draw a nondegenerate lifted window")


# ------------------------------------------------------ non-regular example
def gen_twisted_triangulation(twist: int = 1, angle: Fraction = Fraction(1, 10)) -> ComplexDocument:
    """Triangle in triangle with the three quadrilaterals split cyclically.

    Outer vertices A, B, C (0..2) and inner a, b, c (3..5); each quadrilateral
    between an outer edge and the matching inner edge is split by a diagonal
    that turns the same way around the centre.  The inner triangle is rotated
    by the angle whose half-angle tangent is ``twist * angle``; turning it
    against the diagonals makes the triangulation non-regular, turning it
    with them keeps it regular.
    Outer vertices and edges are pinned (boundary).
    """
    t = Fraction(twist) * Fraction(angle)
    # rational rotation via the tangent half-angle substitution
    cs, sn = (1 - t * t) / (1 + t * t), 2 * t / (1 + t * t)
    outer = [(Fraction(0), Fraction(4)), (Fraction(-7, 2), Fraction(-2)), (Fraction(7, 2), Fraction(-2))]
    inner0 = [(Fraction(0), Fraction(1)), (Fraction(-7, 8), Fraction(-1, 2)), (Fraction(7, 8), Fraction(-1, 2))]
    inner = [(cs * x - sn * y, sn * x + cs * y) for x, y in inner0]
    A, B, C, a, b, c = range(6)
    tris = [(A, B, b), (A, b, a), (B, C, c), (B, c, b), (C, A, a), (C, a, c), (a, b, c)]
    K = CellComplex.from_simplices(tris)
    R = Realization.from_values([list(p) for p in outer + inner])
    cfg = GeneratorConfig("twisted-triangulation", {"twist": twist, "angle": str(angle)}, 2, None)
    return _doc(K, R, cfg)


# ------------------------------------------------------------ convex polytopes
def _hull2d_strict(pts2: np.ndarray, idx: Sequence[int]) -> list[int]:
    """Strict convex hull (no collinear points) in counterclockwise order."""
    P = sorted(idx, key=lambda i: (pts2[i][0], pts2[i][1]))

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower, upper = [], []
    for i in P:
        while len(lower) >= 2 and cross(pts2[lower[-2]], pts2[lower[-1]], pts2[i]) <= 0:
            lower.pop()
        lower.append(i)
    for i in reversed(P):
        while len(upper) >= 2 and cross(pts2[upper[-2]], pts2[upper[-1]], pts2[i]) <= 0:
            upper.pop()
        upper.append(i)
    return lower[:-1] + upper[:-1]


def convex_hull_complex(points) -> tuple[CellComplex, Realization]:
    """Face lattice of conv(points) for points in R^2 or R^3, as a single top cell.

    Polygonal facets are kept whole; points that are not vertices are dropped.
    Coplanarity is decided exactly.  Repeated points are merged.
    """
    pts = [list(p) for p in dict.fromkeys(tuple(Fraction(x) for x in p) for p in points)]
    d = len(pts[0])
    if d == 2:
        arr = [tuple(p) for p in pts]
        ring = _hull2d_strict(arr, range(len(pts)))
        if len(ring) < 3:
            raise DegenerateGeometry("points do not span the plane")
        verts = sorted(ring)
        lab = {v: i for i, v in enumerate(verts)}
        edges = [tuple(sorted((lab[ring[i]], lab[ring[(i + 1) % len(ring)]]))) for i in range(len(ring))]
        edges = sorted(edges)
        return (CellComplex(len(verts), [edges, [tuple(range(len(edges)))]]),
                Realization.from_values([pts[v] for v in verts]))
    if d != 3:
        raise ValidationError("convex hulls are supported in R^2 and R^3")
    n = len(pts)
    faces = {}
    for t in combinations(range(n), 3):
        nrm = rational_normal([pts[i] for i in t])
        if not any(nrm):
            continue
        off = sum(x * y for x, y in zip(nrm, pts[t[0]]))
        vals = [sum(x * y for x, y in zip(nrm, p)) - off for p in pts]
        if all(v <= 0 for v in vals) or all(v >= 0 for v in vals):
            on = frozenset(i for i, v in enumerate(vals) if v == 0)
            faces[on] = nrm
    if len(faces) < 4:
        raise DegenerateGeometry("points do not span R^3")
    polys = []
    for on, nrm in faces.items():
        # project to the two coordinates where the normal is smallest
        drop = int(np.argmax([abs(float(x)) for x in nrm]))
        keep = [c for c in range(3) if c != drop]
        p2 = {i: (pts[i][keep[0]], pts[i][keep[1]]) for i in on}
        ring = _hull2d_strict(p2, sorted(on))
        polys.append(ring)
    polys = sorted({tuple(_canon_ring(r)) for r in polys})
    verts = sorted({v for r in polys for v in r})
    lab = {v: i for i, v in enumerate(verts)}
    edge_set = sorted({tuple(sorted((lab[r[i]], lab[r[(i + 1) % len(r)]]))) for r in polys for i in range(len(r))})
    eidx = {e: i for i, e in enumerate(edge_set)}
    facet_lists = [
        tuple(sorted(eidx[tuple(sorted((lab[r[i]], lab[r[(i + 1) % len(r)]])))] for i in range(len(r))))
        for r in polys
    ]
    K = CellComplex(len(verts), [edge_set, facet_lists, [tuple(range(len(facet_lists)))]])
    R = Realization.from_values([pts[v] for v in verts])
    return K, R


def _canon_ring(r: Sequence[int]) -> list[int]:
    i = r.index(min(r))
    return list(r[i:]) + list(r[:i])


def gen_convex_polytope(
    n_points: int, dim: int = 3, seed: int = 0, kind: str = "sphere", denominator: int = 1000
) -> ComplexDocument:
    """Convex polytope as one top cell with its face lattice.

    ``kind``: ``sphere`` (points near the unit sphere, simplicial facets),
    ``lattice`` (small integer points, many polygonal facets) or ``prism``
    (a random polygon times an interval; only for dim = 3).
    """
    rng = _rng(seed)
    if kind == "sphere":
        raw = rng.standard_normal((n_points, dim))
        raw /= np.linalg.norm(raw, axis=1)[:, None]
        pts = [[Fraction(int(round(x * denominator)), denominator) for x in p] for p in raw]
    elif kind == "lattice":
        pts = [[Fraction(int(x)) for x in rng.integers(-2, 3, size=dim)] for _ in range(n_points)]
    elif kind == "prism":
        if dim != 3:
            raise ValidationError("prisms are 3-dimensional")
        m = max(3, n_points // 2)
        ang = np.sort(rng.uniform(0, 2 * np.pi, m))
        base = [(Fraction(int(round(np.cos(t) * denominator)), denominator),
                 Fraction(int(round(np.sin(t) * denominator)), denominator)) for t in ang]
        pts = [[x, y, Fraction(z)] for x, y in base for z in (0, 1)]
    else:
        raise ValidationError(f"unknown polytope kind {kind!r}")
    K, R = convex_hull_complex(pts)
    cfg = GeneratorConfig("convex-polytope", {"n_points": n_points, "kind": kind}, dim, seed, denominator)
    return _doc(K, R, cfg)


# ------------------------------------------------------------------ registry
FAMILIES = {
    "cross-polytope": gen_cross_polytope_boundary,
    "schlegel-simplex": gen_schlegel_simplex,
    "octahedron": gen_octahedron,
    "icosahedron": gen_icosahedron,
    "stacked-sphere": gen_stacked_sphere,
    "torus": gen_torus,
    "rp2": gen_rp2,
    "lifted-window": gen_lifted_window,
    "twisted-triangulation": gen_twisted_triangulation,
    "convex-polytope": gen_convex_polytope,
}


def regenerate(cfg: GeneratorConfig) -> ComplexDocument:
    """Rebuild a document from its recorded configuration."""
    if cfg.family not in FAMILIES:
        raise ValidationError(f"cannot regenerate family {cfg.family!r}")
    kw = dict(cfg.params)
    fn = FAMILIES[cfg.family]
    if cfg.family == "cross-polytope":
        return fn(kw["n"], cfg.ambient, cfg.seed, cfg.denominator, cfg.perturbation)
    if cfg.family == "schlegel-simplex":
        return fn(kw["n"], kw.get("closed", True))
    if cfg.family in ("octahedron", "icosahedron", "torus", "rp2"):
        return fn(cfg.ambient, cfg.seed, cfg.denominator)
    if cfg.family == "stacked-sphere":
        return fn(kw["n"], cfg.ambient, cfg.seed, cfg.denominator)
    if cfg.family == "lifted-window":
        return fn(kw["n_points"], cfg.ambient, cfg.seed, cfg.denominator, kw.get("heights_kind", "paraboloid"))
    if cfg.family == "twisted-triangulation":
        return fn(kw.get("twist", 1), Fraction(kw.get("angle", "1/10")))
    return fn(kw["n_points"], cfg.ambient, cfg.seed, kw.get("kind", "sphere"), cfg.denominator)
