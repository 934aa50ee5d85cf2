"""Combinatorial layer: regular cell complexes given by their face lattice.

A cell is addressed by ``(dim, index)``.  Dimension-0 cells are the vertices
``0..n-1``; a cell of dimension j >= 1 is given by the indices of its
(j-1)-dimensional facets.  Everything derived from that (vertex sets,
cofaces, incidence signs, boundary and pinned flags) is computed once at
construction; the object is not mutated afterwards.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from math import comb
from typing import Iterable, Sequence

from .errors import BuildError, NonOrientable, ValidationError
from .linalg import rank, rank_mod2

CellId = tuple[int, int]


class CellComplex:
    """Finite regular cell complex with signed incidences.

    Parameters
    ----------
    n_vertices:
        Number of 0-cells.
    facets:
        ``facets[j]`` lists, for every j-cell (j = 1..d), the indices of its
        (j-1)-dimensional facets.  ``facets[0]`` may be omitted.
    pinned:
        Extra cells on which equilibrium is not required.
    auto_pin_boundary:
        Boundary cells are pinned unless this is False.
    """

    def __init__(
        self,
        n_vertices: int,
        facets: Sequence[Sequence[Sequence[int]]],
        pinned: Iterable[CellId] = (),
        auto_pin_boundary: bool = True,
    ):
        facets = list(facets)
        if facets and len(facets[0]) == n_vertices and all(len(f) == 0 for f in facets[0]):
            facets = facets[1:]
        if not facets:
            raise BuildError("complex needs at least one cell of dimension >= 1")
        self.dim = len(facets)
        self.facets: tuple[tuple[tuple[int, ...], ...], ...] = (
            tuple(() for _ in range(n_vertices)),
        ) + tuple(tuple(tuple(int(x) for x in f) for f in level) for level in facets)
        self.n_cells = tuple(len(level) for level in self.facets)
        self._validate_lattice()
        self.verts = self._vertex_sets()
        self.cofaces = self._cofaces()
        self.signs = self._incidence_signs()
        self._check_boundary_squared()
        self.boundary = self._boundary_flags()
        pins = [set() for _ in range(self.dim + 1)]
        for j, i in pinned:
            if not (0 <= j <= self.dim and 0 <= i < self.n_cells[j]):
                raise ValidationError(f"pinned cell {(j, i)} does not exist")
            pins[j].add(i)
        if auto_pin_boundary:
            for j in range(self.dim + 1):
                pins[j].update(i for i, b in enumerate(self.boundary[j]) if b)
        self.pinned = tuple(frozenset(p) for p in pins)
        self.auto_pin_boundary = auto_pin_boundary
        self._flag_cache: dict[CellId, list[tuple[int, ...]]] = {}

    # ------------------------------------------------------------------ build
    @classmethod
    def from_simplices(cls, simplices: Iterable[Sequence[int]], **kw) -> "CellComplex":
        """Simplicial complex from its top simplices (all of one dimension)."""
        tops = sorted({tuple(sorted(s)) for s in simplices})
        if not tops:
            raise BuildError("no simplices given")
        d = len(tops[0]) - 1
        if any(len(s) != d + 1 for s in tops):
            raise BuildError("all top simplices must have the same dimension")
        if any(len(set(s)) != len(s) for s in tops):
            raise BuildError("repeated vertex in a simplex")
        vertices = sorted({v for s in tops for v in s})
        if vertices != list(range(len(vertices))):
            raise BuildError("vertex labels must be 0..n-1")
        levels: list[list[tuple[int, ...]]] = [[(v,) for v in vertices]]
        for j in range(1, d + 1):
            faces = sorted({f for s in tops for f in combinations(s, j + 1)})
            levels.append(faces)
        index = [{f: i for i, f in enumerate(level)} for level in levels]
        facet_lists = []
        for j in range(1, d + 1):
            facet_lists.append(
                [tuple(index[j - 1][f[:p] + f[p + 1:]] for p in range(j + 1)) for f in levels[j]]
            )
        cx = cls(len(vertices), facet_lists, **kw)
        return cx

    def _validate_lattice(self) -> None:
        for j in range(1, self.dim + 1):
            seen = set()
            for i, fs in enumerate(self.facets[j]):
                if len(fs) < 2:
                    raise BuildError(f"cell {(j, i)} has fewer than two facets")
                if len(set(fs)) != len(fs):
                    raise BuildError(f"cell {(j, i)} repeats a facet")
                for f in fs:
                    if not 0 <= f < self.n_cells[j - 1]:
                        raise BuildError(f"cell {(j, i)} references missing facet {(j - 1, f)}")
                key = frozenset(fs)
                if key in seen:
                    raise BuildError(f"cell {(j, i)} duplicates another cell")
                seen.add(key)
            if j == 1 and any(len(fs) != 2 for fs in self.facets[1]):
                raise BuildError("every edge must have exactly two vertices")
        if self.n_cells[self.dim] == 0:
            raise BuildError("no top-dimensional cells")

    def _vertex_sets(self):
        out = [tuple(frozenset((i,)) for i in range(self.n_cells[0]))]
        for j in range(1, self.dim + 1):
            prev = out[-1]
            out.append(tuple(frozenset().union(*(prev[f] for f in fs)) for fs in self.facets[j]))
        return tuple(out)

    def _cofaces(self):
        co = [[[] for _ in range(n)] for n in self.n_cells]
        for j in range(1, self.dim + 1):
            for i, fs in enumerate(self.facets[j]):
                for f in fs:
                    co[j - 1][f].append(i)
        co[self.dim] = [[] for _ in range(self.n_cells[self.dim])]
        return tuple(tuple(tuple(c) for c in level) for level in co)

    def _incidence_signs(self):
        signs: list[tuple[dict[int, int], ...]] = [tuple({} for _ in range(self.n_cells[0]))]
        edge_signs = []
        for a, b in self.facets[1] if self.dim >= 1 else ():
            lo, hi = (a, b) if a < b else (b, a)
            edge_signs.append({lo: -1, hi: 1})
        signs.append(tuple(edge_signs))
        for j in range(2, self.dim + 1):
            level = []
            for i, fs in enumerate(self.facets[j]):
                vs = self.verts[j][i]
                if len(vs) == j + 1 and len(fs) == j + 1:
                    order = sorted(vs)
                    sg = {}
                    for f in fs:
                        (missing,) = vs - self.verts[j - 1][f]
                        sg[f] = -1 if order.index(missing) % 2 else 1
                    level.append(sg)
                else:
                    level.append(self._propagate_signs((j, i), signs[j - 1]))
            signs.append(tuple(level))
        return tuple(signs)

    def _propagate_signs(self, cell: CellId, lower: Sequence[dict[int, int]]) -> dict[int, int]:
        j, i = cell
        fs = self.facets[j][i]
        ridge_owners: dict[int, list[int]] = {}
        for f in fs:
            for g in self.facets[j - 1][f]:
                ridge_owners.setdefault(g, []).append(f)
        for g, owners in ridge_owners.items():
            if len(owners) != 2:
                raise BuildError(f"boundary of cell {cell} is not a closed pseudomanifold at {(j - 2, g)}")
        sg = {fs[0]: 1}
        queue = deque([fs[0]])
        while queue:
            f1 = queue.popleft()
            for g in self.facets[j - 1][f1]:
                (f2,) = [f for f in ridge_owners[g] if f != f1]
                want = -sg[f1] * lower[f1][g] * lower[f2][g]
                if f2 in sg:
                    if sg[f2] != want:
                        raise BuildError(f"cell {cell} has a non-orientable boundary")
                else:
                    sg[f2] = want
                    queue.append(f2)
        if len(sg) != len(fs):
            raise BuildError(f"boundary of cell {cell} is disconnected")
        return sg

    def _check_boundary_squared(self) -> None:
        for j in range(2, self.dim + 1):
            for i in range(self.n_cells[j]):
                acc: dict[int, int] = {}
                for f, s in self.signs[j][i].items():
                    for g, t in self.signs[j - 1][f].items():
                        acc[g] = acc.get(g, 0) + s * t
                if any(acc.values()):
                    raise BuildError(f"boundary of boundary is nonzero on cell {(j, i)}")

    def _boundary_flags(self):
        d = self.dim
        flags = [[False] * n for n in self.n_cells]
        for i, co in enumerate(self.cofaces[d - 1]):
            if len(co) < 2:
                flags[d - 1][i] = True
        for j in range(d - 1, 0, -1):
            for i in range(self.n_cells[j]):
                if flags[j][i]:
                    for f in self.facets[j][i]:
                        flags[j - 1][f] = True
        return tuple(tuple(f) for f in flags)

    # ---------------------------------------------------------------- queries
    @property
    def simplicial(self) -> bool:
        return all(
            len(self.verts[j][i]) == j + 1 for j in range(self.dim + 1) for i in range(self.n_cells[j])
        )

    def is_simplex(self, cell: CellId) -> bool:
        j, i = cell
        return len(self.verts[j][i]) == j + 1

    def cells(self, j: int) -> range:
        return range(self.n_cells[j])

    def is_internal(self, cell: CellId) -> bool:
        return not self.boundary[cell[0]][cell[1]]

    def is_pinned(self, cell: CellId) -> bool:
        return cell[1] in self.pinned[cell[0]]

    def free_cells(self, j: int) -> list[int]:
        """Internal, non-pinned cells of dimension j (where equilibrium is enforced)."""
        if j < 0:
            return []
        return [i for i in self.cells(j) if not self.boundary[j][i] and i not in self.pinned[j]]

    @property
    def closed(self) -> bool:
        return not any(self.boundary[self.dim - 1])

    def incidence(self, cell: CellId, facet: int) -> int:
        return self.signs[cell[0]][cell[1]][facet]

    def faces(self, cell: CellId) -> set[CellId]:
        """All faces of ``cell`` including itself."""
        out = {cell}
        frontier = [cell]
        while frontier:
            j, i = frontier.pop()
            for f in self.facets[j][i]:
                if (j - 1, f) not in out:
                    out.add((j - 1, f))
                    frontier.append((j - 1, f))
        return out

    def cofaces_all(self, cell: CellId) -> set[CellId]:
        """All cells containing ``cell`` including itself (the open star)."""
        out = {cell}
        frontier = [cell]
        while frontier:
            j, i = frontier.pop()
            if j == self.dim:
                continue
            for c in self.cofaces[j][i]:
                if (j + 1, c) not in out:
                    out.add((j + 1, c))
                    frontier.append((j + 1, c))
        return out

    def top_cofaces(self, cell: CellId) -> list[int]:
        return sorted(i for j, i in self.cofaces_all(cell) if j == self.dim)

    def flags(self, cell: CellId) -> list[tuple[int, ...]]:
        """All full flags (c_0, ..., c_j = cell) with dim c_t = t, sorted."""
        if cell in self._flag_cache:
            return self._flag_cache[cell]
        j, i = cell
        if j == 0:
            out = [(i,)]
        else:
            out = sorted(fl + (i,) for f in self.facets[j][i] for fl in self.flags((j - 1, f)))
        self._flag_cache[cell] = out
        return out

    def upper_chains(self, cell: CellId) -> list[tuple[int, ...]]:
        """Chains (g_{j+1}, ..., g_d) of cofaces climbing from ``cell`` to a top cell."""
        j, i = cell
        if j == self.dim:
            return [()]
        return [(c,) + rest for c in self.cofaces[j][i] for rest in self.upper_chains((j + 1, c))]

    def flag_sign(self, flag: Sequence[int]) -> int:
        """Orientation of the barycentric simplex of ``flag`` inside its top cell.

        Relative to the reference orientation fixed by the incidence signs;
        flags differing in one position get opposite signs.
        """
        s = 1
        for t in range(1, len(flag)):
            inc = self.signs[t][flag[t]][flag[t - 1]]
            s *= inc if t % 2 == 0 else -inc
        return s

    def boundary_matrix_mod2(self, j: int) -> list[int]:
        """Rows = j-cells, packed bits over (j-1)-cells."""
        if j <= 0 or j > self.dim:
            return []
        return [sum(1 << f for f in fs) for fs in self.facets[j]]

    def boundary_matrix(self, j: int) -> list[list[int]]:
        """Signed boundary matrix with rows = j-cells and columns = (j-1)-cells."""
        rows = []
        for i in self.cells(j):
            r = [0] * self.n_cells[j - 1]
            for f, s in self.signs[j][i].items():
                r[f] = s
            rows.append(r)
        return rows

    @cached_property
    def dual_graph(self) -> dict[int, list[tuple[int, int]]]:
        """Adjacency of top cells through internal facets: D -> [(facet, D')]."""
        d = self.dim
        adj: dict[int, list[tuple[int, int]]] = {D: [] for D in self.cells(d)}
        for f, co in enumerate(self.cofaces[d - 1]):
            if len(co) == 2:
                a, b = co
                adj[a].append((f, b))
                adj[b].append((f, a))
        return adj

    def top_components(self) -> list[list[int]]:
        seen: set[int] = set()
        comps = []
        for start in self.cells(self.dim):
            if start in seen:
                continue
            comp = [start]
            seen.add(start)
            queue = deque([start])
            while queue:
                D = queue.popleft()
                for _, E in self.dual_graph[D]:
                    if E not in seen:
                        seen.add(E)
                        comp.append(E)
                        queue.append(E)
            comps.append(sorted(comp))
        return comps

    def f_vector(self) -> "FVector":
        return FVector((1,) + tuple(self.n_cells))

    def euler_characteristic(self) -> int:
        return sum((-1) ** j * n for j, n in enumerate(self.n_cells))


# ---------------------------------------------------------------- homology
def homology_rank_mod2(K: CellComplex, k: int) -> int:
    """Rank of H_k(K; Z/2) from boundary ranks over GF(2)."""
    if not 0 <= k <= K.dim:
        raise ValidationError(f"homology degree {k} outside 0..{K.dim}")
    r_k = rank_mod2(K.boundary_matrix_mod2(k)) if k > 0 else 0
    r_k1 = rank_mod2(K.boundary_matrix_mod2(k + 1)) if k < K.dim else 0
    return K.n_cells[k] - r_k - r_k1


def simplicial_betti_mod2(simplices: Iterable[Iterable]) -> list[int]:
    """Mod-2 Betti numbers of the simplicial complex generated by ``simplices``.

    Vertices may be arbitrary hashable labels; faces are closed automatically.
    """
    faces: set[frozenset] = set()
    for s in simplices:
        s = frozenset(s)
        for r in range(1, len(s) + 1):
            faces.update(frozenset(c) for c in combinations(s, r))
    if not faces:
        return []
    top = max(len(f) for f in faces) - 1
    by_dim = [sorted((f for f in faces if len(f) == j + 1), key=lambda f: sorted(map(repr, f))) for j in range(top + 1)]
    index = [{f: i for i, f in enumerate(level)} for level in by_dim]
    ranks = [0] * (top + 2)
    for j in range(1, top + 1):
        rows = [sum(1 << index[j - 1][f - {v}] for v in f) for f in by_dim[j]]
        ranks[j] = rank_mod2(rows)
    return [len(by_dim[j]) - ranks[j] - ranks[j + 1] for j in range(top + 1)]


# ------------------------------------------------------------- orientation
@dataclass(frozen=True)
class OrientationClass:
    """A sign per top cell making the top cells a cycle modulo the boundary."""

    signs: tuple[int, ...]

    def flipped(self) -> "OrientationClass":
        return OrientationClass(tuple(-s for s in self.signs))

    def __getitem__(self, D: int) -> int:
        return self.signs[D]

    def canonical(self, K: CellComplex) -> "OrientationClass":
        """Same class with the smallest top cell of every component positive."""
        out = list(self.signs)
        for comp in K.top_components():
            if out[comp[0]] < 0:
                for D in comp:
                    out[D] = -out[D]
        return OrientationClass(tuple(out))


def orient(K: CellComplex) -> OrientationClass:
    """Orientation class with the smallest-index top cell of each component positive."""
    d = K.dim
    signs: dict[int, int] = {}
    for comp in K.top_components():
        root = comp[0]
        signs[root] = 1
        queue = deque([root])
        while queue:
            D = queue.popleft()
            for f, E in K.dual_graph[D]:
                want = -signs[D] * K.signs[d][D][f] * K.signs[d][E][f]
                if E in signs:
                    if signs[E] != want:
                        raise NonOrientable(f"orientation conflict across facet {(d - 1, f)}")
                else:
                    signs[E] = want
                    queue.append(E)
    return OrientationClass(tuple(signs[D] for D in K.cells(d)))


def is_cycle(K: CellComplex, O: OrientationClass) -> bool:
    d = K.dim
    for f, co in enumerate(K.cofaces[d - 1]):
        if len(co) == 2 and sum(O[D] * K.signs[d][D][f] for D in co) != 0:
            return False
    return True


def top_homology_rank_Q(K: CellComplex) -> int:
    """dim ker of the top boundary map over Q (closed complexes: H_d(K; Q))."""
    return K.n_cells[K.dim] - rank(K.boundary_matrix(K.dim))


# -------------------------------------------------------- stars, links, dual
@dataclass(frozen=True)
class StarLinkDual:
    cell: CellId
    star: frozenset
    link: frozenset
    classical_link: frozenset | None
    dual_block: frozenset
    dual_boundary_cells: tuple[CellId, ...]
    link_betti: tuple[int, ...]
    dual_block_betti: tuple[int, ...]


def _chains(K: CellComplex, cell: CellId) -> list[tuple[CellId, ...]]:
    """Maximal chains of strict cofaces of ``cell`` (simplices of the sd-link)."""
    j, i = cell
    if j == K.dim:
        return [()]
    out = []
    for c in K.cofaces[j][i]:
        for rest in _chains(K, (j + 1, c)):
            out.append(((j + 1, c),) + rest)
    return out


def stars_links_dual(K: CellComplex, cell: CellId) -> StarLinkDual:
    """Open star, link and dual block of ``cell``.

    The link is taken in the barycentric subdivision: its simplices are the
    chains of cells strictly containing ``cell``.  The dual block is the cone
    over that link from the barycenter of ``cell``; its boundary cells are the
    duals of the cells covering ``cell``.  For a simplex of a simplicial
    complex the classical link (vertex sets) is reported as well.
    """
    j, i = cell
    star = frozenset(K.cofaces_all(cell))
    chains = [c for c in _chains(K, cell) if c]
    link = frozenset(frozenset(c) for c in chains)
    dual = frozenset(frozenset((cell,) + c) for c in (chains or [()]))
    classical = None
    if K.is_simplex(cell) and all(K.is_simplex(c) for c in star):
        vs = K.verts[j][i]
        classical = frozenset(
            K.verts[cj][ci] - vs for cj, ci in star if cj == K.dim
        )
    lb = tuple(simplicial_betti_mod2(link)) if link else ()
    db = tuple(simplicial_betti_mod2(dual))
    return StarLinkDual(
        cell=cell,
        star=star,
        link=link,
        classical_link=classical,
        dual_block=dual,
        dual_boundary_cells=tuple((j + 1, c) for c in K.cofaces[j][i]) if j < K.dim else (),
        link_betti=lb,
        dual_block_betti=db,
    )


@dataclass
class ManifoldReport:
    is_manifold: bool
    closed: bool
    bad_cells: list = field(default_factory=list)


def manifold_report(K: CellComplex) -> ManifoldReport:
    """Check that every link is a mod-2 homology sphere or disk.

    Interior cells need a (d-k-1)-sphere, boundary cells a disk (all Betti
    numbers zero except b_0 = 1).
    """
    d = K.dim
    bad = []
    for f, co in enumerate(K.cofaces[d - 1]):
        if len(co) not in (1, 2):
            bad.append(((d - 1, f), f"{len(co)} top cofaces"))
    for j in range(d - 1):
        for i in K.cells(j):
            sld = stars_links_dual(K, (j, i))
            b = list(sld.link_betti)
            want_dim = d - j - 1
            if K.boundary[j][i]:
                ok = b[:1] == [1] and not any(b[1:])
            else:
                sphere = [0] * (want_dim + 1)
                sphere[0] += 1
                sphere[want_dim] += 1
                ok = b == sphere
            if not ok:
                bad.append(((j, i), f"link betti {b}"))
    return ManifoldReport(not bad, K.closed, bad)


# ----------------------------------------------------------- f, g, h and primitivity
@dataclass(frozen=True)
class FVector:
    """Face numbers f_{-1}, f_0, ..., f_d with f_{-1} = 1."""

    values: tuple[int, ...]

    def __getitem__(self, j: int) -> int:
        if j < -1 or j + 1 >= len(self.values):
            return 0
        return self.values[j + 1]

    @property
    def counts(self) -> tuple[int, ...]:
        return self.values[1:]


def g_number(f: FVector, k: int, ambient: int) -> int:
    return sum(
        (-1) ** ((k + j - 1) % 2) * comb(ambient - j, ambient - k + 1) * f[j]
        for j in range(-1, k)
        if ambient - k + 1 >= 0
    )


def h_number(f: FVector, k: int, ambient: int) -> int:
    return sum((-1) ** (j + k) * comb(ambient - j, ambient - k) * f[j - 1] for j in range(0, k + 1))


def f_g_h(K: CellComplex, ambient: int) -> tuple[FVector, list[int], list[int]]:
    """f-vector and the g_k, h_k numbers for k = 0..ambient."""
    if not K.simplicial:
        raise ValidationError("g and h numbers are defined for simplicial complexes")
    f = K.f_vector()
    g = [g_number(f, k, ambient) for k in range(ambient + 1)]
    h = [h_number(f, k, ambient) for k in range(ambient + 1)]
    return f, g, h


def is_k_primitive(K: CellComplex, k: int) -> bool:
    """Every internal k-cell lies in exactly d - k + 1 top cells."""
    d = K.dim
    for i in K.cells(k):
        if K.boundary[k][i]:
            continue
        if len(K.top_cofaces((k, i))) != d - k + 1:
            return False
    return True


def build_complex(data: dict) -> CellComplex:
    """Complex from a plain mapping.

    ``data`` holds ``n_vertices`` and ``cells`` (a mapping or list indexed by
    dimension 1..d of facet-reference lists); optional ``pinned`` (list of
    ``[dim, index]``) and ``auto_pin_boundary``.
    """
    try:
        n = int(data["n_vertices"])
        cells = data["cells"]
    except KeyError as exc:
        raise BuildError(f"complex description is missing {exc.args[0]!r}") from None
    if isinstance(cells, dict):
        dims = sorted(int(k) for k in cells)
        if dims != list(range(1, len(dims) + 1)):
            raise BuildError(f"cell dimensions must be 1..d, got {dims}")
        levels = [cells[k] if k in cells else cells[str(k)] for k in dims]
    else:
        levels = list(cells)
    pinned = [tuple(p) for p in data.get("pinned", [])]
    return CellComplex(n, levels, pinned=pinned, auto_pin_boundary=data.get("auto_pin_boundary", True))
