"""Rigidity matrices of every level and the stress spaces they cut out.

Coordinates of a level-k stress live on the internal, non-pinned
(k-1)-cells.  In float mode the canonical coordinates are the weighted
coefficients s(C) * vol_{k-1}(C) and the matrix blocks are unit normals.  In
exact mode (simplicial input only) the coordinates are the densities s(C)
and the blocks are rational altitude vectors; the two kernels coincide after
rescaling each coordinate by vol_{k-1}(C).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Sequence

import numpy as np
from scipy.optimize import linprog

from .complex import CellComplex
from .errors import NumericalAmbiguity, ValidationError
from .geometry import Realization, altitude, cell_volume, cell_volume_sq, inner_unit_normal
from .linalg import FLOAT_RANK_RTOL, FloatRank, float_left_nullspace, float_rank, left_nullspace, rank


@dataclass(frozen=True)
class StressAssignment:
    """A level-k stress: one coefficient per carrying (k-1)-cell.

    ``weighted`` always holds float s(C) * vol(C).  ``density`` holds exact
    Fractions when the stress came from an exact computation, else floats.
    """

    level: int
    cells: tuple[int, ...]
    weighted: np.ndarray
    density: tuple = ()
    exact: bool = False

    def __post_init__(self):
        object.__setattr__(self, "weighted", np.asarray(self.weighted, dtype=float))
        if len(self.weighted) != len(self.cells):
            raise ValidationError("one coefficient per carrying cell is required")

    def as_dict(self) -> dict[int, float]:
        return dict(zip(self.cells, self.weighted.tolist()))

    def scaled(self, t) -> "StressAssignment":
        if self.exact:
            t = Fraction(t)
            return StressAssignment(
                self.level, self.cells, self.weighted * float(t), tuple(t * x for x in self.density), True
            )
        return StressAssignment(
            self.level, self.cells, self.weighted * float(t), tuple(float(t) * x for x in self.density), False
        )

    def __add__(self, other: "StressAssignment") -> "StressAssignment":
        if (self.level, self.cells, self.exact) != (other.level, other.cells, other.exact):
            raise ValidationError("stresses live on different supports")
        return StressAssignment(
            self.level,
            self.cells,
            self.weighted + other.weighted,
            tuple(a + b for a, b in zip(self.density, other.density)),
            self.exact,
        )


def carrying_cells(K: CellComplex, k: int) -> list[int]:
    return K.free_cells(k - 1)


def stress_from_density(K, R, level, cells, density) -> StressAssignment:
    density = tuple(Fraction(x) for x in density)
    vols = [_vol(K, R, (level - 1, c)) for c in cells]
    return StressAssignment(level, tuple(cells), np.array([float(s) * v for s, v in zip(density, vols)]), density, True)


def stress_from_weighted(K, R, level, cells, weighted) -> StressAssignment:
    weighted = np.asarray(weighted, dtype=float)
    vols = [_vol(K, R, (level - 1, c)) for c in cells]
    return StressAssignment(level, tuple(cells), weighted, tuple(float(w) / v for w, v in zip(weighted, vols)), False)


def _vol(K, R, cell) -> float:
    return cell_volume(K, R, cell)


def zero_stress(K: CellComplex, R: Realization, k: int, exact: bool = False) -> StressAssignment:
    cells = carrying_cells(K, k)
    if exact:
        return stress_from_density(K, R, k, cells, [0] * len(cells))
    return stress_from_weighted(K, R, k, cells, np.zeros(len(cells)))


# ---------------------------------------------------------------- assembly
@dataclass(frozen=True)
class RigidityMatrix:
    """Level-k rigidity matrix: rows are k-cells, column blocks (k-1)-cells, one block per incidence."""

    level: int
    rows: tuple[int, ...]
    cols: tuple[int, ...]
    ambient: int
    exact: bool
    blocks: dict

    def dense(self):
        N = self.ambient
        col_pos = {c: t for t, c in enumerate(self.cols)}
        if self.exact:
            M = [[Fraction(0)] * (len(self.cols) * N) for _ in self.rows]
        else:
            M = np.zeros((len(self.rows), len(self.cols) * N))
        for (r, c), vec in self.blocks.items():
            base = col_pos[c] * N
            for t in range(N):
                M[r][base + t] = vec[t]
        return M


def assemble(K: CellComplex, R: Realization, k: int, exact: bool = False, all_cells: bool = False) -> RigidityMatrix:
    """Level-k rigidity matrix; its left null space is the level-(k+1) stress space.

    Rows are the internal non-pinned k-cells and columns the internal
    non-pinned (k-1)-cells (``all_cells`` keeps everything, as for a bare
    framework).
    """
    if not 1 <= k <= K.dim:
        raise ValidationError(f"the rigidity matrix level must satisfy 1 <= k <= {K.dim}")
    if exact and not all(K.is_simplex((k, r)) for r in K.cells(k)):
        raise ValidationError("exact mode needs simplicial cells; use float mode")
    rows = list(K.cells(k)) if all_cells else K.free_cells(k)
    cols = list(K.cells(k - 1)) if all_cells else K.free_cells(k - 1)
    colset = set(cols)
    col_index = {c: c for c in cols}
    blocks = {}
    for r_pos, C in enumerate(rows):
        for F in K.facets[k][C]:
            if F not in colset:
                continue
            if exact:
                blocks[(r_pos, col_index[F])] = altitude(K, R, F, (k, C))
            else:
                blocks[(r_pos, col_index[F])] = inner_unit_normal(K, R, F, (k, C))[0]
    return RigidityMatrix(k, tuple(rows), tuple(cols), R.ambient_dim, exact, blocks)


# ------------------------------------------------------------ stress spaces
@dataclass
class StressSpace:
    level: int
    cells: tuple[int, ...]
    basis: list[StressAssignment]
    exact: bool
    rank_info: FloatRank | None = None

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def ambiguous(self) -> bool:
        return bool(self.rank_info and self.rank_info.ambiguous)

    def weighted_matrix(self) -> np.ndarray:
        """Columns are the basis stresses in weighted coordinates."""
        if not self.basis:
            return np.zeros((len(self.cells), 0))
        return np.column_stack([b.weighted for b in self.basis])

    def combine(self, coeffs: Sequence) -> StressAssignment:
        out = self.basis[0].scaled(coeffs[0])
        for c, b in zip(coeffs[1:], self.basis[1:]):
            out = out + b.scaled(c)
        return out


def stress_space(
    K: CellComplex, R: Realization, k: int, exact: bool = False, rtol: float = FLOAT_RANK_RTOL
) -> StressSpace:
    """Basis of the level-k stresses (left null space of the level-(k-1) rigidity matrix)."""
    if not 1 <= k <= K.dim + 1:
        raise ValidationError(f"stress level must be in 1..{K.dim + 1}")
    cells = carrying_cells(K, k)
    if k == 1:
        eye = np.eye(len(cells))
        basis = [
            stress_from_density(K, R, 1, cells, [int(i == j) for i in range(len(cells))]) if exact
            else stress_from_weighted(K, R, 1, cells, eye[j])
            for j in range(len(cells))
        ]
        return StressSpace(1, tuple(cells), basis, exact)
    RM = assemble(K, R, k - 1, exact=exact)
    if exact:
        M = RM.dense()
        vecs = left_nullspace(M, len(cells)) if M and M[0] else left_nullspace([], len(cells))
        basis = [stress_from_density(K, R, k, cells, v) for v in vecs]
        return StressSpace(k, tuple(cells), basis, True)
    vecs, info = float_left_nullspace(RM.dense(), rtol)
    basis = [stress_from_weighted(K, R, k, cells, v) for v in vecs]
    return StressSpace(k, tuple(cells), basis, False, info)


def stress_basis(K: CellComplex, R: Realization, k: int, exact: bool = False) -> list[StressAssignment]:
    return stress_space(K, R, k, exact).basis


# ------------------------------------------------------------- verification
@dataclass
class VerifyReport:
    level: int
    max_relative: float
    residuals: dict = field(default_factory=dict)
    exact_zero: bool | None = None

    def ok(self, tol: float = 1e-8) -> bool:
        if self.exact_zero is not None:
            return self.exact_zero
        return self.max_relative <= tol


def verify_stress(s: StressAssignment, K: CellComplex, R: Realization) -> VerifyReport:
    """Equilibrium residual at every internal non-pinned (k-2)-cell."""
    k = s.level
    if k == 1:
        return VerifyReport(1, 0.0, {}, True if s.exact else None)
    coef = dict(zip(s.cells, s.density if s.exact else s.weighted))
    residuals = {}
    worst = 0.0
    scale = float(np.max(np.abs(s.weighted))) if len(s.weighted) else 0.0
    all_zero = True
    for F in K.free_cells(k - 2):
        if s.exact:
            acc = [Fraction(0)] * R.ambient_dim
            for C in K.cofaces[k - 2][F]:
                if C in coef and coef[C]:
                    a = altitude(K, R, F, (k - 1, C))
                    acc = [x + coef[C] * y for x, y in zip(acc, a)]
            if any(acc):
                all_zero = False
            # report in weighted units: altitude-form residual times vol(F)/(k-1)
            vec = np.array([float(x) for x in acc]) * cell_volume(K, R, (k - 2, F)) / (k - 1)
        else:
            vec = np.zeros(R.ambient_dim)
            for C in K.cofaces[k - 2][F]:
                if C in coef:
                    vec += coef[C] * inner_unit_normal(K, R, F, (k - 1, C))[0]
        r = float(np.linalg.norm(vec)) / scale if scale else float(np.linalg.norm(vec))
        residuals[F] = r
        worst = max(worst, r)
    return VerifyReport(k, worst, residuals, all_zero if s.exact else None)


# ---------------------------------------------------------------- rigidity
@dataclass(frozen=True)
class RigidityReport:
    rigid: bool
    rank: int
    expected: int
    stress_dim: int


def is_statically_rigid(K: CellComplex, R: Realization, exact: bool = False) -> RigidityReport:
    """Static rigidity of the 1-skeleton as a bar framework in R^N."""
    N = R.ambient_dim
    n = K.n_cells[0]
    pts = [list(p) for p in R.coords]
    aff = rank([[a - b for a, b in zip(p, pts[0])] for p in pts[1:]]) if n > 1 else 0
    if n < N + 1 or aff < N:
        raise ValidationError(
            f"framework has {n} vertices spanning an affine {aff}-plane; need {N + 1} spanning R^{N}"
        )
    RM = assemble(K, R, 1, exact=exact, all_cells=True)
    if exact:
        r = rank(RM.dense())
    else:
        r = float_rank(RM.dense()).rank
    expected = N * n - comb(N + 1, 2)
    return RigidityReport(r == expected, r, expected, K.n_cells[1] - r)


# -------------------------------------------------------- positive stresses
@dataclass
class PositiveStressResult:
    feasible: bool
    stress: StressAssignment | None
    margin: float
    certificate: np.ndarray | None = None
    certificate_residual: float | None = None


def find_positive_stress(
    K: CellComplex, R: Realization, k: int, space: StressSpace | None = None, tol: float = 1e-9
) -> PositiveStressResult:
    """Search the level-k stress space for a stress with every coefficient >= 1.

    Maximizes the smallest coefficient over the kernel under the
    normalization sum(coefficients) = n.  When the optimum is not positive,
    returns a Gordan certificate y >= 0, sum y = 1, with y orthogonal to the
    whole stress space.
    """
    if space is None:
        space = stress_space(K, R, k)
    B = space.weighted_matrix()
    n, b = B.shape
    if n == 0:
        raise ValidationError("no carrying cells at this level")
    margin = 0.0
    x = None
    if b:
        c = np.zeros(b + 1)
        c[-1] = -1.0
        A_ub = np.hstack([-B, np.ones((n, 1))])
        A_eq = np.hstack([B.sum(axis=0)[None, :], np.zeros((1, 1))])
        res = linprog(
            c, A_ub=A_ub, b_ub=np.zeros(n), A_eq=A_eq, b_eq=[float(n)],
            bounds=[(None, None)] * b + [(None, 1.0)], method="highs",
        )
        if res.status == 0:
            margin = float(-res.fun)
            x = res.x[:b]
        elif res.status != 2:
            raise NumericalAmbiguity(f"LP solver failed: {res.message}")
    if x is not None and margin > tol:
        w = B @ x / margin
        stress = stress_from_weighted(K, R, k, space.cells, w)
        return PositiveStressResult(True, stress, margin)
    # Gordan alternative: y >= 0, sum y = 1, B^T y = 0
    A_eq = np.vstack([B.T, np.ones((1, n))]) if b else np.ones((1, n))
    b_eq = np.concatenate([np.zeros(b), [1.0]])
    res = linprog(np.zeros(n), A_eq=A_eq, b_eq=b_eq, bounds=[(0, None)] * n, method="highs")
    if res.status != 0:
        raise NumericalAmbiguity(f"no positive stress found and no certificate either: {res.message}")
    y = res.x
    resid = float(np.linalg.norm(B.T @ y)) if b else 0.0
    return PositiveStressResult(False, None, margin, y, resid)
