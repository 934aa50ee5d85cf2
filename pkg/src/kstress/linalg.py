"""Small dense linear algebra kernels.

Exact routines work on lists of rows of :class:`fractions.Fraction` (ints are
accepted and promoted).  The mod-2 routines pack rows into Python integers.
Floating routines wrap numpy SVD and report the spectral gap used for rank
decisions.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

FLOAT_RANK_RTOL = 1e-8


def _frac_rows(rows):
    return [[Fraction(x) for x in r] for r in rows]


def rref(rows: Sequence[Sequence]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form over Q; returns (matrix, pivot columns)."""
    m = _frac_rows(rows)
    if not m:
        return m, []
    n_cols = len(m[0])
    pivots: list[int] = []
    r = 0
    for c in range(n_cols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        row = [x * inv for x in m[r]]
        m[r] = row
        for i in range(len(m)):
            if i != r:
                f = m[i][c]
                if f != 0:
                    mi = m[i]
                    m[i] = [a - f * b for a, b in zip(mi, row)]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m, pivots


def rank(rows: Sequence[Sequence]) -> int:
    return len(rref(rows)[1]) if rows else 0


def nullspace(rows: Sequence[Sequence], n_cols: int | None = None) -> list[list[Fraction]]:
    """Right null space basis of ``rows`` over Q (one vector per free column)."""
    if n_cols is None:
        n_cols = len(rows[0]) if rows else 0
    if not rows:
        return [[Fraction(int(i == j)) for i in range(n_cols)] for j in range(n_cols)]
    m, pivots = rref(rows)
    pivset = set(pivots)
    basis = []
    for free in range(n_cols):
        if free in pivset:
            continue
        v = [Fraction(0)] * n_cols
        v[free] = Fraction(1)
        for i, p in enumerate(pivots):
            v[p] = -m[i][free]
        basis.append(v)
    return basis


def left_nullspace(rows: Sequence[Sequence], n_rows: int | None = None) -> list[list[Fraction]]:
    """Vectors x with x^T M = 0."""
    if n_rows is None:
        n_rows = len(rows)
    if not rows or not rows[0]:
        return nullspace([], n_rows)
    cols = [list(c) for c in zip(*rows)]
    return nullspace(cols, n_rows)


def det(rows: Sequence[Sequence]):
    """Determinant by Gaussian elimination.

    Works for Fractions (exact) and floats (partial pivoting).  The empty
    matrix has determinant 1.
    """
    n = len(rows)
    if n == 0:
        return 1
    exact = not any(isinstance(x, float) or isinstance(x, np.floating) for r in rows for x in r)
    if exact:
        m = _frac_rows(rows)
    else:
        m = [[float(x) for x in r] for r in rows]
    sign = 1
    acc = Fraction(1) if exact else 1.0
    for c in range(n):
        if exact:
            piv = next((i for i in range(c, n) if m[i][c] != 0), None)
        else:
            piv = max(range(c, n), key=lambda i: abs(m[i][c]))
            if m[piv][c] == 0:
                piv = None
        if piv is None:
            return Fraction(0) if exact else 0.0
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            sign = -sign
        p = m[c][c]
        acc *= p
        for i in range(c + 1, n):
            f = m[i][c] / p
            if f != 0:
                m[i] = [a - f * b for a, b in zip(m[i], m[c])]
    return acc if sign > 0 else -acc


def solve(a: Sequence[Sequence], b: Sequence) -> list[Fraction]:
    """Solve the square nonsingular system a x = b exactly."""
    n = len(a)
    aug = [list(map(Fraction, r)) + [Fraction(bi)] for r, bi in zip(a, b)]
    m, pivots = rref(aug)
    if pivots != list(range(n)):
        raise ZeroDivisionError("singular system")
    return [m[i][n] for i in range(n)]


def gram(vectors: Sequence[Sequence]):
    return [[sum(x * y for x, y in zip(u, v)) for v in vectors] for u in vectors]


def rank_mod2(rows: Sequence[int]) -> int:
    """Rank over GF(2) of rows packed as integer bitmasks."""
    pivots: dict[int, int] = {}
    r = 0
    for row in rows:
        while row:
            top = row.bit_length() - 1
            if top in pivots:
                row ^= pivots[top]
            else:
                pivots[top] = row
                r += 1
                break
    return r


@dataclass(frozen=True)
class FloatRank:
    rank: int
    singular_values: np.ndarray
    threshold: float
    gap: float
    ambiguous: bool


def float_rank(m: np.ndarray, rtol: float = FLOAT_RANK_RTOL) -> FloatRank:
    """Numerical rank: singular values above ``rtol * sigma_max``.

    ``gap`` is sigma_r / sigma_{r+1} (infinite when nothing falls below the
    cut, or when the matrix is zero).  ``ambiguous`` flags a spectrum with a
    value within a factor 10 of the threshold on either side.
    """
    m = np.asarray(m, dtype=float)
    if m.size == 0:
        return FloatRank(0, np.zeros(0), 0.0, float("inf"), False)
    s = np.linalg.svd(m, compute_uv=False)
    smax = s[0] if s.size else 0.0
    thr = rtol * smax
    if smax == 0.0:
        return FloatRank(0, s, 0.0, float("inf"), False)
    r = int(np.sum(s > thr))
    above = s[r - 1] if r > 0 else smax
    below = s[r] if r < s.size else 0.0
    gap = float("inf") if below == 0.0 else float(above / below)
    ambiguous = bool((r > 0 and above < 10 * thr) or (below > thr / 10))
    return FloatRank(r, s, float(thr), gap, ambiguous)


def float_left_nullspace(m: np.ndarray, rtol: float = FLOAT_RANK_RTOL) -> tuple[np.ndarray, FloatRank]:
    """Orthonormal basis (as rows) of {x : x^T m = 0}."""
    m = np.asarray(m, dtype=float)
    n_rows = m.shape[0]
    if m.shape[1] == 0 or n_rows == 0:
        return np.eye(n_rows), FloatRank(0, np.zeros(0), 0.0, float("inf"), False)
    info = float_rank(m, rtol)
    u, _, _ = np.linalg.svd(m, full_matrices=True)
    return u[:, info.rank:].T.copy(), info
