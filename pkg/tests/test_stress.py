from fractions import Fraction

import numpy as np
import pytest

from kstress import generators as gen
from kstress.complex import CellComplex
from kstress.errors import ValidationError
from kstress.geometry import Realization
from kstress.stress import (
    assemble, find_positive_stress, is_statically_rigid, stress_from_weighted, stress_space,
    verify_stress,
)

TRIANGLE = (CellComplex.from_simplices([(0, 1, 2)]), Realization.from_values([(0, 0), (1, 0), (0, 1)]))


def _numpy_dim(K, R, k):
    """Independent count: carrying cells minus the numpy rank of the float matrix."""
    M = assemble(K, R, k - 1).dense()
    n = len(K.free_cells(k - 1))
    return n - (np.linalg.matrix_rank(M) if M.size else 0)


def test_single_triangle_has_no_stress():
    K, R = TRIANGLE
    assert stress_space(K, R, 2).dim == 0
    assert stress_space(K, R, 2, exact=True).dim == 0


@pytest.mark.parametrize("closed", [False, True])
def test_k4_in_plane_has_one_stress(closed):
    doc = gen.gen_schlegel_simplex(3, closed=closed)
    K, R = doc.K, doc.R
    for exact in (False, True):
        sp = stress_space(K, R, 2, exact=exact)
        assert sp.dim == 1 == _numpy_dim(K, R, 2)
        assert verify_stress(sp.basis[0], K, R).ok()


def test_cross_polytope_stress_dimensions(o4):
    K, R = o4.K, o4.R
    assert stress_space(K, R, 3).dim == 4
    assert stress_space(K, R, 2).dim == 6
    f0, f1 = K.n_cells[:2]
    assert 6 == f1 - 3 * f0 + 6
    ex = stress_space(K, R, 3, exact=True)
    assert ex.dim == 4
    assert all(verify_stress(b, K, R).exact_zero for b in ex.basis)


def test_random_assignment_is_not_a_stress(o4):
    K, R = o4.K, o4.R
    sp = stress_space(K, R, 2)
    rng = np.random.default_rng(3)
    w = rng.standard_normal(len(sp.cells))
    # remove the stress component so the assignment is certainly outside the kernel
    Q, _ = np.linalg.qr(sp.weighted_matrix())
    w -= Q @ (Q.T @ w)
    assert verify_stress(stress_from_weighted(K, R, 2, sp.cells, w), K, R).max_relative > 1e-3


def test_float_basis_spans_exact_basis(o4):
    K, R = o4.K, o4.R
    for k in (2, 3):
        f = stress_space(K, R, k).weighted_matrix()
        e = stress_space(K, R, k, exact=True).weighted_matrix()
        assert np.linalg.matrix_rank(np.hstack([f, e]), tol=1e-8) == f.shape[1] == e.shape[1]


@pytest.mark.parametrize("seed", range(20))
def test_exact_and_float_agree_on_random_spheres(seed):
    doc = gen.gen_stacked_sphere(5 + seed % 4, 2, seed=seed)
    K, R = doc.K, doc.R
    assert stress_space(K, R, 2).dim == stress_space(K, R, 2, exact=True).dim == _numpy_dim(K, R, 2)


def test_triangle_framework_is_rigid():
    K = CellComplex.from_simplices([(0, 1), (1, 2), (0, 2)])
    rep = is_statically_rigid(K, TRIANGLE[1], exact=True)
    assert rep.rigid and rep.stress_dim == 0


def test_square_framework_is_flexible():
    K = CellComplex.from_simplices([(0, 1), (1, 2), (2, 3), (0, 3)])
    R = Realization.from_values([(0, 0), (1, 0), (1, 1), (0, 1)])
    rep = is_statically_rigid(K, R)
    assert not rep.rigid and rep.rank == 4 < rep.expected == 5


def test_cross_polytope_in_four_space_is_rigid():
    doc = gen.gen_cross_polytope_boundary(4, 4, seed=2)
    rep = is_statically_rigid(doc.K, doc.R, exact=True)
    assert rep.rigid and rep.stress_dim == 2


def test_degenerate_framework_rejected():
    K = CellComplex.from_simplices([(0, 1), (1, 2), (0, 2)])
    with pytest.raises(ValidationError):
        is_statically_rigid(K, Realization.from_values([(0, 0), (1, 1), (2, 2)]))


def test_positive_stress_on_convex_triangulation(schlegel3):
    res = find_positive_stress(schlegel3.K, schlegel3.R, 2)
    assert res.feasible
    assert np.all(res.stress.weighted >= 1 - 1e-9)
    assert verify_stress(res.stress, schlegel3.K, schlegel3.R).ok()


def test_twisted_triangulation_certificate():
    doc = gen.gen_twisted_triangulation(1)
    res = find_positive_stress(doc.K, doc.R, 2)
    assert not res.feasible
    y = res.certificate
    assert np.all(y >= -1e-12) and abs(y.sum() - 1) <= 1e-9
    assert res.certificate_residual <= 1e-9
    other = gen.gen_twisted_triangulation(-1)
    assert find_positive_stress(other.K, other.R, 2).feasible


def test_exact_rigidity_matrix_uses_altitudes():
    K, R = TRIANGLE
    M = assemble(K, R, 1, exact=True, all_cells=True).dense()
    assert all(isinstance(x, Fraction) for row in M for x in row)
