from fractions import Fraction

import numpy as np
import pytest

from conftest import lifted_simplex4, lifted_tetrahedron, trace_corpus
from kstress import generators as gen
from kstress.complex import orient
from kstress.errors import ValidationError
from kstress.geometry import frame_class
from kstress.stress import find_positive_stress, stress_from_weighted, stress_space, verify_stress
from kstress.trace import (
    homogeneity_check, jacobian_rank, polynomiality_probe, tension_positivity, trace,
)


@pytest.mark.parametrize("doc", trace_corpus()[:8], ids=lambda d: d.config.family if d.config else "lift")
def test_trace_outputs_are_stresses(doc):
    K, R = doc.K, doc.R
    sp = stress_space(K, R, K.dim)
    rng = np.random.default_rng(0)
    s = sp.combine(rng.standard_normal(sp.dim))
    for k in range(1, K.dim + 1):
        res = trace(s, K, R, k)
        assert res.residuals.max_relative <= 1e-8


def test_exact_trace_is_exactly_a_stress(o4):
    K, R = o4.K, o4.R
    s = stress_space(K, R, 3, exact=True).combine([1, -2, 3, 1])
    for k in (1, 2):
        assert trace(s, K, R, k).residuals.exact_zero


def test_exact_and_float_trace_agree(o4):
    K, R = o4.K, o4.R
    ex = stress_space(K, R, 3, exact=True).combine([2, 1, -1, 1])
    fl = trace(ex, K, R, 2).stress.weighted
    as_float = stress_from_weighted(K, R, 3, ex.cells, ex.weighted)
    assert np.allclose(trace(as_float, K, R, 2).stress.weighted, fl, rtol=1e-9, atol=1e-12)


def test_top_level_trace_is_identity(schlegel4):
    K, R = schlegel4.K, schlegel4.R
    s = stress_space(K, R, 3, exact=True).basis[0]
    assert trace(s, K, R, 3).stress.density == s.density


def test_level_two_image_spans_stress_two(schlegel4):
    K, R = schlegel4.K, schlegel4.R
    s = stress_space(K, R, 3, exact=True).basis[0]
    p = trace(s, K, R, 2).stress.density
    g = stress_space(K, R, 2, exact=True).basis[0].density
    ratio = {a / b for a, b in zip(p, g)}
    assert len(ratio) == 1 and ratio.pop() != 0


@pytest.mark.parametrize("t,factor", [(2, 4), (-1, 1), (Fraction(1, 2), Fraction(1, 4))])
def test_homogeneity_in_the_plane(t, factor):
    doc = gen.gen_octahedron(2, seed=1)
    K, R = doc.K, doc.R
    s = stress_space(K, R, 2, exact=True).combine([1, 2, 3])
    base = trace(s, K, R, 1).stress.density
    assert trace(s.scaled(t), K, R, 1).stress.density == tuple(factor * x for x in base)
    assert homogeneity_check(s, K, R, 1, t).exact_equal


def test_homogeneity_float(o4):
    K, R = o4.K, o4.R
    s = stress_space(K, R, 3).combine([0.3, -1.2, 0.7, 2.0])
    for t in (-2.0, 0.5):
        rep = homogeneity_check(s, K, R, 1, t)
        assert rep.degree == 3 and rep.max_relative <= 1e-9


def test_polynomial_in_the_stress(o4):
    K, R = o4.K, o4.R
    b = stress_space(K, R, 3).basis
    assert polynomiality_probe(b[0], b[1] + b[2], K, R, 1) <= 1e-8


def test_flipping_orientation_changes_sign_by_degree(o4):
    K, R = o4.K, o4.R
    s = stress_space(K, R, 3, exact=True).combine([1, 1, 2, -1])
    O = orient(K)
    ref = frame_class(K, R, O)
    for k in (1, 2, 3):
        a = trace(s, K, R, k, ref).stress.density
        b = trace(s, K, R, k, ref.flipped()).stress.density
        assert b == tuple((-1) ** (3 - k + 1) * x for x in a)


def test_rejects_wrong_levels(o4):
    K, R = o4.K, o4.R
    s2 = stress_space(K, R, 2).basis[0]
    with pytest.raises(ValidationError):
        trace(s2, K, R, 1)
    with pytest.raises(ValidationError):
        trace(stress_space(K, R, 3).basis[0], K, R, 4)


def test_jacobian_rank_cross_polytope(o4):
    rep = jacobian_rank(o4.K, o4.R, 2, seed=1)
    assert rep.rank == 4 <= rep.max_possible and rep.target_dim == 6
    assert rep.gap >= 1e3 and rep.columns_are_stresses


def test_jacobian_vanishes_at_zero(o4):
    rep = jacobian_rank(o4.K, o4.R, 2, coeffs=np.zeros(4))
    assert rep.rank == 0


def test_jacobian_of_simplex_schlegel(schlegel4):
    rep = jacobian_rank(schlegel4.K, schlegel4.R, 2)
    assert rep.rank == rep.max_possible == 1


def test_sign_pattern_of_projected_tetrahedron():
    doc = lifted_tetrahedron()
    s = doc.stresses["lift"]
    assert verify_stress(s, doc.K, doc.R).exact_zero
    rep = tension_positivity(s, doc.K, doc.R, 2, ref_cell=doc.meta["lower_cell"])
    assert rep.interior_positive and rep.silhouette_negative
    assert len(rep.silhouette) == 3 and not rep.hypothesis_violations


@pytest.mark.parametrize("k", [1, 2, 3])
def test_sign_pattern_of_projected_simplex(k):
    doc = lifted_simplex4()
    rep = tension_positivity(doc.stresses["lift"], doc.K, doc.R, k, ref_cell=doc.meta["lower_cell"])
    assert rep.input_positive_interior
    assert rep.interior_positive and rep.silhouette_negative
    assert not rep.hypothesis_violations


def test_convex_window_traces_positive():
    doc = gen.gen_lifted_window(8, 2, seed=1)
    res = find_positive_stress(doc.K, doc.R, 2)
    assert res.feasible
    assert np.all(trace(res.stress, doc.K, doc.R, 1).stress.weighted > 0)
