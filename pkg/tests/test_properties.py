from fractions import Fraction

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from kstress import generators as gen
from kstress import io
from kstress.geometry import OrientedFacetCycle, Realization, generalized_volume, slab_volume
from kstress.stress import stress_space, verify_stress
from kstress.trace import trace

FEW = settings(max_examples=15, deadline=None)
fractions = st.fractions(min_value=-5, max_value=5, max_denominator=20)
seeds = st.integers(0, 10_000)


@FEW
@given(seeds, st.integers(5, 9))
def test_plane_sphere_stress_dimension(seed, n):
    doc = gen.gen_stacked_sphere(n, 2, seed=seed)
    assert stress_space(doc.K, doc.R, 2, exact=True).dim == n - 3


@FEW
@given(seeds, st.lists(fractions, min_size=2, max_size=2))
def test_stress_space_translation_invariant(seed, shift):
    doc = gen.gen_octahedron(2, seed=seed)
    a = stress_space(doc.K, doc.R, 2, exact=True)
    b = stress_space(doc.K, doc.R.translated(shift), 2, exact=True)
    assert [x.density for x in a.basis] == [x.density for x in b.basis]


@FEW
@given(st.lists(st.tuples(fractions, fractions), min_size=4, max_size=4), fractions,
       st.tuples(fractions, fractions))
def test_polygon_volume_scales_and_ignores_base(pts, lam, base):
    cyc = OrientedFacetCycle(tuple(pts), ((0, 1), (1, 2), (2, 3), (3, 0)))
    v = generalized_volume(cyc)
    scaled = OrientedFacetCycle(tuple((lam * x, lam * y) for x, y in pts), cyc.simplices)
    assert generalized_volume(scaled) == lam**2 * v
    assert generalized_volume(cyc, base) == v == slab_volume(cyc, base)
    # shoelace oracle
    xs, ys = zip(*pts)
    assert v == sum(xs[i] * ys[(i + 1) % 4] - xs[(i + 1) % 4] * ys[i] for i in range(4)) / 2


@FEW
@given(st.lists(st.integers(-9, 9), min_size=3, max_size=3).filter(any), fractions)
def test_trace_exact_homogeneity(coeffs, t):
    doc = gen.gen_octahedron(2, seed=4)
    K, R = doc.K, doc.R
    s = stress_space(K, R, 2, exact=True).combine(coeffs)
    base = trace(s, K, R, 1)
    assert base.residuals.exact_zero
    assert trace(s.scaled(t), K, R, 1).stress.density == tuple(t**2 * x for x in base.stress.density)


@FEW
@given(st.lists(st.floats(-3, 3), min_size=4, max_size=4))
def test_float_combinations_are_stresses(coeffs):
    doc = gen.gen_cross_polytope_boundary(4, 3, seed=7)
    s = stress_space(doc.K, doc.R, 3).combine(coeffs)
    if np.abs(s.weighted).max() > 1e-6:
        assert verify_stress(s, doc.K, doc.R).max_relative <= 1e-9


@FEW
@given(st.lists(st.tuples(fractions, fractions), min_size=4, max_size=4))
def test_coordinates_round_trip(pts):
    doc = gen.gen_schlegel_simplex(3)
    doc = io.ComplexDocument(doc.K, Realization.from_values(pts))
    back = io.loads(io.dumps(doc))
    assert back.R.coords == tuple(tuple(Fraction(x) for x in p) for p in pts)
