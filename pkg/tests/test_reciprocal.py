import numpy as np
import pytest

from kstress import generators as gen
from kstress.complex import orient
from kstress.errors import ClosureFailure, TopologyError
from kstress.reciprocal import (
    build_reciprocal, local_reciprocal, mean_barycenters, perpendicularity_defect,
    random_barycenters, reciprocal_volume,
)
from kstress.stress import stress_from_weighted, stress_space, zero_stress


def _shoelace(pts):
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * (x @ np.roll(y, -1) - y @ np.roll(x, -1))


def test_open_k4_reciprocal_is_perpendicular_triangle(schlegel3):
    K, R = schlegel3.K, schlegel3.R
    s = stress_space(K, R, 2, exact=True).basis[0]
    rec = build_reciprocal(s, K, R)
    assert len(rec.cells) == 3
    assert perpendicularity_defect(rec, K, R) == 0.0
    assert set(rec.labels.values()) == {"proper"}
    area = reciprocal_volume(rec, K, R, (0, 3))
    assert abs(abs(area) - abs(_shoelace(rec.array()))) <= 1e-12
    assert area > 0


def test_closed_k4_labels(schlegel4):
    doc = gen.gen_schlegel_simplex(3)
    K, R = doc.K, doc.R
    s = stress_space(K, R, 2, exact=True).basis[0]
    outer = {c for c in s.cells if 3 not in K.verts[1][c]}
    sign = {c: (v > 0) for c, v in zip(s.cells, s.density)}
    # the outer triangle and the spokes carry opposite signs
    assert len({sign[c] for c in outer}) == 1 and len(set(sign.values())) == 2
    rec = build_reciprocal(s, K, R)
    for c, lab in rec.labels.items():
        assert lab == ("proper" if sign[c] else "improper")
    flipped = build_reciprocal(s.scaled(-1), K, R).labels
    assert all(flipped[c] != rec.labels[c] for c in rec.labels)


def test_zero_stress_collapses(o4):
    K, R = o4.K, o4.R
    rec = build_reciprocal(zero_stress(K, R, K.dim), K, R)
    assert set(rec.labels.values()) == {"degenerate"}
    assert np.all(rec.array() == 0)


def test_reciprocal_is_linear_in_the_stress(o4):
    K, R = o4.K, o4.R
    b = stress_space(K, R, 3).basis
    r1 = build_reciprocal(b[0], K, R).array()
    r2 = build_reciprocal(b[1], K, R).array()
    r12 = build_reciprocal(b[0].scaled(2.0) + b[1].scaled(-3.0), K, R).array()
    assert np.allclose(r12, 2 * r1 - 3 * r2, atol=1e-12)


def test_torus_needs_trivial_h1():
    doc = gen.gen_torus(2, seed=1)
    s = stress_space(doc.K, doc.R, 2).basis[0]
    with pytest.raises(TopologyError):
        build_reciprocal(s, doc.K, doc.R)


def test_non_stress_does_not_close(schlegel4):
    doc = gen.gen_schlegel_simplex(3)
    cells = stress_space(doc.K, doc.R, 2).cells
    bad = stress_from_weighted(doc.K, doc.R, 2, cells, np.arange(1.0, 7.0))
    with pytest.raises(ClosureFailure):
        build_reciprocal(bad, doc.K, doc.R)


def test_volume_independent_of_flag_and_barycenters(o4):
    K, R = o4.K, o4.R
    O = orient(K)
    s = stress_space(K, R, 3, exact=True).combine([1, 2, -1, 3])
    rng = np.random.default_rng(0)
    for cell in [(0, 0), (0, 5), (1, 3), (1, 11)]:
        rec = local_reciprocal(s, K, R, cell, O)
        ref = reciprocal_volume(rec, K, R, cell, O=O)
        for flag in K.flags(cell)[:6]:
            v = reciprocal_volume(rec, K, R, cell, flag, random_barycenters(rec, K, rng), O=O)
            assert abs(v - ref) <= 1e-9 * max(1.0, abs(ref))
        assert reciprocal_volume(rec, K, R, cell, vb=mean_barycenters(rec, K), O=O) == pytest.approx(ref)


def test_top_cell_volume_is_a_sign(o4):
    K, R = o4.K, o4.R
    s = stress_space(K, R, 3).basis[0]
    for D in K.cells(3):
        rec = local_reciprocal(s, K, R, (3, D), orient(K))
        assert abs(abs(reciprocal_volume(rec, K, R, (3, D))) - 1) <= 1e-12
