from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest

from kstress import generators as gen
from kstress.complex import (
    CellComplex, build_complex, f_g_h, homology_rank_mod2, is_cycle, is_k_primitive,
    manifold_report, orient, stars_links_dual,
)
from kstress.errors import BuildError, NonOrientable

TETRA = list(combinations(range(4), 3))


def test_triangle_boundary_is_closed_1_manifold():
    K = CellComplex.from_simplices([(0, 1), (1, 2), (0, 2)])
    assert K.dim == 1 and K.closed
    assert not any(K.boundary[0])
    assert manifold_report(K).is_manifold


def test_tetrahedron_boundary_edges_in_two_triangles():
    K = CellComplex.from_simplices(TETRA)
    assert K.closed
    assert all(len(co) == 2 for co in K.cofaces[1])


def test_missing_facet_reference_rejected():
    with pytest.raises(BuildError):
        build_complex({"n_vertices": 3, "cells": {"1": [[0, 1], [1, 2]], "2": [[0, 1, 2]]}})


def test_boundary_squared_vanishes_on_polytope_lattice():
    K, _ = gen.convex_hull_complex([(0, 0, 0), (2, 0, 0), (0, 2, 0), (2, 2, 0),
                                    (0, 0, 2), (2, 0, 2), (0, 2, 2), (2, 2, 2)])
    assert K.n_cells == (8, 12, 6, 1)
    for j in range(2, K.dim + 1):
        B = np.array(K.boundary_matrix(j))
        A = np.array(K.boundary_matrix(j - 1))
        assert not (B @ A).any()


@pytest.mark.parametrize("k,expected", [(0, 1), (1, 0), (2, 1)])
def test_sphere_homology(k, expected):
    assert homology_rank_mod2(CellComplex.from_simplices(TETRA), k) == expected


def test_torus_first_homology():
    assert homology_rank_mod2(CellComplex.from_simplices(gen.TORUS_7), 1) == 2


def test_rp2_combinatorics_and_orientability():
    K = CellComplex.from_simplices(gen.RP2_6)
    assert K.n_cells == (6, 15, 10)
    assert [homology_rank_mod2(K, j) for j in range(3)] == [1, 1, 1]
    with pytest.raises(NonOrientable):
        orient(K)


def test_orientation_of_sphere_is_cycle_and_unique_up_to_flip():
    K = CellComplex.from_simplices(TETRA)
    O = orient(K)
    assert is_cycle(K, O) and is_cycle(K, O.flipped())
    assert orient(K).signs == O.signs
    assert O.flipped().canonical(K).signs == O.signs


def test_disconnected_orientation_components():
    K = CellComplex.from_simplices([(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)])
    assert len(K.top_components()) == 2
    O = orient(K)
    assert is_cycle(K, O)
    flipped_one = O.signs[:3] + tuple(-s for s in O.signs[3:])
    from kstress.complex import OrientationClass
    assert is_cycle(K, OrientationClass(flipped_one))


def test_interior_vertex_star_link_dual(schlegel3):
    K = schlegel3.complex
    sld = stars_links_dual(K, (0, 3))
    assert sum(1 for j, _ in sld.star if j == 2) == 3
    # classical link: the three outer edges, a 3-cycle
    assert len(sld.classical_link) == 3
    assert sld.link_betti == (1, 1)
    assert sld.dual_block_betti[0] == 1 and not any(sld.dual_block_betti[1:])
    assert len(sld.dual_boundary_cells) == 3


def test_edge_link_is_two_points():
    K = CellComplex.from_simplices(TETRA)
    sld = stars_links_dual(K, (1, 0))
    assert sum(1 for j, _ in sld.star if j == 2) == 2
    assert sld.link_betti == (2,)


def test_top_cell_dual_is_a_point():
    K = CellComplex.from_simplices(TETRA)
    sld = stars_links_dual(K, (2, 0))
    assert len(sld.dual_block) == 1 and sld.dual_block_betti == (1,)


def test_dual_blocks_are_homology_balls(o4):
    K = o4.complex
    for j in range(K.dim):
        for i in list(K.cells(j))[:4]:
            sld = stars_links_dual(K, (j, i))
            assert sld.dual_block_betti[0] == 1 and not any(sld.dual_block_betti[1:])
            sphere = [0] * (K.dim - j)
            sphere[0] += 1
            sphere[-1] += 1
            assert list(sld.link_betti) == sphere


def test_cross_polytope_fgh(o4):
    f, g, h = f_g_h(o4.complex, 4)
    assert f.counts == (8, 24, 32, 16)
    assert h[2] == 6 and g[2] == 2 and g[0] == 1
    assert all(isinstance(x, int) for x in g + h)


def test_primitivity():
    K = gen.gen_schlegel_simplex(3, closed=False).complex
    assert is_k_primitive(K, 0)
    square = [(0, 4, 8), (4, 1, 8), (1, 5, 8), (5, 2, 8), (2, 6, 8), (6, 3, 8), (3, 7, 8), (7, 0, 8)]
    assert not is_k_primitive(CellComplex.from_simplices(square), 0)
    closed = CellComplex.from_simplices(TETRA)
    assert is_k_primitive(closed, closed.dim - 1)


@pytest.mark.parametrize("simps", [TETRA, gen.TORUS_7, gen.RP2_6, gen.icosahedron_triangles()])
def test_euler_characteristic_matches_homology(simps):
    K = CellComplex.from_simplices(simps)
    assert K.euler_characteristic() == sum((-1) ** j * homology_rank_mod2(K, j) for j in range(K.dim + 1))


def test_hull_merges_repeated_points():
    cube = [(x, y, z) for x in (0, 1) for y in (0, 1) for z in (0, 1)]
    K, R = gen.convex_hull_complex(cube + cube[:3] + [(Fraction(1, 2),) * 3])
    assert K.n_cells == (8, 12, 6, 1)
