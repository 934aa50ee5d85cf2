from __future__ import annotations

import sys
from fractions import Fraction

import pytest

from kstress import generators as gen


def lifted_tetrahedron():
    """Closed boundary of a tetrahedron projected to the plane (triangle plus centre)."""
    pts = [(0, 0), (4, 0), (0, 4), (1, 1)]
    return gen.gen_lifted_projection(pts, [sum(Fraction(x) ** 2 for x in p) for p in pts], "full")


def lifted_simplex4():
    """Closed boundary of a 4-simplex projected to R^3."""
    pts = [(0, 0, 0), (4, 0, 0), (0, 4, 0), (0, 0, 4), (1, 1, 1)]
    return gen.gen_lifted_projection(pts, [sum(Fraction(x) ** 2 for x in p) for p in pts], "full")


def trace_corpus():
    """Generated complexes of dimension 2 and 3 realized in R^d."""
    return [
        gen.gen_octahedron(2, seed=1),
        gen.gen_icosahedron(2, seed=2),
        gen.gen_stacked_sphere(9, 2, seed=3),
        gen.gen_schlegel_simplex(3),
        gen.gen_schlegel_simplex(3, closed=False),
        gen.gen_torus(2, seed=1),
        gen.gen_lifted_window(8, 2, seed=1),
        lifted_tetrahedron(),
        gen.gen_cross_polytope_boundary(4, 3, seed=5),
        gen.gen_schlegel_simplex(4),
        gen.gen_schlegel_simplex(4, closed=False),
        gen.gen_lifted_window(8, 3, seed=2),
        lifted_simplex4(),
    ]


@pytest.fixture(scope="session")
def o4():
    return gen.gen_cross_polytope_boundary(4, 3, seed=7)


@pytest.fixture(scope="session")
def schlegel3():
    return gen.gen_schlegel_simplex(3, closed=False)


@pytest.fixture(scope="session")
def schlegel4():
    return gen.gen_schlegel_simplex(4)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(mod.LINES):
            terminalreporter.write_line(line)
