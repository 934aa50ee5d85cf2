import json
from fractions import Fraction

import pytest

from kstress import generators as gen
from kstress import io
from kstress.cli import main
from kstress.errors import ParseError
from kstress.stress import stress_space


def test_round_trip_is_byte_identical(tmp_path, o4):
    doc = o4
    doc.stresses["s3"] = stress_space(doc.K, doc.R, 3, exact=True).basis[0]
    p = tmp_path / "o4.json"
    io.save(p, doc)
    text = p.read_text()
    again = io.load(p)
    assert io.dumps(again) == text
    assert again.stresses["s3"].density == doc.stresses["s3"].density
    del doc.stresses["s3"]


def test_rational_coordinates_stay_exact():
    doc = gen.gen_schlegel_simplex(3)
    data = io.to_dict(doc)
    data["vertices"][3] = ["1/3", "2/7"]
    back = io.from_dict(json.loads(json.dumps(data)))
    assert back.R.coords[3] == (Fraction(1, 3), Fraction(2, 7))
    assert io.to_dict(back)["vertices"][3] == ["1/3", "2/7"]


def test_float_stress_round_trip():
    doc = gen.gen_schlegel_simplex(3)
    doc.stresses["f"] = stress_space(doc.K, doc.R, 2).basis[0]
    back = io.loads(io.dumps(doc))
    assert (back.stresses["f"].weighted == doc.stresses["f"].weighted).all()


def test_truncated_file_reports_position_and_missing_sections():
    text = io.dumps(gen.gen_schlegel_simplex(3))
    with pytest.raises(ParseError, match=r"line \d+, column \d+.*missing section"):
        io.loads(text[: len(text) // 3])


def test_missing_section():
    data = io.to_dict(gen.gen_schlegel_simplex(3))
    del data["cells"]
    with pytest.raises(ParseError, match="cells"):
        io.from_dict(data)


def test_version_mismatch():
    data = io.to_dict(gen.gen_schlegel_simplex(3))
    data["format_version"] = 99
    with pytest.raises(ParseError, match="format_version"):
        io.from_dict(data)


def test_bad_number_is_located():
    data = io.to_dict(gen.gen_schlegel_simplex(3))
    data["vertices"][1][0] = "one"
    with pytest.raises(ParseError, match=r"vertices\[1\]\[0\]"):
        io.from_dict(data)


def test_simp_import(tmp_path):
    p = tmp_path / "k4.simp"
    p.write_text("# K4 in the plane\nv 0 0\nv 3 0\nv 0 3\nv 1 1\ns 0 1 3\ns 1 2 3\ns 0 2 3\n")
    doc = io.load(p)
    assert doc.K.n_cells == (4, 6, 3)
    assert stress_space(doc.K, doc.R, 2).dim == 1
    p.write_text("v 0 0\nq 1 2\n")
    with pytest.raises(ParseError, match="line 2"):
        io.load(p)


def test_generators_are_deterministic():
    a = gen.gen_cross_polytope_boundary(4, 3, seed=11)
    b = gen.gen_cross_polytope_boundary(4, 3, seed=11)
    assert io.dumps(a) == io.dumps(b)
    assert io.dumps(gen.regenerate(a.config)) == io.dumps(a)
    assert io.dumps(gen.gen_cross_polytope_boundary(4, 3, seed=12)) != io.dumps(a)


@pytest.mark.parametrize("doc", [
    gen.gen_stacked_sphere(8, 2, seed=1),
    gen.gen_lifted_window(7, 2, seed=3),
    gen.gen_convex_polytope(10, 3, seed=2, kind="lattice"),
    gen.gen_twisted_triangulation(-1),
])
def test_regenerate_from_config(doc):
    assert io.dumps(gen.regenerate(io.loads(io.dumps(doc)).config)) == io.dumps(doc)


def test_cli_workflow(tmp_path, capsys):
    out = tmp_path / "o4.json"
    assert main(["gen", "cross-polytope", "--n", "4", "--ambient", "3", "--seed", "7", "--output", str(out)]) == 0
    capsys.readouterr()
    assert main(["dim", "--input", str(out), "--k", "3"]) == 0
    assert capsys.readouterr().out.strip() == "4"
    res = tmp_path / "trace.json"
    assert main(["trace", "--input", str(out), "--k", "2", "--mode", "exact", "--output", str(res)]) == 0
    assert json.loads(res.read_text())


def test_cli_exit_codes(tmp_path):
    tw = tmp_path / "tw.json"
    assert main(["gen", "twisted-triangulation", "--output", str(tw)]) == 0
    assert main(["spiderweb", "--input", str(tw)]) == 3
    assert main(["dim", "--input", str(tmp_path / "missing.json"), "--k", "2"]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text(tw.read_text()[:100])
    assert main(["check", "--input", str(bad)]) == 2
