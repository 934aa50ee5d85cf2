"""On-disk complex documents (JSON) and a small simplicial-mesh import adapter.

A document looks like::

    {
      "format_version": 1,
      "dimension": 2,
      "ambient_dim": 2,
      "vertices": [["0", "0"], ["1/3", "2"], ...],
      "cells": {"1": [[0, 1], ...], "2": [[0, 1, 2], ...]},
      "pinned": [[0, 4], ...],
      "auto_pin_boundary": true,
      "orientation": [1, -1, ...],
      "stresses": {"lift": {"level": 2, "mode": "exact", "cells": [...], "density": ["1/2", ...]}},
      "generator": {"family": "...", "params": {...}, "seed": 0, ...},
      "meta": {...}
    }

Cells of dimension j list indices of their (j-1)-faces, so 1-cells list
vertex pairs.  Coordinates and exact densities are rational strings, which
makes save(load(doc)) byte-identical.
"""
from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any

import numpy as np

from .complex import CellComplex, OrientationClass, build_complex
from .errors import KStressError, ParseError
from .geometry import Realization
from .stress import StressAssignment, stress_from_density, stress_from_weighted

FORMAT_VERSION = 1
REQUIRED = ("format_version", "dimension", "ambient_dim", "vertices", "cells")


@dataclass
class GeneratorConfig:
    """Everything needed to regenerate an example deterministically."""

    family: str
    params: dict = field(default_factory=dict)
    ambient: int | None = None
    seed: int | None = None
    denominator: int = 1000
    perturbation: str = "1/5"

    def as_dict(self) -> dict:
        return {
            "family": self.family,
            "params": self.params,
            "ambient": self.ambient,
            "seed": self.seed,
            "denominator": self.denominator,
            "perturbation": self.perturbation,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GeneratorConfig":
        return cls(d["family"], dict(d.get("params", {})), d.get("ambient"), d.get("seed"),
                   int(d.get("denominator", 1000)), str(d.get("perturbation", "1/5")))


@dataclass
class ComplexDocument:
    complex: CellComplex
    realization: Realization
    orientation: OrientationClass | None = None
    stresses: dict[str, StressAssignment] = field(default_factory=dict)
    config: GeneratorConfig | None = None
    meta: dict = field(default_factory=dict)

    @property
    def K(self) -> CellComplex:
        return self.complex

    @property
    def R(self) -> Realization:
        return self.realization


# ------------------------------------------------------------- encode
def _frac(x) -> str:
    return str(Fraction(x))


def _stress_dict(s: StressAssignment) -> dict:
    out: dict[str, Any] = {"level": s.level, "mode": "exact" if s.exact else "float", "cells": list(s.cells)}
    if s.exact:
        out["density"] = [_frac(x) for x in s.density]
    else:
        out["weighted"] = [float(x) for x in s.weighted]
    return out


def to_dict(doc: ComplexDocument) -> dict:
    K, R = doc.complex, doc.realization
    out: dict[str, Any] = {
        "format_version": FORMAT_VERSION,
        "dimension": K.dim,
        "ambient_dim": R.ambient_dim,
        "vertices": [[_frac(x) for x in c] for c in R.coords],
        "cells": {str(j): [list(f) for f in K.facets[j]] for j in range(1, K.dim + 1)},
        "pinned": sorted(
            [j, i] for j in range(K.dim + 1) for i in K.pinned[j]
            if not (K.auto_pin_boundary and K.boundary[j][i])
        ),
        "auto_pin_boundary": K.auto_pin_boundary,
    }
    if doc.orientation is not None:
        out["orientation"] = list(doc.orientation.signs)
    if doc.stresses:
        out["stresses"] = {name: _stress_dict(s) for name, s in sorted(doc.stresses.items())}
    if doc.config is not None:
        out["generator"] = doc.config.as_dict()
    if doc.meta:
        out["meta"] = doc.meta
    return out


def dumps(doc: ComplexDocument) -> str:
    return json.dumps(to_dict(doc), indent=1, sort_keys=True) + "\n"


def save(path: str | os.PathLike, doc: ComplexDocument) -> None:
    """Write atomically: a temporary file in the target directory, then rename."""
    write_text_atomic(path, dumps(doc))


def write_text_atomic(path: str | os.PathLike, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ------------------------------------------------------------- decode
def _parse_fraction(x, where: str) -> Fraction:
    try:
        if isinstance(x, bool):
            raise ValueError
        if isinstance(x, float):
            return Fraction(repr(x))
        return Fraction(x) if not isinstance(x, str) else Fraction(x.strip())
    except (ValueError, ZeroDivisionError, TypeError):
        raise ParseError(f"{where}: cannot read {x!r} as a number") from None


def _parse_stress(name: str, d: dict, K: CellComplex, R: Realization) -> StressAssignment:
    where = f"stresses.{name}"
    try:
        level = int(d["level"])
        cells = [int(c) for c in d["cells"]]
        mode = d.get("mode", "exact" if "density" in d else "float")
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{where}: missing or malformed field {exc}") from None
    if not 1 <= level <= K.dim:
        raise ParseError(f"{where}.level: {level} outside 1..{K.dim}")
    n_cells = K.n_cells[level - 1]
    for c in cells:
        if not 0 <= c < n_cells:
            raise ParseError(f"{where}.cells: {c} is not a {level - 1}-cell")
    if mode == "exact":
        vals = d.get("density")
        if vals is None or len(vals) != len(cells):
            raise ParseError(f"{where}.density: need one value per cell")
        return stress_from_density(K, R, level, cells, [_parse_fraction(v, f"{where}.density[{i}]") for i, v in enumerate(vals)])
    vals = d.get("weighted")
    if vals is None or len(vals) != len(cells):
        raise ParseError(f"{where}.weighted: need one value per cell")
    return stress_from_weighted(K, R, level, cells, [float(_parse_fraction(v, f"{where}.weighted[{i}]")) for i, v in enumerate(vals)])


def from_dict(data: dict) -> ComplexDocument:
    if not isinstance(data, dict):
        raise ParseError("document root must be an object")
    missing = [k for k in REQUIRED if k not in data]
    if missing:
        raise ParseError(f"document is missing section(s): {', '.join(missing)}")
    if data["format_version"] != FORMAT_VERSION:
        raise ParseError(f"format_version {data['format_version']!r} is not supported (expected {FORMAT_VERSION})")
    verts = data["vertices"]
    if not isinstance(verts, list) or not verts:
        raise ParseError("vertices: expected a non-empty list of coordinate lists")
    coords = [[_parse_fraction(x, f"vertices[{i}][{c}]") for c, x in enumerate(v)] for i, v in enumerate(verts)]
    if any(len(c) != int(data["ambient_dim"]) for c in coords):
        raise ParseError(f"vertices: every vertex needs {data['ambient_dim']} coordinates")
    cells = data["cells"]
    if not isinstance(cells, dict) or len(cells) != int(data["dimension"]):
        raise ParseError(f"cells: expected one entry per dimension 1..{data['dimension']}")
    try:
        K = build_complex({
            "n_vertices": len(coords),
            "cells": cells,
            "pinned": data.get("pinned", []),
            "auto_pin_boundary": data.get("auto_pin_boundary", True),
        })
    except KStressError as exc:
        raise ParseError(f"cells: {exc}") from None
    R = Realization.from_values(coords)
    O = None
    if "orientation" in data:
        signs = data["orientation"]
        if len(signs) != K.n_cells[K.dim] or any(s not in (1, -1) for s in signs):
            raise ParseError("orientation: need one sign (+1/-1) per top cell")
        O = OrientationClass(tuple(int(s) for s in signs))
    stresses = {name: _parse_stress(name, sd, K, R) for name, sd in data.get("stresses", {}).items()}
    cfg = GeneratorConfig.from_dict(data["generator"]) if "generator" in data else None
    return ComplexDocument(K, R, O, stresses, cfg, dict(data.get("meta", {})))


def loads(text: str) -> ComplexDocument:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        absent = [k for k in REQUIRED if f'"{k}"' not in text]
        hint = f"; missing section(s): {', '.join(absent)}" if absent else ""
        raise ParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}{hint}") from None
    return from_dict(data)


def load(path: str | os.PathLike) -> ComplexDocument:
    path = Path(path)
    if path.suffix == ".simp":
        return load_simp(path)
    return loads(path.read_text(encoding="utf-8"))


# ------------------------------------------------------- .simp adapter
def load_simp(path: str | os.PathLike) -> ComplexDocument:
    """Read a plain simplicial mesh: ``v x y ...`` and ``s i j ...`` lines.

    Vertex indices are 0-based; ``#`` starts a comment.
    """
    coords, simplices = [], []
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].split()
        if not line:
            continue
        tag, rest = line[0], line[1:]
        if tag == "v":
            coords.append([_parse_fraction(x, f"line {lineno}") for x in rest])
        elif tag == "s":
            try:
                simplices.append([int(x) for x in rest])
            except ValueError:
                raise ParseError(f"line {lineno}: simplex indices must be integers") from None
        else:
            raise ParseError(f"line {lineno}: unknown record {tag!r} (expected 'v' or 's')")
    if not coords or not simplices:
        raise ParseError(f"{path}: need at least one 'v' and one 's' record")
    try:
        K = CellComplex.from_simplices(simplices)
    except KStressError as exc:
        raise ParseError(f"{path}: {exc}") from None
    if K.n_cells[0] != len(coords):
        raise ParseError(f"{path}: {len(coords)} vertices given but simplices use {K.n_cells[0]}")
    return ComplexDocument(K, Realization.from_values(coords))


def stress_to_jsonable(s: StressAssignment) -> dict:
    d = _stress_dict(s)
    d["weighted"] = [float(x) for x in np.asarray(s.weighted)]
    return d
