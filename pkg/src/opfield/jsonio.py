"""JSON formats for complexes, algebras, pairings, surfaces and theories.

All rationals serialize as strings ``"p/q"`` (or ``"p"`` for integers); keys
are written sorted so emitted documents are byte-stable.  Every document this
module emits re-parses to an equal value.

Formats:

* complex:       ``{"dims": {"-1": 3}, "d": {"0": [[r, c, "p/q"], ...]}}``
  where key ``"n"`` holds the matrix of ``d_n`` (degree n to n-1) as sparse
  triplets.
* algebra:       ``{"kind": "uLie", "carrier": <complex>,
  "bracket": [[i, j, k, "p/q"], ...], "unit": [[k, "p/q"], ...]}`` with
  tensors indexed against the carrier's per-degree bases flattened in degree
  order (inputs first, output last); associative algebras use ``"mu"``,
  Poisson algebras additionally ``"pbracket"``.
* presymplectic: ``{"carrier": <complex>, "omega": [[i, j, "p/q"], ...]}``.
* surface:       ``{"vertices": n, "vertex_order": [...],
  "triangles": [[a, b, c], ...], "boundary_edges": [[a, b], ...]}``.
* theory:        ``{"kind": "uLie", "objects": [...],
  "morphisms": [{"name", "src", "tgt"}], "compose": [["g", "f", "gf"], ...],
  "orth": [["f1", "f2"], ...], "algebras": {obj: <algebra>},
  "actions": {morph: {"0": [[r, c, "p/q"], ...]}}}``.
"""

from __future__ import annotations

import json
from typing import Dict, Tuple

from . import operads
from .algebras import DgAlgebra, PresymplecticComplex
from .cherns import TriangulatedSurface
from .complexes import ChainComplex, ChainMap
from .errors import StructuralError
from .exact import RationalMatrix, rat, rat_str
from .fieldtheory import FieldTheory, OrthCategory

_TENSOR_KEYS = {
    operads.MU: "mu",
    operads.BRACKET: "bracket",
    operads.PBRACKET: "pbracket",
    operads.ETA: "unit",
}
_TENSOR_NAMES = {v: k for k, v in _TENSOR_KEYS.items()}


def matrix_to_triplets(m: RationalMatrix) -> list:
    return [[r, c, rat_str(v)] for (r, c), v in sorted(m.entries.items())]


def matrix_from_triplets(rows: int, cols: int, triplets) -> RationalMatrix:
    return RationalMatrix(rows, cols, {(int(r), int(c)): rat(v) for r, c, v in triplets})


def complex_to_json(c: ChainComplex) -> dict:
    return {
        "dims": {str(n): d for n, d in sorted(c.dims.items())},
        "d": {str(n): matrix_to_triplets(m) for n, m in sorted(c.diffs.items())},
    }


def complex_from_json(doc: dict) -> ChainComplex:
    if "dims" not in doc:
        raise StructuralError("complex document needs a 'dims' field")
    dims = {int(n): int(d) for n, d in doc["dims"].items()}
    diffs = {}
    for n, triplets in doc.get("d", {}).items():
        n = int(n)
        rows = dims.get(n - 1, 0)
        cols = dims.get(n, 0)
        diffs[n] = matrix_from_triplets(rows, cols, triplets)
    return ChainComplex(dims, diffs)


def algebra_to_json(a: DgAlgebra) -> dict:
    doc = {"kind": a.kind, "carrier": complex_to_json(a.carrier)}
    for gen in a.presentation.alphabet.generators:
        key = _TENSOR_KEYS[gen.name]
        tensor = a.structure[gen.name]
        if gen.arity == 0:
            doc[key] = [[i, rat_str(v)] for i, v in sorted(tensor.items())]
        else:
            rows = []
            for idx, cell in sorted(tensor.items()):
                for out, v in sorted(cell.items()):
                    rows.append(list(idx) + [out, rat_str(v)])
            doc[key] = rows
    return doc


def algebra_from_json(doc: dict) -> DgAlgebra:
    for field in ("kind", "carrier"):
        if field not in doc:
            raise StructuralError(f"algebra document needs a {field!r} field")
    kind = doc["kind"]
    carrier = complex_from_json(doc["carrier"])
    presentation = operads.named_presentation(kind)
    structure = {}
    for gen in presentation.alphabet.generators:
        key = _TENSOR_KEYS[gen.name]
        rows = doc.get(key, [])
        if gen.arity == 0:
            structure[gen.name] = {int(i): rat(v) for i, v in rows}
        else:
            tensor: Dict[Tuple[int, ...], dict] = {}
            for row in rows:
                *idx, out, v = row
                if len(idx) != gen.arity:
                    raise StructuralError(
                        f"{key} entry {row} has {len(idx)} inputs, expected {gen.arity}")
                cell = tensor.setdefault(tuple(int(i) for i in idx), {})
                cell[int(out)] = rat(v)
            structure[gen.name] = tensor
    return DgAlgebra(carrier, kind, structure)


def presymplectic_to_json(p: PresymplecticComplex) -> dict:
    return {
        "carrier": complex_to_json(p.carrier),
        "omega": [[i, j, rat_str(v)] for (i, j), v in sorted(p.omega.items())],
    }


def presymplectic_from_json(doc: dict) -> PresymplecticComplex:
    if "carrier" not in doc or "omega" not in doc:
        raise StructuralError("presymplectic document needs 'carrier' and 'omega' fields")
    carrier = complex_from_json(doc["carrier"])
    omega = {(int(i), int(j)): rat(v) for i, j, v in doc["omega"]}
    return PresymplecticComplex(carrier, omega)


def surface_to_json(s: TriangulatedSurface) -> dict:
    return {
        "vertices": s.n_vertices,
        "vertex_order": list(s.vertex_order),
        "triangles": [list(t) for t in s.triangles],
        "boundary_edges": sorted(sorted(e) for e in s.boundary_edge_set),
    }


def surface_from_json(doc: dict) -> TriangulatedSurface:
    if "vertices" not in doc or "triangles" not in doc:
        raise StructuralError("surface document needs 'vertices' and 'triangles' fields")
    return TriangulatedSurface(
        doc["vertices"],
        [tuple(t) for t in doc["triangles"]],
        boundary_edges=[tuple(e) for e in doc.get("boundary_edges", [])],
        vertex_order=doc.get("vertex_order"),
    )


def chain_map_components_to_json(f: ChainMap) -> dict:
    return {str(n): matrix_to_triplets(m) for n, m in sorted(f.components.items())}


def theory_to_json(ft: FieldTheory) -> dict:
    if ft.is_quantized:
        raise StructuralError("quantized theories are reported, not serialized")
    cat = ft.base
    morphisms = [
        {"name": m, "src": src, "tgt": tgt}
        for m, (src, tgt) in sorted(cat.morphisms.items())
        if not cat.is_identity(m)
    ]
    return {
        "kind": ft.kind,
        "objects": sorted(cat.objects),
        "morphisms": morphisms,
        "compose": sorted([g, f, gf] for (g, f), gf in cat._compose.items()),
        "orth": sorted([f1, f2] for f1, f2 in cat.orth),
        "algebras": {obj: algebra_to_json(ft.algebra(obj)) for obj in sorted(cat.objects)},
        "actions": {
            m: chain_map_components_to_json(ft.action[m])
            for m in sorted(cat.morphisms)
            if not cat.is_identity(m)
        },
    }


def theory_from_json(doc: dict) -> FieldTheory:
    for field in ("kind", "objects", "algebras"):
        if field not in doc:
            raise StructuralError(f"theory document needs a {field!r} field")
    morphisms = {m["name"]: (m["src"], m["tgt"]) for m in doc.get("morphisms", [])}
    compose = {(g, f): gf for g, f, gf in doc.get("compose", [])}
    cat = OrthCategory(doc["objects"], morphisms, compose, orth=[
        (f1, f2) for f1, f2 in doc.get("orth", [])])
    algebras = {obj: algebra_from_json(adoc) for obj, adoc in doc["algebras"].items()}
    actions = {}
    for m, comps in doc.get("actions", {}).items():
        src, tgt = cat.morphisms[m]
        a, b = algebras[src], algebras[tgt]
        components = {}
        for n, triplets in comps.items():
            n = int(n)
            components[n] = matrix_from_triplets(b.carrier.dim(n), a.carrier.dim(n), triplets)
        actions[m] = ChainMap(a.carrier, b.carrier, components)
    return FieldTheory(cat, doc["kind"], algebras, actions)


def sniff_type(doc: dict) -> str:
    """Classify a parsed JSON document by its top-level fields."""
    if "triangles" in doc:
        return "surface"
    if "objects" in doc and "algebras" in doc:
        return "theory"
    if "omega" in doc:
        return "presymplectic"
    if "kind" in doc and "carrier" in doc:
        return "algebra"
    if "dims" in doc:
        return "complex"
    raise StructuralError("cannot determine document type from its fields")


def dumps(obj: dict) -> str:
    """Canonical serialization: sorted keys, two-space indent, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"
