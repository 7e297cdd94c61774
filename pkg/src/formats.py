"""JSON codecs for the CLI and plain-text table rendering."""

import json
import sys
from typing import Any, Optional

from errors import StructuralError
from services.arrangement_service import IncidenceStructure
from services.braid_service import NormalForm
from services.germ_service import DecoratedGerm
from services.lefschetz_service import IncidenceMatrix, NestedFamily
from services.mcg_service import Curve, MappingClassRecord
from services.plumbing_service import PlumbingGraph
from services.wiring_service import WiringDiagram


def load_json(path: Optional[str]) -> Any:
    """Read JSON from a file, or stdin when no path is given."""
    if path is None or path == "-":
        return json.loads(sys.stdin.read())
    with open(path, "r", encoding="utf-8") as handle:
        return json.loads(handle.read())


def _require(data: Any, key: str, kind: str):
    if not isinstance(data, dict) or key not in data:
        raise StructuralError(f"{kind} JSON needs a '{key}' field")
    return data[key]


def graph_from_json(data: dict) -> PlumbingGraph:
    """{"vertices": [{"id": 0, "self_int": -3}, ...], "edges": [[0, 1], ...], "root": 0}"""
    vertices = []
    for entry in _require(data, "vertices", "Graph"):
        if isinstance(entry, dict):
            vertices.append((int(entry["id"]), int(entry["self_int"])))
        else:
            vertices.append((int(entry[0]), int(entry[1])))
    edges = [tuple(int(x) for x in edge) for edge in data.get("edges", [])]
    root = data.get("root")
    return PlumbingGraph.build(vertices, edges, None if root is None else int(root))


def graph_to_json(G: PlumbingGraph) -> dict:
    return {
        "vertices": [{"id": v, "self_int": G.self_int[v]} for v in G.vertices],
        "edges": [list(edge) for edge in G.edges],
        "root": G.root,
    }


def germ_from_json(data: dict) -> DecoratedGerm:
    """{"m": 2, "weights": [2, 2], "tangency": [[0, 1], [1, 0]]}; m defaults to the number of weights."""
    weights = _require(data, "weights", "Germ")
    tangency = _require(data, "tangency", "Germ")
    return DecoratedGerm(int(data.get("m", len(weights))), tuple(weights), tuple(tuple(row) for row in tangency))


def germ_to_json(g: DecoratedGerm) -> dict:
    return {"m": g.m, "weights": list(g.weights), "tangency": [list(row) for row in g.tangency]}


def braid_to_json(braid: NormalForm) -> dict:
    return {
        "infimum": braid.infimum,
        "factors": [[x + 1 for x in factor] for factor in braid.factors],
        "word": list(braid.to_word().letters),
    }


def curve_to_json(c: Curve) -> dict:
    """{"m": 4, "beta": [2, -1], "core": [1, 2]}: the curve beta(A_core), beta as signed generators."""
    return {"m": c.m, "beta": list(c.conjugator.to_word().letters), "core": list(c.core)}


def curve_from_json(data: dict) -> Curve:
    m = int(_require(data, "m", "Curve"))
    core = _require(data, "core", "Curve")
    return Curve.of(m, tuple(int(x) for x in data.get("beta", [])), tuple(int(x) for x in core))


def record_to_json(record: MappingClassRecord) -> dict:
    return {"braid": braid_to_json(record.braid), "twist_counts": list(record.twist_counts)}


def wiring_from_json(data: dict) -> WiringDiagram:
    """{"strands": 4, "events": [{"braid": []}, {"point": [2, 3]}, ...]} in time order."""
    return WiringDiagram.from_events(int(_require(data, "strands", "Wiring")), _require(data, "events", "Wiring"))


def wiring_to_json(W: WiringDiagram) -> dict:
    return {"strands": W.strands, "events": W.to_events()}


def matrix_from_json(data: Any) -> IncidenceMatrix:
    """A list of rows, or {"matrix": rows}."""
    rows = data["matrix"] if isinstance(data, dict) and "matrix" in data else data
    if not isinstance(rows, list):
        raise StructuralError("Incidence matrix JSON must be a list of rows")
    return IncidenceMatrix(tuple(tuple(row) for row in rows))


def matrix_to_json(I: IncidenceMatrix) -> list:
    return [list(row) for row in I.rows]


def family_from_json(data: dict) -> NestedFamily:
    """{"holes": 2, "sets": [[1, 2], [1], [2]]}"""
    sets = _require(data, "sets", "Family")
    m = int(data.get("holes", max((max(s) for s in sets if s), default=0)))
    return NestedFamily(m, tuple(frozenset(s) for s in sets))


def family_to_json(family: NestedFamily) -> dict:
    return {"holes": family.m, "sets": [sorted(s) for s in family.sets]}


def structure_from_json(data: dict) -> IncidenceStructure:
    """{"lines": 10, "points": [[1, 2], [1, 5, 8], ...], "free": [[3], [3]], "names": [...]}"""
    free = []
    for entry in data.get("free", []):
        free.append(int(entry[0]) if isinstance(entry, list) else int(entry))
    return IncidenceStructure(
        int(_require(data, "lines", "Structure")),
        tuple(tuple(p) for p in _require(data, "points", "Structure")),
        tuple(free),
        tuple(data.get("names", ())),
    )


def trees_from_json(data: dict) -> dict:
    """{"4": <graph>, ...}: line number -> rooted tree."""
    return {int(line): graph_from_json(tree) for line, tree in data.items()}


def dumps(payload: Any) -> str:
    return json.dumps(payload, sort_keys=True, indent=2)


def _cell(value: Any) -> str:
    if isinstance(value, (list, tuple)):
        return " ".join(_cell(x) for x in value)
    if isinstance(value, dict):
        return json.dumps(value, sort_keys=True)
    return str(value)


def render_table(payload: Any) -> str:
    """Two columns for a mapping; one row per item for a list of mappings."""
    if isinstance(payload, dict):
        width = max((len(str(key)) for key in payload), default=0)
        lines = []
        for key in sorted(payload):
            value = payload[key]
            if isinstance(value, list) and value and all(isinstance(row, list) for row in value):
                lines.append(f"{str(key).ljust(width)}  {_cell(value[0])}")
                lines.extend(f"{''.ljust(width)}  {_cell(row)}" for row in value[1:])
            else:
                lines.append(f"{str(key).ljust(width)}  {_cell(value)}")
        return "\n".join(lines)
    if isinstance(payload, list):
        return "\n".join(render_table(item) if isinstance(item, dict) else _cell(item) for item in payload)
    return _cell(payload)
