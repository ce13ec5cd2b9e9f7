"""The two JSON patch dialects.

``.maxpat``: a constrained subset of the Max patch format — boxes with
id/maxclass/text/port counts/patching_rect under a top-level "patcher",
patchlines connecting them.  Spatial layout is part of the document.

``.wavir.json``: this project's layout-free dialect, versioned with a
top-level ``"format": "wavir/1"`` key — nodes carry id/type/params,
edges carry from/to port pairs, and no layout fields exist anywhere.

Both parsers are total over arbitrary byte input: every failure is one of
the typed errors below, never an unhandled crash.  Emission is
byte-deterministic (fixed key order, 2-space indent, LF).
"""

from __future__ import annotations

import json
import math
from typing import Any

from .graph import (
    Edge,
    GraphError,
    Node,
    NodeKind,
    PatchGraph,
    Rect,
    check_params,
    kind_info,
    make_node,
    parse_kind,
    require_well_formed,
)
from .notes import is_note_name, note_to_hz

WAVIR_FORMAT = "wavir/1"

# auto-layout grid used when a graph has no stored layout
GRID_X0, GRID_DX, GRID_COLS = 40, 160, 5
GRID_Y0, GRID_DY = 40, 120
BOX_W, BOX_H = 120, 22


class CodecError(Exception):
    """Base for every parse/emit failure; ``code`` names the failure class."""

    code = "codec-error"

    def __init__(self, message: str, locus: str | None = None):
        super().__init__(message)
        self.locus = locus


class MalformedJsonError(CodecError):
    code = "malformed-json"


class SchemaError(CodecError):
    code = "schema-error"


class UnknownObjectError(CodecError):
    code = "unknown-object"


class BadConnectionError(CodecError):
    code = "bad-connection"


# Max object vocabulary.  This is data, not code: the closed world of the
# knowledge document ("any other method will not compile") grows by adding
# rows here.  UI-style boxes are identified by maxclass, newobj boxes by
# the head token of their text.
MAX_TEXT_HEADS: dict[str, str] = {
    "cycle~": "osc.sine",
    "saw~": "osc.saw",
    "rect~": "osc.square",
    "tri~": "osc.triangle",
    "noise~": "noise",
    "*~": "gain",
    "lores~": "filter.lowpass",
    "hipass~": "filter.highpass",
    "reson~": "filter.bandpass",
    "sig~": "const",
    "note~": "note",
}

MAX_UI_CLASSES: dict[str, str] = {
    "ezdac~": "dac",
    "scope~": "scope",
    "kslider": "adc-key",
}

_KIND_TO_HEAD = {v: k for k, v in MAX_TEXT_HEADS.items()}
_KIND_TO_UI = {v: k for k, v in MAX_UI_CLASSES.items()}


def _format_number(x: float) -> str:
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def _decode_json(text: bytes | str) -> Any:
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as err:
            raise MalformedJsonError(f"not valid UTF-8: {err}") from err
    try:
        return json.loads(text)
    except json.JSONDecodeError as err:
        raise MalformedJsonError(f"not valid JSON: {err}") from err


def _require(mapping: Any, key: str, where: str) -> Any:
    if not isinstance(mapping, dict):
        raise SchemaError(f"{where} must be an object")
    if key not in mapping:
        raise SchemaError(f"{where} missing required field {key!r}")
    return mapping[key]


def _as_number(value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"{where} must be a number, got {value!r}")
    if not math.isfinite(value):
        raise SchemaError(f"{where} must be finite")
    return float(value)


def _coerce_params(kind: NodeKind, raw_params: list, where: str) -> tuple[tuple[float, ...], str | None]:
    """Numbers as decimal floats; note names accepted in frequency slots."""
    info = kind_info(kind)
    assert info is not None
    values: list[float] = []
    label: str | None = None
    for i, raw in enumerate(raw_params):
        freq_slot = i < len(info.params) and info.params[i].frequency
        if isinstance(raw, str):
            if freq_slot and is_note_name(raw):
                values.append(note_to_hz(raw))
                if kind.tag == "note" and i == 0:
                    label = raw
                continue
            raise SchemaError(f"{where}: parameter {i} is not numeric: {raw!r}")
        values.append(_as_number(raw, f"{where} parameter {i}"))
    problems = check_params(kind, values)
    if problems:
        raise SchemaError(f"{where}: {problems[0]}")
    return tuple(values), label


def _parse_max_text(text: str, where: str) -> Node:
    tokens = text.split()
    if not tokens:
        raise UnknownObjectError(f"{where}: empty object text")
    head, args = tokens[0], tokens[1:]
    kind_str = MAX_TEXT_HEADS.get(head)
    if kind_str is None:
        raise UnknownObjectError(f"{where}: object {head!r} is outside the supported set")
    kind = parse_kind(kind_str)
    raw_params: list = []
    for arg in args:
        try:
            raw_params.append(float(arg))
        except ValueError:
            raw_params.append(arg)  # maybe a note name; _coerce_params decides
    params, label = _coerce_params(kind, raw_params, where)
    return Node(id="", kind=kind, params=params, label=label)


def _check_ports(node_map: dict[str, Node], node_id: str, port: int, is_outlet: bool,
                 where: str) -> None:
    if node_id not in node_map:
        raise BadConnectionError(f"{where}: no node with id {node_id!r}")
    info = kind_info(node_map[node_id].kind)
    assert info is not None
    count = len(info.outlets) if is_outlet else len(info.inlets)
    which = "outlet" if is_outlet else "inlet"
    if not 0 <= port < count:
        raise BadConnectionError(f"{where}: {which} {port} out of range for {node_id!r}")


def _parse_endpoint(value: Any, where: str) -> tuple[str, int]:
    if (
        not isinstance(value, list)
        or len(value) != 2
        or not isinstance(value[0], str)
        or isinstance(value[1], bool)
        or not isinstance(value[1], int)
    ):
        raise BadConnectionError(f"{where} must be [node-id, port-index]")
    return value[0], value[1]


# ---------------------------------------------------------------------------
# Max dialect
# ---------------------------------------------------------------------------

def parse_maxpat(text: bytes | str) -> PatchGraph:
    """Parse the ``.maxpat`` subset into a PatchGraph with layout."""
    doc = _decode_json(text)
    patcher = _require(doc, "patcher", "document")
    boxes = _require(patcher, "boxes", "patcher")
    if not isinstance(boxes, list):
        raise SchemaError("patcher.boxes must be a list")
    lines = patcher.get("lines", [])
    if not isinstance(lines, list):
        raise SchemaError("patcher.lines must be a list")

    nodes: list[Node] = []
    layout: dict[str, Rect] = {}
    for i, wrapper in enumerate(boxes):
        box = _require(wrapper, "box", f"boxes[{i}]")
        where = f"boxes[{i}]"
        box_id = _require(box, "id", where)
        if not isinstance(box_id, str) or not box_id:
            raise SchemaError(f"{where}: id must be a non-empty string")
        if any(n.id == box_id for n in nodes):
            raise SchemaError(f"{where}: duplicate box id {box_id!r}")
        maxclass = _require(box, "maxclass", where)
        rect = _require(box, "patching_rect", where)
        _require(box, "numinlets", where)
        _require(box, "numoutlets", where)
        if not isinstance(rect, list) or len(rect) != 4:
            raise SchemaError(f"{where}: patching_rect must have 4 entries")
        x, y, w, h = (_as_number(v, f"{where}.patching_rect") for v in rect)
        if w < 0 or h < 0:
            raise SchemaError(f"{where}: patching_rect size must be non-negative")

        if maxclass in MAX_UI_CLASSES:
            kind = parse_kind(MAX_UI_CLASSES[maxclass])
            node = Node(id=box_id, kind=kind, params=())
        elif maxclass == "newobj":
            text_field = _require(box, "text", where)
            if not isinstance(text_field, str):
                raise SchemaError(f"{where}: text must be a string")
            node = _parse_max_text(text_field, where)
            node = Node(id=box_id, kind=node.kind, params=node.params, label=node.label)
        else:
            raise UnknownObjectError(f"{where}: maxclass {maxclass!r} is outside the supported set")
        nodes.append(node)
        layout[box_id] = (x, y, w, h)

    node_map = {n.id: n for n in nodes}
    edges: list[Edge] = []
    for i, wrapper in enumerate(lines):
        line = _require(wrapper, "patchline", f"lines[{i}]")
        where = f"lines[{i}]"
        src_id, outlet = _parse_endpoint(_require(line, "source", where), f"{where}.source")
        dst_id, inlet = _parse_endpoint(_require(line, "destination", where), f"{where}.destination")
        _check_ports(node_map, src_id, outlet, True, where)
        _check_ports(node_map, dst_id, inlet, False, where)
        edges.append(Edge(src_id, outlet, dst_id, inlet))

    return PatchGraph(nodes=tuple(nodes), edges=tuple(edges), layout=layout)


def _auto_rect(index: int) -> Rect:
    col, row = index % GRID_COLS, index // GRID_COLS
    return (GRID_X0 + GRID_DX * col, GRID_Y0 + GRID_DY * row, BOX_W, BOX_H)


def _max_box(node: Node, rect: Rect) -> dict:
    info = kind_info(node.kind)
    assert info is not None
    kind_str = str(node.kind)
    box: dict[str, Any] = {"id": node.id}
    if kind_str in _KIND_TO_UI:
        box["maxclass"] = _KIND_TO_UI[kind_str]
    else:
        head = _KIND_TO_HEAD[kind_str]
        if node.kind.tag == "note" and node.label:
            args = [node.label]
        else:
            args = [_format_number(p) for p in node.params]
        box["maxclass"] = "newobj"
        box["text"] = " ".join([head, *args]) if args else head
    box["numinlets"] = len(info.inlets)
    box["numoutlets"] = len(info.outlets)
    box["patching_rect"] = list(rect)
    return {"box": box}


def emit_maxpat(graph: PatchGraph) -> bytes:
    """Serialize a well-formed graph to the ``.maxpat`` subset.

    Missing layout gets the deterministic grid; stored layout is copied
    verbatim.  Output bytes are stable for equal graphs.
    """
    require_well_formed(graph)
    boxes = []
    for i, node in enumerate(graph.nodes):
        rect = graph.layout[node.id] if graph.layout else _auto_rect(i)
        boxes.append(_max_box(node, rect))
    lines = [
        {"patchline": {"source": [e.src, e.src_outlet], "destination": [e.dst, e.dst_inlet]}}
        for e in graph.edges
    ]
    doc = {
        "patcher": {
            "fileversion": 1,
            "appversion": {"major": 8, "minor": 6, "revision": 0},
            "boxes": boxes,
            "lines": lines,
        }
    }
    return (json.dumps(doc, indent=2) + "\n").encode("utf-8")


# ---------------------------------------------------------------------------
# Wavir dialect
# ---------------------------------------------------------------------------

def parse_wavir(text: bytes | str) -> PatchGraph:
    """Parse the layout-free dialect; the resulting graph has no layout."""
    doc = _decode_json(text)
    if not isinstance(doc, dict):
        raise SchemaError("document must be an object")
    fmt = _require(doc, "format", "document")
    if fmt != WAVIR_FORMAT:
        raise SchemaError(f"unsupported format {fmt!r}, expected {WAVIR_FORMAT!r}")
    raw_nodes = _require(doc, "nodes", "document")
    raw_edges = doc.get("edges", [])
    if not isinstance(raw_nodes, list):
        raise SchemaError("nodes must be a list")
    if not isinstance(raw_edges, list):
        raise SchemaError("edges must be a list")

    nodes: list[Node] = []
    for i, raw in enumerate(raw_nodes):
        where = f"nodes[{i}]"
        node_id = _require(raw, "id", where)
        if not isinstance(node_id, str) or not node_id:
            raise SchemaError(f"{where}: id must be a non-empty string")
        if any(n.id == node_id for n in nodes):
            raise SchemaError(f"{where}: duplicate node id {node_id!r}")
        type_str = _require(raw, "type", where)
        if not isinstance(type_str, str):
            raise SchemaError(f"{where}: type must be a string")
        try:
            kind = parse_kind(type_str)
        except GraphError as err:
            raise UnknownObjectError(f"{where}: {err}") from err
        raw_params = raw.get("params", [])
        if not isinstance(raw_params, list):
            raise SchemaError(f"{where}: params must be a list")
        params, note_label = _coerce_params(kind, raw_params, where)
        label = raw.get("label")
        if label is not None and not isinstance(label, str):
            raise SchemaError(f"{where}: label must be a string")
        nodes.append(Node(id=node_id, kind=kind, params=params, label=label or note_label))

    node_map = {n.id: n for n in nodes}
    edges: list[Edge] = []
    for i, raw in enumerate(raw_edges):
        where = f"edges[{i}]"
        src_id, outlet = _parse_endpoint(_require(raw, "from", where), f"{where}.from")
        dst_id, inlet = _parse_endpoint(_require(raw, "to", where), f"{where}.to")
        _check_ports(node_map, src_id, outlet, True, where)
        _check_ports(node_map, dst_id, inlet, False, where)
        edges.append(Edge(src_id, outlet, dst_id, inlet))

    return PatchGraph(nodes=tuple(nodes), edges=tuple(edges), layout=None)


def emit_wavir(graph: PatchGraph) -> bytes:
    """Serialize a well-formed graph to layout-free JSON (layout is erased)."""
    require_well_formed(graph)
    nodes = []
    for node in graph.nodes:
        entry: dict[str, Any] = {"id": node.id, "type": str(node.kind)}
        if node.kind.tag == "note" and node.label:
            entry["params"] = [node.label]
        else:
            entry["params"] = [int(p) if p == int(p) and abs(p) < 1e15 else p for p in node.params]
            if node.label:
                entry["label"] = node.label
        nodes.append(entry)
    edges = [
        {"from": [e.src, e.src_outlet], "to": [e.dst, e.dst_inlet]} for e in graph.edges
    ]
    doc = {"format": WAVIR_FORMAT, "nodes": nodes, "edges": edges}
    return (json.dumps(doc, indent=2) + "\n").encode("utf-8")
