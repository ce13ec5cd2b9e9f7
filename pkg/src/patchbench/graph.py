"""Canonical in-memory representation of an audio dataflow patch.

A patch is a directed graph of typed nodes (oscillators, gains, filters,
output sinks...) whose edges connect numbered outlets to numbered inlets.
This module owns the node-kind table (port signatures and parameter
contracts), graph construction, well-formedness validation, cycle
detection and node counting.  Serialization lives in ``codecs``; audio
semantics live in ``render``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence, Union

from .notes import is_note_name, note_to_hz

OSC_WAVEFORMS = ("sine", "square", "saw", "triangle")
FILTER_MODES = ("lowpass", "highpass", "bandpass")

#: Kinds whose output is audible sound on its own (not control values).
SOUND_SOURCE_TAGS = frozenset({"osc", "noise"})

#: Kinds that are valid in a patch but contribute nothing to rendering.
NON_RENDERING_TAGS = frozenset({"scope", "adc-key"})


class GraphError(Exception):
    """Raised when a graph cannot be constructed at all.

    Validation problems in an existing graph are *report entries*, never
    exceptions; this error is only for construction-time failures such as
    duplicate ids or unknown kind tags.
    """

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


class NotWellFormedError(Exception):
    """Raised by operations whose precondition is a well-formed graph."""

    code = "not-well-formed"

    def __init__(self, report: "ValidationReport"):
        detail = "; ".join(v.message for v in report.violations[:3])
        super().__init__(f"graph is not well-formed: {detail}")
        self.report = report


@dataclass(frozen=True)
class NodeKind:
    """A node type tag plus its variant (waveform or filter mode)."""

    tag: str
    waveform: str | None = None
    filter_mode: str | None = None

    def __str__(self) -> str:
        if self.tag == "osc" and self.waveform:
            return f"osc.{self.waveform}"
        if self.tag == "filter" and self.filter_mode:
            return f"filter.{self.filter_mode}"
        return self.tag


@dataclass(frozen=True)
class ParamSpec:
    name: str
    unit: str
    positive: bool = False  # value must be strictly > 0
    frequency: bool = False  # note names accepted and resolved to Hz


@dataclass(frozen=True)
class KindInfo:
    inlets: tuple[str, ...]
    outlets: tuple[str, ...]
    params: tuple[ParamSpec, ...]


# Port signatures and parameter contracts, total over the kind set.
KIND_TABLE: dict[str, KindInfo] = {
    "osc": KindInfo(
        inlets=("freq",),
        outlets=("signal",),
        params=(ParamSpec("frequency", "Hz", positive=True, frequency=True),),
    ),
    "noise": KindInfo(inlets=(), outlets=("signal",), params=()),
    "gain": KindInfo(
        inlets=("signal", "factor"),
        outlets=("signal",),
        params=(ParamSpec("factor", "linear"),),
    ),
    "filter": KindInfo(
        inlets=("signal", "cutoff", "q"),
        outlets=("signal",),
        params=(
            ParamSpec("cutoff", "Hz", positive=True, frequency=True),
            ParamSpec("q", "dimensionless", positive=True),
        ),
    ),
    "const": KindInfo(inlets=(), outlets=("value",), params=(ParamSpec("value", "linear"),)),
    "note": KindInfo(
        inlets=(),
        outlets=("value",),
        params=(ParamSpec("frequency", "Hz", positive=True, frequency=True),),
    ),
    "adc-key": KindInfo(inlets=(), outlets=("value",), params=()),
    "dac": KindInfo(inlets=("signal-L", "signal-R"), outlets=(), params=()),
    "scope": KindInfo(inlets=("signal",), outlets=(), params=()),
}


def parse_kind(text: str) -> NodeKind:
    """Parse a kind string such as ``osc``, ``osc.saw`` or ``filter.highpass``.

    Unqualified ``osc`` defaults to sine; unqualified ``filter`` to lowpass.
    Raises GraphError(unknown-kind) otherwise.
    """
    tag, _, variant = text.partition(".")
    if tag == "osc":
        waveform = variant or "sine"
        if waveform not in OSC_WAVEFORMS:
            raise GraphError("unknown-kind", f"unknown osc waveform {variant!r}")
        return NodeKind("osc", waveform=waveform)
    if tag == "filter":
        mode = variant or "lowpass"
        if mode not in FILTER_MODES:
            raise GraphError("unknown-kind", f"unknown filter mode {variant!r}")
        return NodeKind("filter", filter_mode=mode)
    if tag in KIND_TABLE and not variant:
        return NodeKind(tag)
    raise GraphError("unknown-kind", f"unknown kind tag {text!r}")


def kind_info(kind: NodeKind) -> KindInfo | None:
    """Look up the port/param signature; None for malformed kinds."""
    info = KIND_TABLE.get(kind.tag)
    if info is None:
        return None
    if kind.tag == "osc" and kind.waveform not in OSC_WAVEFORMS:
        return None
    if kind.tag == "filter" and kind.filter_mode not in FILTER_MODES:
        return None
    return info


def check_params(kind: NodeKind, params: Sequence[float]) -> list[str]:
    """Return a list of human-readable parameter problems (empty when clean)."""
    info = kind_info(kind)
    if info is None:
        return [f"unknown kind {kind}"]
    problems = []
    if len(params) != len(info.params):
        problems.append(
            f"{kind} takes {len(info.params)} parameter(s), got {len(params)}"
        )
        return problems
    for spec, value in zip(info.params, params):
        if not isinstance(value, (int, float)):
            problems.append(f"{kind} {spec.name} must be numeric, got {value!r}")
        elif value != value or value in (float("inf"), float("-inf")):
            problems.append(f"{kind} {spec.name} must be finite")
        elif spec.positive and value <= 0:
            problems.append(f"{kind} {spec.name} must be > 0, got {value}")
    return problems


@dataclass(frozen=True)
class Node:
    id: str
    kind: NodeKind
    params: tuple[float, ...] = ()
    label: str | None = None


@dataclass(frozen=True)
class Edge:
    src: str
    src_outlet: int
    dst: str
    dst_inlet: int

    def __str__(self) -> str:
        return f"{self.src}.out{self.src_outlet}->{self.dst}.in{self.dst_inlet}"


Rect = tuple[float, float, float, float]


@dataclass(frozen=True)
class PatchGraph:
    """Immutable dataflow patch: nodes in insertion order plus edges.

    ``layout`` maps node id to an (x, y, w, h) rectangle in editor pixels;
    it is optional because the layout-free JSON dialect does not carry it.
    """

    nodes: tuple[Node, ...] = ()
    edges: tuple[Edge, ...] = ()
    layout: Mapping[str, Rect] | None = None

    def node_map(self) -> dict[str, Node]:
        return {n.id: n for n in self.nodes}

    def strip_layout(self) -> "PatchGraph":
        return replace(self, layout=None)

    def nodes_of_tag(self, tag: str) -> list[Node]:
        return [n for n in self.nodes if n.kind.tag == tag]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PatchGraph):
            return NotImplemented
        mine = dict(self.layout) if self.layout else None
        theirs = dict(other.layout) if other.layout else None
        return self.nodes == other.nodes and self.edges == other.edges and mine == theirs


@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    locus: str | None = None


@dataclass(frozen=True)
class ValidationReport:
    well_formed: bool
    violations: tuple[Violation, ...]


NodeSpec = Union[tuple, dict]
EdgeSpec = Union[tuple, dict]


def _resolve_param(kind: NodeKind, index: int, value) -> tuple[float, str | None]:
    """Coerce one raw parameter; note names resolve to Hz in frequency slots."""
    info = kind_info(kind)
    if isinstance(value, str):
        freq_slot = (
            info is not None
            and index < len(info.params)
            and info.params[index].frequency
        )
        if freq_slot and is_note_name(value):
            return note_to_hz(value), value
        raise GraphError("bad-params", f"{kind} parameter {index} not numeric: {value!r}")
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise GraphError("bad-params", f"{kind} parameter {index} not numeric: {value!r}")
    return float(value), None


def make_node(kind_text: str, params: Sequence = (), node_id: str = "",
              label: str | None = None) -> Node:
    """Build one Node, resolving kind variants and note-name parameters."""
    if kind_text.startswith("note.") and len(kind_text) > 5:
        # place("note.A4") style: the pitch name rides in the kind string
        name = kind_text[5:]
        kind = NodeKind("note")
        params = (name, *params)
    else:
        kind = parse_kind(kind_text)
    resolved = []
    note_label = None
    for i, raw in enumerate(params):
        value, used_name = _resolve_param(kind, i, raw)
        resolved.append(value)
        if used_name and kind.tag == "note" and i == 0:
            note_label = used_name
    return Node(id=node_id, kind=kind, params=tuple(resolved), label=label or note_label)


def build(nodes: Iterable[NodeSpec], edges: Iterable[EdgeSpec] = ()) -> PatchGraph:
    """Construct a graph from (kind, params[, id]) specs and edge tuples.

    Nodes without an explicit id get deterministic ids ``obj-1``, ``obj-2``...
    in input order, so identical inputs yield identical graphs.  Edge specs
    are ``(src, outlet, dst, inlet)`` where src/dst may be a node index or
    an explicit id.  Structural problems (bad ports, cycles, missing dac)
    are *not* errors here; ``validate`` reports them.
    """
    built: list[Node] = []
    ids: set[str] = set()
    for ordinal, spec in enumerate(nodes, start=1):
        if isinstance(spec, dict):
            kind_text = spec["kind"]
            params = spec.get("params", ())
            explicit = spec.get("id")
            label = spec.get("label")
        else:
            kind_text, params = spec[0], spec[1] if len(spec) > 1 else ()
            explicit = spec[2] if len(spec) > 2 else None
            label = None
        node_id = explicit if explicit is not None else f"obj-{ordinal}"
        if node_id in ids:
            raise GraphError("duplicate-id", f"duplicate node id {node_id!r}")
        ids.add(node_id)
        built.append(make_node(kind_text, params, node_id=node_id, label=label))

    def ref_to_id(ref) -> str:
        if isinstance(ref, int):
            if not 0 <= ref < len(built):
                raise GraphError("unknown-node-ref", f"node index {ref} out of range")
            return built[ref].id
        if ref in ids:
            return str(ref)
        raise GraphError("unknown-node-ref", f"no node with id {ref!r}")

    built_edges = []
    for spec in edges:
        if isinstance(spec, dict):
            src, outlet = spec["src"], spec.get("outlet", 0)
            dst, inlet = spec["dst"], spec.get("inlet", 0)
        else:
            src, outlet, dst, inlet = spec
        built_edges.append(Edge(ref_to_id(src), int(outlet), ref_to_id(dst), int(inlet)))
    return PatchGraph(nodes=tuple(built), edges=tuple(built_edges))


def node_count(graph: PatchGraph) -> int:
    """Complexity metric: total node count, non-rendering kinds included."""
    return len(graph.nodes)


def has_cycle(graph: PatchGraph) -> bool:
    """True iff the directed graph contains a cycle (self-loops included).

    Edges with dangling endpoints are ignored; they are a different
    violation and must not mask or fabricate cycles.
    """
    ids = {n.id for n in graph.nodes}
    adjacency: dict[str, list[str]] = {i: [] for i in ids}
    for e in graph.edges:
        if e.src in ids and e.dst in ids:
            adjacency[e.src].append(e.dst)

    WHITE, GRAY, BLACK = 0, 1, 2
    color = {i: WHITE for i in ids}
    for start in ids:
        if color[start] != WHITE:
            continue
        stack: list[tuple[str, int]] = [(start, 0)]
        color[start] = GRAY
        while stack:
            node, idx = stack[-1]
            if idx < len(adjacency[node]):
                stack[-1] = (node, idx + 1)
                nxt = adjacency[node][idx]
                if color[nxt] == GRAY:
                    return True
                if color[nxt] == WHITE:
                    color[nxt] = GRAY
                    stack.append((nxt, 0))
            else:
                color[node] = BLACK
                stack.pop()
    return False


def _dac_reachable(graph: PatchGraph) -> bool:
    """True if some sound-producing node has a directed path to a dac."""
    ids = {n.id for n in graph.nodes}
    adjacency: dict[str, set[str]] = {i: set() for i in ids}
    for e in graph.edges:
        if e.src in ids and e.dst in ids:
            adjacency[e.src].add(e.dst)
    dacs = {n.id for n in graph.nodes if n.kind.tag == "dac"}
    sources = [n.id for n in graph.nodes if n.kind.tag in SOUND_SOURCE_TAGS]
    for src in sources:
        seen = {src}
        frontier = [src]
        while frontier:
            cur = frontier.pop()
            if cur in dacs:
                return True
            for nxt in adjacency[cur]:
                if nxt not in seen:
                    seen.add(nxt)
                    frontier.append(nxt)
    return False


def validate(graph: PatchGraph) -> ValidationReport:
    """Check every well-formedness rule; all problems become report entries.

    This function never raises: an unparseable or hostile graph yields a
    report with violations, mirroring how a patch that will not open in
    its editor is simply "not well-formed" rather than a crash.
    """
    violations: list[Violation] = []

    if not graph.nodes:
        violations.append(Violation("empty-patch", "patch contains no nodes"))
        return ValidationReport(False, tuple(violations))

    seen_ids: set[str] = set()
    for node in graph.nodes:
        if node.id in seen_ids:
            violations.append(
                Violation("duplicate-id", f"duplicate node id {node.id!r}", f"node:{node.id}")
            )
        seen_ids.add(node.id)
        info = kind_info(node.kind)
        if info is None:
            violations.append(
                Violation("unknown-kind", f"unknown kind {node.kind}", f"node:{node.id}")
            )
            continue
        for problem in check_params(node.kind, node.params):
            violations.append(Violation("bad-params", problem, f"node:{node.id}"))

    node_map = graph.node_map()
    seen_edges: set[Edge] = set()
    for edge in graph.edges:
        locus = f"edge:{edge}"
        dangling = False
        for endpoint in (edge.src, edge.dst):
            if endpoint not in node_map:
                violations.append(
                    Violation("dangling-edge", f"edge references missing node {endpoint!r}", locus)
                )
                dangling = True
        if dangling:
            continue
        src_info = kind_info(node_map[edge.src].kind)
        dst_info = kind_info(node_map[edge.dst].kind)
        if src_info and not 0 <= edge.src_outlet < len(src_info.outlets):
            violations.append(
                Violation("bad-port", f"outlet {edge.src_outlet} out of range for {edge.src}", locus)
            )
        if dst_info and not 0 <= edge.dst_inlet < len(dst_info.inlets):
            violations.append(
                Violation("bad-port", f"inlet {edge.dst_inlet} out of range for {edge.dst}", locus)
            )
        if edge in seen_edges:
            violations.append(Violation("duplicate-edge", f"duplicate edge {edge}", locus))
        seen_edges.add(edge)

    if has_cycle(graph):
        violations.append(Violation("cycle", "signal graph contains a cycle"))

    has_source = any(n.kind.tag in SOUND_SOURCE_TAGS for n in graph.nodes)
    if has_source and not _dac_reachable(graph):
        violations.append(
            Violation("no-signal-path", "no sound-producing node reaches a dac")
        )

    if graph.layout is not None and set(graph.layout) != set(node_map):
        violations.append(
            Violation("layout-mismatch", "layout does not cover exactly the node-id set")
        )

    return ValidationReport(not violations, tuple(violations))


def require_well_formed(graph: PatchGraph) -> None:
    """Raise NotWellFormedError unless ``validate`` passes."""
    report = validate(graph)
    if not report.well_formed:
        raise NotWellFormedError(report)


def structurally_equal(a: PatchGraph, b: PatchGraph) -> bool:
    """Graph equivalence modulo node ids, labels and layout.

    Nodes are matched positionally (both dialects preserve insertion
    order), then kinds, params and the edge multiset must agree under the
    induced id mapping.
    """
    if len(a.nodes) != len(b.nodes) or len(a.edges) != len(b.edges):
        return False
    for na, nb in zip(a.nodes, b.nodes):
        if na.kind != nb.kind or na.params != nb.params:
            return False
    id_map = {na.id: nb.id for na, nb in zip(a.nodes, b.nodes)}
    from collections import Counter

    mapped = Counter(
        (id_map.get(e.src), e.src_outlet, id_map.get(e.dst), e.dst_inlet) for e in a.edges
    )
    theirs = Counter((e.src, e.src_outlet, e.dst, e.dst_inlet) for e in b.edges)
    return mapped == theirs
