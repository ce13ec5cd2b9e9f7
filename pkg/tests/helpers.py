"""Shared test utilities: seeded graph corpora and independent oracles."""

from __future__ import annotations

import random

from patchbench.graph import Edge, PatchGraph, build, kind_info


def cycle_oracle(graph: PatchGraph) -> bool:
    """Cycle detection by exhaustive simple-path enumeration.

    Deliberately naive (exponential) so it shares no logic with the
    production DFS; usable on graphs of up to ~8 nodes.
    """
    ids = [n.id for n in graph.nodes]
    adjacency = {i: [] for i in ids}
    for e in graph.edges:
        if e.src in adjacency and e.dst in adjacency:
            adjacency[e.src].append(e.dst)

    def path_exists(start: str, goal: str, visited: frozenset) -> bool:
        for nxt in adjacency[start]:
            if nxt == goal:
                return True
            if nxt not in visited and path_exists(nxt, goal, visited | {nxt}):
                return True
        return False

    for node in ids:
        if path_exists(node, node, frozenset({node})):
            return True
    return False


def random_digraph(rng: random.Random, max_nodes: int = 8) -> PatchGraph:
    """Arbitrary small digraph over gain nodes (ports ignored by has_cycle)."""
    n = rng.randint(0, max_nodes)
    nodes = [("gain", [1.0]) for _ in range(n)]
    edges = []
    if n:
        for _ in range(rng.randint(0, 2 * n)):
            edges.append((rng.randrange(n), 0, rng.randrange(n), 0))
    return build(nodes, edges)


def random_dag(rng: random.Random, n: int) -> PatchGraph:
    """Random acyclic digraph: edges only from lower to higher index."""
    nodes = [("gain", [1.0]) for _ in range(n)]
    edges = []
    for dst in range(1, n):
        for src in range(dst):
            if rng.random() < 0.05:
                edges.append((src, 0, dst, 0))
    return build(nodes, edges)


_SOURCE_POOL = [
    ("osc", lambda r: [round(r.uniform(40, 4000), 3)]),
    ("osc.square", lambda r: [round(r.uniform(40, 2000), 3)]),
    ("osc.saw", lambda r: [round(r.uniform(40, 2000), 3)]),
    ("osc.triangle", lambda r: [round(r.uniform(40, 2000), 3)]),
    ("noise", lambda r: []),
]

_PROCESSOR_POOL = [
    ("gain", lambda r: [round(r.uniform(0.05, 1.0), 3)]),
    ("filter.lowpass", lambda r: [round(r.uniform(200, 8000), 2), round(r.uniform(0.5, 4.0), 3)]),
    ("filter.highpass", lambda r: [round(r.uniform(200, 8000), 2), round(r.uniform(0.5, 4.0), 3)]),
    ("filter.bandpass", lambda r: [round(r.uniform(200, 8000), 2), round(r.uniform(0.5, 4.0), 3)]),
]

_VALUE_POOL = [
    ("const", lambda r: [round(r.uniform(-2.0, 2.0), 3)]),
    ("note", lambda r: [r.choice(["A4", "C3", "E5", "G2", "Bb3", "F#4"])]),
    ("adc-key", lambda r: []),
]


def random_well_formed_graph(rng: random.Random) -> PatchGraph:
    """A seeded random patch that passes validation.

    Structure: a handful of sources feed a chain of processors into a dac;
    value nodes may modulate processor side-inlets; a scope may listen in.
    """
    specs = []
    edges = []

    n_sources = rng.randint(1, 4)
    for _ in range(n_sources):
        tag, gen = rng.choice(_SOURCE_POOL)
        specs.append((tag, gen(rng)))

    chain = []
    for _ in range(rng.randint(1, 3)):
        tag, gen = rng.choice(_PROCESSOR_POOL)
        specs.append((tag, gen(rng)))
        chain.append(len(specs) - 1)

    for src in range(n_sources):
        edges.append((src, 0, chain[0], 0))
    for a, b in zip(chain, chain[1:]):
        edges.append((a, 0, b, 0))

    dac = len(specs)
    specs.append(("dac", []))
    edges.append((chain[-1], 0, dac, 0))
    if rng.random() < 0.7:
        edges.append((chain[-1], 0, dac, 1))

    if rng.random() < 0.5:
        tag, gen = rng.choice(_VALUE_POOL)
        specs.append((tag, gen(rng)))
        value_idx = len(specs) - 1
        target = rng.choice(chain)
        n_inlets = 2 if specs[target][0] == "gain" else 3
        edges.append((value_idx, 0, target, rng.randrange(1, n_inlets)))

    if rng.random() < 0.3:
        specs.append(("scope", []))
        edges.append((chain[-1], 0, len(specs) - 1, 0))

    return build(specs, edges)


def graph_corpus(seed: int = 20240501, count: int = 60) -> list[PatchGraph]:
    rng = random.Random(seed)
    return [random_well_formed_graph(rng) for _ in range(count)]


# ---------------------------------------------------------------------------
# structured fuzzing for the codecs
# ---------------------------------------------------------------------------

_JSON_ATOMS = [None, True, False, 0, -1, 1.5, 1e308, "x", "", "obj-1", "cycle~ 440", []]


def _random_json_value(rng: random.Random, depth: int = 0):
    if depth > 3 or rng.random() < 0.4:
        return rng.choice(_JSON_ATOMS)
    if rng.random() < 0.5:
        return [_random_json_value(rng, depth + 1) for _ in range(rng.randint(0, 3))]
    keys = ["patcher", "boxes", "box", "lines", "patchline", "id", "maxclass", "text",
            "numinlets", "numoutlets", "patching_rect", "source", "destination",
            "format", "nodes", "edges", "type", "params", "from", "to", "label", "zzz"]
    return {
        rng.choice(keys): _random_json_value(rng, depth + 1)
        for _ in range(rng.randint(0, 4))
    }


def _mutate_bytes(rng: random.Random, payload: bytes) -> bytes:
    if not payload:
        return payload
    choice = rng.random()
    if choice < 0.4:  # truncate
        return payload[: rng.randrange(len(payload))]
    if choice < 0.7:  # flip one byte
        i = rng.randrange(len(payload))
        return payload[:i] + bytes([rng.randrange(256)]) + payload[i + 1:]
    # splice garbage
    i = rng.randrange(len(payload))
    junk = bytes(rng.randrange(256) for _ in range(rng.randint(1, 8)))
    return payload[:i] + junk + payload[i:]


def structured_fuzz_cases(rng: random.Random, count: int):
    """Yield ``count`` hostile byte payloads for the parsers.

    Mix: random bytes, random JSON shapes built from the dialects'
    vocabulary, and byte-level mutations of valid emitted documents.
    """
    import json as _json

    from patchbench.codecs import emit_maxpat, emit_wavir

    seeds = graph_corpus(seed=rng.randrange(2**32), count=8)
    valid_docs = [emit_maxpat(g) for g in seeds] + [emit_wavir(g) for g in seeds]

    for _ in range(count):
        bucket = rng.random()
        if bucket < 0.2:
            yield bytes(rng.randrange(256) for _ in range(rng.randint(0, 64)))
        elif bucket < 0.6:
            yield _json.dumps(_random_json_value(rng)).encode()
        else:
            yield _mutate_bytes(rng, rng.choice(valid_docs))
