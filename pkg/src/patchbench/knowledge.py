"""Per-category knowledge documents and few-shot examples.

These are the instruction files prefixed to every prompt so the assistant
stays inside the supported language subset.  They are experimental inputs
shipped with the toolkit, not ground truth: swap in your own per-category
documents to study their effect.
"""

from __future__ import annotations

_MAXPAT_DOC = """\
You write Max patches as JSON documents. A patch is an object with a single
"patcher" key holding "boxes" and "lines" arrays.

Each box is {"box": {"id", "maxclass", "text", "numinlets", "numoutlets",
"patching_rect"}}. These are the ONLY objects that will compile:
- "cycle~ <hz>", "saw~ <hz>", "rect~ <hz>", "tri~ <hz>" (oscillators, 1 outlet)
- "noise~" (white noise, 1 outlet)
- "*~ <factor>" (gain: signal inlet 0, factor inlet 1, 1 outlet)
- "lores~ <hz> <q>", "hipass~ <hz> <q>", "reson~ <hz> <q>" (filters: signal,
  cutoff, Q inlets; 1 outlet)
- "sig~ <value>" (constant signal), "note~ <name>" (pitch name constant)
- maxclass "ezdac~" (output, 2 inlets), "scope~" (display, 1 inlet),
  "kslider" (keyboard input, 1 outlet) - these three take no "text" field.
Any other object will not compile.

Each line is {"patchline": {"source": ["<box id>", <outlet>],
"destination": ["<box id>", <inlet>]}}. Port numbering starts at 0.
Patches must route at least one sound source into the ezdac~ to make sound.
Answer with one complete JSON document in a fenced code block.
"""

_WAVIR_DOC = """\
You write audio graphs as JSON with this exact shape:
{"format": "wavir/1", "nodes": [...], "edges": [...]}

Each node is {"id": "<unique>", "type": "<type>", "params": [...]}.
Supported types (the ONLY ones that compile):
- "osc.sine" | "osc.square" | "osc.saw" | "osc.triangle", params [frequencyHz]
- "noise", params []
- "gain", params [factor] (inlet 0 signal, inlet 1 factor)
- "filter.lowpass" | "filter.highpass" | "filter.bandpass", params [cutoffHz, q]
- "const", params [value]; "note", params ["A4"] (pitch names allowed)
- "adc-key", params [] (keyboard input); "dac", params [] (output, 2 inlets);
  "scope", params [] (display)
There is no spatial layout in this format.

Each edge is {"from": ["<node id>", <outlet>], "to": ["<node id>", <inlet>]},
ports numbered from 0. Sound must reach a "dac" node to be audible.
Answer with one complete JSON document in a fenced code block.
"""

_PATCHSCRIPT_DOC = """\
You write PatchScript, a tiny language whose programs build audio patches.

Statements: `let name = expr`, `for i in lo..hi { ... }` (hi exclusive),
or a bare expression. Expressions: numbers, names, + - * / %, parentheses,
`random(lo, hi)`, `place("kind", params...)`, `connect(a.out[i], b.in[j])`,
`emit()`.

`place` returns a node handle. Kinds (the ONLY ones that run): "osc",
"osc.square", "osc.saw", "osc.triangle" (param: frequency Hz), "noise",
"gain" (param: factor; inlet 1 modulates it), "filter.lowpass",
"filter.highpass", "filter.bandpass" (params: cutoff Hz, Q), "const"
(param: value), "note.A4" style pitch constants, "adc-key", "dac"
(2 inlets), "scope". Ports are numbered from 0.

Route sound into a "dac" node and finish the program with `emit()`.
Answer with one complete program in a fenced code block.
"""

KNOWLEDGE_DOCS: dict[str, str] = {
    "json-maxpat": _MAXPAT_DOC,
    "json-wavir": _WAVIR_DOC,
    "patchscript": _PATCHSCRIPT_DOC,
    "patchscript-rich": _PATCHSCRIPT_DOC,
    "external-metaprog": _PATCHSCRIPT_DOC,
}

_PATCHSCRIPT_BEEP = """\
let tone = place("osc", 440)
let level = place("gain", 0.3)
let out = place("dac")
connect(tone.out[0], level.in[0])
connect(level.out[0], out.in[0])
connect(level.out[0], out.in[1])
emit()
"""

_PATCHSCRIPT_CHORD = """\
let mix = place("gain", 0.2)
let out = place("dac")
let root = place("osc", 261.63)
let third = place("osc", 329.63)
let fifth = place("osc", 392)
connect(root.out[0], mix.in[0])
connect(third.out[0], mix.in[0])
connect(fifth.out[0], mix.in[0])
connect(mix.out[0], out.in[0])
connect(mix.out[0], out.in[1])
emit()
"""

_PATCHSCRIPT_RICH_PARTIALS = """\
let base = 220
let mix = place("gain", 0.15)
let out = place("dac")
for i in 0..5 {
  let voice = place("osc", base * (i + 1) + random(-10, 10))
  connect(voice.out[0], mix.in[0])
}
connect(mix.out[0], out.in[0])
connect(mix.out[0], out.in[1])
emit()
"""

_WAVIR_BEEP = """\
{"format": "wavir/1",
 "nodes": [
   {"id": "n1", "type": "osc.sine", "params": [440]},
   {"id": "n2", "type": "gain", "params": [0.3]},
   {"id": "n3", "type": "dac", "params": []}],
 "edges": [
   {"from": ["n1", 0], "to": ["n2", 0]},
   {"from": ["n2", 0], "to": ["n3", 0]},
   {"from": ["n2", 0], "to": ["n3", 1]}]}
"""

_MAXPAT_BEEP = """\
{"patcher": {"fileversion": 1,
 "appversion": {"major": 8, "minor": 6, "revision": 0},
 "boxes": [
   {"box": {"id": "obj-1", "maxclass": "newobj", "text": "cycle~ 440",
            "numinlets": 1, "numoutlets": 1, "patching_rect": [40, 40, 120, 22]}},
   {"box": {"id": "obj-2", "maxclass": "newobj", "text": "*~ 0.3",
            "numinlets": 2, "numoutlets": 1, "patching_rect": [40, 160, 120, 22]}},
   {"box": {"id": "obj-3", "maxclass": "ezdac~",
            "numinlets": 2, "numoutlets": 0, "patching_rect": [40, 280, 45, 45]}}],
 "lines": [
   {"patchline": {"source": ["obj-1", 0], "destination": ["obj-2", 0]}},
   {"patchline": {"source": ["obj-2", 0], "destination": ["obj-3", 0]}},
   {"patchline": {"source": ["obj-2", 0], "destination": ["obj-3", 1]}}]}}
"""

EXAMPLES: dict[str, tuple[tuple[str, str], ...]] = {
    "json-maxpat": (("a 440 Hz beep", _MAXPAT_BEEP),),
    "json-wavir": (("a 440 Hz beep", _WAVIR_BEEP),),
    "patchscript": (
        ("a 440 Hz beep", _PATCHSCRIPT_BEEP),
        ("a simple chord", _PATCHSCRIPT_CHORD),
    ),
    "patchscript-rich": (
        ("a 440 Hz beep", _PATCHSCRIPT_BEEP),
        ("randomized partials with a loop", _PATCHSCRIPT_RICH_PARTIALS),
    ),
    "external-metaprog": (),
}
