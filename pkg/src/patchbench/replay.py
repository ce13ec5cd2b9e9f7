"""The shipped replay corpus: 2 categories x 10 benchmarks x 10 samples.

A live evaluation needs a model endpoint; this corpus substitutes a
deterministic, seeded generator of plausible model responses (normal and
rich PatchScript, in assorted presentation styles, with a realistic mix
of failure modes) written straight into the response cache under the same
keys the harness computes.  Packing the corpus and replaying it twice
yields byte-identical reports, which is what the end-to-end offline
acceptance check pins.
"""

from __future__ import annotations

import json
import random
from pathlib import Path

from . import llm
from .benchmarks import BENCHMARKS, CATEGORIES
from .harness import RunConfig, stable_seed

CORPUS_SEED = 20240500
CORPUS_CATEGORIES = ["patchscript", "patchscript-rich"]

# per-cell sample plans: (ok, wrong-sound, syntax-error, runtime-error, prose)
_NORMAL_PLANS = [
    (6, 1, 1, 1, 1),
    (7, 1, 0, 1, 1),
    (5, 2, 1, 1, 1),
    (8, 0, 1, 1, 0),
]
_RICH_PLANS = [
    (5, 2, 1, 1, 1),
    (4, 2, 2, 1, 1),
    (6, 1, 1, 1, 1),
    (5, 1, 2, 1, 1),
]

_OUTRO = [
    "connect(mix.out[0], out.in[0])",
    "connect(mix.out[0], out.in[1])",
    "emit()",
]


def _mix_and_out(level: float) -> list[str]:
    return [f'let mix = place("gain", {level})', 'let out = place("dac")']


def _additive(rng: random.Random, rich: bool) -> str:
    base = rng.choice([220, 330, 440])
    if rich:
        partials = rng.randint(4, 7)
        lines = [f"let base = {base}", *_mix_and_out(0.15),
                 'let f0 = place("osc", base)', "connect(f0.out[0], mix.in[0])",
                 f"for i in 0..{partials} {{",
                 '  let p = place("osc", base * (i + 2) + random(-12, 12))',
                 "  connect(p.out[0], mix.in[0])", "}"]
    else:
        lines = _mix_and_out(0.2)
        for i in range(4):
            lines.append(f'let p{i} = place("osc", {base * (i + 1)})')
            lines.append(f"connect(p{i}.out[0], mix.in[0])")
    return "\n".join(lines + _OUTRO) + "\n"


def _am_core(rng: random.Random, depth: float = 0.2, offset: float = 0.4) -> list[str]:
    mod = rng.choice([80, 110, 140])
    return [
        f'let mod = place("osc", {mod})',
        f'let depth = place("gain", {depth})',
        f'let offset = place("const", {offset})',
        'let mix = place("gain", 1)',
        'let out = place("dac")',
        "connect(mod.out[0], depth.in[0])",
        "connect(depth.out[0], mix.in[1])",
        "connect(offset.out[0], mix.in[1])",
    ]


def _am(rng: random.Random, rich: bool) -> str:
    base = rng.choice([330, 440, 520])
    lines = _am_core(rng)
    if rich:
        voices = rng.randint(2, 3)
        lines += [f"for i in 0..{voices} {{",
                  f'  let c = place("osc", {base} * (i + 1) + random(-5, 5))',
                  "  connect(c.out[0], mix.in[0])", "}"]
    else:
        lines += [f'let carrier = place("osc", {base})',
                  "connect(carrier.out[0], mix.in[0])"]
    return "\n".join(lines + _OUTRO) + "\n"


def _fm_voice(name: str, carrier: str, mod: int, deviation: int) -> list[str]:
    return [
        f'let {name}m = place("osc", {mod})',
        f'let {name}d = place("gain", {deviation})',
        f'let {name} = place("osc", {carrier})',
        f"connect({name}m.out[0], {name}d.in[0])",
        f"connect({name}d.out[0], {name}.in[0])",
        f"connect({name}.out[0], mix.in[0])",
    ]


def _fm(rng: random.Random, rich: bool) -> str:
    mod = rng.choice([90, 110, 130])
    deviation = rng.choice([160, 200, 240])
    lines = _mix_and_out(0.4)
    if rich:
        lines += [f"for i in 0..2 {{",
                  f'  let m = place("osc", {mod} + i * 7)',
                  f'  let d = place("gain", {deviation} + random(0, 30))',
                  f'  let c = place("osc", (i + 1) * {rng.choice([420, 440, 460])})',
                  "  connect(m.out[0], d.in[0])",
                  "  connect(d.out[0], c.in[0])",
                  "  connect(c.out[0], mix.in[0])", "}"]
    else:
        lines += _fm_voice("v", str(rng.choice([420, 440, 460])), mod, deviation)
    return "\n".join(lines + _OUTRO) + "\n"


def _lfo_core(rng: random.Random, rate) -> list[str]:
    return [
        f'let lfo = place("osc", {rate})',
        'let depth = place("gain", 0.25)',
        'let center = place("const", 0.5)',
        'let mix = place("gain", 1)',
        'let out = place("dac")',
        "connect(lfo.out[0], depth.in[0])",
        "connect(depth.out[0], mix.in[1])",
        "connect(center.out[0], mix.in[1])",
    ]


def _lfo(rng: random.Random, rich: bool) -> str:
    rate = rng.choice([1, 2, 4])
    lines = _lfo_core(rng, rate)
    if rich:
        voices = rng.randint(2, 3)
        lines += [f"for i in 0..{voices} {{",
                  '  let c = place("osc", 220 * (i + 1) + random(-4, 4))',
                  "  connect(c.out[0], mix.in[0])", "}"]
    else:
        lines += ['let carrier = place("osc", 440)', "connect(carrier.out[0], mix.in[0])"]
    return "\n".join(lines + _OUTRO) + "\n"


def _filtered_noise(rng: random.Random, rich: bool) -> str:
    lines = _mix_and_out(0.5)
    if rich:
        layers = rng.randint(2, 3)
        lines += [f"for i in 0..{layers} {{",
                  '  let src = place("noise")',
                  f'  let lp = place("filter.lowpass", {rng.choice([500, 700, 900])} + i * 150 + random(0, 60), 0.9)',
                  "  connect(src.out[0], lp.in[0])",
                  "  connect(lp.out[0], mix.in[0])", "}"]
    else:
        lines += ['let src = place("noise")',
                  f'let lp = place("filter.lowpass", {rng.choice([600, 800, 1100])}, 0.707)',
                  "connect(src.out[0], lp.in[0])",
                  "connect(lp.out[0], mix.in[0])"]
    return "\n".join(lines + _OUTRO) + "\n"


def _church_bell(rng: random.Random, rich: bool) -> str:
    base = rng.choice([392, 440, 523])
    ratios = [1.0, 2.39, 3.16, 4.72]
    lines = _mix_and_out(0.15)
    if rich:
        partials = rng.randint(5, 8)
        lines += [f"let base = {base}",
                  f"for i in 0..{partials} {{",
                  "  let p = place(\"osc\", base * (i + 1) + random(0, base / 3))",
                  "  connect(p.out[0], mix.in[0])", "}"]
    else:
        for i, ratio in enumerate(ratios):
            lines.append(f'let p{i} = place("osc", {round(base * ratio, 1)})')
            lines.append(f"connect(p{i}.out[0], mix.in[0])")
    return "\n".join(lines + _OUTRO) + "\n"


def _dial_tone(rng: random.Random, rich: bool) -> str:
    lines = _mix_and_out(0.3)
    if rich:
        lines += ["for i in 0..2 {",
                  '  let t = place("osc", 350 + i * 90 + random(-2, 2))',
                  "  connect(t.out[0], mix.in[0])", "}",
                  'let hum = place("osc", 60)',
                  'let humgain = place("gain", 0.05)',
                  "connect(hum.out[0], humgain.in[0])",
                  "connect(humgain.out[0], mix.in[0])"]
    else:
        lines += ['let low = place("osc", 350)', 'let high = place("osc", 440)',
                  "connect(low.out[0], mix.in[0])", "connect(high.out[0], mix.in[0])"]
    return "\n".join(lines + _OUTRO) + "\n"


def _bird_call(rng: random.Random, rich: bool) -> str:
    lines = _mix_and_out(0.3)
    if rich:
        lines += ["for i in 0..2 {",
                  '  let m = place("osc", 5 + i * 3 + random(0, 2))',
                  '  let d = place("gain", 400 + random(0, 200))',
                  '  let c = place("osc", 1800 + i * 500)',
                  "  connect(m.out[0], d.in[0])",
                  "  connect(d.out[0], c.in[0])",
                  "  connect(c.out[0], mix.in[0])", "}"]
    else:
        lines += _fm_voice("chirp", str(rng.choice([1800, 2200, 2600])), 7, 450)
    return "\n".join(lines + _OUTRO) + "\n"


def _ocean_waves(rng: random.Random, rich: bool) -> str:
    swell = ['let lfo = place("osc", 0.25)',
             'let depth = place("gain", 0.2)',
             'let floor = place("const", 0.3)',
             'let mix = place("gain", 1)',
             'let out = place("dac")',
             "connect(lfo.out[0], depth.in[0])",
             "connect(depth.out[0], mix.in[1])",
             "connect(floor.out[0], mix.in[1])"]
    if rich:
        swell += ["for i in 0..2 {",
                  '  let sea = place("noise")',
                  '  let lp = place("filter.lowpass", 400 + i * 250 + random(0, 80), 0.8)',
                  "  connect(sea.out[0], lp.in[0])",
                  "  connect(lp.out[0], mix.in[0])", "}"]
    else:
        swell += ['let sea = place("noise")',
                  'let lp = place("filter.lowpass", 600, 0.8)',
                  "connect(sea.out[0], lp.in[0])",
                  "connect(lp.out[0], mix.in[0])"]
    return "\n".join(swell + _OUTRO) + "\n"


def _babbling_brook(rng: random.Random, rich: bool) -> str:
    lines = _mix_and_out(0.4)
    if rich:
        layers = rng.randint(2, 3)
        lines += [f"for i in 0..{layers} {{",
                  '  let w = place("noise")',
                  '  let bp = place("filter.bandpass", 900 + i * 600 + random(0, 200), 2.5)',
                  "  connect(w.out[0], bp.in[0])",
                  "  connect(bp.out[0], mix.in[0])", "}"]
    else:
        lines += ['let w = place("noise")',
                  f'let bp = place("filter.bandpass", {rng.choice([1200, 1500, 1800])}, 2)',
                  "connect(w.out[0], bp.in[0])",
                  "connect(bp.out[0], mix.in[0])"]
    return "\n".join(lines + _OUTRO) + "\n"


_WRITERS = {
    "additive": _additive,
    "am": _am,
    "fm": _fm,
    "lfo": _lfo,
    "filtered-noise": _filtered_noise,
    "church-bell": _church_bell,
    "dial-tone": _dial_tone,
    "bird-call": _bird_call,
    "ocean-waves": _ocean_waves,
    "babbling-brook": _babbling_brook,
}

_WRONG = """\
let tone = place("osc", 440)
let level = place("gain", 0.4)
let out = place("dac")
connect(tone.out[0], level.in[0])
connect(level.out[0], out.in[0])
connect(level.out[0], out.in[1])
emit()
"""

_SYNTAX_BROKEN = [
    'let mix = place("gain", 0.2\nlet out = place("dac")\nemit()\n',
    'let tone = place("osc", 440)\nconnect(tone.out[0], out.in[0)\nemit()\n',
    'for i in 0..4 {\n  let p = place("osc", 440)\nemit()\n',
]

_RUNTIME_BROKEN = [
    'let fx = place("reverb")\nlet out = place("dac")\nemit()\n',
    'let tone = place("osc", 440)\nlet out = place("dac")\nconnect(tone.out[0], out.in[5])\nemit()\n',
    'let tone = place("osc", 440)\nlet out = place("dac")\nconnect(tone.out[0], out.in[0])\n',
    'connect(voice.out[0], out.in[0])\nemit()\n',
]

_PROSE = [
    "I can't render audio directly, but conceptually you would sum several "
    "oscillators at integer multiples of a fundamental and route them to the "
    "output at a modest gain.",
    "Sorry - could you clarify which waveform you want for the oscillator "
    "before I write the patch?",
]


def _present(rng: random.Random, code: str, benchmark_name: str) -> str:
    style = rng.randrange(4)
    if style == 0:
        return (
            f"Here is a PatchScript program that implements {benchmark_name}:\n\n"
            f"```\n{code}```\n\nRouting everything into the dac makes it audible."
        )
    if style == 1:
        return f"```patchscript\n{code}```"
    if style == 2:
        return code
    example = 'let tone = place("osc", 440)\nlet out = place("dac")\nconnect(tone.out[0], out.in[0])\nemit()\n'
    return (
        "Recall the structure from the examples:\n\n"
        f"```\n{example}```\n\nAdapting it to the task:\n\n```\n{code}```"
    )


def corpus_config(cache_dir: str | Path) -> RunConfig:
    return RunConfig(
        categories=list(CORPUS_CATEGORIES),
        benchmarks=list(BENCHMARKS),
        n=10,
        k=[1, 3],
        mode="replay",
        seed=CORPUS_SEED,
        workers=4,
        cache_dir=str(cache_dir),
    )


def build_replay_corpus(dest: str | Path) -> RunConfig:
    """Materialize the replay corpus under ``dest`` and return its config.

    Writes ``dest/cache/*.json`` (the response cache) and
    ``dest/config.json`` (ready for the replay pipeline).  Deterministic:
    repeated calls produce identical bytes.
    """
    dest = Path(dest)
    cache = llm.ResponseCache(dest / "cache")
    config = corpus_config(dest / "cache")

    for category_id in CORPUS_CATEGORIES:
        category = CATEGORIES[category_id]
        assistant = llm.assistant_config_for(category, config.model, config.temperature)
        for benchmark_id in config.benchmarks:
            benchmark = BENCHMARKS[benchmark_id]
            rng = random.Random(stable_seed("replay-corpus", CORPUS_SEED,
                                            category_id, benchmark_id))
            plans = _RICH_PLANS if category.rich else _NORMAL_PLANS
            ok, wrong, syntax, runtime, prose = rng.choice(plans)
            classes = (["ok"] * ok + ["wrong"] * wrong + ["syntax"] * syntax
                       + ["runtime"] * runtime + ["prose"] * prose)
            rng.shuffle(classes)
            prompt = llm.build_prompt(category_id, benchmark_id)
            for index, kind in enumerate(classes):
                if kind == "ok":
                    code = _WRITERS[benchmark_id](rng, category.rich)
                    response = _present(rng, code, benchmark.prompt_noun)
                elif kind == "wrong":
                    response = _present(rng, _WRONG, benchmark.prompt_noun)
                elif kind == "syntax":
                    response = _present(rng, rng.choice(_SYNTAX_BROKEN), benchmark.prompt_noun)
                elif kind == "runtime":
                    response = _present(rng, rng.choice(_RUNTIME_BROKEN), benchmark.prompt_noun)
                else:
                    response = rng.choice(_PROSE)
                cache.put(llm.cache_key(assistant, prompt, index), response)

    dest.mkdir(parents=True, exist_ok=True)
    (dest / "config.json").write_text(
        json.dumps(config.to_json(), indent=2) + "\n", encoding="utf-8"
    )
    return config
