"""Reference patches for the five specific benchmarks, plus known-bad ones.

The reference graphs are the machine analogue of the "correct example of
each benchmark sound" a rater would be handed; the deliberately wrong
graphs are well-formed patches that do *not* implement their benchmark,
used to prove the judges reject impostors.
"""

from __future__ import annotations

from .graph import PatchGraph, build


def beeper() -> PatchGraph:
    """Smallest audible patch: one oscillator straight into the dac."""
    return build(
        [("osc", [440]), ("dac", [])],
        [(0, 0, 1, 0)],
    )


def additive_reference(fundamental: float = 440.0) -> PatchGraph:
    """Fundamental plus three exact harmonics mixed into the dac (6 nodes)."""
    return build(
        [
            ("osc", [fundamental]),
            ("osc", [2 * fundamental]),
            ("osc", [3 * fundamental]),
            ("osc", [4 * fundamental]),
            ("gain", [0.2]),
            ("dac", []),
        ],
        [
            (0, 0, 4, 0),
            (1, 0, 4, 0),
            (2, 0, 4, 0),
            (3, 0, 4, 0),
            (4, 0, 5, 0),
            (4, 0, 5, 1),
        ],
    )


def am_reference(carrier: float = 440.0, modulator: float = 110.0) -> PatchGraph:
    """Carrier scaled by (0.4 + 0.2 sin): classic AM, headroom preserved."""
    return build(
        [
            ("osc", [carrier]),      # 0 carrier
            ("osc", [modulator]),    # 1 modulator
            ("gain", [0.2]),         # 2 modulation depth
            ("const", [0.4]),        # 3 dc offset keeps the carrier audible
            ("gain", [1.0]),         # 4 the modulated amplifier
            ("dac", []),             # 5
        ],
        [
            (1, 0, 2, 0),
            (2, 0, 4, 1),
            (3, 0, 4, 1),
            (0, 0, 4, 0),
            (4, 0, 5, 0),
            (4, 0, 5, 1),
        ],
    )


def fm_reference(carrier: float = 440.0, modulator: float = 110.0,
                 deviation: float = 200.0) -> PatchGraph:
    """Modulator driving the carrier's frequency inlet (index ~1.8)."""
    return build(
        [
            ("osc", [modulator]),    # 0
            ("gain", [deviation]),   # 1 frequency deviation in Hz
            ("osc", [carrier]),      # 2
            ("gain", [0.5]),         # 3 output level
            ("dac", []),             # 4
        ],
        [
            (0, 0, 1, 0),
            (1, 0, 2, 0),
            (2, 0, 3, 0),
            (3, 0, 4, 0),
            (3, 0, 4, 1),
        ],
    )


def lfo_reference(carrier: float = 440.0, rate: float = 2.0) -> PatchGraph:
    """Tremolo: a 2 Hz oscillator swings the output gain between 0.25 and 0.75."""
    return build(
        [
            ("osc", [carrier]),      # 0
            ("osc", [rate]),         # 1 the LFO
            ("gain", [0.25]),        # 2 LFO depth
            ("const", [0.5]),        # 3 gain midpoint
            ("gain", [1.0]),         # 4 modulated amplifier
            ("dac", []),             # 5
        ],
        [
            (1, 0, 2, 0),
            (2, 0, 4, 1),
            (3, 0, 4, 1),
            (0, 0, 4, 0),
            (4, 0, 5, 0),
            (4, 0, 5, 1),
        ],
    )


def filtered_noise_reference(cutoff: float = 800.0, q: float = 0.707) -> PatchGraph:
    """White noise through a lowpass biquad into the dac."""
    return build(
        [
            ("noise", []),
            ("filter.lowpass", [cutoff, q]),
            ("gain", [0.5]),
            ("dac", []),
        ],
        [
            (0, 0, 1, 0),
            (1, 0, 2, 0),
            (2, 0, 3, 0),
            (2, 0, 3, 1),
        ],
    )


# -- deliberately wrong (well-formed, but not the benchmark sound) ----------

def bare_sine() -> PatchGraph:
    """A single oscillator: fails additive (no harmonics beyond one peak)."""
    return build(
        [("osc", [440]), ("gain", [0.4]), ("dac", [])],
        [(0, 0, 1, 0), (1, 0, 2, 0), (1, 0, 2, 1)],
    )


def unmodulated_carrier() -> PatchGraph:
    """Steady tone submitted as AM: no sidebands to find."""
    return bare_sine()


def static_gain() -> PatchGraph:
    """Constant-amplitude tone submitted as an LFO: flat envelope."""
    return build(
        [("osc", [330]), ("gain", [0.5]), ("dac", [])],
        [(0, 0, 1, 0), (1, 0, 2, 0), (1, 0, 2, 1)],
    )


def unfiltered_noise() -> PatchGraph:
    """Raw white noise submitted as filtered noise: no spectral tilt."""
    return build(
        [("noise", []), ("gain", [0.3]), ("dac", [])],
        [(0, 0, 1, 0), (1, 0, 2, 0), (1, 0, 2, 1)],
    )


def silence() -> PatchGraph:
    """A zero-gain patch: renders to silence, fails every sound check."""
    return build(
        [("osc", [440]), ("gain", [0.0]), ("dac", [])],
        [(0, 0, 1, 0), (1, 0, 2, 0), (1, 0, 2, 1)],
    )


# the rich-metaprogramming counterpart of ``additive_reference``: a loop
# builds the three partials near 880/1320/1760 with a random detune under
# 15 Hz, so node structure is seed-invariant while frequencies are not
RICH_ADDITIVE_SCRIPT = """\
let fundamental = 440
let mix = place("gain", 0.2)
let out = place("dac")
let f = place("osc", fundamental)
connect(f.out[0], mix.in[0])
for i in 1..4 {
  let p = place("osc", fundamental * (i + 1) + random(-15, 15))
  connect(p.out[0], mix.in[0])
}
connect(mix.out[0], out.in[0])
connect(mix.out[0], out.in[1])
emit()
"""

REFERENCE_GRAPHS = {
    "additive": additive_reference,
    "am": am_reference,
    "fm": fm_reference,
    "lfo": lfo_reference,
    "filtered-noise": filtered_noise_reference,
}

WRONG_GRAPHS = {
    "additive": bare_sine,
    "am": unmodulated_carrier,
    "fm": silence,
    "lfo": static_gain,
    "filtered-noise": unfiltered_noise,
}
