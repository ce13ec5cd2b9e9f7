"""Automated judges for the five specific benchmarks.

Humans rated these sounds by ear in the original methodology; these
oracles operationalize that judgment from the rendered audio (and, for
additive, a structural peek at the patch), so every report that cites
them is flagged "oracle-judged".  Creative benchmarks are inherently
open-ended and always come back ``needs-human``.

Checks (pass requires every listed check):

- additive: at least 3 peaks at integer multiples of the detected
  fundamental (20 Hz tolerance absorbs deliberate detune), and at least
  3 oscillator nodes in the patch.
- am: a carrier peak flanked by symmetric sidebands at fc +/- fm with
  fm in [20, 1000] Hz.
- fm: at least 2 symmetric sideband pairs at fc +/- k*fm.
- lfo: the RMS envelope (10 ms hops) is periodic with period in
  [0.05, 10] s and modulation depth >= 10%.
- filtered-noise: a broadband floor (>= 30% of bins within 60 dB of the
  top) plus a band-energy-density ratio >= 5 matching the filter mode.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import PatchGraph
from .render import PcmBuffer, Spectrum, spectrum

AM_SIDEBAND_MIN_HZ = 20.0
AM_SIDEBAND_MAX_HZ = 1000.0
ADDITIVE_MIN_PEAKS = 3
ADDITIVE_DETUNE_HZ = 20.0
ADDITIVE_MIN_OSCS = 3
FM_MIN_PAIRS = 2
LFO_MIN_PERIOD_S = 0.05
LFO_MAX_PERIOD_S = 10.0
LFO_MIN_DEPTH = 0.10
LFO_MIN_CORRELATION = 0.5
NOISE_FLOOR_DB = 60.0
NOISE_FLOOR_FRACTION = 0.30
NOISE_BAND_RATIO = 5.0
ENVELOPE_HOP_S = 0.010


class UnknownBenchmarkError(Exception):
    code = "unknown-benchmark"


@dataclass(frozen=True)
class Evidence:
    check: str
    measured: float
    threshold: float


@dataclass(frozen=True)
class Verdict:
    status: str  # pass | fail | needs-human
    evidence: tuple[Evidence, ...] = ()
    rater: str = "oracle"

    @property
    def passed(self) -> bool:
        return self.status == "pass"


def _fail(*evidence: Evidence) -> Verdict:
    return Verdict("fail", tuple(evidence))


def _pass(*evidence: Evidence) -> Verdict:
    return Verdict("pass", tuple(evidence))


def _judge_additive(buffer: PcmBuffer, graph: PatchGraph, structural: bool) -> Verdict:
    spec = spectrum(buffer)
    peaks = spec.peaks
    if len(peaks) < ADDITIVE_MIN_PEAKS:
        return _fail(Evidence("harmonic-peaks", float(len(peaks)), ADDITIVE_MIN_PEAKS))
    fundamental = peaks[0].frequency
    harmonics = 0
    for p in peaks:
        multiple = max(1, round(p.frequency / fundamental))
        if abs(p.frequency - multiple * fundamental) <= ADDITIVE_DETUNE_HZ:
            harmonics += 1
    evidence = [Evidence("harmonic-peaks", float(harmonics), ADDITIVE_MIN_PEAKS)]
    if structural:
        osc_count = len(graph.nodes_of_tag("osc"))
        evidence.append(Evidence("osc-nodes", float(osc_count), ADDITIVE_MIN_OSCS))
        if osc_count < ADDITIVE_MIN_OSCS:
            return _fail(*evidence)
    if harmonics < ADDITIVE_MIN_PEAKS:
        return _fail(*evidence)
    return _pass(*evidence)


def _find_sideband_pairs(spec: Spectrum, carrier: float, fm: float,
                         max_order: int) -> int:
    tolerance = spec.bin_width
    freqs = spec.peak_frequencies()

    def present(target: float) -> bool:
        return any(abs(f - target) <= tolerance for f in freqs)

    pairs = 0
    for k in range(1, max_order + 1):
        lower, upper = carrier - k * fm, carrier + k * fm
        if lower <= 0:
            break
        if present(lower) and present(upper):
            pairs += 1
    return pairs


def _judge_modulation(buffer: PcmBuffer, min_pairs: int) -> Verdict:
    """Shared sideband search for AM (1 pair) and FM (2 pairs)."""
    spec = spectrum(buffer)
    peaks = sorted(spec.peaks, key=lambda p: -p.magnitude)
    best_pairs = 0.0
    for carrier in peaks:
        for other in spec.peaks:
            fm = abs(carrier.frequency - other.frequency)
            if not AM_SIDEBAND_MIN_HZ <= fm <= AM_SIDEBAND_MAX_HZ:
                continue
            pairs = _find_sideband_pairs(spec, carrier.frequency, fm, max_order=4)
            if pairs >= min_pairs:
                return _pass(
                    Evidence("carrier-hz", carrier.frequency, 0.0),
                    Evidence("modulator-hz", fm, AM_SIDEBAND_MIN_HZ),
                    Evidence("sideband-pairs", float(pairs), float(min_pairs)),
                )
            best_pairs = max(best_pairs, float(pairs))
    return _fail(Evidence("sideband-pairs", best_pairs, float(min_pairs)))


def _envelope(buffer: PcmBuffer) -> np.ndarray:
    hop = max(1, int(round(ENVELOPE_HOP_S * buffer.sample_rate)))
    usable = (len(buffer.samples) // hop) * hop
    frames = buffer.samples[:usable].reshape(-1, hop)
    return np.sqrt(np.mean(np.square(frames), axis=1))


def _judge_lfo(buffer: PcmBuffer) -> Verdict:
    env = _envelope(buffer)
    env_rate = 1.0 / ENVELOPE_HOP_S
    peak = float(np.max(env)) if len(env) else 0.0
    if peak <= 0:
        return _fail(Evidence("modulation-depth", 0.0, LFO_MIN_DEPTH))
    depth = float((np.max(env) - np.min(env)) / peak)
    depth_evidence = Evidence("modulation-depth", depth, LFO_MIN_DEPTH)
    if depth < LFO_MIN_DEPTH:
        return _fail(depth_evidence)

    centered = env - np.mean(env)
    denom = float(np.dot(centered, centered))
    if denom <= 0:
        return _fail(depth_evidence)
    ac = np.correlate(centered, centered, mode="full")[len(centered) - 1:] / denom
    # unbiased estimate: without this a 1 Hz LFO in a 2 s render sits at the
    # overlap-bias boundary instead of near 1.0
    lags = np.arange(len(ac))
    ac = ac * len(centered) / np.maximum(len(centered) - lags, 1)
    min_lag = max(1, int(round(LFO_MIN_PERIOD_S * env_rate)))
    max_lag = min(len(ac) - 1, int(round(min(LFO_MAX_PERIOD_S, buffer.duration / 2) * env_rate)))
    if max_lag <= min_lag:
        return _fail(depth_evidence)
    window = ac[min_lag:max_lag + 1]
    # periodicity = height of the strongest local maximum of the envelope
    # autocorrelation within the allowed period range; the right boundary
    # counts (a 1 Hz LFO in a 2 s render peaks exactly at max_lag) but the
    # left does not (that would mistake the zero-lag skirt for a period)
    best_corr, best_lag = -1.0, 0
    for i in range(1, len(window)):
        rising = window[i] >= window[i - 1]
        falling = i == len(window) - 1 or window[i] >= window[i + 1]
        if rising and falling and window[i] > best_corr:
            best_corr, best_lag = float(window[i]), min_lag + i
    if best_lag == 0:
        return _fail(depth_evidence, Evidence("envelope-correlation", 0.0, LFO_MIN_CORRELATION))
    period = best_lag / env_rate
    corr_evidence = Evidence("envelope-correlation", best_corr, LFO_MIN_CORRELATION)
    period_evidence = Evidence("envelope-period-s", period, LFO_MIN_PERIOD_S)
    if best_corr < LFO_MIN_CORRELATION:
        return _fail(depth_evidence, corr_evidence)
    return _pass(depth_evidence, corr_evidence, period_evidence)


def _band_density(spec: Spectrum, lo: float, hi: float) -> float:
    mask = (spec.frequencies >= lo) & (spec.frequencies < hi)
    if not np.any(mask):
        return 0.0
    return float(np.mean(np.square(spec.magnitudes[mask])))


def _judge_filtered_noise(buffer: PcmBuffer, graph: PatchGraph) -> Verdict:
    spec = spectrum(buffer)
    max_mag = float(np.max(spec.magnitudes))
    if max_mag <= 0:
        return _fail(Evidence("broadband-floor", 0.0, NOISE_FLOOR_FRACTION))
    floor = max_mag * 10 ** (-NOISE_FLOOR_DB / 20.0)
    fraction = float(np.mean(spec.magnitudes >= floor))
    floor_evidence = Evidence("broadband-floor", fraction, NOISE_FLOOR_FRACTION)
    if fraction < NOISE_FLOOR_FRACTION:
        return _fail(floor_evidence)

    nyquist = buffer.sample_rate / 2
    low = _band_density(spec, 0.0, 1000.0)
    mid = _band_density(spec, 1000.0, 4000.0)
    high = _band_density(spec, 4000.0, nyquist)
    eps = 1e-30
    ratios = {
        "lowpass": low / (high + eps),
        "highpass": high / (low + eps),
        "bandpass": mid / ((low + high) / 2 + eps),
    }
    filters = graph.nodes_of_tag("filter")
    if filters:
        modes = [f.kind.filter_mode or "lowpass" for f in filters]
        ratio = max(ratios[m] for m in modes)
    else:
        ratio = max(ratios.values())
    ratio_evidence = Evidence("band-energy-ratio", ratio, NOISE_BAND_RATIO)
    if ratio < NOISE_BAND_RATIO:
        return _fail(floor_evidence, ratio_evidence)
    return _pass(floor_evidence, ratio_evidence)


def judge_specific(benchmark_id: str, buffer: PcmBuffer, graph: PatchGraph,
                   structural_checks: tuple[str, ...] = ("additive",)) -> Verdict:
    """Pass/fail with machine evidence for a specific benchmark.

    ``structural_checks`` names the benchmarks whose judge also inspects
    the patch structure (by default just additive's oscillator count).
    Creative benchmark ids return ``needs-human`` untouched.
    """
    from .benchmarks import BENCHMARKS

    bench = BENCHMARKS.get(benchmark_id)
    if bench is None:
        raise UnknownBenchmarkError(f"unknown benchmark {benchmark_id!r}")
    if bench.kind == "creative":
        return Verdict("needs-human", ())

    if benchmark_id == "additive":
        return _judge_additive(buffer, graph, structural="additive" in structural_checks)
    if benchmark_id == "am":
        return _judge_modulation(buffer, min_pairs=1)
    if benchmark_id == "fm":
        return _judge_modulation(buffer, min_pairs=FM_MIN_PAIRS)
    if benchmark_id == "lfo":
        return _judge_lfo(buffer)
    assert benchmark_id == "filtered-noise"
    return _judge_filtered_noise(buffer, graph)
