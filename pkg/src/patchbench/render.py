"""Offline rendering of well-formed patches and spectral measurement.

``compile`` turns a validated graph into a topologically-ordered signal
program; ``render`` evaluates it sample-accurately into a mono PCM buffer;
``spectrum`` measures the buffer for the judges in ``oracles``.

Node semantics:

- osc emits its waveform at the parameter frequency (sine phase starts at
  0); any signal arriving at its frequency inlet *adds* to that base
  frequency, which is what makes FM and LFO patches possible.
- gain multiplies its signal inlet by the factor parameter, or by the
  summed second-inlet signal when one is connected (AM).
- filter is an RBJ-cookbook biquad, recomputed per sample when its cutoff
  or Q inlets are modulated.
- const and note emit their value as a constant signal; adc-key (a live
  input stand-in) and scope are valid but silent.
- dac averages its two inlets to mono; the final mix is clipped to [-1, 1].
"""

from __future__ import annotations

import hashlib
import io
import struct
import wave
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .graph import Node, PatchGraph, require_well_formed

DEFAULT_SAMPLE_RATE = 44100
DEFAULT_DURATION = 2.0

FFT_SIZE = 8192
PEAK_MEDIAN_MARGIN_DB = 20.0   # peak must clear the median by this much
PEAK_RELATIVE_FLOOR_DB = 40.0  # ... and sit within this of the strongest peak
PEAK_MIN_SEPARATION_BINS = 6   # window sidelobes never count as extra peaks


class AnalysisError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


def _node_seed(program_seed: int, node_id: str) -> int:
    digest = hashlib.sha256(f"{program_seed}:{node_id}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


@dataclass(frozen=True)
class SignalProgram:
    """Executable schedule: nodes in dependency order plus wiring tables."""

    order: tuple[str, ...]
    nodes: dict[str, Node]
    # inputs[node id][inlet] -> tuple of source node ids feeding that inlet
    inputs: dict[str, tuple[tuple[str, ...], ...]]
    noise_seeds: dict[str, int]


def compile(graph: PatchGraph, seed: int = 0) -> SignalProgram:
    """Lower a well-formed graph to a schedule (raises NotWellFormedError).

    The topological order exists because validation rejected cycles; ties
    break by node insertion order so compilation is deterministic.
    """
    require_well_formed(graph)
    node_map = graph.node_map()
    from .graph import kind_info

    indegree = {n.id: 0 for n in graph.nodes}
    for e in graph.edges:
        indegree[e.dst] += 1
    order: list[str] = []
    ready = [n.id for n in graph.nodes if indegree[n.id] == 0]
    adjacency: dict[str, list[str]] = {n.id: [] for n in graph.nodes}
    for e in graph.edges:
        adjacency[e.src].append(e.dst)
    while ready:
        current = ready.pop(0)
        order.append(current)
        for nxt in adjacency[current]:
            indegree[nxt] -= 1
            if indegree[nxt] == 0:
                ready.append(nxt)
    assert len(order) == len(graph.nodes)

    inputs: dict[str, tuple[tuple[str, ...], ...]] = {}
    for node in graph.nodes:
        info = kind_info(node.kind)
        assert info is not None
        per_inlet: list[tuple[str, ...]] = []
        for inlet in range(len(info.inlets)):
            feeders = tuple(
                e.src for e in graph.edges if e.dst == node.id and e.dst_inlet == inlet
            )
            per_inlet.append(feeders)
        inputs[node.id] = tuple(per_inlet)

    noise_seeds = {
        n.id: _node_seed(seed, n.id) for n in graph.nodes if n.kind.tag == "noise"
    }
    return SignalProgram(order=tuple(order), nodes=dict(node_map),
                         inputs=inputs, noise_seeds=noise_seeds)


@dataclass(frozen=True)
class PcmBuffer:
    samples: np.ndarray  # float64 in [-1, 1]
    sample_rate: int = DEFAULT_SAMPLE_RATE

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate

    def rms(self) -> float:
        if len(self.samples) == 0:
            return 0.0
        return float(np.sqrt(np.mean(np.square(self.samples))))


def _biquad_coeffs(mode: str, cutoff: float, q: float, sr: int):
    """RBJ audio-EQ-cookbook coefficients, normalized to a0 = 1."""
    cutoff = min(max(cutoff, 1.0), 0.49 * sr)
    q = max(q, 1e-3)
    w0 = 2.0 * np.pi * cutoff / sr
    cos_w0, sin_w0 = np.cos(w0), np.sin(w0)
    alpha = sin_w0 / (2.0 * q)
    if mode == "lowpass":
        b0 = (1 - cos_w0) / 2
        b1 = 1 - cos_w0
        b2 = (1 - cos_w0) / 2
    elif mode == "highpass":
        b0 = (1 + cos_w0) / 2
        b1 = -(1 + cos_w0)
        b2 = (1 + cos_w0) / 2
    else:  # bandpass, constant 0 dB peak gain
        b0 = alpha
        b1 = 0.0
        b2 = -alpha
    a0 = 1 + alpha
    a1 = -2 * cos_w0
    a2 = 1 - alpha
    return (b0 / a0, b1 / a0, b2 / a0, a1 / a0, a2 / a0)


def _waveform(phase: np.ndarray, waveform: str) -> np.ndarray:
    """Evaluate one cycle-normalized waveform over phase in [0, 1)."""
    if waveform == "sine":
        return np.sin(2.0 * np.pi * phase)
    if waveform == "square":
        return np.where(phase < 0.5, 1.0, -1.0)
    if waveform == "saw":
        return 2.0 * phase - 1.0
    # triangle: rises 0->1 over the first half-cycle, falls after
    return 1.0 - 4.0 * np.abs(phase - 0.5)


def render(program: SignalProgram, duration: float = DEFAULT_DURATION,
           sample_rate: int = DEFAULT_SAMPLE_RATE) -> PcmBuffer:
    """Evaluate the program into a mono buffer, clipped to [-1, 1].

    Deterministic: noise generators are seeded per node at compile time, so
    equal (program, duration, sample_rate) always yields equal samples.
    """
    if duration <= 0:
        raise ValueError("duration must be > 0")
    n = int(round(duration * sample_rate))
    outputs: dict[str, np.ndarray | None] = {}

    def inlet_sum(node_id: str, inlet: int) -> np.ndarray | None:
        feeders = program.inputs[node_id][inlet]
        arrays = [outputs[f] for f in feeders if outputs.get(f) is not None]
        if not arrays:
            return None
        return np.sum(arrays, axis=0)

    for node_id in program.order:
        node = program.nodes[node_id]
        tag = node.kind.tag
        if tag == "osc":
            base = node.params[0]
            freq_mod = inlet_sum(node_id, 0)
            if freq_mod is None:
                phase = np.arange(n, dtype=np.float64) * (base / sample_rate)
            else:
                inst = (base + freq_mod) / sample_rate
                phase = np.concatenate(([0.0], np.cumsum(inst[:-1])))
            outputs[node_id] = _waveform(np.mod(phase, 1.0), node.kind.waveform or "sine")
        elif tag == "noise":
            rng = np.random.Generator(np.random.PCG64(program.noise_seeds[node_id]))
            outputs[node_id] = rng.uniform(-1.0, 1.0, n)
        elif tag == "gain":
            signal = inlet_sum(node_id, 0)
            if signal is None:
                outputs[node_id] = np.zeros(n)
            else:
                factor = inlet_sum(node_id, 1)
                outputs[node_id] = signal * (factor if factor is not None else node.params[0])
        elif tag == "filter":
            signal = inlet_sum(node_id, 0)
            if signal is None:
                outputs[node_id] = np.zeros(n)
            else:
                cutoff_mod = inlet_sum(node_id, 1)
                q_mod = inlet_sum(node_id, 2)
                mode = node.kind.filter_mode or "lowpass"
                if cutoff_mod is None and q_mod is None:
                    b0, b1, b2, a1, a2 = _biquad_coeffs(
                        mode, node.params[0], node.params[1], sample_rate
                    )
                    outputs[node_id] = lfilter([b0, b1, b2], [1.0, a1, a2], signal)
                else:
                    outputs[node_id] = _modulated_biquad(
                        signal, mode, node.params[0], node.params[1],
                        cutoff_mod, q_mod, sample_rate,
                    )
        elif tag in ("const", "note"):
            outputs[node_id] = np.full(n, node.params[0])
        elif tag == "adc-key":
            outputs[node_id] = np.zeros(n)
        elif tag == "dac":
            channels = [
                arr for arr in (inlet_sum(node_id, 0), inlet_sum(node_id, 1))
                if arr is not None
            ]
            # mono downmix: average the connected channels
            outputs[node_id] = np.mean(channels, axis=0) if channels else np.zeros(n)
        else:  # scope: listens, emits nothing
            outputs[node_id] = None

    mix = np.zeros(n)
    for node_id, node in program.nodes.items():
        if node.kind.tag == "dac" and outputs.get(node_id) is not None:
            mix = mix + outputs[node_id]
    mix = np.clip(np.nan_to_num(mix, nan=0.0, posinf=1.0, neginf=-1.0), -1.0, 1.0)
    return PcmBuffer(samples=mix, sample_rate=sample_rate)


def _modulated_biquad(signal, mode, base_cutoff, base_q, cutoff_mod, q_mod, sr):
    out = np.empty_like(signal)
    z1 = z2 = 0.0  # direct form II transposed state
    cutoffs = base_cutoff + (cutoff_mod if cutoff_mod is not None else 0.0)
    qs = base_q + (q_mod if q_mod is not None else 0.0)
    cutoffs = np.broadcast_to(np.asarray(cutoffs, dtype=np.float64), signal.shape)
    qs = np.broadcast_to(np.asarray(qs, dtype=np.float64), signal.shape)
    for i in range(len(signal)):
        b0, b1, b2, a1, a2 = _biquad_coeffs(mode, cutoffs[i], qs[i], sr)
        x = signal[i]
        y = b0 * x + z1
        z1 = b1 * x - a1 * y + z2
        z2 = b2 * x - a2 * y
        out[i] = y
    return out


def render_graph(graph: PatchGraph, duration: float = DEFAULT_DURATION,
                 sample_rate: int = DEFAULT_SAMPLE_RATE, seed: int = 0) -> PcmBuffer:
    """Convenience: compile + render in one step."""
    return render(compile(graph, seed=seed), duration, sample_rate)


# ---------------------------------------------------------------------------
# spectral measurement
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Peak:
    frequency: float  # Hz, refined by parabolic interpolation
    magnitude: float
    bin: int


@dataclass(frozen=True)
class Spectrum:
    frequencies: np.ndarray
    magnitudes: np.ndarray
    peaks: tuple[Peak, ...]
    bin_width: float

    def peak_frequencies(self) -> list[float]:
        return [p.frequency for p in self.peaks]


def spectrum(buffer: PcmBuffer) -> Spectrum:
    """Magnitude spectrum of the Hann-windowed middle 8192 samples.

    Peaks are local maxima that clear the median magnitude by 20 dB, sit
    within 40 dB of the strongest component, and are at least 6 bins from
    any stronger accepted peak (suppresses window sidelobes and skirt
    ripple).  Peak frequencies are refined by parabolic interpolation, so
    they land well inside +/-1 bin of the true component.
    """
    n = len(buffer.samples)
    if n < FFT_SIZE:
        raise AnalysisError("too-short", f"need at least {FFT_SIZE} samples, got {n}")
    start = (n - FFT_SIZE) // 2
    segment = buffer.samples[start:start + FFT_SIZE]
    windowed = segment * np.hanning(FFT_SIZE)
    mags = np.abs(np.fft.rfft(windowed))
    bin_width = buffer.sample_rate / FFT_SIZE
    freqs = np.arange(len(mags)) * bin_width

    peaks: list[Peak] = []
    max_mag = float(np.max(mags))
    if max_mag > 0.0:
        median = float(np.median(mags))
        floor = max(
            median * 10 ** (PEAK_MEDIAN_MARGIN_DB / 20.0),
            max_mag * 10 ** (-PEAK_RELATIVE_FLOOR_DB / 20.0),
        )
        candidates = [
            i for i in range(1, len(mags) - 1)
            if mags[i] >= floor and mags[i] > mags[i - 1] and mags[i] >= mags[i + 1]
        ]
        for i in sorted(candidates, key=lambda i: -mags[i]):
            if any(abs(i - p.bin) <= PEAK_MIN_SEPARATION_BINS for p in peaks):
                continue
            peaks.append(Peak(frequency=_interp_bin(mags, i) * bin_width,
                              magnitude=float(mags[i]), bin=i))
        peaks.sort(key=lambda p: p.frequency)

    return Spectrum(frequencies=freqs, magnitudes=mags, peaks=tuple(peaks),
                    bin_width=bin_width)


def _interp_bin(mags: np.ndarray, i: int) -> float:
    """Quadratic interpolation of a log-magnitude peak around bin ``i``."""
    if i <= 0 or i >= len(mags) - 1:
        return float(i)
    eps = 1e-30
    a, b, c = (float(np.log(mags[j] + eps)) for j in (i - 1, i, i + 1))
    denom = a - 2 * b + c
    if denom == 0:
        return float(i)
    delta = 0.5 * (a - c) / denom
    return i + float(np.clip(delta, -0.5, 0.5))


# ---------------------------------------------------------------------------
# WAV export (16-bit PCM, RIFF, mono, little-endian)
# ---------------------------------------------------------------------------

def wav_bytes(buffer: PcmBuffer) -> bytes:
    scaled = np.clip(buffer.samples, -1.0, 1.0)
    ints = (scaled * 32767.0).astype("<i2")
    out = io.BytesIO()
    with wave.open(out, "wb") as wav:
        wav.setnchannels(1)
        wav.setsampwidth(2)
        wav.setframerate(buffer.sample_rate)
        wav.writeframes(ints.tobytes())
    return out.getvalue()


def write_wav(buffer: PcmBuffer, path) -> None:
    with open(path, "wb") as handle:
        handle.write(wav_bytes(buffer))
