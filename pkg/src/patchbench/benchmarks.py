"""The benchmark set and the generation-category registry.

Ten sound projects: five specific (highly-defined techniques an oracle
can hear) and five creative (open-ended sounds only a human can rate).
Each creative benchmark pairs with the specific technique typically used
to build it: a church bell is additive, a telephone dial tone is AM, and
so on down the list.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class BenchmarkSpec:
    id: str
    name: str
    kind: str  # "specific" | "creative"
    paired_with: str
    prompt_noun: str
    oracle: str | None = None


_SPECS = [
    BenchmarkSpec("additive", "Additive synthesis", "specific", "church-bell",
                  "additive synthesis", oracle="additive"),
    BenchmarkSpec("am", "AM synthesis", "specific", "dial-tone",
                  "AM synthesis", oracle="am"),
    BenchmarkSpec("fm", "FM synthesis", "specific", "bird-call",
                  "FM synthesis", oracle="fm"),
    BenchmarkSpec("lfo", "An LFO", "specific", "ocean-waves",
                  "an LFO", oracle="lfo"),
    BenchmarkSpec("filtered-noise", "Filtered noise", "specific", "babbling-brook",
                  "filtered noise", oracle="filtered-noise"),
    BenchmarkSpec("church-bell", "A church bell", "creative", "additive",
                  "a church bell"),
    BenchmarkSpec("dial-tone", "A telephone dial tone", "creative", "am",
                  "a telephone dial tone"),
    BenchmarkSpec("bird-call", "A bird call", "creative", "fm",
                  "a bird call"),
    BenchmarkSpec("ocean-waves", "The sound of waves hitting the ocean", "creative", "lfo",
                  "the sound of waves hitting the ocean"),
    BenchmarkSpec("babbling-brook", "A babbling brook", "creative", "filtered-noise",
                  "a babbling brook"),
]

BENCHMARKS: dict[str, BenchmarkSpec] = {b.id: b for b in _SPECS}
SPECIFIC_BENCHMARKS = [b.id for b in _SPECS if b.kind == "specific"]
CREATIVE_BENCHMARKS = [b.id for b in _SPECS if b.kind == "creative"]

assert len(SPECIFIC_BENCHMARKS) == 5 and len(CREATIVE_BENCHMARKS) == 5
assert {BENCHMARKS[c].paired_with for c in CREATIVE_BENCHMARKS} == set(SPECIFIC_BENCHMARKS)


@dataclass(frozen=True)
class Category:
    """One generation target: a language representation plus a checking route.

    ``template`` picks the prompt family: "examples" renders
    "Based on the examples given, use {noun} to write code that
    implements {benchmark}." while "plain" renders
    "Write {noun} that implements {benchmark}.".  Rich categories append
    the loops-and-randomness instruction with their ``random_fn``.
    ``route`` names how well-formedness is checked: parse for the JSON
    dialects, parse+run for PatchScript, an external runner otherwise.
    """

    id: str
    noun: str
    template: str  # "examples" | "plain"
    route: str  # "maxpat" | "wavir" | "script" | "external"
    rich: bool = False
    random_fn: str = "random()"


CATEGORIES: dict[str, Category] = {
    "json-maxpat": Category("json-maxpat", "JSON for a Max patch", "examples", "maxpat"),
    "json-wavir": Category("json-wavir", "JSON", "plain", "wavir"),
    "patchscript": Category("patchscript", "PatchScript", "examples", "script"),
    "patchscript-rich": Category("patchscript-rich", "PatchScript", "examples", "script",
                                 rich=True, random_fn="random()"),
    "external-metaprog": Category("external-metaprog", "MaxPy", "examples", "external",
                                  random_fn="random()"),
}
