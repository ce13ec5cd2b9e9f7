"""Musical pitch names resolved to frequencies (12-tone equal temperament)."""

from __future__ import annotations

import re

A4_HZ = 440.0
A4_MIDI = 69

_SEMITONES = {"C": 0, "D": 2, "E": 4, "F": 5, "G": 7, "A": 9, "B": 11}
_NOTE_RE = re.compile(r"^([A-Ga-g])([#b]?)(-?\d{1,2})$")


def is_note_name(text: str) -> bool:
    """True if ``text`` looks like a pitch name such as ``A4`` or ``C#3``."""
    return bool(_NOTE_RE.match(text))


def note_to_hz(name: str) -> float:
    """Resolve a pitch name to Hz in 12-TET with A4 = 440 Hz.

    Accepts sharps (``#``) and flats (``b``); octave numbers follow the
    MIDI convention where C4 is middle C (MIDI 60).

    Raises ``ValueError`` for anything that is not a pitch name.
    """
    m = _NOTE_RE.match(name)
    if not m:
        raise ValueError(f"not a pitch name: {name!r}")
    letter, accidental, octave = m.groups()
    semitone = _SEMITONES[letter.upper()]
    if accidental == "#":
        semitone += 1
    elif accidental == "b":
        semitone -= 1
    midi = (int(octave) + 1) * 12 + semitone
    return A4_HZ * 2.0 ** ((midi - A4_MIDI) / 12.0)
