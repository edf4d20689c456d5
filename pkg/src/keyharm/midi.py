"""Standard MIDI File export of a lead sheet.

Format 1, 480 ticks per quarter note, 110 BPM. Track 0 holds tempo and meter,
track 1 the melody, track 2 one root-position block chord per beat.
"""

from __future__ import annotations

from pathlib import Path

import mido

from .representation import BEATS_PER_BAR, STEPS_PER_BEAT, LeadSheet
from .theory import CHORD_INTERVALS

TICKS_PER_BEAT = 480
TICKS_PER_STEP = TICKS_PER_BEAT // STEPS_PER_BEAT
TEMPO_BPM = 110
VELOCITY = 80
CHORD_VELOCITY = 60
CHORD_BASE = 48  # chord roots are voiced from C3 upwards


def _track(events: list[tuple[int, int, mido.Message]], end: int, name: str) -> mido.MidiTrack:
    """Build a track from (absolute tick, order, message); note-offs sort before note-ons."""
    track = mido.MidiTrack()
    track.append(mido.MetaMessage("track_name", name=name, time=0))
    now = 0
    for tick, _, msg in sorted(events, key=lambda e: (e[0], e[1])):
        track.append(msg.copy(time=tick - now))
        now = tick
    track.append(mido.MetaMessage("end_of_track", time=end - now))
    return track


def to_midi(ls: LeadSheet) -> mido.MidiFile:
    end = ls.num_bars * BEATS_PER_BAR * TICKS_PER_BEAT
    mid = mido.MidiFile(type=1, ticks_per_beat=TICKS_PER_BEAT)

    conductor = mido.MidiTrack()
    conductor.append(mido.MetaMessage("set_tempo", tempo=mido.bpm2tempo(TEMPO_BPM), time=0))
    conductor.append(mido.MetaMessage("time_signature", numerator=4, denominator=4, time=0))
    conductor.append(mido.MetaMessage("end_of_track", time=end))
    mid.tracks.append(conductor)

    melody = []
    onsets = [n.onset * TICKS_PER_STEP for n in ls.melody[1:]] + [end]
    for note, next_onset in zip(ls.melody, onsets):
        start = note.onset * TICKS_PER_STEP
        stop = min(start + note.duration * TICKS_PER_STEP, next_onset, end)
        melody.append((start, 1, mido.Message("note_on", note=note.pitch, velocity=VELOCITY, channel=0)))
        melody.append((stop, 0, mido.Message("note_off", note=note.pitch, velocity=0, channel=0)))
    mid.tracks.append(_track(melody, end, "melody"))

    chords = []
    for beat, chord in enumerate(ls.chords):
        if chord is None:
            continue
        start = beat * TICKS_PER_BEAT
        for interval in CHORD_INTERVALS[chord.quality]:
            pitch = CHORD_BASE + chord.root + interval
            chords.append((start, 1, mido.Message("note_on", note=pitch, velocity=CHORD_VELOCITY, channel=1)))
            chords.append((start + TICKS_PER_BEAT, 0, mido.Message("note_off", note=pitch, velocity=0, channel=1)))
    mid.tracks.append(_track(chords, end, "chords"))
    return mid


def export_midi(ls: LeadSheet, path: str | Path) -> Path:
    path = Path(path)
    to_midi(ls).save(str(path))
    return path
