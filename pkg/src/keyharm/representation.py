"""Lead sheets and their token encodings.

Four token representations share one bar-interleaved layout::

    Emotion_* Key_* (Track_Melody Bar <notes> Track_Chord Bar <4 chord slots>)* EOS

``remi`` spells notes as ``Pitch_*`` and chords by root letter,
``functional`` spells notes as ``Octave_* Degree_*`` and chords by Roman
degree, ``functional-ablated`` mixes Roman chords with ``Pitch_*`` notes, and
``remi-trans`` is ``remi`` applied after :func:`transpose_to_c`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .theory import (
    ALL_KEYS,
    DEGREES,
    MAX_PITCH,
    MIN_PITCH,
    PITCH_NAMES,
    QUALITIES,
    ChordLabel,
    DegreePitch,
    DegreePolicy,
    FunctionalChord,
    Key,
    TheoryError,
    degree_pitch_to_pitch,
    from_functional,
    pitch_to_degree_pitch,
    to_functional,
)

EMOTIONS = ("positive", "negative", "none")
REPRESENTATIONS = ("remi", "remi-trans", "functional", "functional-ablated")

STEPS_PER_BAR = 16
STEPS_PER_BEAT = 4
BEATS_PER_BAR = 4
MAX_DURATION = 16
OCTAVES = range(8)

PAD = "PAD"
BAR = "Bar"
EOS = "EOS"
TRACK_MELODY = "Track_Melody"
TRACK_CHORD = "Track_Chord"
CHORD_NONE = "Chord_None"


class EncodeError(ValueError):
    pass


class DecodeError(ValueError):
    pass


@dataclass(frozen=True)
class Note:
    onset: int
    pitch: int
    duration: int

    def __post_init__(self):
        if self.onset < 0:
            raise ValueError(f"onset must be >= 0, got {self.onset}")
        if not MIN_PITCH <= self.pitch <= MAX_PITCH:
            raise ValueError(f"pitch {self.pitch} outside [{MIN_PITCH}, {MAX_PITCH}]")
        if not 1 <= self.duration <= MAX_DURATION:
            raise ValueError(f"duration must be in [1, {MAX_DURATION}], got {self.duration}")


@dataclass(frozen=True)
class LeadSheet:
    """A monophonic melody on a 16th-note grid plus one chord per beat, in 4/4.

    ``chords`` has exactly ``4 * num_bars`` entries; ``None`` marks a beat
    without a chord. Melody onsets are strictly increasing.
    """

    emotion: str
    key: Key
    num_bars: int
    melody: tuple[Note, ...] = ()
    chords: tuple[ChordLabel | None, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "melody", tuple(self.melody))
        object.__setattr__(self, "chords", tuple(self.chords))
        if self.emotion not in EMOTIONS:
            raise ValueError(f"emotion must be one of {EMOTIONS}, got {self.emotion!r}")
        if self.num_bars < 1:
            raise ValueError("num_bars must be >= 1")
        if len(self.chords) != BEATS_PER_BAR * self.num_bars:
            raise ValueError(
                f"expected {BEATS_PER_BAR * self.num_bars} beat chords for {self.num_bars} bars, "
                f"got {len(self.chords)}"
            )
        last = -1
        for note in self.melody:
            if note.onset <= last:
                raise ValueError(f"melody onsets must strictly increase (onset {note.onset} after {last})")
            last = note.onset
        if last >= STEPS_PER_BAR * self.num_bars:
            raise ValueError(f"note onset {last} beyond the last bar")

    def chord_at(self, onset: int) -> ChordLabel | None:
        return self.chords[onset // STEPS_PER_BEAT]

    def replace(self, **changes) -> "LeadSheet":
        fields = dict(emotion=self.emotion, key=self.key, num_bars=self.num_bars,
                      melody=self.melody, chords=self.chords)
        fields.update(changes)
        return LeadSheet(**fields)


@dataclass
class TokenSequence:
    tokens: list[str]
    representation: str = "functional"

    def __len__(self):
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)

    def to_text(self) -> str:
        return "".join(t + "\n" for t in self.tokens)

    @classmethod
    def from_text(cls, text: str, representation: str | None = None) -> "TokenSequence":
        tokens = [line.strip() for line in text.splitlines() if line.strip()]
        return cls(tokens, representation or detect_representation(tokens))


@dataclass(frozen=True)
class Violation:
    index: int
    rule: str
    token: str | None = None

    def __str__(self):
        return f"token {self.index} ({self.token!r}): {self.rule}"


# --- token spelling -----------------------------------------------------------

def emotion_token(emotion: str) -> str:
    return "Emotion_" + emotion.capitalize()


def key_token(key: Key) -> str:
    return "Key_" + key.name


def roman_chord_token(chord: FunctionalChord | None) -> str:
    return CHORD_NONE if chord is None else f"Chord_{chord.degree}_{chord.quality}"


def letter_chord_token(chord: ChordLabel | None) -> str:
    return CHORD_NONE if chord is None else f"Chord_{PITCH_NAMES[chord.root]}_{chord.quality}"


def _melody_style(representation: str) -> str:
    return "degree" if representation == "functional" else "pitch"


def _chord_style(representation: str) -> str:
    return "roman" if representation.startswith("functional") else "letter"


def vocabulary(representation: str = "functional") -> list[str]:
    """Closed token set of a representation, in a fixed order.

    Functional: 216 event tokens plus ``PAD`` (217). REMI-style: 284.
    """
    if representation not in REPRESENTATIONS:
        raise ValueError(f"unknown representation {representation!r}")
    tokens = [emotion_token(e) for e in EMOTIONS]
    tokens += [key_token(k) for k in ALL_KEYS]
    tokens.append(BAR)
    tokens += [f"SubBeat_{i}" for i in range(STEPS_PER_BAR)]
    tokens += [f"Duration_{d}" for d in range(1, MAX_DURATION + 1)]
    tokens += [TRACK_MELODY, TRACK_CHORD, EOS]
    roots = DEGREES if _chord_style(representation) == "roman" else PITCH_NAMES
    tokens += [f"Chord_{r}_{q}" for r in roots for q in QUALITIES]
    tokens.append(CHORD_NONE)
    if _melody_style(representation) == "degree":
        tokens += [f"Octave_{o}" for o in OCTAVES]
        tokens += [f"Degree_{d}" for d in DEGREES]
        tokens.append(PAD)
    else:
        tokens += [f"Pitch_{p}" for p in range(MIN_PITCH, MAX_PITCH + 1)]
    return tokens


_VOCAB_CACHE: dict[str, tuple[list[str], frozenset[str]]] = {}


def _vocab(representation: str) -> tuple[list[str], frozenset[str]]:
    if representation not in _VOCAB_CACHE:
        v = vocabulary(representation)
        _VOCAB_CACHE[representation] = (v, frozenset(v))
    return _VOCAB_CACHE[representation]


_PREFIX_CACHE: dict[str, dict[str, tuple[str, ...]]] = {}


def _tokens_by_prefix(representation: str) -> dict[str, tuple[str, ...]]:
    if representation not in _PREFIX_CACHE:
        groups: dict[str, list[str]] = {}
        for t in _vocab(representation)[0]:
            groups.setdefault(t.split("_", 1)[0], []).append(t)
        _PREFIX_CACHE[representation] = {k: tuple(v) for k, v in groups.items()}
    return _PREFIX_CACHE[representation]


def detect_representation(tokens: Sequence[str]) -> str:
    """Best guess of the representation tag from token spellings.

    ``remi`` and ``remi-trans`` share an alphabet; a REMI-style sequence in C
    major or c minor is still reported as ``remi``.
    """
    has_degree = any(t.startswith("Octave_") for t in tokens)
    if has_degree:
        return "functional"
    for t in tokens:
        if t.startswith("Chord_") and t != CHORD_NONE:
            root = t.split("_")[1]
            return "functional-ablated" if root in DEGREES else "remi"
    return "remi"


# --- encoding -------------------------------------------------------------------

def _notes_by_bar(ls: LeadSheet) -> list[list[Note]]:
    bars: list[list[Note]] = [[] for _ in range(ls.num_bars)]
    for note in ls.melody:
        bars[note.onset // STEPS_PER_BAR].append(note)
    return bars


def _encode(ls: LeadSheet, representation: str, policy: DegreePolicy | None) -> TokenSequence:
    if len(ls.chords) != BEATS_PER_BAR * ls.num_bars:
        raise EncodeError("chord list length does not match num_bars")
    degree_melody = _melody_style(representation) == "degree"
    roman = _chord_style(representation) == "roman"
    policy = (policy or DegreePolicy()).fresh()
    key = ls.key
    out = [emotion_token(ls.emotion), key_token(key)]
    for i, notes in enumerate(_notes_by_bar(ls)):
        out += [TRACK_MELODY, BAR]
        for note in notes:
            out.append(f"SubBeat_{note.onset % STEPS_PER_BAR}")
            if degree_melody:
                try:
                    dp = pitch_to_degree_pitch(note.pitch, key, policy)
                except TheoryError as exc:
                    raise EncodeError(str(exc)) from exc
                out += [f"Octave_{dp.octave}", f"Degree_{dp.degree}"]
            else:
                out.append(f"Pitch_{note.pitch}")
            out.append(f"Duration_{note.duration}")
        out += [TRACK_CHORD, BAR]
        for beat in range(BEATS_PER_BAR):
            chord = ls.chords[i * BEATS_PER_BAR + beat]
            out.append(f"SubBeat_{beat * STEPS_PER_BEAT}")
            if roman:
                out.append(roman_chord_token(None if chord is None else to_functional(chord, key, policy)))
            else:
                out.append(letter_chord_token(chord))
    out.append(EOS)
    return TokenSequence(out, representation)


def encode_functional(ls: LeadSheet, policy: DegreePolicy | None = None) -> TokenSequence:
    return _encode(ls, "functional", policy)


def encode_functional_ablated(ls: LeadSheet, policy: DegreePolicy | None = None) -> TokenSequence:
    return _encode(ls, "functional-ablated", policy)


def encode_remi(ls: LeadSheet) -> TokenSequence:
    return _encode(ls, "remi", None)


def encode_remi_trans(ls: LeadSheet) -> TokenSequence:
    ts = _encode(transpose_to_c(ls), "remi", None)
    ts.representation = "remi-trans"
    return ts


def encode(ls: LeadSheet, representation: str, policy: DegreePolicy | None = None) -> TokenSequence:
    if representation == "remi":
        return encode_remi(ls)
    if representation == "remi-trans":
        return encode_remi_trans(ls)
    if representation in ("functional", "functional-ablated"):
        return _encode(ls, representation, policy)
    raise ValueError(f"unknown representation {representation!r}")


# --- grammar ------------------------------------------------------------------

class SequenceGrammar:
    """Incremental checker for the interleaved token layout.

    Feed tokens one at a time with :meth:`feed`; :meth:`legal` lists the
    tokens that may come next, which is what the generator uses as a mask.
    """

    def __init__(self, representation: str = "functional"):
        _, self._vocab_set = _vocab(representation)
        self.representation = representation
        self._degree_melody = _melody_style(representation) == "degree"
        self._by_prefix = _tokens_by_prefix(representation)
        self.state = "emotion"
        self.last_subbeat = -1
        self.slot = 0
        self.bars = 0

    def copy(self) -> "SequenceGrammar":
        other = object.__new__(SequenceGrammar)
        other.__dict__.update(self.__dict__)
        return other

    @property
    def finished(self) -> bool:
        return self.state == "end"

    def feed(self, tok: str) -> str | None:
        """Advance by one token; return the violated rule name, or None."""
        if tok not in self._vocab_set:
            return "unknown-token"
        state = self.state
        if state == "emotion":
            if not tok.startswith("Emotion_"):
                return "expected-emotion"
            self.state = "key"
        elif state == "key":
            if not tok.startswith("Key_"):
                return "expected-key"
            self.state = "track"
        elif state == "track":
            if tok != TRACK_MELODY:
                return "expected-track-melody"
            self.state = "mel_bar"
        elif state == "mel_bar":
            if tok != BAR:
                return "expected-bar"
            self.state, self.last_subbeat = "mel_body", -1
        elif state == "mel_body":
            if tok == TRACK_CHORD:
                self.state = "chord_bar"
            elif tok.startswith("SubBeat_"):
                pos = int(tok[8:])
                if pos <= self.last_subbeat:
                    return "subbeat-order"
                self.last_subbeat = pos
                self.state = "note_head"
            else:
                return "expected-subbeat-or-track-chord"
        elif state == "note_head":
            if self._degree_melody:
                if not tok.startswith("Octave_"):
                    return "expected-octave"
                self.state = "degree"
            else:
                if not tok.startswith("Pitch_"):
                    return "expected-pitch"
                self.state = "duration"
        elif state == "degree":
            if not tok.startswith("Degree_"):
                return "expected-degree"
            self.state = "duration"
        elif state == "duration":
            if not tok.startswith("Duration_"):
                return "expected-duration"
            self.state = "mel_body"
        elif state == "chord_bar":
            if tok != BAR:
                return "expected-bar"
            self.state, self.slot = "chord_body", 0
        elif state == "chord_body":
            if self.slot < BEATS_PER_BAR:
                if tok != f"SubBeat_{self.slot * STEPS_PER_BEAT}":
                    return "chord-slot"
                self.state = "chord"
            elif tok == TRACK_MELODY:
                self.bars += 1
                self.state = "mel_bar"
            elif tok == EOS:
                self.bars += 1
                self.state = "end"
            else:
                return "expected-track-melody-or-eos"
        elif state == "chord":
            if not tok.startswith("Chord_"):
                return "expected-chord"
            self.slot += 1
            self.state = "chord_body"
        else:
            return "trailing-tokens"
        return None

    def legal(self) -> list[str]:
        p = self._by_prefix
        state = self.state
        if state == "emotion":
            return list(p["Emotion"])
        if state == "key":
            return list(p["Key"])
        if state == "track":
            return [TRACK_MELODY]
        if state in ("mel_bar", "chord_bar"):
            return [BAR]
        if state == "mel_body":
            return [f"SubBeat_{i}" for i in range(self.last_subbeat + 1, STEPS_PER_BAR)] + [TRACK_CHORD]
        if state == "note_head":
            return list(p["Octave"] if self._degree_melody else p["Pitch"])
        if state == "degree":
            return list(p["Degree"])
        if state == "duration":
            return list(p["Duration"])
        if state == "chord_body":
            if self.slot < BEATS_PER_BAR:
                return [f"SubBeat_{self.slot * STEPS_PER_BEAT}"]
            return [TRACK_MELODY, EOS]
        if state == "chord":
            return list(p["Chord"])
        return []


def validate_sequence(ts: TokenSequence | Sequence[str], representation: str | None = None) -> Violation | None:
    """Return the first grammar violation in ``ts``, or None if it is well formed."""
    if isinstance(ts, TokenSequence):
        tokens, representation = ts.tokens, representation or ts.representation
    else:
        tokens = list(ts)
        representation = representation or detect_representation(tokens)
    grammar = SequenceGrammar(representation)
    for i, tok in enumerate(tokens):
        rule = grammar.feed(tok)
        if rule is not None:
            return Violation(i, rule, tok)
    if not grammar.finished:
        return Violation(len(tokens), "missing-eos")
    return None


# --- decoding -------------------------------------------------------------------

_EMOTION_BY_TOKEN = {emotion_token(e): e for e in EMOTIONS}


def _decode(ts: TokenSequence, representation: str) -> LeadSheet:
    violation = validate_sequence(ts.tokens, representation)
    if violation is not None:
        raise DecodeError(str(violation))
    tokens = ts.tokens
    emotion = _EMOTION_BY_TOKEN[tokens[0]]
    key = Key.from_name(tokens[1][4:])
    roman = _chord_style(representation) == "roman"
    melody: list[Note] = []
    chords: list[ChordLabel | None] = []
    bar = -1
    onset = octave = degree = pitch = None
    for tok in tokens[2:]:
        if tok == TRACK_MELODY:
            bar += 1
        elif tok.startswith("SubBeat_"):
            onset = bar * STEPS_PER_BAR + int(tok[8:])
        elif tok.startswith("Octave_"):
            octave = int(tok[7:])
        elif tok.startswith("Degree_"):
            degree = tok[7:]
            try:
                pitch = degree_pitch_to_pitch(DegreePitch(octave, degree), key)
            except TheoryError as exc:
                raise DecodeError(str(exc)) from exc
        elif tok.startswith("Pitch_"):
            pitch = int(tok[6:])
        elif tok.startswith("Duration_"):
            melody.append(Note(onset, pitch, int(tok[9:])))
        elif tok.startswith("Chord_"):
            if tok == CHORD_NONE:
                chords.append(None)
            else:
                _, root, quality = tok.split("_", 2)
                if roman:
                    chords.append(from_functional(FunctionalChord(root, quality), key))
                else:
                    chords.append(ChordLabel(PITCH_NAMES.index(root), quality))
    return LeadSheet(emotion, key, bar + 1, melody, chords)


def decode_functional(ts: TokenSequence) -> LeadSheet:
    return _decode(ts, "functional")


def decode_functional_ablated(ts: TokenSequence) -> LeadSheet:
    return _decode(ts, "functional-ablated")


def decode_remi(ts: TokenSequence) -> LeadSheet:
    return _decode(ts, "remi")


def decode(ts: TokenSequence) -> LeadSheet:
    rep = "remi" if ts.representation == "remi-trans" else ts.representation
    return _decode(ts, rep)


# --- key manipulation -----------------------------------------------------------

def _fold(pitch: int) -> int:
    while pitch < MIN_PITCH:
        pitch += 12
    while pitch > MAX_PITCH:
        pitch -= 12
    return pitch


def transpose(ls: LeadSheet, semitones: int, key: Key | None = None) -> LeadSheet:
    """Shift every pitch and chord root; pitches leaving the piano range fold by octaves."""
    melody = [Note(n.onset, _fold(n.pitch + semitones), n.duration) for n in ls.melody]
    chords = [None if c is None else ChordLabel((c.root + semitones) % 12, c.quality) for c in ls.chords]
    key = key or Key((ls.key.tonic + semitones) % 12, ls.key.mode)
    return ls.replace(key=key, melody=melody, chords=chords)


def shift_to_c(tonic: int) -> int:
    """Smallest-motion shift in [-6, 5] taking ``tonic`` to C."""
    delta = (-tonic) % 12
    return delta - 12 if delta > 5 else delta


def transpose_to_c(ls: LeadSheet) -> LeadSheet:
    return transpose(ls, shift_to_c(ls.key.tonic), Key(0, ls.key.mode))


def rekey(ls: LeadSheet, key: Key, policy: DegreePolicy | None = None) -> LeadSheet:
    """Re-pitch melody and chords into ``key`` keeping every scale degree.

    Switching to the parallel key is melodic variation: the tonic stays and
    pitches follow the new mode.
    """
    tokens = encode_functional(ls, policy).tokens
    tokens[1] = key_token(key)
    return decode_functional(TokenSequence(tokens, "functional"))
