"""Key, scale and scale-degree arithmetic.

Pitch classes are integers 0-11 with C = 0, sharps only. Degrees are the
twelve Roman symbols in ``DEGREES``; the minor-only accidentals (raised third
and raised seventh) have no symbol of their own and are resolved onto a
neighbouring degree through a :class:`DegreePolicy`.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

PITCH_NAMES = ("C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B")
MODES = ("major", "minor")

DEGREES = ("I", "I#", "II", "II#", "III", "IV", "IV#", "V", "V#", "VI", "VI#", "VII")

# semitone offset from the tonic for every degree symbol
MAJOR_OFFSETS = dict(zip(DEGREES, (0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11)))
# II# and V# collide with III and VI; a minor encoder never emits them
MINOR_OFFSETS = dict(zip(DEGREES, (0, 1, 2, 3, 3, 5, 6, 7, 8, 8, 9, 10)))

SCALE_STEPS = {
    "major": (0, 2, 4, 5, 7, 9, 11),
    "minor": (0, 2, 3, 5, 7, 8, 10),
}

QUALITIES = (
    "major",
    "minor",
    "augment",
    "diminish",
    "suspend2",
    "suspend4",
    "major7",
    "minor7",
    "dominant7",
    "diminish7",
    "half-diminish7",
)

CHORD_INTERVALS = {
    "major": (0, 4, 7),
    "minor": (0, 3, 7),
    "augment": (0, 4, 8),
    "diminish": (0, 3, 6),
    "suspend2": (0, 2, 7),
    "suspend4": (0, 5, 7),
    "major7": (0, 4, 7, 11),
    "minor7": (0, 3, 7, 10),
    "dominant7": (0, 4, 7, 10),
    "diminish7": (0, 3, 6, 9),
    "half-diminish7": (0, 3, 6, 10),
}

_MAJOR_INVERSE = {r: d for d, r in MAJOR_OFFSETS.items()}
_MINOR_INVERSE = {0: "I", 1: "I#", 2: "II", 3: "III", 5: "IV", 6: "IV#",
                  7: "V", 8: "VI", 9: "VI#", 10: "VII"}
# relative pc -> (lower neighbour, upper neighbour)
_MINOR_AMBIGUOUS = {4: ("III", "IV"), 11: ("VII", "I")}

MIN_PITCH = 21
MAX_PITCH = 108
MIN_OCTAVE = 0
MAX_OCTAVE = 7


class TheoryError(ValueError):
    pass


@dataclass(frozen=True)
class Key:
    tonic: int
    mode: str = "major"

    def __post_init__(self):
        if not 0 <= self.tonic <= 11:
            raise TheoryError(f"tonic must be in [0, 11], got {self.tonic}")
        if self.mode not in MODES:
            raise TheoryError(f"mode must be 'major' or 'minor', got {self.mode!r}")

    @property
    def name(self) -> str:
        """Token spelling, e.g. ``Dmajor`` or ``C#minor``."""
        return PITCH_NAMES[self.tonic] + self.mode

    @property
    def index(self) -> int:
        """Position 0-23: the 12 major keys first, then the 12 minor keys."""
        return self.tonic + 12 * MODES.index(self.mode)

    @classmethod
    def from_name(cls, name: str) -> "Key":
        for mode in MODES:
            if name.endswith(mode):
                letter = name[: -len(mode)]
                if letter in PITCH_NAMES:
                    return cls(PITCH_NAMES.index(letter), mode)
        raise TheoryError(f"unknown key name {name!r}")

    def __str__(self):
        return self.name


ALL_KEYS = tuple(Key(t, m) for m in MODES for t in range(12))


@dataclass(frozen=True)
class ChordLabel:
    root: int
    quality: str

    def __post_init__(self):
        if not 0 <= self.root <= 11:
            raise TheoryError(f"chord root must be in [0, 11], got {self.root}")
        if self.quality not in CHORD_INTERVALS:
            raise TheoryError(f"unknown chord quality {self.quality!r}")

    @property
    def name(self) -> str:
        return f"{PITCH_NAMES[self.root]}_{self.quality}"


@dataclass(frozen=True)
class FunctionalChord:
    degree: str
    quality: str

    def __post_init__(self):
        if self.degree not in MAJOR_OFFSETS:
            raise TheoryError(f"unknown degree {self.degree!r}")
        if self.quality not in CHORD_INTERVALS:
            raise TheoryError(f"unknown chord quality {self.quality!r}")


@dataclass(frozen=True)
class DegreePitch:
    octave: int
    degree: str


@dataclass
class DegreePolicy:
    """How to resolve the raised third / raised seventh of a minor key.

    ``kind`` is one of ``"random"``, ``"lower"`` or ``"upper"``. A random
    policy draws from its own seeded generator; call :meth:`fresh` to get a
    copy rewound to the seed (the codecs do this once per encode call, so
    equal seeds give equal token sequences).
    """

    kind: str = "random"
    seed: int = 0
    _rng: random.Random = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in ("random", "lower", "upper"):
            raise TheoryError(f"unknown degree policy {self.kind!r}")
        self._rng = random.Random(self.seed)

    @classmethod
    def lower(cls) -> "DegreePolicy":
        return cls("lower")

    @classmethod
    def upper(cls) -> "DegreePolicy":
        return cls("upper")

    @classmethod
    def seeded(cls, seed: int) -> "DegreePolicy":
        return cls("random", seed)

    def fresh(self) -> "DegreePolicy":
        return DegreePolicy(self.kind, self.seed)

    def choose_upper(self) -> bool:
        if self.kind == "lower":
            return False
        if self.kind == "upper":
            return True
        return self._rng.random() < 0.5


def _check_pc(pc: int) -> None:
    if not 0 <= pc <= 11:
        raise TheoryError(f"pitch class must be in [0, 11], got {pc}")


def offsets(mode: str) -> dict:
    return MAJOR_OFFSETS if mode == "major" else MINOR_OFFSETS


def scale_pcs(key: Key) -> list[int]:
    return [(key.tonic + s) % 12 for s in SCALE_STEPS[key.mode]]


def degree_to_pc(degree: str, key: Key) -> int:
    return (key.tonic + offsets(key.mode)[degree]) % 12


def _candidates(rel: int, mode: str) -> tuple[str, ...]:
    if mode == "major":
        return (_MAJOR_INVERSE[rel],)
    if rel in _MINOR_AMBIGUOUS:
        return _MINOR_AMBIGUOUS[rel]
    return (_MINOR_INVERSE[rel],)


def pc_to_degree(pc: int, key: Key, policy: DegreePolicy | None = None) -> str:
    _check_pc(pc)
    options = _candidates((pc - key.tonic) % 12, key.mode)
    if len(options) == 1:
        return options[0]
    policy = policy or DegreePolicy()
    return options[1] if policy.choose_upper() else options[0]


def degree_pitch_to_pitch(dp: DegreePitch, key: Key) -> int:
    pitch = 12 * (dp.octave + 1) + key.tonic + offsets(key.mode)[dp.degree]
    if not MIN_PITCH <= pitch <= MAX_PITCH:
        raise TheoryError(f"{dp} decodes to pitch {pitch} outside [{MIN_PITCH}, {MAX_PITCH}] in {key}")
    return pitch


def _as_degree_pitch(pitch: int, key: Key, degree: str, rel: int) -> DegreePitch | None:
    octave = (pitch - key.tonic) // 12 - 1
    if rel == 11 and degree == "I":
        octave += 1
    if not MIN_OCTAVE <= octave <= MAX_OCTAVE:
        return None
    dp = DegreePitch(octave, degree)
    decoded = 12 * (octave + 1) + key.tonic + offsets(key.mode)[degree]
    if not MIN_PITCH <= decoded <= MAX_PITCH:
        return None
    return dp


def pitch_to_degree_pitch(pitch: int, key: Key, policy: DegreePolicy | None = None) -> DegreePitch:
    """Split a MIDI pitch into a tonic-relative octave and a degree.

    When the policy's pick for an ambiguous minor pitch would leave the
    encodable register, the other neighbour is used instead.
    """
    if not MIN_PITCH <= pitch <= MAX_PITCH:
        raise TheoryError(f"pitch {pitch} outside [{MIN_PITCH}, {MAX_PITCH}]")
    rel = (pitch - key.tonic) % 12
    options = _candidates(rel, key.mode)
    if len(options) == 2:
        policy = policy or DegreePolicy()
        if policy.choose_upper():
            options = options[::-1]
    for degree in options:
        dp = _as_degree_pitch(pitch, key, degree, rel)
        if dp is not None:
            return dp
    raise TheoryError(f"pitch {pitch} has no octave token in {key} (octaves {MIN_OCTAVE}-{MAX_OCTAVE})")


def encodable(pitch: int, key: Key) -> bool:
    """True if ``pitch`` has a degree/octave spelling in ``key``."""
    if not MIN_PITCH <= pitch <= MAX_PITCH:
        return False
    rel = (pitch - key.tonic) % 12
    return any(_as_degree_pitch(pitch, key, d, rel) is not None for d in _candidates(rel, key.mode))


def parallel_key(key: Key) -> Key:
    return Key(key.tonic, "minor" if key.mode == "major" else "major")


def chord_tones(chord: ChordLabel) -> frozenset[int]:
    return frozenset((chord.root + i) % 12 for i in CHORD_INTERVALS[chord.quality])


def to_functional(chord: ChordLabel, key: Key, policy: DegreePolicy | None = None) -> FunctionalChord:
    return FunctionalChord(pc_to_degree(chord.root, key, policy), chord.quality)


def from_functional(chord: FunctionalChord, key: Key) -> ChordLabel:
    return ChordLabel(degree_to_pc(chord.degree, key), chord.quality)
