"""Lead sheet files, corpus manifests and chord-quality simplification.

A lead sheet file is a JSON document::

    {"emotion": "positive", "key": {"tonic": 2, "mode": "major"}, "num_bars": 1,
     "melody": [{"onset": 0, "pitch": 62, "duration": 4}],
     "chords": [{"root": 2, "quality": "major"}, null, null, null]}

A manifest lists lead sheet files with a split (``train``/``validation``) and
an optional emotion label that overrides the file's own ``emotion``. Labels
may be the four arousal/valence quadrants (``HVHA``, ``HVLA``, ``LVHA``,
``LVLA``), which collapse to positive/negative valence.
"""

from __future__ import annotations

import json
import logging
import random
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import jsonschema
from jsonschema.exceptions import best_match

from .representation import BEATS_PER_BAR, MAX_DURATION, LeadSheet, Note
from .theory import QUALITIES, ChordLabel, Key

log = logging.getLogger(__name__)

SPLITS = ("train", "validation")

LABEL_TO_EMOTION = {
    "HVHA": "positive",
    "HVLA": "positive",
    "LVHA": "negative",
    "LVLA": "negative",
    "positive": "positive",
    "negative": "negative",
    "none": "none",
}

LEADSHEET_SCHEMA = {
    "type": "object",
    "required": ["emotion", "key", "num_bars", "melody", "chords"],
    "properties": {
        "emotion": {"enum": ["positive", "negative", "none"]},
        "key": {
            "type": "object",
            "required": ["tonic", "mode"],
            "properties": {
                "tonic": {"type": "integer", "minimum": 0, "maximum": 11},
                "mode": {"enum": ["major", "minor"]},
            },
        },
        "num_bars": {"type": "integer", "minimum": 1},
        "melody": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["onset", "pitch", "duration"],
                "properties": {
                    "onset": {"type": "integer", "minimum": 0},
                    "pitch": {"type": "integer", "minimum": 21, "maximum": 108},
                    "duration": {"type": "integer", "minimum": 1},
                },
            },
        },
        "chords": {
            "type": "array",
            "items": {
                "oneOf": [
                    {"type": "null"},
                    {
                        "type": "object",
                        "required": ["root", "quality"],
                        "properties": {
                            "root": {"type": "integer", "minimum": 0, "maximum": 11},
                            "quality": {"enum": list(QUALITIES)},
                        },
                    },
                ]
            },
        },
    },
}

_VALIDATOR = jsonschema.Draft7Validator(LEADSHEET_SCHEMA)


class CorpusError(ValueError):
    def __init__(self, message: str, path: str | None = None, field: str | None = None):
        self.path = path
        self.field = field
        where = ":".join(x for x in (str(path) if path else None, field) if x)
        super().__init__(f"{where}: {message}" if where else message)


def leadsheet_from_dict(doc: dict, path: str | None = None) -> LeadSheet:
    """Parse and check a lead sheet document; durations over one bar are clamped."""
    error = next(iter(sorted(_VALIDATOR.iter_errors(doc), key=lambda e: list(e.path))), None)
    if error is not None:
        error = best_match([error])  # descend into anyOf branches
        field_ = "/".join(str(p) for p in error.absolute_path) or "(root)"
        raise CorpusError(error.message, path, field_)
    if len(doc["chords"]) != BEATS_PER_BAR * doc["num_bars"]:
        raise CorpusError(
            f"{len(doc['chords'])} chords for {doc['num_bars']} bars (need {BEATS_PER_BAR} per bar)",
            path, "chords",
        )
    melody = []
    for i, n in enumerate(doc["melody"]):
        duration = n["duration"]
        if duration > MAX_DURATION:
            log.debug("%s: clamping note %d duration %d to %d", path, i, duration, MAX_DURATION)
            duration = MAX_DURATION
        melody.append(Note(n["onset"], n["pitch"], duration))
    chords = [None if c is None else ChordLabel(c["root"], c["quality"]) for c in doc["chords"]]
    try:
        return LeadSheet(
            emotion=doc["emotion"],
            key=Key(doc["key"]["tonic"], doc["key"]["mode"]),
            num_bars=doc["num_bars"],
            melody=melody,
            chords=chords,
        )
    except ValueError as exc:
        raise CorpusError(str(exc), path, "melody") from exc


def leadsheet_to_dict(ls: LeadSheet) -> dict:
    return {
        "emotion": ls.emotion,
        "key": {"tonic": ls.key.tonic, "mode": ls.key.mode},
        "num_bars": ls.num_bars,
        "melody": [{"onset": n.onset, "pitch": n.pitch, "duration": n.duration} for n in ls.melody],
        "chords": [None if c is None else {"root": c.root, "quality": c.quality} for c in ls.chords],
    }


def dumps_leadsheet(ls: LeadSheet) -> str:
    """Canonical serialization: sorted keys, two-space indent, trailing newline."""
    return json.dumps(leadsheet_to_dict(ls), sort_keys=True, indent=2) + "\n"


def load_leadsheet(path: str | Path) -> LeadSheet:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CorpusError(f"invalid JSON ({exc.msg})", str(path)) from exc
    return leadsheet_from_dict(doc, str(path))


def save_leadsheet(ls: LeadSheet, path: str | Path) -> None:
    Path(path).write_text(dumps_leadsheet(ls), encoding="utf-8")


# --- manifests ------------------------------------------------------------------

@dataclass
class ManifestEntry:
    path: str
    split: str = "train"
    label: str | None = None

    @property
    def emotion(self) -> str | None:
        return None if self.label is None else LABEL_TO_EMOTION[self.label]


@dataclass
class CorpusManifest:
    entries: list[ManifestEntry] = field(default_factory=list)
    root: Path = Path(".")
    split_ratio: str = "9:1"

    def __post_init__(self):
        seen: dict[str, str] = {}
        for e in self.entries:
            if e.split not in SPLITS:
                raise CorpusError(f"unknown split {e.split!r}", e.path, "split")
            if e.label is not None and e.label not in LABEL_TO_EMOTION:
                raise CorpusError(f"unknown emotion label {e.label!r}", e.path, "label")
            if seen.setdefault(e.path, e.split) != e.split:
                raise CorpusError("listed in both train and validation", e.path, "split")

    def paths(self, split: str | None = None) -> list[Path]:
        return [self.root / e.path for e in self.entries if split is None or e.split == split]

    def to_dict(self) -> dict:
        return {
            "split_ratio": self.split_ratio,
            "entries": [{"path": e.path, "split": e.split, **({"label": e.label} if e.label else {})}
                        for e in self.entries],
        }

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "CorpusManifest":
        path = Path(path)
        doc = json.loads(path.read_text(encoding="utf-8"))
        entries = [ManifestEntry(e["path"], e.get("split", "train"), e.get("label")) for e in doc["entries"]]
        return cls(entries, path.parent, doc.get("split_ratio", "9:1"))


def make_manifest(paths: Sequence[str], train_fraction: float = 0.9, seed: int = 0,
                  labels: dict[str, str] | None = None, root: str | Path = ".") -> CorpusManifest:
    """Random train/validation split of ``paths``."""
    order = list(paths)
    random.Random(seed).shuffle(order)
    n_train = round(len(order) * train_fraction)
    train = set(order[:n_train])
    labels = labels or {}
    entries = [ManifestEntry(p, "train" if p in train else "validation", labels.get(p)) for p in paths]
    n_val = len(order) - n_train
    return CorpusManifest(entries, Path(root), f"{n_train}:{n_val}")


def load_corpus(manifest: CorpusManifest, split: str | None = None) -> list[LeadSheet]:
    corpus = []
    for entry in manifest.entries:
        if split is not None and entry.split != split:
            continue
        ls = load_leadsheet(manifest.root / entry.path)
        if entry.emotion is not None and entry.emotion != ls.emotion:
            ls = ls.replace(emotion=entry.emotion)
        corpus.append(ls)
    return corpus


def load_leadsheets(paths: Iterable[str | Path]) -> list[LeadSheet]:
    return [load_leadsheet(p) for p in paths]


# --- chord quality simplification ----------------------------------------------

_EXACT = {
    "": "major", "maj": "major", "M": "major", "major": "major", "5": "major",
    "m": "minor", "min": "minor", "minor": "minor", "-": "minor",
    "aug": "augment", "+": "augment", "augment": "augment", "augmented": "augment",
    "dim": "diminish", "o": "diminish", "°": "diminish", "diminish": "diminish", "diminished": "diminish",
    "sus2": "suspend2", "suspend2": "suspend2",
    "sus": "suspend4", "sus4": "suspend4", "suspend4": "suspend4",
    "maj7": "major7", "M7": "major7", "Δ": "major7", "Δ7": "major7", "major7": "major7", "ma7": "major7",
    "m7": "minor7", "min7": "minor7", "-7": "minor7", "minor7": "minor7", "mi7": "minor7",
    "7": "dominant7", "dom7": "dominant7", "dominant7": "dominant7", "dom": "dominant7",
    "dim7": "diminish7", "o7": "diminish7", "°7": "diminish7", "diminish7": "diminish7",
    "m7b5": "half-diminish7", "min7b5": "half-diminish7", "-7b5": "half-diminish7", "ø": "half-diminish7",
    "ø7": "half-diminish7", "hdim7": "half-diminish7", "hdim": "half-diminish7",
    "half-diminish7": "half-diminish7", "half-diminished7": "half-diminish7",
}

# ordered (pattern, quality); first match wins. Extensions fold onto the
# seventh or triad they are built on.
_FOLDS = [
    (r"^(m7b5|min7b5|-7b5|ø|hdim)", "half-diminish7"),
    (r"^(dim7|o7|°7)", "diminish7"),
    (r"^(mmaj|m\(?maj|minmaj|-maj|mM)", "minor"),
    (r"^(maj|M|Δ|ma)(7|9|11|13)", "major7"),
    (r"^(m|min|mi|-)(7|9|11|13)", "minor7"),
    (r"^(7|9|11|13|dom)", "dominant7"),
    (r"^(aug|\+)", "augment"),
    (r"^(dim|o|°)", "diminish"),
    (r"^sus2", "suspend2"),
    (r"^sus", "suspend4"),
    (r"^(m|min|mi|-)(6|add|\(|$)", "minor"),
    (r"^(maj|M|major)?(6|add|\(|$)", "major"),
]


def simplify_quality(raw: str) -> str:
    """Map a chord-quality label onto one of the eleven supported qualities.

    ``"m7" -> "minor7"``, ``"maj9" -> "major7"``, ``"7#9" -> "dominant7"``,
    ``"m6" -> "minor"``, ``"7sus4" -> "suspend4"``. Raises ValueError for
    labels with no sensible reading.
    """
    label = raw.strip()
    if label in _EXACT:
        return _EXACT[label]
    if label.lower() in QUALITIES:
        return label.lower()
    if re.search(r"sus2", label):
        return "suspend2"
    if re.search(r"sus", label):
        return "suspend4"
    for pattern, quality in _FOLDS:
        if re.match(pattern, label):
            return quality
    raise ValueError(f"cannot simplify chord quality {raw!r}")
