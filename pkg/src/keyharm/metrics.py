"""Objective evaluation of harmonized lead sheets.

Harmonicity (per clip): chord-tone ratio, pitch consonance, melody-chord
tonal distance. Key fit (per clip): share of chord roots and chord notes in
the key scale. Style fit (per corpus): KL divergence between chord-quality
and root-progression distributions of generated and real clips.

Per-clip metrics return ``None`` when there is nothing to score. Each melody
note is scored against the chord of the beat containing its onset; beats
without a chord are skipped.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.special import rel_entr

from .representation import EMOTIONS, LeadSheet
from .theory import ALL_KEYS, QUALITIES, chord_tones, scale_pcs

SMOOTHING = 1e-5

CONSONANT_INTERVALS = frozenset({0, 3, 4, 7, 8, 9})
PERFECT_FOURTH = 5


@dataclass
class MetricReport:
    ctnctr: float | None
    pcs: float | None
    mctd: float | None
    rr: float | None
    nr: float | None

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass
class Distribution:
    support: tuple
    probs: np.ndarray

    def __post_init__(self):
        self.probs = np.asarray(self.probs, dtype=float)
        if len(self.support) != len(self.probs):
            raise ValueError("support and probs differ in length")


def _scored_notes(ls: LeadSheet):
    """(note index, note, chord tones) for notes sounding over a chord."""
    for i, note in enumerate(ls.melody):
        chord = ls.chord_at(note.onset)
        if chord is not None:
            yield i, note, chord_tones(chord)


def ctnctr(ls: LeadSheet) -> float | None:
    """Chord tones plus well-resolved non-chord tones over all scored notes.

    A non-chord tone counts as resolved when the next melody note lies
    within two semitones of it.
    """
    n_chord = n_non = n_proper = 0
    melody = ls.melody
    for i, note, tones in _scored_notes(ls):
        if note.pitch % 12 in tones:
            n_chord += 1
        else:
            n_non += 1
            if i + 1 < len(melody) and abs(melody[i + 1].pitch - note.pitch) <= 2:
                n_proper += 1
    if n_chord + n_non == 0:
        return None
    return (n_chord + n_proper) / (n_chord + n_non)


def _interval_score(interval: int) -> int:
    if interval in CONSONANT_INTERVALS:
        return 1
    if interval == PERFECT_FOURTH:
        return 0
    return -1


def pcs(ls: LeadSheet) -> float | None:
    total = weight = 0.0
    for _, note, tones in _scored_notes(ls):
        score = sum(_interval_score((note.pitch - pc) % 12) for pc in tones) / len(tones)
        total += note.duration * score
        weight += note.duration
    return None if weight == 0 else total / weight


# rows: (radius, angle per pitch class) for fifths, minor thirds, major thirds
_CENTROID_CIRCLES = ((1.0, 7 * math.pi / 6), (1.0, 3 * math.pi / 2), (0.5, 2 * math.pi / 3))


def _centroid_basis() -> np.ndarray:
    basis = np.zeros((6, 12))
    pcs_ = np.arange(12)
    for row, (radius, angle) in enumerate(_CENTROID_CIRCLES):
        basis[2 * row] = radius * np.sin(pcs_ * angle)
        basis[2 * row + 1] = radius * np.cos(pcs_ * angle)
    return basis


CENTROID_BASIS = _centroid_basis()


def tonal_centroid(chroma: Sequence[float]) -> np.ndarray:
    chroma = np.asarray(chroma, dtype=float)
    norm = np.abs(chroma).sum()
    if norm == 0:
        return np.zeros(6)
    return CENTROID_BASIS @ (chroma / norm)


def tonal_distance(a: Sequence[float], b: Sequence[float]) -> float:
    return float(np.linalg.norm(tonal_centroid(a) - tonal_centroid(b)))


def _chroma(pcs_: Iterable[int]) -> np.ndarray:
    v = np.zeros(12)
    for pc in pcs_:
        v[pc] = 1.0
    return v


def mctd(ls: LeadSheet) -> float | None:
    total = weight = 0.0
    for _, note, tones in _scored_notes(ls):
        total += note.duration * tonal_distance(_chroma([note.pitch % 12]), _chroma(tones))
        weight += note.duration
    return None if weight == 0 else total / weight


def root_ratio(ls: LeadSheet) -> float | None:
    chords = [c for c in ls.chords if c is not None]
    if not chords:
        return None
    scale = set(scale_pcs(ls.key))
    return sum(c.root in scale for c in chords) / len(chords)


def note_ratio(ls: LeadSheet) -> float | None:
    scale = set(scale_pcs(ls.key))
    inside = total = 0
    for c in ls.chords:
        if c is None:
            continue
        tones = chord_tones(c)
        inside += len(tones & scale)
        total += len(tones)
    return None if total == 0 else inside / total


def evaluate_clip(ls: LeadSheet) -> MetricReport:
    return MetricReport(ctnctr(ls), pcs(ls), mctd(ls), root_ratio(ls), note_ratio(ls))


def mean_report(reports: Iterable[MetricReport]) -> MetricReport:
    """Column-wise mean, ignoring clips where a metric is undefined."""
    reports = list(reports)
    means = {}
    for name in ("ctnctr", "pcs", "mctd", "rr", "nr"):
        values = [getattr(r, name) for r in reports if getattr(r, name) is not None]
        means[name] = float(np.mean(values)) if values else None
    return MetricReport(**means)


# --- corpus distributions -------------------------------------------------------

def _normalize(counts: np.ndarray, smoothing: float) -> np.ndarray:
    counts = counts + smoothing
    return counts / counts.sum()


def quality_distribution(corpus: Sequence[LeadSheet], smoothing: float = SMOOTHING) -> Distribution:
    counts = np.zeros(len(QUALITIES))
    index = {q: i for i, q in enumerate(QUALITIES)}
    for ls in corpus:
        for c in ls.chords:
            if c is not None:
                counts[index[c.quality]] += 1
    if counts.sum() == 0:
        raise ValueError("corpus has no chords")
    return Distribution(QUALITIES, _normalize(counts, smoothing))


def progressions(ls: LeadSheet) -> list[int]:
    """Root motion mod 12 between neighbouring beats, skipping chordless beats."""
    out = []
    for a, b in zip(ls.chords, ls.chords[1:]):
        if a is not None and b is not None:
            out.append((b.root - a.root) % 12)
    return out


def progression_distribution(corpus: Sequence[LeadSheet], smoothing: float = SMOOTHING) -> Distribution:
    counts = np.zeros(12)
    for ls in corpus:
        for step in progressions(ls):
            counts[step] += 1
    if counts.sum() == 0:
        raise ValueError("corpus has no chord bigrams")
    return Distribution(tuple(range(12)), _normalize(counts, smoothing))


def kl_divergence(p: Distribution, q: Distribution) -> float:
    if tuple(p.support) != tuple(q.support):
        raise ValueError("distributions have different supports")
    return float(rel_entr(p.probs, q.probs).sum())


def _by_emotion(corpus: Sequence[LeadSheet]) -> dict[str, list[LeadSheet]]:
    groups: dict[str, list[LeadSheet]] = {}
    for ls in corpus:
        groups.setdefault(ls.emotion, []).append(ls)
    return groups


def _split_kl(generated, real, dist) -> float:
    gen, ref = _by_emotion(generated), _by_emotion(real)
    emotions = sorted(set(gen) | set(ref))
    if not emotions:
        raise ValueError("empty corpora")
    missing = [e for e in emotions if e not in gen or e not in ref]
    if missing:
        raise ValueError(f"emotion class missing from one corpus: {missing}")
    return float(np.mean([kl_divergence(dist(gen[e]), dist(ref[e])) for e in emotions]))


def qd(generated: Sequence[LeadSheet], real: Sequence[LeadSheet]) -> float:
    """Mean over emotion classes of KL(generated qualities || real qualities)."""
    return _split_kl(generated, real, quality_distribution)


def pd(generated: Sequence[LeadSheet], real: Sequence[LeadSheet]) -> float:
    """Mean over emotion classes of KL(generated progressions || real progressions)."""
    return _split_kl(generated, real, progression_distribution)


def key_histogram(corpus: Iterable[LeadSheet]) -> dict[str, np.ndarray]:
    """Clip counts per key (index ``Key.index``) for every emotion label."""
    hist = {e: np.zeros(len(ALL_KEYS), dtype=int) for e in EMOTIONS}
    for ls in corpus:
        hist[ls.emotion][ls.key.index] += 1
    return hist
