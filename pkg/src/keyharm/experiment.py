"""Corpus statistics, the bundled synthetic corpus, and the evaluation grid."""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

from . import metrics
from .corpus import CorpusManifest, dumps_leadsheet, load_corpus, make_manifest
from .harmonizer import KEY_POLICIES, NGramModel, SamplerConfig, harmonize
from .representation import (
    REPRESENTATIONS,
    EncodeError,
    LeadSheet,
    Note,
    encode,
)
from .theory import ALL_KEYS, ChordLabel, DegreePolicy, Key, degree_to_pc, scale_pcs

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

log = logging.getLogger(__name__)

METRIC_COLUMNS = ("ctnctr", "pcs", "mctd", "rr", "nr")
COLUMN_TITLES = {"ctnctr": "CTnCTR", "pcs": "PCS", "mctd": "MCTD", "rr": "RR", "nr": "NR",
                 "qd": "QD", "pd": "PD"}

# "Real data" row of the published harmonization table
REFERENCE_REAL_DATA = {"ctnctr": 0.801, "pcs": 1.613, "mctd": 1.314, "rr": 0.935, "nr": 0.926}
REFERENCE_TOLERANCE = 0.05

DEFAULT_VARIANTS = (
    ("remi", "keep"),
    ("remi-trans", "keep"),
    ("remi-trans", "rule"),
    ("functional", "keep"),
    ("functional", "rule"),
    ("functional", "model"),
    ("functional-ablated", "keep"),
)


# --- statistics -----------------------------------------------------------------

def stats(corpus: Sequence[LeadSheet], seed: int = 0) -> dict:
    """Clip count, mean bars, mean token count per representation, key histogram."""
    events = {}
    for rep in REPRESENTATIONS:
        lengths = [len(encode(ls, rep, DegreePolicy.seeded(seed))) for ls in corpus]
        events[rep] = float(np.mean(lengths)) if lengths else 0.0
    hist = metrics.key_histogram(corpus)
    return {
        "clips": len(corpus),
        "mean_bars": float(np.mean([ls.num_bars for ls in corpus])) if corpus else 0.0,
        "mean_events": events,
        "key_histogram": {e: {k.name: int(h[k.index]) for k in ALL_KEYS} for e, h in hist.items()},
    }


# --- synthetic corpus -----------------------------------------------------------

_PROGRESSIONS = {
    "major": [("I", "V", "VI", "IV"), ("I", "IV", "V", "I"), ("VI", "IV", "I", "V"), ("I", "VI", "II", "V")],
    "minor": [("I", "VI", "III", "VII"), ("I", "IV", "V", "I"), ("I", "VII", "VI", "VII"), ("VI", "VII", "I", "I")],
}
_TRIADS = {
    "major": {"I": "major", "II": "minor", "III": "minor", "IV": "major", "V": "major", "VI": "minor", "VII": "diminish"},
    "minor": {"I": "minor", "II": "diminish", "III": "major", "IV": "minor", "V": "minor", "VI": "major", "VII": "major"},
}
_SEVENTHS = {"major": "major7", "minor": "minor7", "diminish": "half-diminish7"}


def synthetic_leadsheet(rng: np.random.Generator, emotion: str) -> LeadSheet:
    """A small diatonic clip: mode leans major for positive, minor for negative."""
    major_prob = 0.8 if emotion == "positive" else 0.2
    key = Key(int(rng.integers(12)), "major" if rng.random() < major_prob else "minor")
    num_bars = int(rng.integers(2, 5))
    progression = _PROGRESSIONS[key.mode][int(rng.integers(4))]
    chords: list[ChordLabel | None] = []
    for bar in range(num_bars):
        degree = progression[bar % 4]
        quality = _TRIADS[key.mode][degree]
        if degree == "V" and key.mode == "major" and rng.random() < 0.5:
            quality = "dominant7"
        elif rng.random() < 0.2:
            quality = _SEVENTHS.get(quality, quality)
        chords += [ChordLabel(degree_to_pc(degree, key), quality)] * 4

    scale = scale_pcs(key)
    melody = []
    pitch = 60 + (key.tonic if key.tonic < 6 else key.tonic - 12)
    for beat in range(4 * num_bars):
        tones = [(chords[beat].root + i) % 12 for i in (0, 4 if chords[beat].quality in ("major", "dominant7", "major7") else 3, 7)]
        splits = [4] if rng.random() < 0.5 else [2, 2]
        onset = beat * 4
        for dur in splits:
            if rng.random() < 0.1:
                onset += dur
                continue
            pool = tones if rng.random() < 0.7 else scale
            candidates = [p for p in range(pitch - 5, pitch + 6) if p % 12 in pool and 55 <= p <= 84]
            pitch = int(rng.choice(candidates)) if candidates else pitch
            melody.append(Note(onset, pitch, dur))
            onset += dur
    return LeadSheet(emotion, key, num_bars, melody, chords)


def synthetic_corpus(n: int = 20, seed: int = 0) -> list[LeadSheet]:
    rng = np.random.default_rng(seed)
    return [synthetic_leadsheet(rng, "positive" if i % 2 == 0 else "negative") for i in range(n)]


def write_corpus(corpus: Sequence[LeadSheet], directory: str | Path, train_fraction: float = 0.9,
                 seed: int = 0) -> Path:
    """Write clips as ``clip_XXX.json`` plus a ``manifest.json``; return the manifest path."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    names = []
    for i, ls in enumerate(corpus):
        name = f"clip_{i:03d}.json"
        (directory / name).write_text(dumps_leadsheet(ls), encoding="utf-8")
        names.append(name)
    manifest = make_manifest(names, train_fraction, seed, root=directory)
    manifest.save(directory / "manifest.json")
    return directory / "manifest.json"


def bundled_manifest() -> Path:
    """Manifest of the 20-clip synthetic corpus shipped with the package."""
    return Path(str(resources.files("keyharm") / "data" / "synthetic" / "manifest.json"))


# --- evaluation -----------------------------------------------------------------

def evaluate_corpus(generated: Sequence[LeadSheet], real: Sequence[LeadSheet] | None = None) -> dict:
    per_clip = [metrics.evaluate_clip(ls).as_dict() for ls in generated]
    summary = metrics.mean_report(metrics.evaluate_clip(ls) for ls in generated).as_dict()
    if real:
        summary["qd"] = _safe(metrics.qd, generated, real)
        summary["pd"] = _safe(metrics.pd, generated, real)
    return {"summary": summary, "clips": per_clip}


def _safe(fn, *args):
    try:
        return fn(*args)
    except ValueError as exc:
        log.warning("%s undefined: %s", fn.__name__, exc)
        return None


def compare_to_reference(report: dict, reference: dict = REFERENCE_REAL_DATA,
                         tolerance: float = REFERENCE_TOLERANCE) -> dict:
    out = {}
    for name, ref in reference.items():
        value = report.get(name)
        delta = None if value is None else value - ref
        out[name] = {"value": value, "reference": ref, "delta": delta,
                     "within_tolerance": delta is not None and abs(delta) <= tolerance}
    return out


def _fmt(value) -> str:
    return "nan" if value is None or (isinstance(value, float) and math.isnan(value)) else f"{value:.4f}"


def format_table(rows: Sequence[dict], columns: Sequence[str]) -> str:
    lines = ["\t".join(["method"] + [COLUMN_TITLES[c] for c in columns])]
    for row in rows:
        lines.append("\t".join([row["method"]] + [_fmt(row.get(c)) for c in columns]))
    return "\n".join(lines) + "\n"


@dataclass
class ExperimentConfig:
    manifest: str | None = None
    unlabeled_manifest: str | None = None
    seed: int = 0
    repeats: int = 5
    order: int = 5
    mix: float = 0.7
    temperature: float = 1.1
    top_p: float = 0.99
    emotions: tuple[str, ...] = ("positive", "negative")
    variants: tuple[tuple[str, str], ...] = DEFAULT_VARIANTS
    output_dir: str | None = None
    base_dir: Path = field(default=Path("."), repr=False)

    @classmethod
    def from_dict(cls, doc: dict, base_dir: Path = Path(".")) -> "ExperimentConfig":
        doc = dict(doc)
        if "variants" in doc:
            doc["variants"] = tuple(
                (v["representation"], v.get("key_policy", "keep")) if isinstance(v, dict) else tuple(v)
                for v in doc["variants"]
            )
        if "emotions" in doc:
            doc["emotions"] = tuple(doc["emotions"])
        unknown = set(doc) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown experiment settings: {sorted(unknown)}")
        config = cls(**doc, base_dir=base_dir)
        for rep, policy in config.variants:
            if rep not in REPRESENTATIONS or policy not in KEY_POLICIES:
                raise ValueError(f"bad variant ({rep!r}, {policy!r})")
        return config

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentConfig":
        path = Path(path)
        text = path.read_text(encoding="utf-8")
        doc = tomllib.loads(text) if path.suffix == ".toml" else json.loads(text)
        return cls.from_dict(doc, path.parent)

    def resolve(self, p: str | None) -> Path | None:
        return None if p is None else (self.base_dir / p)


def _encode_corpus(corpus, representation, seed, emotion=None):
    out = []
    for i, ls in enumerate(corpus):
        if emotion is not None:
            ls = ls.replace(emotion=emotion)
        try:
            out.append(encode(ls, representation, DegreePolicy.seeded(seed + i)))
        except EncodeError as exc:
            log.warning("skipping training clip %d: %s", i, exc)
    return out


def _job_seed(*parts: int) -> int:
    return int(np.random.SeedSequence(list(parts)).generate_state(1)[0])


def run_experiment(config: ExperimentConfig | dict | str | Path) -> dict:
    """Train one model per representation, harmonize the validation melodies
    under every (representation, key policy) variant and emotion, and score.

    Returns a dict with ``table2`` (harmonicity and key-fit means, plus the
    ground-truth ``real`` row), ``table3`` (QD/PD against the training
    split), the reference comparison for the real row, and per-clip records.
    Files are written when ``output_dir`` is set.
    """
    if isinstance(config, (str, Path)):
        config = ExperimentConfig.load(config)
    elif isinstance(config, dict):
        config = ExperimentConfig.from_dict(config)

    manifest = CorpusManifest.load(config.resolve(config.manifest) or bundled_manifest())
    train_set = load_corpus(manifest, "train")
    validation = load_corpus(manifest, "validation")
    unlabeled = []
    if config.unlabeled_manifest:
        unlabeled = load_corpus(CorpusManifest.load(config.resolve(config.unlabeled_manifest)))

    models: dict[str, NGramModel] = {}
    for rep in sorted({rep for rep, _ in config.variants}):
        model = NGramModel(config.order, rep, config.mix)
        model.fit(_encode_corpus(train_set, rep, config.seed),
                  _encode_corpus(unlabeled, rep, config.seed, emotion="none"))
        models[rep] = model

    table2, table3, records = [], [], []
    for v, (rep, policy) in enumerate(config.variants):
        method = f"{rep}/{policy}"
        generated = []
        for c, clip in enumerate(validation):
            for e, emotion in enumerate(config.emotions):
                for r in range(config.repeats):
                    sampler = SamplerConfig(config.temperature, config.top_p, _job_seed(config.seed, v, c, e, r))
                    record = {"method": method, "clip": c, "emotion": emotion, "repeat": r}
                    try:
                        out = harmonize(clip, emotion, policy, models[rep], sampler,
                                        degree_policy=DegreePolicy.seeded(sampler.seed))
                    except Exception as exc:  # one bad clip must not stop the grid
                        log.warning("%s clip %d %s #%d failed: %s", method, c, emotion, r, exc)
                        record["error"] = str(exc)
                    else:
                        generated.append(out)
                        record["key"] = out.key.name
                        record["metrics"] = metrics.evaluate_clip(out).as_dict()
                    records.append(record)
        row = {"method": method, **metrics.mean_report(metrics.evaluate_clip(g) for g in generated).as_dict()}
        table2.append(row)
        table3.append({
            "method": method,
            "qd": _safe(metrics.qd, generated, train_set) if generated else None,
            "pd": _safe(metrics.pd, generated, train_set) if generated else None,
        })

    real_row = {"method": "real", **metrics.mean_report(metrics.evaluate_clip(ls) for ls in validation).as_dict()}
    table2.append(real_row)
    result = {
        "config": {k: v for k, v in vars(config).items() if k != "base_dir"},
        "table2": table2,
        "table3": table3,
        "real_vs_reference": compare_to_reference(real_row),
        "clips": records,
    }
    if config.output_dir:
        write_results(result, config.resolve(config.output_dir))
    return result


def write_results(result: dict, directory: str | Path) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    (directory / "table2.tsv").write_text(format_table(result["table2"], METRIC_COLUMNS), encoding="utf-8")
    (directory / "table3.tsv").write_text(format_table(result["table3"], ("qd", "pd")), encoding="utf-8")
    (directory / "report.json").write_text(json.dumps(result, sort_keys=True, indent=1, default=list) + "\n",
                                           encoding="utf-8")


def real_data_row(corpus: Sequence[LeadSheet]) -> dict:
    """Ground-truth metric means of a corpus and their distance to the published real-data row."""
    report = metrics.mean_report(metrics.evaluate_clip(ls) for ls in corpus).as_dict()
    return {"metrics": report, "comparison": compare_to_reference(report)}

