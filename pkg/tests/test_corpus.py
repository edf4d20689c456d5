import json

import numpy as np
import pytest

from conftest import random_leadsheet
from keyharm.corpus import (
    CorpusError,
    CorpusManifest,
    ManifestEntry,
    dumps_leadsheet,
    leadsheet_from_dict,
    leadsheet_to_dict,
    load_corpus,
    load_leadsheet,
    make_manifest,
    save_leadsheet,
    simplify_quality,
)
from keyharm.representation import Note, decode, encode
from keyharm.theory import ChordLabel, Key

MINIMAL = {
    "emotion": "positive",
    "key": {"tonic": 2, "mode": "major"},
    "num_bars": 1,
    "melody": [{"onset": 0, "pitch": 62, "duration": 4}],
    "chords": [{"root": 2, "quality": "major"}, None, None, None],
}


def test_minimal_file_round_trip(tmp_path):
    path = tmp_path / "a.json"
    path.write_text(json.dumps(MINIMAL))
    ls = load_leadsheet(path)
    assert ls.key == Key(2) and ls.melody == (Note(0, 62, 4),) and ls.chords[0] == ChordLabel(2, "major")
    save_leadsheet(ls, tmp_path / "b.json")
    assert leadsheet_to_dict(load_leadsheet(tmp_path / "b.json")) == MINIMAL


@pytest.mark.parametrize("mutate, field", [
    (lambda d: d.update(chords=d["chords"][:3]), "chords"),
    (lambda d: d["key"].update(tonic=12), "key/tonic"),
    (lambda d: d.update(emotion="happy"), "emotion"),
    (lambda d: d["melody"][0].update(pitch=12), "melody/0/pitch"),
    (lambda d: d["chords"].__setitem__(1, {"root": 0, "quality": "ninth"}), "chords/1/quality"),
    (lambda d: d.pop("num_bars"), "(root)"),
])
def test_schema_errors_name_path_and_field(tmp_path, mutate, field):
    doc = json.loads(json.dumps(MINIMAL))
    mutate(doc)
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(CorpusError) as info:
        load_leadsheet(path)
    assert info.value.path == str(path) and info.value.field == field
    assert str(path) in str(info.value)


def test_invalid_json(tmp_path):
    path = tmp_path / "x.json"
    path.write_text("{not json")
    with pytest.raises(CorpusError):
        load_leadsheet(path)


def test_long_notes_clamped():
    doc = json.loads(json.dumps(MINIMAL))
    doc["melody"][0]["duration"] = 40
    assert leadsheet_from_dict(doc).melody[0].duration == 16


def test_overlapping_onsets_rejected():
    doc = json.loads(json.dumps(MINIMAL))
    doc["melody"].append({"onset": 0, "pitch": 64, "duration": 1})
    with pytest.raises(CorpusError):
        leadsheet_from_dict(doc)


def test_toy_corpus_loads_in_order(tmp_path):
    rng = np.random.default_rng(0)
    clips = [random_leadsheet(rng) for _ in range(10)]
    names = []
    for i, ls in enumerate(clips):
        save_leadsheet(ls, tmp_path / f"{i}.json")
        names.append(f"{i}.json")
    manifest = make_manifest(names, 0.8, seed=3, root=tmp_path)
    assert manifest.split_ratio == "8:2"
    assert load_corpus(manifest) == clips
    train = load_corpus(manifest, "train")
    val = load_corpus(manifest, "validation")
    assert len(train) == 8 and len(val) == 2
    assert [c for c in clips if c in train] == train


def test_manifest_round_trip_and_labels(tmp_path):
    save_leadsheet(leadsheet_from_dict(MINIMAL), tmp_path / "a.json")
    manifest = CorpusManifest([ManifestEntry("a.json", "train", "LVHA")], tmp_path, "1:0")
    manifest.save(tmp_path / "m.json")
    back = CorpusManifest.load(tmp_path / "m.json")
    assert back.entries == manifest.entries
    assert load_corpus(back)[0].emotion == "negative"
    assert ManifestEntry("x", label="HVLA").emotion == "positive"


def test_manifest_rejects_path_in_both_splits():
    with pytest.raises(CorpusError):
        CorpusManifest([ManifestEntry("a.json", "train"), ManifestEntry("a.json", "validation")])
    with pytest.raises(CorpusError):
        CorpusManifest([ManifestEntry("a.json", "test")])
    with pytest.raises(CorpusError):
        CorpusManifest([ManifestEntry("a.json", "train", "joyful")])


@pytest.mark.parametrize("seed", range(20))
def test_canonical_file_round_trip_major(tmp_path, seed):
    ls = random_leadsheet(np.random.default_rng(seed), key=Key(seed % 12))
    text = dumps_leadsheet(ls)
    (tmp_path / "in.json").write_text(text)
    for rep in ("remi", "functional", "functional-ablated"):
        save_leadsheet(decode(encode(load_leadsheet(tmp_path / "in.json"), rep)), tmp_path / "out.json")
        assert (tmp_path / "out.json").read_bytes() == text.encode()


@pytest.mark.parametrize("raw, quality", [
    ("m7", "minor7"), ("min7", "minor7"), ("maj9", "major7"), ("sus4", "suspend4"), ("sus", "suspend4"),
    ("7sus4", "suspend4"), ("sus2", "suspend2"), ("", "major"), ("M", "major"), ("maj", "major"),
    ("7", "dominant7"), ("13", "dominant7"), ("7#9", "dominant7"), ("m6", "minor"), ("6", "major"),
    ("add9", "major"), ("dim", "diminish"), ("dim7", "diminish7"), ("m7b5", "half-diminish7"),
    ("ø7", "half-diminish7"), ("aug", "augment"), ("+", "augment"), ("m11", "minor7"), ("mmaj7", "minor"),
    ("half-diminish7", "half-diminish7"),
])
def test_simplify_quality(raw, quality):
    assert simplify_quality(raw) == quality


def test_simplify_quality_unknown():
    with pytest.raises(ValueError):
        simplify_quality("xyz")
