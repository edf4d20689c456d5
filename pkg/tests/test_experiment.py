import json

import numpy as np
import pytest

from keyharm.corpus import CorpusManifest, load_corpus
from keyharm.experiment import (
    DEFAULT_VARIANTS,
    REFERENCE_REAL_DATA,
    ExperimentConfig,
    bundled_manifest,
    compare_to_reference,
    evaluate_corpus,
    format_table,
    real_data_row,
    run_experiment,
    stats,
    synthetic_corpus,
    write_corpus,
)
from keyharm.representation import LeadSheet, Note, encode
from keyharm.theory import ChordLabel, DegreePolicy, Key


def two_bar(key=Key(0), emotion="positive"):
    return LeadSheet(emotion, key, 2, [Note(0, 60, 4), Note(16, 64, 8)], [ChordLabel(key.tonic, "major")] * 8)


def test_stats_single_clip():
    ls = two_bar()
    report = stats([ls])
    assert report["clips"] == 1 and report["mean_bars"] == 2.0
    assert report["mean_events"]["functional"] == len(encode(ls, "functional")) == 35
    # header 2, per bar 12 structural tokens + 4 per note (3 in REMI), EOS
    assert report["mean_events"]["remi"] == 33
    assert report["key_histogram"]["positive"]["Cmajor"] == 1
    assert sum(report["key_histogram"]["negative"].values()) == 0


def test_stats_event_means_match_encoder():
    corpus = synthetic_corpus(6, seed=2)
    report = stats(corpus, seed=4)
    for rep, mean in report["mean_events"].items():
        lengths = [len(encode(ls, rep, DegreePolicy.seeded(4))) for ls in corpus]
        assert mean == pytest.approx(np.mean(lengths))


def test_bundled_corpus():
    manifest = CorpusManifest.load(bundled_manifest())
    assert len(load_corpus(manifest, "train")) == 18
    assert len(load_corpus(manifest, "validation")) == 2


@pytest.fixture
def toy_manifest(tmp_path):
    clips = synthetic_corpus(8, seed=5)
    path = write_corpus(clips, tmp_path / "corpus", train_fraction=0.75, seed=1)
    return path


def test_run_experiment_grid_shape(toy_manifest):
    result = run_experiment({"manifest": str(toy_manifest), "repeats": 1})
    methods = [f"{r}/{p}" for r, p in DEFAULT_VARIANTS]
    assert [row["method"] for row in result["table2"]] == methods + ["real"]
    assert [row["method"] for row in result["table3"]] == methods
    for m in methods:
        records = [c for c in result["clips"] if c["method"] == m]
        assert len(records) == 4 and all("error" not in c for c in records)
    assert set(result["real_vs_reference"]) == set(REFERENCE_REAL_DATA)


def test_run_experiment_deterministic(toy_manifest, tmp_path):
    out = []
    for name in ("a", "b"):
        run_experiment({"manifest": str(toy_manifest), "repeats": 2, "seed": 11,
                        "output_dir": str(tmp_path / name)})
        report = json.loads((tmp_path / name / "report.json").read_text())
        del report["config"]["output_dir"]
        out.append([(tmp_path / name / f).read_bytes() for f in ("table2.tsv", "table3.tsv")] + [report])
    assert out[0] == out[1]
    table2 = (tmp_path / "a" / "table2.tsv").read_text().splitlines()
    assert table2[0] == "method\tCTnCTR\tPCS\tMCTD\tRR\tNR" and len(table2) == 9
    other = run_experiment({"manifest": str(toy_manifest), "repeats": 2, "seed": 12})
    assert out[0][2]["clips"] != other["clips"]


def test_run_experiment_isolates_failures(tmp_path):
    clips = synthetic_corpus(4, seed=5)
    # 108 has no octave token in C major: the functional variants fail, the others run
    bad = LeadSheet("positive", Key(0), 1, [Note(0, 108, 4)], [ChordLabel(0, "major")] * 4)
    path = write_corpus(clips + [bad], tmp_path / "c", train_fraction=0.8, seed=0)
    manifest = CorpusManifest.load(path)
    for e in manifest.entries:
        e.split = "validation" if e.path == "clip_004.json" else "train"
    manifest.save(path)
    result = run_experiment({"manifest": str(path), "repeats": 1,
                             "variants": [["remi", "keep"], ["functional", "keep"]]})
    by_method = {m: [c for c in result["clips"] if c["method"] == m] for m in ("remi/keep", "functional/keep")}
    assert all("error" not in c for c in by_method["remi/keep"])
    assert all("error" in c for c in by_method["functional/keep"])


def test_config_loading(tmp_path):
    (tmp_path / "exp.toml").write_text('repeats = 3\nseed = 2\nvariants = [["functional", "rule"]]\n')
    config = ExperimentConfig.load(tmp_path / "exp.toml")
    assert config.repeats == 3 and config.variants == (("functional", "rule"),)
    (tmp_path / "exp.json").write_text(json.dumps({"variants": [{"representation": "remi"}]}))
    assert ExperimentConfig.load(tmp_path / "exp.json").variants == (("remi", "keep"),)
    with pytest.raises(ValueError):
        ExperimentConfig.from_dict({"repeat": 3})
    with pytest.raises(ValueError):
        ExperimentConfig.from_dict({"variants": [["remi", "always"]]})


def test_reference_comparison():
    report = dict(REFERENCE_REAL_DATA, pcs=1.5)
    cmp = compare_to_reference(report)
    assert cmp["ctnctr"]["within_tolerance"] and not cmp["pcs"]["within_tolerance"]
    assert cmp["pcs"]["delta"] == pytest.approx(-0.113)
    row = real_data_row([two_bar()])
    assert row["metrics"]["rr"] == 1.0


def test_evaluate_corpus_and_table():
    gen = [two_bar(), two_bar(Key(9, "minor"), "negative")]
    report = evaluate_corpus(gen, gen)
    assert report["summary"]["qd"] == 0.0 and len(report["clips"]) == 2
    text = format_table([{"method": "x", **report["summary"]}], ("rr", "qd"))
    assert text == "method\tRR\tQD\nx\t1.0000\t0.0000\n"
    assert evaluate_corpus(gen[:1], gen[1:])["summary"]["qd"] is None
