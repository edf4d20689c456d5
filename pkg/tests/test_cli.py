import json

import mido
import pytest

from keyharm.cli import main
from keyharm.corpus import load_leadsheet, save_leadsheet
from keyharm.experiment import bundled_manifest
from keyharm.representation import Note, TokenSequence, LeadSheet
from keyharm.theory import ChordLabel, Key


@pytest.fixture
def clip(tmp_path):
    ls = LeadSheet("positive", Key(2), 1, [Note(0, 62, 4)], [ChordLabel(2, "major")] * 4)
    path = tmp_path / "clip.json"
    save_leadsheet(ls, path)
    return path


@pytest.fixture
def model(tmp_path):
    path = tmp_path / "model.json"
    assert main(["train", "--manifest", str(bundled_manifest()), "--order", "4", "-o", str(path)]) == 0
    return path


def test_encode_decode(clip, tmp_path, capsys):
    assert main(["encode", str(clip)]) == 0
    text = capsys.readouterr().out
    assert text.splitlines()[:3] == ["Emotion_Positive", "Key_Dmajor", "Track_Melody"]
    tokens = tmp_path / "t.txt"
    tokens.write_text(text)
    assert main(["decode", str(tokens), "-o", str(tmp_path / "back.json")]) == 0
    assert load_leadsheet(tmp_path / "back.json") == load_leadsheet(clip)
    assert main(["encode", str(clip), "-r", "remi"]) == 0
    assert "Pitch_62" in capsys.readouterr().out


def test_transpose(clip, capsys):
    assert main(["transpose", str(clip)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["key"] == {"tonic": 0, "mode": "major"} and doc["melody"][0]["pitch"] == 60


def test_train_and_harmonize(clip, model, tmp_path, capsys):
    out = tmp_path / "h.json"
    argv = ["harmonize", str(clip), "--model", str(model), "--emotion", "negative",
            "--key-policy", "rule", "--seed", "3", "-o", str(out), "--tokens", str(tmp_path / "h.txt")]
    assert main(argv) == 0
    first = out.read_bytes()
    assert load_leadsheet(out).key == Key(2, "minor")
    assert TokenSequence.from_text((tmp_path / "h.txt").read_text()).tokens[1] == "Key_Dminor"
    assert main(argv) == 0 and out.read_bytes() == first


def test_evaluate(clip, tmp_path, capsys):
    assert main(["evaluate", str(clip), "--json", str(tmp_path / "e.json")]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].split("\t") == ["method", "CTnCTR", "PCS", "MCTD", "RR", "NR"]
    assert lines[1].split("\t")[4] == "1.0000"
    assert json.loads((tmp_path / "e.json").read_text())["clips"][0]["rr"] == 1.0


def test_stats(capsys):
    assert main(["stats", "--manifest", str(bundled_manifest()), "--split", "validation"]) == 0
    assert json.loads(capsys.readouterr().out)["clips"] == 2


def test_export_midi(clip, tmp_path):
    assert main(["export-midi", str(clip), "-o", str(tmp_path / "a.mid")]) == 0
    assert mido.MidiFile(tmp_path / "a.mid").length > 0


def test_run_experiment(tmp_path, capsys):
    config = tmp_path / "exp.json"
    config.write_text(json.dumps({"manifest": str(bundled_manifest()), "variants": [["functional", "rule"]]}))
    assert main(["run-experiment", str(config), "--repeats", "1", "--output-dir", str(tmp_path / "out")]) == 0
    assert "functional/rule" in capsys.readouterr().out
    assert (tmp_path / "out" / "table3.tsv").exists()


def test_exit_codes(clip, tmp_path, capsys):
    assert main(["encode", str(tmp_path / "missing.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"emotion": "happy"}))
    assert main(["encode", str(bad)]) == 1
    assert "bad.json" in capsys.readouterr().err
    tokens = tmp_path / "t.txt"
    tokens.write_text("Emotion_Positive\nKey_Cmajor\nTrack_Melody\n")
    assert main(["decode", str(tokens)]) == 1
    far = tmp_path / "far.json"
    save_leadsheet(LeadSheet("positive", Key(0), 1, [Note(0, 108, 4)], [None] * 4), far)
    assert main(["encode", str(far)]) == 1
    assert main(["encode", str(clip), "-o", str(tmp_path / "no" / "such" / "dir.txt")]) == 2
    with pytest.raises(SystemExit):
        main(["frobnicate"])


def test_console_script_installed():
    import shutil
    import subprocess
    exe = shutil.which("keyharm")
    if exe is None:
        pytest.skip("console script not on PATH")
    assert subprocess.run([exe, "--help"], capture_output=True).returncode == 0
