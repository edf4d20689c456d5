import numpy as np
import pytest

from keyharm.representation import LeadSheet, Note
from keyharm.theory import QUALITIES, ChordLabel, Key, encodable


def random_leadsheet(rng, max_bars=4, emotion=None, key=None, none_prob=0.1, full_range=True, num_bars=None):
    """Random valid lead sheet; notes that have no octave token in the key are dropped."""
    key = key or Key(int(rng.integers(12)), "major" if rng.random() < 0.5 else "minor")
    emotion = emotion or ("positive", "negative", "none")[int(rng.integers(3))]
    num_bars = num_bars or int(rng.integers(1, max_bars + 1))
    lo, hi = (21, 108) if full_range else (48, 84)
    melody = []
    onset = int(rng.integers(0, 4))
    while onset < 16 * num_bars:
        pitch = int(rng.integers(lo, hi + 1))
        if encodable(pitch, key):
            melody.append(Note(onset, pitch, int(rng.integers(1, 17))))
        onset += int(rng.integers(1, 7))
    chords = [
        None if rng.random() < none_prob else ChordLabel(int(rng.integers(12)), QUALITIES[int(rng.integers(11))])
        for _ in range(4 * num_bars)
    ]
    return LeadSheet(emotion, key, num_bars, melody, chords)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


_ACCEPTANCE = []


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        _ACCEPTANCE.append((report.nodeid.split("::")[-1], report.outcome))
    elif report.when == "setup" and report.skipped and "test_acceptance.py" in report.nodeid:
        _ACCEPTANCE.append((report.nodeid.split("::")[-1], "skipped"))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _ACCEPTANCE:
        label = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[outcome]
        terminalreporter.write_line(f"{label}  {name}")
