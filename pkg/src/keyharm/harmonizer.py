"""Emotion-conditioned harmonization of a melody.

A key is chosen for the target emotion (kept, forced to the parallel
major/minor, or sampled from the model), the melody is re-pitched into that
key by scale degree, and chord bars are sampled one token at a time after each
melody bar under the grammar mask.

Any object with ``vocab`` and ``next_distribution(prefix)`` can drive
generation; :class:`NGramModel` is the bundled counting model.
"""

from __future__ import annotations

import hashlib
import json
import logging
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol, Sequence

import numpy as np

from .representation import (
    SequenceGrammar,
    TokenSequence,
    LeadSheet,
    decode,
    emotion_token,
    encode,
    key_token,
    rekey,
    transpose_to_c,
    vocabulary,
)
from .theory import DegreePolicy, Key

log = logging.getLogger(__name__)

MODEL_FORMAT_VERSION = 1
KEY_POLICIES = ("keep", "rule", "model")


class SequenceModel(Protocol):
    vocab: list[str]
    representation: str

    def next_distribution(self, prefix: Sequence[str]) -> np.ndarray:
        ...


def vocab_hash(vocab: Sequence[str]) -> str:
    return hashlib.sha256("\n".join(vocab).encode("utf-8")).hexdigest()


class _Counts:
    """n-gram count tables for one corpus, context tuple -> {token id: weight}."""

    def __init__(self, order: int):
        self.order = order
        self.tables: list[dict[tuple, dict[int, float]]] = [defaultdict(dict) for _ in range(order)]
        self.sequences = 0

    def add(self, ids: Sequence[int], weight: float = 1.0):
        self.sequences += 1
        for pos, tok in enumerate(ids):
            for k in range(self.order):
                if k > pos:
                    break
                ctx = tuple(ids[pos - k:pos])
                row = self.tables[k][ctx]
                row[tok] = row.get(tok, 0.0) + weight

    def distribution(self, history: Sequence[int], size: int) -> np.ndarray:
        # Witten-Bell interpolation from the uniform distribution upwards
        probs = np.full(size, 1.0 / size)
        for k in range(self.order):
            if k > len(history):
                break
            ctx = tuple(history[len(history) - k:]) if k else ()
            row = self.tables[k].get(ctx)
            if not row:
                continue
            total = sum(row.values())
            types = len(row)
            counts = np.zeros(size)
            for tok, c in row.items():
                counts[tok] = c
            probs = (counts + types * probs) / (total + types)
        return probs

    def to_json(self) -> list:
        return [[[list(ctx), {str(t): c for t, c in row.items()}] for ctx, row in table.items()]
                for table in self.tables]

    @classmethod
    def from_json(cls, order: int, data: list, sequences: int) -> "_Counts":
        counts = cls(order)
        counts.sequences = sequences
        for k, table in enumerate(data):
            for ctx, row in table:
                counts.tables[k][tuple(ctx)] = {int(t): float(c) for t, c in row.items()}
        return counts


class NGramModel:
    """Interpolated n-gram over the interleaved token stream.

    Two count tables are kept, one for unlabeled sequences (``Emotion_None``)
    and one for emotion-labeled ones. The next-token distribution mixes the
    two with weight ``mix`` on the labeled side, which plays the role of
    pretraining followed by finetuning.
    """

    def __init__(self, order: int = 5, representation: str = "functional", mix: float = 0.7):
        if order < 1:
            raise ValueError("order must be >= 1")
        if not 0.0 <= mix <= 1.0:
            raise ValueError("mix must be in [0, 1]")
        self.order = order
        self.representation = representation
        self.mix = mix
        self.vocab = vocabulary(representation)
        self.index = {t: i for i, t in enumerate(self.vocab)}
        self.labeled = _Counts(order)
        self.unlabeled = _Counts(order)

    def _ids(self, tokens: Sequence[str]) -> list[int]:
        try:
            return [self.index[t] for t in tokens]
        except KeyError as exc:
            raise ValueError(f"token {exc.args[0]!r} is not in the {self.representation} vocabulary") from None

    def fit(self, labeled: Sequence[TokenSequence] = (), unlabeled: Sequence[TokenSequence] = ()) -> "NGramModel":
        if not labeled and not unlabeled:
            raise ValueError("nothing to train on")
        for corpus, table in ((labeled, self.labeled), (unlabeled, self.unlabeled)):
            for ts in corpus:
                if ts.representation != self.representation:
                    raise ValueError(
                        f"sequence is {ts.representation!r}, model expects {self.representation!r}"
                    )
                if table is self.unlabeled and ts.tokens[:1] != ["Emotion_None"]:
                    raise ValueError("unlabeled sequences must start with Emotion_None")
                table.add(self._ids(ts.tokens))
        return self

    def _weights(self) -> tuple[float, float]:
        has_l, has_u = self.labeled.sequences > 0, self.unlabeled.sequences > 0
        if has_l and has_u:
            return self.mix, 1.0 - self.mix
        return float(has_l), float(has_u)

    def next_distribution(self, prefix: Sequence[str]) -> np.ndarray:
        history = self._ids(prefix[-(self.order - 1):]) if self.order > 1 else []
        w_lab, w_unl = self._weights()
        size = len(self.vocab)
        probs = np.zeros(size)
        if w_lab > 0:
            probs += w_lab * self.labeled.distribution(history, size)
        if w_unl > 0:
            probs += w_unl * self.unlabeled.distribution(history, size)
        if w_lab == 0 and w_unl == 0:
            probs[:] = 1.0 / size
        return probs

    def save(self, path: str | Path) -> None:
        doc = {
            "format": "keyharm-ngram",
            "version": MODEL_FORMAT_VERSION,
            "representation": self.representation,
            "order": self.order,
            "mix": self.mix,
            "vocab_hash": vocab_hash(self.vocab),
            "vocab": self.vocab,
            "labeled": {"sequences": self.labeled.sequences, "tables": self.labeled.to_json()},
            "unlabeled": {"sequences": self.unlabeled.sequences, "tables": self.unlabeled.to_json()},
        }
        Path(path).write_text(json.dumps(doc), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "NGramModel":
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        if doc.get("format") != "keyharm-ngram" or doc.get("version") != MODEL_FORMAT_VERSION:
            raise ValueError(f"{path}: not a version {MODEL_FORMAT_VERSION} n-gram model file")
        model = cls(doc["order"], doc["representation"], doc["mix"])
        if doc["vocab_hash"] != vocab_hash(model.vocab) or doc["vocab"] != model.vocab:
            raise ValueError(f"{path}: vocabulary does not match this version of the tokenizer")
        for name in ("labeled", "unlabeled"):
            part = doc[name]
            setattr(model, name, _Counts.from_json(model.order, part["tables"], part["sequences"]))
        return model


def train(
    labeled: Sequence[TokenSequence],
    unlabeled: Sequence[TokenSequence] = (),
    order: int = 5,
    mix: float = 0.7,
    representation: str | None = None,
) -> NGramModel:
    sample = (list(labeled) + list(unlabeled))[:1]
    if not sample:
        raise ValueError("empty corpora")
    representation = representation or sample[0].representation
    return NGramModel(order, representation, mix).fit(labeled, unlabeled)


# --- sampling -------------------------------------------------------------------

@dataclass(frozen=True)
class SamplerConfig:
    temperature: float = 1.1
    top_p: float = 0.99
    seed: int = 0

    def __post_init__(self):
        if self.temperature <= 0:
            raise ValueError("temperature must be > 0")
        if not 0 < self.top_p <= 1:
            raise ValueError("top_p must be in (0, 1]")

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)


def nucleus_filter(probs: np.ndarray, temperature: float, top_p: float, mask: np.ndarray | None = None) -> np.ndarray:
    """Masked, temperature-scaled, top-p truncated and renormalized distribution."""
    probs = np.asarray(probs, dtype=float)
    if mask is None:
        mask = np.ones(len(probs), dtype=bool)
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        raise ValueError("no legal token to sample")
    p = np.where(mask, probs, 0.0)
    if p.sum() <= 0:
        log.warning("model gives no mass to any legal token; sampling uniformly over %d tokens", mask.sum())
        p = mask.astype(float)
    support = p > 0
    logits = np.full(len(p), -np.inf)
    logits[support] = np.log(p[support]) / temperature
    logits -= logits[support].max()
    scaled = np.where(support, np.exp(logits), 0.0)
    scaled /= scaled.sum()

    order = np.argsort(-scaled, kind="stable")
    cumulative = np.cumsum(scaled[order])
    cut = int(np.searchsorted(cumulative, top_p - 1e-12)) + 1
    keep = order[:cut]
    out = np.zeros(len(p))
    out[keep] = scaled[keep]
    return out / out.sum()


def nucleus_sample(
    probs: np.ndarray,
    config: SamplerConfig,
    mask: np.ndarray | None = None,
    rng: np.random.Generator | None = None,
) -> int:
    rng = rng if rng is not None else config.rng()
    filtered = nucleus_filter(probs, config.temperature, config.top_p, mask)
    return int(rng.choice(len(filtered), p=filtered))


def _mask(model: SequenceModel, allowed: Sequence[str]) -> np.ndarray:
    index = getattr(model, "index", None) or {t: i for i, t in enumerate(model.vocab)}
    mask = np.zeros(len(model.vocab), dtype=bool)
    mask[[index[t] for t in allowed]] = True
    return mask


# --- key decision ---------------------------------------------------------------

def predict_key(model: SequenceModel, emotion: str, sampler: SamplerConfig = SamplerConfig(),
                rng: np.random.Generator | None = None) -> Key:
    prefix = [emotion_token(emotion)]
    keys = [t for t in model.vocab if t.startswith("Key_")]
    mask = _mask(model, keys)
    probs = model.next_distribution(prefix)
    if not (probs * mask).sum() > 0:
        raise ValueError(f"model assigns no probability to any key after {prefix[0]}")
    tok = model.vocab[nucleus_sample(probs, sampler, mask, rng)]
    return Key.from_name(tok[4:])


def decide_key(original: Key, emotion: str, policy: str = "rule", model: SequenceModel | None = None,
               sampler: SamplerConfig = SamplerConfig(), rng: np.random.Generator | None = None) -> Key:
    if policy == "keep":
        return original
    if policy == "rule":
        return Key(original.tonic, "major" if emotion == "positive" else "minor")
    if policy == "model":
        if model is None:
            raise ValueError("model-based key decision needs a model")
        return predict_key(model, emotion, sampler, rng)
    raise ValueError(f"unknown key policy {policy!r}")


# --- generation -----------------------------------------------------------------

def _melody_bars(ts: TokenSequence) -> list[list[str]]:
    """Melody tokens of each bar (between ``Track_Melody Bar`` and ``Track_Chord``)."""
    bars, current, inside = [], None, False
    for tok in ts.tokens:
        if tok == "Track_Melody":
            current, inside = [], True
        elif tok == "Track_Chord":
            bars.append(current[1:])  # drop the Bar token
            inside = False
        elif inside:
            current.append(tok)
    return bars


def generate_sequence(
    model: SequenceModel,
    emotion: str,
    key: Key,
    melody: LeadSheet,
    sampler: SamplerConfig = SamplerConfig(),
    rng: np.random.Generator | None = None,
    policy: DegreePolicy | None = None,
) -> TokenSequence:
    """Token sequence with the melody of ``melody`` re-pitched into ``key`` and sampled chords.

    The melody is taken verbatim bar by bar; every chord token is sampled from
    the model restricted to grammatical continuations.
    """
    representation = model.representation
    rng = rng if rng is not None else sampler.rng()
    source = transpose_to_c(melody) if representation == "remi-trans" else melody
    source = source.replace(chords=[None] * len(source.chords))
    if representation == "functional":
        # degree tokens are key independent; only the Key token changes
        melody_ts = encode(source, representation, policy)
    else:
        placed = rekey(source, key, policy) if key != source.key else source
        melody_ts = encode(placed, "remi" if representation == "remi-trans" else representation, policy)

    grammar = SequenceGrammar("remi" if representation == "remi-trans" else representation)
    tokens: list[str] = []

    def push(tok: str):
        rule = grammar.feed(tok)
        if rule is not None:
            raise RuntimeError(f"generator produced an illegal token {tok!r}: {rule}")
        tokens.append(tok)

    push(emotion_token(emotion))
    push(key_token(key))
    for bar in _melody_bars(melody_ts):
        push("Track_Melody")
        push("Bar")
        for tok in bar:
            push(tok)
        push("Track_Chord")
        push("Bar")
        for _ in range(4):
            push(grammar.legal()[0])  # the beat's fixed SubBeat
            probs = model.next_distribution(tokens)
            push(model.vocab[nucleus_sample(probs, sampler, _mask(model, grammar.legal()), rng)])
    push("EOS")
    return TokenSequence(tokens, representation)


def generate_chords(model: SequenceModel, emotion: str, key: Key, melody: LeadSheet,
                    sampler: SamplerConfig = SamplerConfig(), rng: np.random.Generator | None = None,
                    policy: DegreePolicy | None = None) -> LeadSheet:
    return decode(generate_sequence(model, emotion, key, melody, sampler, rng, policy))


def harmonize_sequence(
    ls: LeadSheet,
    target: str,
    policy: str,
    model: SequenceModel,
    sampler: SamplerConfig = SamplerConfig(),
    key_model: SequenceModel | None = None,
    degree_policy: DegreePolicy | None = None,
) -> TokenSequence:
    if target not in ("positive", "negative", "none"):
        raise ValueError(f"unknown emotion {target!r}")
    rng = sampler.rng()
    original = Key(0, ls.key.mode) if model.representation == "remi-trans" else ls.key
    key = decide_key(original, target, policy, key_model or model, sampler, rng)
    if model.representation == "remi-trans" and key.tonic != 0:
        # the transposed alphabet only ever sees C major / c minor
        key = Key(0, key.mode)
    return generate_sequence(model, target, key, ls, sampler, rng, degree_policy)


def harmonize(
    ls: LeadSheet,
    target: str,
    policy: str,
    model: SequenceModel,
    sampler: SamplerConfig = SamplerConfig(),
    key_model: SequenceModel | None = None,
    degree_policy: DegreePolicy | None = None,
) -> LeadSheet:
    """Harmonize the melody of ``ls`` for ``target`` emotion; input chords are ignored."""
    return decode(harmonize_sequence(ls, target, policy, model, sampler, key_model, degree_policy))

