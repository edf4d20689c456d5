"""
Harmonizing one melody for two emotions
=======================================

Train an n-gram model on the bundled synthetic corpus and harmonize a
validation melody as positive and as negative.
"""

from keyharm import NGramModel, SamplerConfig, harmonize, encode
from keyharm.corpus import CorpusManifest, load_corpus
from keyharm.experiment import bundled_manifest
from keyharm.theory import DegreePolicy, PITCH_NAMES

manifest = CorpusManifest.load(bundled_manifest())
train = load_corpus(manifest, "train")
melody = load_corpus(manifest, "validation")[0]

model = NGramModel(order=5, representation="functional")
model.fit([encode(ls, "functional", DegreePolicy.seeded(i)) for i, ls in enumerate(train)])


def chord_names(ls):
    return " ".join("-" if c is None else f"{PITCH_NAMES[c.root]}:{c.quality}" for c in ls.chords[::4])


print("original  ", melody.key.name, chord_names(melody))
for emotion in ("positive", "negative"):
    for seed in range(3):
        out = harmonize(melody, emotion, "rule", model, SamplerConfig(seed=seed))
        print(f"{emotion:<9} {out.key.name:<8} {chord_names(out)}")
