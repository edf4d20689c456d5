"""
Harmonicity and key fit
=======================

Score a clip whose chords agree with the melody, then the same melody over
chords a tritone away.
"""

from keyharm import LeadSheet, Note, Key, ChordLabel
from keyharm import metrics

melody = [Note(0, 60, 4), Note(4, 62, 2), Note(6, 64, 2), Note(8, 67, 4), Note(12, 65, 4)]
good = LeadSheet("positive", Key(0), 1, melody,
                 [ChordLabel(0, "major"), ChordLabel(0, "major"), ChordLabel(7, "dominant7"), ChordLabel(5, "major")])
bad = good.replace(chords=[ChordLabel((c.root + 6) % 12, c.quality) for c in good.chords])

print("          " + "  ".join(f"{k:>7}" for k in metrics.MetricReport.__dataclass_fields__))
for name, ls in (("diatonic", good), ("tritone", bad)):
    r = metrics.evaluate_clip(ls).as_dict()
    print(f"{name:<10}" + "  ".join(f"{v:7.3f}" for v in r.values()))

# corpus level: chord-quality and root-motion divergence
print("QD", metrics.qd([good], [bad]), "PD", metrics.pd([good], [bad]))
