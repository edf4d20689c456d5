"""
Melodic variation
=================

Scale degrees are kept and the key token swapped to the parallel minor. The
tonic stays put, the third and sixth drop a semitone.
"""

from keyharm import LeadSheet, Note, Key, ChordLabel, encode_functional, rekey
from keyharm.theory import PITCH_NAMES

melody = [Note(0, 62, 2), Note(2, 64, 2), Note(4, 66, 4), Note(8, 71, 4), Note(12, 69, 4)]
chords = [ChordLabel(2, "major"), ChordLabel(2, "major"), ChordLabel(11, "minor"), ChordLabel(9, "major")]
major = LeadSheet("positive", Key(2), 1, melody, chords)
minor = rekey(major, Key(2, "minor")).replace(emotion="negative")


def spell(ls):
    return " ".join(f"{PITCH_NAMES[n.pitch % 12]}{n.pitch // 12 - 1}" for n in ls.melody)


print("D major :", spell(major))
print("d minor :", spell(minor))

# the degree tokens are identical, only the key differs
a, b = encode_functional(major).tokens, encode_functional(minor).tokens
print("differing tokens:", [(x, y) for x, y in zip(a, b) if x != y])
