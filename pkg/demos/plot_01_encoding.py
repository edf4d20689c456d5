"""
Encoding a lead sheet
=====================

One bar in D major, written out in three token alphabets.
"""

from keyharm import LeadSheet, Note, Key, ChordLabel, encode, decode

ls = LeadSheet(
    emotion="positive",
    key=Key(2),  # D major
    num_bars=1,
    melody=[Note(0, 62, 4), Note(4, 66, 4), Note(8, 69, 8)],
    chords=[ChordLabel(2, "major")] * 2 + [ChordLabel(9, "dominant7")] * 2,
)

for rep in ("remi", "functional", "functional-ablated"):
    ts = encode(ls, rep)
    print(f"{rep:>20}: {len(ts)} tokens")
    print("    " + " ".join(ts.tokens))

# every alphabet decodes back to the same clip
assert all(decode(encode(ls, rep)) == ls for rep in ("remi", "functional", "functional-ablated"))

# remi-trans moves the clip to C first
print(" ".join(encode(ls, "remi-trans").tokens[:8]), "...")
