"""Key-aware functional encoding of lead sheets, emotion-conditioned
harmonization, and objective harmonization metrics."""

from .theory import (
    ALL_KEYS,
    DEGREES,
    QUALITIES,
    ChordLabel,
    DegreePitch,
    DegreePolicy,
    FunctionalChord,
    Key,
    chord_tones,
    degree_pitch_to_pitch,
    degree_to_pc,
    parallel_key,
    pc_to_degree,
    pitch_to_degree_pitch,
    scale_pcs,
)
from .representation import (
    REPRESENTATIONS,
    LeadSheet,
    Note,
    TokenSequence,
    decode,
    decode_functional,
    decode_remi,
    encode,
    encode_functional,
    encode_functional_ablated,
    encode_remi,
    encode_remi_trans,
    rekey,
    transpose_to_c,
    validate_sequence,
    vocabulary,
)
from .harmonizer import NGramModel, SamplerConfig, decide_key, harmonize, nucleus_sample, predict_key

__version__ = "0.1.0"
