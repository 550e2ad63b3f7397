"""Differential-trail toolkit for ARX ciphers.

Searches, validates and exactly re-weights XOR-differential trails through
modular addition, with special treatment of consecutive additions whose
carry chains interact.
"""

__version__ = "0.1.0"

from .words import Word, DiffTriple, BitConstraint, Row, carry_diff, classify_bit, xdp_valid, xdp_weight
from .analysis import (
    AdjacencyVectors,
    AdjacentConflict,
    BaseKind,
    BitKind,
    ChainBase,
    ForcedPattern,
    OutputBitDescriptor,
    PatternKind,
    Side,
    adjacency_vectors,
    align_output_vectors,
    detect_adjacent_conflict,
    detect_nonindep_positions,
    forced_pattern_check,
    output_constraints,
)

__all__ = [
    "Word",
    "DiffTriple",
    "BitConstraint",
    "Row",
    "carry_diff",
    "classify_bit",
    "xdp_valid",
    "xdp_weight",
    "AdjacencyVectors",
    "AdjacentConflict",
    "BaseKind",
    "BitKind",
    "ChainBase",
    "ForcedPattern",
    "OutputBitDescriptor",
    "PatternKind",
    "Side",
    "adjacency_vectors",
    "align_output_vectors",
    "detect_adjacent_conflict",
    "detect_nonindep_positions",
    "forced_pattern_check",
    "output_constraints",
]
