"""Constraint structure a fixed differential imposes on an addition's output.

A valid XOR differential through z = x + y fixes per-bit relations among the
value state (inputs, output, carries).  Resolving the carry references bit by
bit labels every output bit as uniform, tied to a fresh input bit, fixed to a
constant, tied to a lower output bit, or driven by a carry chain over a run
of constraint-free positions.  Two additions that share an intermediate word
(up to rotation / XOR-constant glue) can then be screened: contradictory
relations between the same pair of adjacent bits make the joint differential
impossible, and positions where both additions pin the shared word to their
own carry mark the pair as a candidate for non-independence.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .words import DiffTriple, Row, Word, classify_bit, mask, xdp_valid


class Side(Enum):
    """Which role the shared word plays in the addition under analysis."""

    OUTPUT = "output"
    INPUT = "input"


class BitKind(Enum):
    UNIFORM = "uniform"
    TIED_TO_FRESH_INPUT = "tied_to_fresh_input"
    FIXED_VALUE = "fixed_value"
    TIED_TO_OUTPUT_BIT = "tied_to_output_bit"
    CARRY_CHAIN = "carry_chain"


class BaseKind(Enum):
    """Ground of a resolved carry reference."""

    ZERO = "zero"            # bottom of the adder, carry-in is 0
    OUTPUT_BIT = "output_bit"    # carry equals the negation of a lower output bit
    FRESH_INPUT = "fresh_input"  # carry equals an unconstrained input bit


@dataclass(frozen=True)
class ChainBase:
    kind: BaseKind
    bit: int | None = None
    negated: bool = False  # OUTPUT_BIT ground: carry-in = ~z[bit]


@dataclass(frozen=True)
class OutputBitDescriptor:
    """How one output bit is constrained by the differential.

    kind selects which of the optional fields apply:
      TIED_TO_FRESH_INPUT: tied_bit (input bit index), negated
      FIXED_VALUE:         value
      TIED_TO_OUTPUT_BIT:  tied_bit (lower output bit), negated
      CARRY_CHAIN:         segments (runs of free bits, high to low), base,
                           negated (output equals the complement of the chain
                           carry), skipped (carry-forwarding bits in between)
    """

    bit: int
    kind: BitKind
    row: Row | None = None
    relation: str | None = None
    value: int | None = None
    tied_bit: int | None = None
    negated: bool = False
    segments: tuple[tuple[int, int], ...] = ()
    base: ChainBase | None = None
    skipped: tuple[int, ...] = ()

    @property
    def nonuniform(self) -> bool:
        """True when the bit's value distribution (given lower output bits)
        can deviate from coin-flip uniform."""
        return self.kind in (
            BitKind.FIXED_VALUE, BitKind.TIED_TO_OUTPUT_BIT, BitKind.CARRY_CHAIN)

    @property
    def carry_linked(self) -> bool:
        """True when the raw per-bit constraint ties this output bit to its
        own carry (the two rows with equal input differences and a flipped
        output difference)."""
        return self.row in (Row.R3, Row.R4)

    @property
    def start(self) -> int | None:
        """Top bit of the carry chain, None for other kinds."""
        if self.kind is not BitKind.CARRY_CHAIN:
            return None
        return self.segments[0][0]

    @property
    def chain_bits(self) -> tuple[int, ...]:
        """All chain positions, descending, skips excluded."""
        out: list[int] = []
        for hi, lo in self.segments:
            out.extend(range(hi, lo - 1, -1))
        return tuple(out)


class PatternKind(Enum):
    ALL_ONE = "all_one"      # listed output bits all 1 forces the target
    ALL_EQUAL = "all_equal"  # listed output bits all equal forces the target


@dataclass(frozen=True)
class ForcedPattern:
    """An output pattern that pins the value of a chain-driven bit."""

    bit: int
    kind: PatternKind
    condition_bits: tuple[int, ...]
    value: int | None = None          # ALL_ONE: forced value of z[bit]
    reference_bit: int | None = None  # ALL_EQUAL: z[bit] follows z[reference_bit]
    equal_to_reference: bool = False

    def describe(self) -> str:
        cond = "=".join(f"z_{b}" for b in self.condition_bits)
        if self.kind is PatternKind.ALL_ONE:
            return f"{cond}=1 => z_{self.bit}={self.value}"
        rel = "" if self.equal_to_reference else "~"
        return f"{cond} => z_{self.bit}={rel}z_{self.reference_bit}"


def _chain_relation(bit: int, negated: bool,
                    segments: tuple[tuple[int, int], ...],
                    base: ChainBase) -> str:
    runs = ",".join(f"[{hi}..{lo}]" for hi, lo in segments)
    if base.kind is BaseKind.ZERO:
        cin = "0"
    elif base.kind is BaseKind.OUTPUT_BIT:
        cin = f"~z_{base.bit}"
    else:
        cin = f"x_{base.bit}"
    neg = "~" if negated else ""
    return f"z_{bit} = {neg}carry({runs}; c_in={cin})"


def _resolve_carry(rows: list[Row], i: int) -> OutputBitDescriptor:
    """Resolve the carry reference of an output bit tied to its own carry.

    Walks downward from bit i-1: carry-forwarding rows are skipped, runs of
    free rows accumulate as carry-function segments, and the first grounding
    row (fresh input, lower output bit, or the adder bottom) stops the walk.
    """
    inverted = rows[i] is Row.R4  # z_i = ~c_i instead of z_i = c_i
    segments: list[tuple[int, int]] = []
    skipped: list[int] = []
    hi: int | None = None
    lo = i
    base: ChainBase | None = None
    t = i - 1
    while True:
        if t < 0:
            base = ChainBase(BaseKind.ZERO)
            break
        r = rows[t]
        if r is Row.R1_Free:
            if hi is None:
                hi = t
            lo = t
        else:
            if hi is not None:
                segments.append((hi, lo))
                hi = None
            if r in (Row.R7, Row.R8):
                skipped.append(t)
            elif r is Row.R3:
                base = ChainBase(BaseKind.FRESH_INPUT, bit=t)
                break
            else:  # R4, R5, R6 all pin the carry to ~z[t]
                base = ChainBase(BaseKind.OUTPUT_BIT, bit=t, negated=True)
                break
        t -= 1
    if hi is not None:
        segments.append((hi, lo))

    if segments:
        segs = tuple(segments)
        return OutputBitDescriptor(
            bit=i, kind=BitKind.CARRY_CHAIN, row=rows[i],
            relation=_chain_relation(i, inverted, segs, base),
            negated=inverted, segments=segs, base=base, skipped=tuple(skipped))
    if base.kind is BaseKind.ZERO:
        v = 1 if inverted else 0
        return OutputBitDescriptor(
            bit=i, kind=BitKind.FIXED_VALUE, row=rows[i],
            relation=f"z_{i} = {v}", value=v, skipped=tuple(skipped))
    if base.kind is BaseKind.FRESH_INPUT:
        neg = "~" if inverted else ""
        return OutputBitDescriptor(
            bit=i, kind=BitKind.TIED_TO_FRESH_INPUT, row=rows[i],
            relation=f"z_{i} = {neg}x_{base.bit}",
            tied_bit=base.bit, negated=inverted, skipped=tuple(skipped))
    # grounded at a lower output bit: z_i = +-(~z_t)
    neg = not inverted
    rel = f"z_{i} = {'~' if neg else ''}z_{base.bit}"
    return OutputBitDescriptor(
        bit=i, kind=BitKind.TIED_TO_OUTPUT_BIT, row=rows[i], relation=rel,
        tied_bit=base.bit, negated=neg, skipped=tuple(skipped))


def output_constraints(t: DiffTriple) -> tuple[OutputBitDescriptor, ...]:
    """Per-bit output constraint descriptors of a valid differential.

    One descriptor per output bit, index 0 first.  The top bit is always
    uniform: no relation of the bit classification reaches it.
    """
    if not xdp_valid(t):
        raise ValueError("invalid differential: no pair follows it")
    n = t.n
    constraints = [classify_bit(t, i) for i in range(n - 1)]
    rows = [c.row for c in constraints]
    out: list[OutputBitDescriptor] = []
    for i in range(n):
        if i == n - 1 or rows[i] is Row.R1_Free:
            row = None if i == n - 1 else rows[i]
            out.append(OutputBitDescriptor(
                bit=i, kind=BitKind.UNIFORM, row=row,
                relation=f"z_{i}: uniform"))
        elif rows[i] in (Row.R5, Row.R6, Row.R7, Row.R8):
            out.append(OutputBitDescriptor(
                bit=i, kind=BitKind.TIED_TO_FRESH_INPUT, row=rows[i],
                relation=constraints[i].output_relation,
                tied_bit=i, negated=rows[i] in (Row.R5, Row.R6)))
        else:
            out.append(_resolve_carry(rows, i))
    return tuple(out)


def forced_pattern_check(desc: OutputBitDescriptor) -> ForcedPattern | None:
    """The output pattern a carry chain forces, if any.

    A chain grounded at the adder bottom forces the target whenever every
    chain bit is 1; one grounded at a lower output bit forces it whenever the
    chain bits and the ground bit all agree.  Skipped carry-forwarding bits
    take no part in the pattern.  Chains grounded at a fresh input force
    nothing, and non-chain descriptors yield None.
    """
    if desc.kind is not BitKind.CARRY_CHAIN:
        return None
    if desc.base.kind is BaseKind.FRESH_INPUT:
        return None
    bits = desc.chain_bits
    if desc.base.kind is BaseKind.ZERO:
        return ForcedPattern(
            bit=desc.bit, kind=PatternKind.ALL_ONE, condition_bits=bits,
            value=1 if desc.negated else 0)
    return ForcedPattern(
        bit=desc.bit, kind=PatternKind.ALL_EQUAL,
        condition_bits=bits + (desc.base.bit,),
        reference_bit=desc.start, equal_to_reference=desc.negated)


@dataclass(frozen=True)
class AdjacencyVectors:
    """Bit vectors marking relations between adjacent output bits.

    bN bit i set means the two additions' constraints force z_{i+1} = ~z_i
    (output role) resp. ~z_{i+1} = z_i (input role); bE bit i set forces
    z_{i+1} = z_i.  a1/a2/a3 are the per-bit relation classes the b vectors
    are assembled from; bN_i implies a1 bit i+1, bE_i implies a3 bit i+1.
    """

    a1: Word
    a2: Word
    a3: Word
    bN: Word
    bE: Word

    @property
    def n(self) -> int:
        return self.a1.n


def adjacency_vectors(t: DiffTriple, role: Side = Side.OUTPUT) -> AdjacencyVectors:
    """Adjacent-bit relation vectors of one addition, by bitwise formulas.

    role OUTPUT reads t as (dx, dy) -> dz and describes the output z; role
    INPUT reads t as (dz, du) -> dv for a downstream addition consuming z as
    its first input, and describes z against that addition's carry.  Bits at
    and above n-2 of bN/bE are always clear: the relations need the next
    carry-difference bit, which does not exist up there.
    """
    n = t.n
    low = Word(mask(n - 1), n)
    cs = t.dc.shr(1)
    if role is Side.OUTPUT:
        dx, dy, dz = t.dx, t.dy, t.dz
        a1 = ~(dx ^ dy) & ~(dy ^ ~dz) & ~(~dz ^ cs)
        a2 = ~(dx ^ ~dy) & ~(dz ^ cs)
        a3 = ~(dx ^ dy) & ~(dy ^ ~dz) & ~(dz ^ cs)
    else:
        dzz, du, dv = t.dx, t.dy, t.dz
        a1 = ~(dzz ^ ~du) & ~(du ^ dv) & ~(dv ^ cs)
        a2 = ~(du ^ ~dv) & ~(dzz ^ cs)
        a3 = ~(dzz ^ ~du) & ~(du ^ dv) & ~(dzz ^ cs)
    a1, a2, a3 = a1 & low, a2 & low, a3 & low
    pair = a2 | a3
    return AdjacencyVectors(a1, a2, a3, bN=a1.shr(1) & pair, bE=a3.shr(1) & pair)


def align_output_vectors(vecs: AdjacencyVectors, rot: int,
                         xor_const: Word) -> AdjacencyVectors:
    """Re-index output-side vectors through the glue w = (z ^ const) >>> rot.

    Adjacent source bits stay adjacent in the glued word except across the
    rotation cut, which never carries a relation (top bits are masked).  The
    XOR constant flips relation polarity wherever its two adjacent bits
    differ, swapping the not-equal and equal vectors there; a1/a3 swap the
    same way so the containment invariants survive.
    """
    n = xor_const.n
    if vecs.n != n:
        raise ValueError(f"width mismatch: vectors {vecs.n}, constant {n}")
    rot %= n
    k = xor_const.bits
    a1 = a2 = a3 = bn = be = 0
    for p in range(n):
        src = (p + rot) % n
        if src <= n - 2:
            flip = ((k >> src) ^ (k >> (src + 1))) & 1
            bn_bit = (vecs.bN.bits >> src) & 1
            be_bit = (vecs.bE.bits >> src) & 1
            if flip:
                bn_bit, be_bit = be_bit, bn_bit
            bn |= bn_bit << p
            be |= be_bit << p
        below = (k >> (src - 1)) & 1 if src >= 1 else 0
        swap_a = below ^ ((k >> src) & 1)
        x1 = (vecs.a1.bits >> src) & 1
        x3 = (vecs.a3.bits >> src) & 1
        if swap_a:
            x1, x3 = x3, x1
        a1 |= x1 << p
        a3 |= x3 << p
        a2 |= ((vecs.a2.bits >> src) & 1) << p
    keep = mask(n - 2) if n >= 2 else 0
    return AdjacencyVectors(
        a1=Word(a1, n), a2=Word(a2, n), a3=Word(a3, n),
        bN=Word(bn & keep, n), bE=Word(be & keep, n))


@dataclass(frozen=True)
class AdjacentConflict:
    """Contradictory relations between the same two adjacent shared bits.

    window lists the three bit positions (in the downstream addition's
    indexing) whose differences, across all five words of the pair, pin the
    contradiction; excluding that difference pattern removes the conflict.
    """

    bit: int
    window: tuple[int, int, int]
    output_says_equal: bool

    @property
    def input_says_equal(self) -> bool:
        return not self.output_says_equal


def detect_adjacent_conflict(
        out_vecs: AdjacencyVectors,
        in_vecs: AdjacencyVectors) -> tuple[Word, tuple[AdjacentConflict, ...]]:
    """Adjacent-bit contradictions between two additions sharing a word.

    Both vector sets must already live in the same indexing (align the
    output side through the glue first).  A set bit in the returned word
    means the upstream addition forces one relation between bits i and i+1
    of the shared word while the downstream addition forces the opposite;
    any such bit makes the joint differential impossible.
    """
    if out_vecs.n != in_vecs.n:
        raise ValueError(
            f"width mismatch: output side {out_vecs.n}, input side {in_vecs.n}")
    q = (out_vecs.bN & in_vecs.bE) | (out_vecs.bE & in_vecs.bN)
    records = tuple(
        AdjacentConflict(bit=i, window=(i, i + 1, i + 2),
                         output_says_equal=bool(out_vecs.bE.bit(i)))
        for i in range(q.n) if (q.bits >> i) & 1)
    return q, records


def detect_nonindep_positions(m1: DiffTriple, m2: DiffTriple) -> set[int]:
    """Bit positions where both additions pin the shared word to their carry.

    m1 is the producing addition (shared word is its output), m2 the
    consuming one (shared word is its first input); both triples must
    already be in the consumer's indexing, so m1.dz == m2.dx.  Only the two
    five-bit difference patterns that tie the shared bit to both carries are
    reported.  The screen is one-sided in both directions: a non-empty set
    is a candidate for exact re-weighting, not a verdict, and an empty set
    certifies factorization only when the glue rotation is zero (exhaustive
    at n=4) or the producer output is uniform; a rotated glue can leak the
    producer's carry bias through the consumer's low bits without any
    shared pinned position.
    """
    if m1.n != m2.n or m1.dz != m2.dx:
        raise ValueError("alignment mismatch: producer output difference "
                         "must equal consumer input difference")
    n = m1.n
    both = (m1.dx & m1.dy & ~m1.dz & m2.dy & m2.dz) | \
        (~m1.dx & ~m1.dy & m1.dz & ~m2.dy & ~m2.dz)
    hits = both.bits & mask(n - 1)
    return {i for i in range(n) if (hits >> i) & 1}
