"""Word-level XOR-difference arithmetic for n-bit modular addition.

Everything here is bit-twiddling on plain Python integers.  Bit index 0 is
always the least significant bit.  A "difference" is an XOR difference
between two words of the same width.
"""

from dataclasses import dataclass
from enum import Enum

MAX_WORD_BITS = 64


def mask(n: int) -> int:
    return (1 << n) - 1


@dataclass(frozen=True)
class Word:
    """An unsigned value of explicit width n, 1 <= n <= 64."""

    bits: int
    n: int

    def __post_init__(self):
        if not 1 <= self.n <= MAX_WORD_BITS:
            raise ValueError(f"word size {self.n} out of range 1..{MAX_WORD_BITS}")
        if not 0 <= self.bits <= mask(self.n):
            raise ValueError(f"value {self.bits:#x} does not fit in {self.n} bits")

    def bit(self, i: int) -> int:
        if not 0 <= i < self.n:
            raise IndexError(f"bit {i} out of range for width {self.n}")
        return (self.bits >> i) & 1

    def rotr(self, r: int) -> "Word":
        r %= self.n
        m = mask(self.n)
        return Word(((self.bits >> r) | (self.bits << (self.n - r))) & m, self.n)

    def rotl(self, r: int) -> "Word":
        return self.rotr(self.n - (r % self.n))

    def shr(self, r: int) -> "Word":
        """Logical right shift (bits fall off the low end)."""
        return Word(self.bits >> r, self.n)

    def __xor__(self, other: "Word") -> "Word":
        if self.n != other.n:
            raise ValueError(f"width mismatch: {self.n} vs {other.n}")
        return Word(self.bits ^ other.bits, self.n)

    def __and__(self, other: "Word") -> "Word":
        if self.n != other.n:
            raise ValueError(f"width mismatch: {self.n} vs {other.n}")
        return Word(self.bits & other.bits, self.n)

    def __or__(self, other: "Word") -> "Word":
        if self.n != other.n:
            raise ValueError(f"width mismatch: {self.n} vs {other.n}")
        return Word(self.bits | other.bits, self.n)

    def __invert__(self) -> "Word":
        return Word(self.bits ^ mask(self.n), self.n)

    def add(self, other: "Word") -> "Word":
        if self.n != other.n:
            raise ValueError(f"width mismatch: {self.n} vs {other.n}")
        return Word((self.bits + other.bits) & mask(self.n), self.n)

    def to_bin(self) -> str:
        return f"0b{self.bits:0{self.n}b}"

    def to_hex(self) -> str:
        return f"0x{self.bits:0{(self.n + 3) // 4}x}"

    @classmethod
    def parse(cls, text: str, n: int) -> "Word":
        """Parse '0b...', '0x...' or decimal text into an n-bit word."""
        text = text.strip().replace("_", "")
        value = int(text, 0)
        return cls(value, n)


@dataclass(frozen=True)
class DiffTriple:
    """Input differences (dx, dy) and output difference dz of one addition.

    The carry difference dc = dx ^ dy ^ dz is kept as the full XOR vector;
    the convention that the carry difference starts at 0 is checked as a
    validity condition, never by masking bit 0 away.
    """

    dx: Word
    dy: Word
    dz: Word

    def __post_init__(self):
        if not (self.dx.n == self.dy.n == self.dz.n):
            raise ValueError("width mismatch across difference triple")

    @property
    def n(self) -> int:
        return self.dx.n

    @property
    def dc(self) -> Word:
        return self.dx ^ self.dy ^ self.dz

    @classmethod
    def of(cls, dx: int, dy: int, dz: int, n: int) -> "DiffTriple":
        return cls(Word(dx, n), Word(dy, n), Word(dz, n))

    def words(self) -> tuple[int, int, int]:
        return self.dx.bits, self.dy.bits, self.dz.bits


class Row(Enum):
    """The eight feasible classes of one bit position of a difference triple.

    A position is classified by (dx_i, dy_i, dz_i) together with the next
    carry-difference bit dc_{i+1}; each class induces fixed relations on the
    value state (inputs, output, carries) of any pair following the
    differential.
    """

    R1_Free = 1
    R2_Contradiction = 2
    R3 = 3
    R4 = 4
    R5 = 5
    R6 = 6
    R7 = 7
    R8 = 8


@dataclass(frozen=True)
class BitConstraint:
    """Constraint set induced at a single bit position.

    Relations are rendered with concrete indices ("z_3 = ~x_3").  weight_bit
    is 1 exactly for rows 3..8, the positions that cost probability.
    """

    row: Row
    input_relation: str | None
    output_relation: str | None
    carry_relation: str | None
    weight_bit: int

    @property
    def invalid(self) -> bool:
        return self.row is Row.R2_Contradiction


def carry_diff(t: DiffTriple) -> Word:
    """Carry difference dc = dx ^ dy ^ dz; bit 0 must be 0 for validity."""
    return t.dc


def eq3(a: int, b: int, c: int) -> bool:
    return a == b and b == c


def classify_bit(t: DiffTriple, i: int) -> BitConstraint:
    """Classify bit i (0 <= i <= n-2) of a difference triple.

    The class is a function of the difference bits at i and the carry
    difference at i+1; the induced relations tie the value state of a
    conforming pair.
    """
    if not 0 <= i <= t.n - 2:
        raise IndexError(f"bit {i} not classifiable for width {t.n}")
    a, b, c = t.dx.bit(i), t.dy.bit(i), t.dz.bit(i)
    d = t.dc.bit(i + 1)
    j = i + 1
    if a == b == c:
        if d == a:
            return BitConstraint(
                Row.R1_Free, None, None,
                f"c_{j} = carry(x_{i}, y_{i}, c_{i})", 0)
        return BitConstraint(Row.R2_Contradiction, None, None, None, 0)
    if a == b:  # dz differs
        if d == a:
            return BitConstraint(
                Row.R3, f"x_{i} = y_{i}", f"z_{i} = c_{i}", f"c_{j} = x_{i}", 1)
        return BitConstraint(
            Row.R4, f"x_{i} = ~y_{i}", f"z_{i} = ~c_{i}", f"c_{j} = c_{i}", 1)
    if c == a:  # dy differs
        if d == a:
            return BitConstraint(
                Row.R5, f"y_{i} = ~c_{i}", f"z_{i} = ~x_{i}", f"c_{j} = x_{i}", 1)
        return BitConstraint(
            Row.R7, f"y_{i} = c_{i}", f"z_{i} = x_{i}", f"c_{j} = c_{i}", 1)
    # dx differs
    if d == b:
        return BitConstraint(
            Row.R6, f"x_{i} = ~c_{i}", f"z_{i} = ~y_{i}", f"c_{j} = y_{i}", 1)
    return BitConstraint(
        Row.R8, f"x_{i} = c_{i}", f"z_{i} = y_{i}", f"c_{j} = c_{i}", 1)


def xdp_valid(t: DiffTriple) -> bool:
    """Whether the differential has nonzero probability.

    Holds iff the carry difference starts at 0 and no position with all
    three difference bits equal contradicts the next carry-difference bit.
    """
    dc = t.dc.bits
    if dc & 1:
        return False
    dx, dy, dz = t.words()
    n = t.n
    all_eq = ~((dx ^ dy) | (dx ^ dz)) & mask(n - 1)  # positions i <= n-2
    # where all equal, dc_{i+1} must equal dx_i
    bad = all_eq & ((dx ^ (dc >> 1)) & mask(n - 1))
    return bad == 0


def xdp_weight(t: DiffTriple) -> int | None:
    """-log2 probability of a valid differential, None if invalid.

    The weight is the number of positions i <= n-2 whose difference bits are
    not all equal; each such position halves the probability.
    """
    if not xdp_valid(t):
        return None
    dx, dy, dz = t.words()
    noneq = ((dx ^ dy) | (dx ^ dz)) & mask(t.n - 1)
    return noneq.bit_count()
