"""State (value) transition models of ARX operations under a fixed differential.

Encodes one concrete computation x + y = z together with its carry word.
Where the pinned differential classifies a bit into one of the constrained
rows, three two-literal relations stand in for the carry function; that
replacement is what keeps validation models small.  Rotations and constant
XORs never allocate variables: they re-wire literals.
"""

from dataclasses import dataclass

from .cnf import CnfFormula, encode_gadget
from .words import DiffTriple, Row, Word, classify_bit, xdp_valid


@dataclass(frozen=True)
class WordVars:
    """One n-bit word of literals, LSB first.

    Entries are signed DIMACS literals, so a negative entry means the
    word bit is the negation of the underlying variable.  Linear layers
    exploit that to stay clause-free.
    """

    bits: tuple
    label: str

    @property
    def n(self) -> int:
        return len(self.bits)

    def lit(self, i: int) -> int:
        return self.bits[i]


def alloc_word(f: CnfFormula, n: int, label: str) -> WordVars:
    """Fresh word, registered as a named group for projection/decoding."""
    return WordVars(tuple(f.new_vars(n, group=label)), label)


@dataclass(frozen=True)
class RotateRight:
    amount: int


@dataclass(frozen=True)
class RotateLeft:
    amount: int


@dataclass(frozen=True)
class XorConst:
    value: object  # Word, or plain int masked to the input width


@dataclass(frozen=True)
class XorVars:
    other: WordVars


# x_i = y_i style relations replacing the carry function on constrained
# bits; "cn" is the carry out c_{i+1}
_ROW_RELATIONS = {
    Row.R3: (("EQ", "x", "y"), ("EQ", "z", "c"), ("EQ", "cn", "x")),
    Row.R4: (("NEQ", "x", "y"), ("NEQ", "z", "c"), ("EQ", "cn", "c")),
    Row.R5: (("NEQ", "y", "c"), ("NEQ", "z", "x"), ("EQ", "cn", "x")),
    Row.R6: (("NEQ", "x", "c"), ("NEQ", "z", "y"), ("EQ", "cn", "y")),
    Row.R7: (("EQ", "y", "c"), ("EQ", "z", "x"), ("EQ", "cn", "c")),
    Row.R8: (("EQ", "x", "c"), ("EQ", "z", "y"), ("EQ", "cn", "c")),
}


def _xor4(f: CnfFormula, out: int, a: int, b: int, c: int) -> None:
    # out = a ^ b ^ c, eight 4-literal clauses banning odd-parity points
    lits = (out, a, b, c)
    for p in range(16):
        vals = ((p >> 3) & 1, (p >> 2) & 1, (p >> 1) & 1, p & 1)
        if vals[0] ^ vals[1] ^ vals[2] ^ vals[3]:
            f.add_clause(tuple(-l if v else l for l, v in zip(lits, vals)))


def _carry_cnf(f: CnfFormula, cn: int, c: int, x: int, y: int) -> None:
    # cn = xy ^ (x ^ y)c, the majority of (x, y, c)
    f.add_clause((cn, -c, -y))
    f.add_clause((cn, c, -x, -y))
    f.add_clause((-cn, c, x))
    f.add_clause((cn, -c, x, -y))
    f.add_clause((-cn, c, y))
    f.add_clause((cn, -c, -x, y))
    f.add_clause((-cn, x, y))


def encode_modadd_state(f: CnfFormula, x: WordVars, y: WordVars, z: WordVars,
                        c: WordVars, t: DiffTriple) -> None:
    """Clauses for z = x + y restricted to pairs following the differential.

    The carry word c is materialized for every bit even where a relation
    pins it, so groups and decoding stay uniform across rows.
    """
    n = t.n
    if not (x.n == y.n == z.n == c.n == n):
        raise ValueError("word width mismatch")
    if not xdp_valid(t):
        raise ValueError("invalid differential: no pair follows it")
    f.add_unit(-c.lit(0))
    for i in range(n):
        _xor4(f, z.lit(i), x.lit(i), y.lit(i), c.lit(i))
    for i in range(n - 1):
        row = classify_bit(t, i).row
        if row is Row.R1_Free:
            _carry_cnf(f, c.lit(i + 1), c.lit(i), x.lit(i), y.lit(i))
            continue
        env = {"x": x.lit(i), "y": y.lit(i), "z": z.lit(i),
               "c": c.lit(i), "cn": c.lit(i + 1)}
        for kind, a, b in _ROW_RELATIONS[row]:
            encode_gadget(f, kind, (env[a], env[b]))


def encode_linear(f: CnfFormula, word: WordVars, op) -> WordVars:
    """Linear layer on a state word.

    Rotations and constant XORs return re-wired literals with no new
    clauses; XOR of two variable words allocates the output.
    """
    n = word.n
    if isinstance(op, RotateRight):
        r = op.amount
        if not 0 <= r < n:
            raise ValueError("rotation amount out of range")
        bits = tuple(word.bits[(i + r) % n] for i in range(n))
        return WordVars(bits, f"{word.label}>>>{r}")
    if isinstance(op, RotateLeft):
        r = op.amount
        if not 0 <= r < n:
            raise ValueError("rotation amount out of range")
        bits = tuple(word.bits[(i - r) % n] for i in range(n))
        return WordVars(bits, f"{word.label}<<<{r}")
    if isinstance(op, XorConst):
        v = op.value
        if isinstance(v, Word):
            if v.n != n:
                raise ValueError("word width mismatch")
            k = v.bits
        else:
            k = int(v) & ((1 << n) - 1)
        bits = tuple(-b if (k >> i) & 1 else b
                     for i, b in enumerate(word.bits))
        return WordVars(bits, f"{word.label}^{k:#x}")
    if isinstance(op, XorVars):
        other = op.other
        if other.n != n:
            raise ValueError("word width mismatch")
        out = WordVars(tuple(f.new_vars(n)),
                       f"({word.label}^{other.label})")
        for i in range(n):
            encode_gadget(f, "XOR3_OUT",
                          (out.lit(i), word.lit(i), other.lit(i)))
        return out
    raise TypeError(f"unknown linear op {op!r}")
