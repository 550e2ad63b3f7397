"""CNF formula builder, boolean gadget encodings, cardinality, DIMACS I/O.

Variables are dense positive integers handed out monotonically.  Named
groups record which variables carry meaning for callers (projection for
counting, model decoding). A literal is a non-zero signed variable index.
"""

from dataclasses import dataclass, field

GADGETS = ("EQ", "NEQ", "XOR3_OUT", "AND_OUT")


@dataclass
class CnfFormula:
    var_count: int = 0
    clauses: list = field(default_factory=list)
    groups: dict = field(default_factory=dict)

    def new_var(self) -> int:
        self.var_count += 1
        return self.var_count

    def new_vars(self, k: int, group: str | None = None) -> list[int]:
        vs = [self.new_var() for _ in range(k)]
        if group is not None:
            self.add_group(group, vs)
        return vs

    def add_group(self, name: str, variables) -> None:
        if name in self.groups:
            raise ValueError(f"group {name!r} already defined")
        self.groups[name] = tuple(variables)

    def add_clause(self, lits) -> None:
        lits = tuple(lits)
        for lit in lits:
            if lit == 0 or abs(lit) > self.var_count:
                raise ValueError(f"literal {lit} out of range (var_count={self.var_count})")
        self.clauses.append(lits)

    def add_unit(self, lit: int) -> None:
        self.add_clause((lit,))

    def fix_bit(self, var: int, value: int) -> None:
        self.add_unit(var if value else -var)

    def mark_unsat(self) -> None:
        """Record an explicit empty clause (used when a model is known impossible)."""
        self.clauses.append(())


def encode_gadget(f: CnfFormula, kind: str, literals) -> None:
    """Append the clause set of one primitive boolean relation.

    EQ(a,b): a = b.  NEQ(a,b): a != b.  XOR3_OUT(g,a,b): g = a xor b.
    AND_OUT(g,a,b): g = a and b.  Arguments are literals, so negated
    wirings come for free.
    """
    lits = tuple(literals)
    if kind == "EQ":
        if len(lits) != 2:
            raise ValueError("EQ takes 2 literals")
        a, b = lits
        f.add_clause((-a, b))
        f.add_clause((a, -b))
    elif kind == "NEQ":
        if len(lits) != 2:
            raise ValueError("NEQ takes 2 literals")
        a, b = lits
        f.add_clause((-a, -b))
        f.add_clause((a, b))
    elif kind == "XOR3_OUT":
        if len(lits) != 3:
            raise ValueError("XOR3_OUT takes 3 literals (g, a, b)")
        g, a, b = lits
        f.add_clause((-a, b, g))
        f.add_clause((a, b, -g))
        f.add_clause((a, -b, g))
        f.add_clause((-a, -b, -g))
    elif kind == "AND_OUT":
        if len(lits) != 3:
            raise ValueError("AND_OUT takes 3 literals (g, a, b)")
        g, a, b = lits
        f.add_clause((-g, a))
        f.add_clause((-g, b))
        f.add_clause((g, -a, -b))
    else:
        raise ValueError(f"unknown gadget kind {kind!r}, expected one of {GADGETS}")


def encode_atmost_k(f: CnfFormula, lits, k: int, group: str | None = None):
    """Sequential-counter at-most-k over the given literals.

    Returns the register matrix s where s[t][j] (t = 0..m-2, j = 0..k-1)
    is forced true whenever at least j+1 of the first t+1 literals hold.
    Registers are one-directional: a partial sum can be capped at B by
    asserting -s[t][B], which is how search bounds hook in.
    """
    lits = list(lits)
    m = len(lits)
    if k < 0:
        raise ValueError("negative bound")
    if k == 0:
        for lit in lits:
            f.add_clause((-lit,))
        return []
    if k >= m:
        return []
    s = [[f.new_var() for _ in range(k)] for _ in range(m - 1)]
    if group is not None:
        f.add_group(group, [v for row in s for v in row])
    f.add_clause((-lits[0], s[0][0]))
    for j in range(1, k):
        f.add_clause((-s[0][j],))
    for t in range(1, m - 1):
        f.add_clause((-lits[t], s[t][0]))
        f.add_clause((-s[t - 1][0], s[t][0]))
        for j in range(1, k):
            f.add_clause((-lits[t], -s[t - 1][j - 1], s[t][j]))
            f.add_clause((-s[t - 1][j], s[t][j]))
        f.add_clause((-lits[t], -s[t - 1][k - 1]))
    f.add_clause((-lits[m - 1], -s[m - 2][k - 1]))
    return s


def emit_dimacs(f: CnfFormula) -> str:
    """Serialize to DIMACS CNF; groups ride along as structured comments."""
    lines = [f"p cnf {f.var_count} {len(f.clauses)}"]
    for name in sorted(f.groups):
        vs = " ".join(str(v) for v in f.groups[name])
        lines.append(f"c group {name} {vs}".rstrip())
    for clause in f.clauses:
        lines.append(" ".join(str(lit) for lit in clause) + " 0" if clause else "0")
    return "\n".join(lines)


def parse_dimacs(text: str) -> CnfFormula:
    """Inverse of emit_dimacs; tolerant of plain solver-style DIMACS."""
    f = CnfFormula()
    declared = None
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("c"):
            parts = line.split()
            if len(parts) >= 3 and parts[1] == "group":
                f.groups[parts[2]] = tuple(int(v) for v in parts[3:])
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ValueError(f"bad DIMACS header: {line!r}")
            f.var_count = int(parts[2])
            declared = int(parts[3])
            continue
        nums = [int(tok) for tok in line.split()]
        if nums[-1] != 0:
            raise ValueError(f"clause not 0-terminated: {line!r}")
        f.clauses.append(tuple(nums[:-1]))
    if declared is not None and declared != len(f.clauses):
        raise ValueError(f"header declares {declared} clauses, found {len(f.clauses)}")
    return f
