"""Tiny exhaustive helpers shared by the test modules (no cleverness)."""

from itertools import product


def clause_satisfied(clause, assignment):
    """assignment: dict var -> 0/1."""
    return any(
        (assignment[abs(lit)] == 1) == (lit > 0) for lit in clause
    ) if clause else False


def formula_satisfied(f, assignment):
    return all(clause_satisfied(c, assignment) for c in f.clauses)


def all_models(f, max_vars=22):
    """Yield every satisfying total assignment; formula must be small."""
    if f.var_count > max_vars:
        raise ValueError(f"{f.var_count} variables is too many for exhaustion")
    variables = list(range(1, f.var_count + 1))
    for values in product((0, 1), repeat=f.var_count):
        assignment = dict(zip(variables, values))
        if formula_satisfied(f, assignment):
            yield assignment


def count_projected(f, projection, max_vars=22):
    """Number of distinct projections of satisfying assignments."""
    seen = set()
    for m in all_models(f, max_vars=max_vars):
        seen.add(tuple(m[v] for v in projection))
    return len(seen)


# ---------------------------------------------------------------------------
# brute-force differential oracles (numpy, word sizes <= 8 or so)

import numpy as np


def satisfying_z_values(t):
    """Outputs z = x + y over every input pair following the differential.

    Returns a numpy array with multiplicity: one entry per satisfying
    (x, y).  Empty for an impossible differential.
    """
    n = t.n
    m = (1 << n) - 1
    xs = np.arange(1 << n, dtype=np.uint32)
    x = xs[:, None]
    y = xs[None, :]
    z = (x + y) & m
    z2 = ((x ^ t.dx.bits) + (y ^ t.dy.bits)) & m
    return z[(z2 ^ z) == t.dz.bits]


def biased_bits(z_values, n):
    """Bits whose value, given the lower output bits, is not a fair coin.

    A bit counts as biased when some value of the bits below it has support
    and splits the bit's value unevenly.
    """
    out = set()
    zs = z_values.astype(np.int64)
    for i in range(n):
        key = ((zs & ((1 << i) - 1)) << 1) | ((zs >> i) & 1)
        cnt = np.bincount(key, minlength=1 << (i + 1))
        zeros, ones = cnt[0::2], cnt[1::2]
        support = (zeros + ones) > 0
        if np.any(zeros[support] != ones[support]):
            out.add(i)
    return out


def _rotr_arr(v, r, n):
    m = (1 << n) - 1
    r %= n
    if r == 0:
        return v & m
    return ((v >> r) | (v << (n - r))) & m


def joint_pair_count(m1, m2, rot=0, xor_const=0):
    """Count (x, y, u) where both additions follow their differentials.

    The first addition computes z = x + y; the second consumes
    w = (z ^ xor_const) >>> rot as its first input and computes v = w + u.
    m2 is given in the consumer's indexing (m2.dx == m1.dz >>> rot).
    """
    n = m1.n
    m = (1 << n) - 1
    xs = np.arange(1 << n, dtype=np.int64)
    x = xs[:, None, None]
    y = xs[None, :, None]
    u = xs[None, None, :]
    z = (x + y) & m
    ok1 = (((x ^ m1.dx.bits) + (y ^ m1.dy.bits)) & m) ^ z == m1.dz.bits
    w = _rotr_arr(z ^ xor_const, rot, n)
    v = (w + u) & m
    v2 = ((w ^ m2.dx.bits) + (u ^ m2.dy.bits)) & m
    ok2 = (v ^ v2) == m2.dz.bits
    return int(np.count_nonzero(ok1 & ok2))


def _unit_propagate(clauses, assign):
    changed = True
    while changed:
        changed = False
        for cl in clauses:
            sat = False
            last = None
            free = 0
            for lit in cl:
                v = abs(lit)
                if v in assign:
                    if assign[v] == (lit > 0):
                        sat = True
                        break
                else:
                    free += 1
                    last = lit
            if sat:
                continue
            if free == 0:
                return None
            if free == 1:
                assign[abs(last)] = last > 0
                changed = True
    return assign


def dpll_models(f):
    """Every satisfying assignment of a CnfFormula, as dict var -> bool.

    Plain recursive search with unit propagation; an oracle for toy-sized
    models, independent of the package's own enumeration code.
    """
    n = f.var_count

    def rec(assign):
        assign = _unit_propagate(f.clauses, assign)
        if assign is None:
            return
        pick = None
        for v in range(1, n + 1):
            if v not in assign:
                pick = v
                break
        if pick is None:
            yield assign
            return
        for val in (False, True):
            a2 = dict(assign)
            a2[pick] = val
            yield from rec(a2)

    yield from rec({})


def dpll_count(f):
    return sum(1 for _ in dpll_models(f))


def decode_word(model, wv):
    """Integer value of a WordVars under a model (negative lits invert)."""
    out = 0
    for i, lit in enumerate(wv.bits):
        bit = model[abs(lit)] ^ (lit < 0)
        out |= int(bit) << i
    return out


def chain_count(triples, glues, n):
    """#Inputs following every differential of a glued addition chain.

    Direct numpy sweep over all packed fresh inputs (x, y, u_2..u_k);
    glue s is (rot, xor) applied to addition s's output.
    """
    m = (1 << n) - 1
    k = len(triples)
    idx = np.arange(1 << ((k + 1) * n), dtype=np.int64)
    x = idx & m
    y = (idx >> n) & m
    z = (x + y) & m
    t = triples[0]
    ok = ((((x ^ t.dx.bits) + (y ^ t.dy.bits)) & m) ^ z) == t.dz.bits
    for s in range(1, k):
        rot, xor = glues[s - 1]
        w = z ^ (xor & m)
        if rot:
            w = ((w >> rot) | (w << (n - rot))) & m
        u = (idx >> ((s + 1) * n)) & m
        t = triples[s]
        z = (w + u) & m
        ok &= ((((w ^ t.dx.bits) + (u ^ t.dy.bits)) & m) ^ z) == t.dz.bits
    return int(ok.sum())
