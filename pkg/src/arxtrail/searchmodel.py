"""CNF building blocks for searching differential trails.

Everything here ranges over difference variables, not value state: validity
of each addition's differential, per-bit probability weights, global and
per-part weight bounds on sequential counters, branch-and-bound caps from
known lower-round optima, and blocking clauses that rule out recorded bad
patterns on re-search.
"""

from dataclasses import dataclass
from enum import Enum
from itertools import product

from .cnf import CnfFormula, encode_atmost_k
from .statemodel import WordVars


class WeightTag(Enum):
    DATA = "data"
    KEY = "key"


@dataclass(frozen=True)
class WeightVars:
    """One addition's weight bits: w_i = 1 iff bit i costs probability."""

    bits: tuple
    tag: WeightTag = WeightTag.DATA

    def __len__(self):
        return len(self.bits)


def _ban(f, lits, vals):
    f.add_clause(tuple(-l if v else l for l, v in zip(lits, vals)))


def encode_modadd_diff(f: CnfFormula, dx: WordVars, dy: WordVars,
                       dz: WordVars, tag: WeightTag = WeightTag.DATA,
                       group: str | None = None) -> WeightVars:
    """Differential validity of z = x + y, plus its weight bits.

    Bit 0 of the carry difference must vanish (4 clauses), and wherever the
    three difference bits agree the next carry-difference bit must follow
    them (8 clauses per position).  Each weight bit is defined by six
    clauses as the not-all-equal indicator.
    """
    n = dx.n
    if dy.n != n or dz.n != n:
        raise ValueError("word width mismatch")
    triple0 = (dx.lit(0), dy.lit(0), dz.lit(0))
    for vals in product((0, 1), repeat=3):
        if sum(vals) & 1:
            _ban(f, triple0, vals)
    for i in range(n - 1):
        low = (dx.lit(i), dy.lit(i), dz.lit(i))
        high = (dx.lit(i + 1), dy.lit(i + 1), dz.lit(i + 1))
        for vals in product((0, 1), repeat=3):
            if sum(vals) & 1:   # all-zero below forces even parity above
                f.add_clause(low + tuple(-l if v else l
                                         for l, v in zip(high, vals)))
            else:               # all-one below forces odd parity above
                f.add_clause(tuple(-l for l in low)
                             + tuple(-l if v else l
                                     for l, v in zip(high, vals)))
    wbits = f.new_vars(n - 1, group=group)
    for i, w in enumerate(wbits):
        x, y, z = dx.lit(i), dy.lit(i), dz.lit(i)
        f.add_clause((-x, z, w))
        f.add_clause((x, -z, w))
        f.add_clause((x, y, z, -w))
        f.add_clause((-x, y, w))
        f.add_clause((x, -y, w))
        f.add_clause((-x, -y, -z, -w))
    return WeightVars(tuple(wbits), tag)


@dataclass(frozen=True)
class WeightBound:
    """An installed at-most-W counter and where each round's bits end."""

    bound: int
    bits: tuple
    round_ends: tuple       # cumulative bit count after each round
    forward: tuple          # Sinz registers over bits, may be empty
    backward: tuple         # same over reversed bits, may be empty

    @property
    def rounds(self) -> int:
        return len(self.round_ends)


def encode_weight_bound(f: CnfFormula, weights, bound: int,
                        rounds=None, suffix_registers: bool = False,
                        group: str | None = None) -> WeightBound:
    """Cap the summed weight bits at `bound` with a sequential counter.

    weights: WeightVars in trail order.  rounds: parallel round index per
    entry; defaults to one round per entry.  suffix_registers additionally
    installs a reversed counter so suffix sums can be capped too.
    """
    weights = list(weights)
    if bound < 0:
        raise ValueError("negative bound")
    if rounds is None:
        rounds = list(range(len(weights)))
    if len(rounds) != len(weights):
        raise ValueError("need one round index per weight word")
    bits = []
    ends = []
    prev = None
    for w, r in zip(weights, rounds):
        if prev is not None and r != prev:
            ends.append(len(bits))
        bits.extend(w.bits)
        prev = r
    ends.append(len(bits))
    fwd = encode_atmost_k(f, bits, bound, group=group)
    bwd = ()
    if suffix_registers:
        bwd = encode_atmost_k(f, list(reversed(bits)), bound,
                              group=f"{group}-rev" if group else None)
    return WeightBound(bound, tuple(bits), tuple(ends),
                       tuple(tuple(r) for r in fwd),
                       tuple(tuple(r) for r in bwd))


def encode_split_bounds(f: CnfFormula, weights, data_bound: int,
                        total_bound: int, rounds=None):
    """The two-part cap of the good-trail search: data-side weight alone
    stays under data_bound while everything together stays under
    total_bound."""
    weights = list(weights)
    if rounds is None:
        rounds = list(range(len(weights)))
    data = [(w, r) for w, r in zip(weights, rounds) if w.tag is WeightTag.DATA]
    wb_data = encode_weight_bound(
        f, [w for w, _ in data], data_bound, rounds=[r for _, r in data])
    wb_total = encode_weight_bound(f, weights, total_bound, rounds=rounds)
    return wb_data, wb_total


def _cap(f, registers, nbits, prefix_len, cap):
    if cap < 0:
        f.mark_unsat()
        return
    if not registers or prefix_len <= 0 or prefix_len >= nbits:
        return
    if cap >= len(registers[0]):
        return
    f.add_unit(-registers[prefix_len - 1][cap])


def encode_matsui(f: CnfFormula, wb: WeightBound, bounds,
                  prefix: bool = True, suffix: bool = True) -> None:
    """Branch-and-bound caps from known optima of shorter trails.

    bounds[m] is the optimal weight of an m-round trail (bounds[0] = 0);
    unknown entries may be omitted.  For every split of the trail's rounds,
    the kept part is capped at bound - bounds[dropped rounds]: prefixes on
    the forward registers, suffixes on the reversed ones.
    """
    total = len(wb.bits)
    r_total = wb.rounds
    for j in range(r_total - 1):
        # rounds 0..j kept, r_total-1-j rounds dropped from the tail
        rem = r_total - 1 - j
        if rem < len(bounds) and bounds[rem] > 0 and prefix:
            _cap(f, wb.forward, total, wb.round_ends[j],
                 wb.bound - bounds[rem])
    for j in range(1, r_total):
        # rounds j..r_total-1 kept, first j rounds dropped
        if j < len(bounds) and bounds[j] > 0 and suffix:
            _cap(f, wb.backward, total, total - wb.round_ends[j - 1],
                 wb.bound - bounds[j])


def exclude_pattern(f: CnfFormula, fixed_bits) -> None:
    """Block one recorded assignment of difference bits.

    fixed_bits: (variable, recorded value) pairs.  The added clause demands
    at least one of them differ, so every other assignment stays intact.
    """
    clause = tuple(-v if val else v for v, val in fixed_bits)
    if not clause:
        raise ValueError("nothing to exclude")
    f.add_clause(clause)
