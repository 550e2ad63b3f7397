"""Ground-truth oracles: exhaustive enumeration, nothing clever.

These generators are deliberately independent of the analytic machinery in
the rest of the package so that tests can pit theory against enumeration.
The chained-addition counter walks plain value tables, and the trail
traversal re-implements the toy round functions on numpy arrays instead of
going through the circuit evaluator.
"""

import csv
import json
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .cma import ChainSpec, CmaSpec
from .words import DiffTriple, mask

BRUTEFORCE_XDP_MAX_N = 12
BRUTEFORCE_CMA_MAX_BITS = 28
FULL_TRAVERSAL_MAX_BLOCK = 32


def _np_dtype(n: int):
    if n <= 8:
        return np.uint8
    if n <= 16:
        return np.uint16
    return np.uint32


def bruteforce_xdp_count(t: DiffTriple) -> int:
    """Number of input pairs (x, y) whose sums differ by dz under (dx, dy)."""
    n = t.n
    if n > BRUTEFORCE_XDP_MAX_N:
        raise ValueError(f"n={n} above brute-force cap {BRUTEFORCE_XDP_MAX_N}")
    m = mask(n)
    dx, dy, dz = t.words()
    xs = np.arange(1 << n, dtype=np.uint32)
    total = 0
    for y in range(1 << n):
        z = (xs + y) & m
        z2 = ((xs ^ dx) + (y ^ dy)) & m
        total += int(np.count_nonzero((z ^ z2) == dz))
    return total


def bruteforce_xdp(t: DiffTriple) -> Fraction:
    """Exact differential probability of one addition, by enumeration."""
    return Fraction(bruteforce_xdp_count(t), 1 << (2 * t.n))


# ------------------------------------------------------ chained additions

def bruteforce_cma_count(spec) -> int:
    """Exact number of fresh-input assignments following a whole chain.

    Fresh inputs are both addends of the first addition and the second
    addend of every later one; addition s+1 consumes (z_s ^ xor) >>> rot.
    """
    chain = spec.to_chain() if isinstance(spec, CmaSpec) else spec
    if chain.input_bits > BRUTEFORCE_CMA_MAX_BITS:
        raise ValueError(f"{chain.input_bits} fresh input bits above "
                         f"brute-force cap {BRUTEFORCE_CMA_MAX_BITS}")
    n = chain.n
    m = mask(n)
    size = 1 << n

    # producer outputs, with multiplicity, over all (x, y)
    dx, dy, dz = chain.triples[0].words()
    xs = np.arange(size, dtype=np.uint32)
    outs = []
    for y in range(size):
        z = (xs + y) & m
        z2 = ((xs ^ dx) + (y ^ dy)) & m
        outs.append(z[(z ^ z2) == dz])
    zs = np.concatenate(outs) if outs else np.empty(0, np.uint32)

    us = np.arange(size, dtype=np.uint32)[None, :]
    for s in range(1, chain.additions):
        g = chain.glues[s - 1]
        du, dv = chain.triples[s].dy.bits, chain.triples[s].dz.bits
        dprev = chain.triples[s - 1].dz.bits
        r = g.rot
        a = (zs ^ g.xor) & m
        a = ((a >> r) | (a << (n - r))) & m if r else a
        a2 = ((zs ^ dprev) ^ g.xor) & m
        a2 = ((a2 >> r) | (a2 << (n - r))) & m if r else a2
        last = s == chain.additions - 1
        total = 0
        pieces = []
        for lo in range(0, len(zs), 1 << 14):
            ac, a2c = a[lo:lo + (1 << 14), None], a2[lo:lo + (1 << 14), None]
            w = (ac + us) & m
            ok = (w ^ ((a2c + (us ^ du)) & m)) == dv
            if last:
                total += int(np.count_nonzero(ok))
            else:
                pieces.append(w[ok])
        if last:
            return total
        zs = np.concatenate(pieces) if pieces else np.empty(0, np.uint32)
    return len(zs)  # single-addition chain: every satisfying pair counts


def bruteforce_cma(spec) -> Fraction:
    """Exact joint probability of a chain, by enumeration."""
    chain = spec.to_chain() if isinstance(spec, CmaSpec) else spec
    return Fraction(bruteforce_cma_count(chain), 1 << chain.input_bits)


# ------------------------------------------------------- trail traversal

@dataclass(frozen=True)
class FullTraversal:
    """Every plaintext exactly once; counts are exact integers."""

    chunk_bits: int = 22


@dataclass(frozen=True)
class Sample:
    """`pairs` plaintexts from a seeded counter-based generator (Philox)."""

    pairs: int
    seed: int = 2026
    chunk_bits: int = 22


@dataclass(frozen=True)
class EmpiricalReport:
    """Conditional per-round survival of a trail under real encryption.

    entering[r] counts the pairs that matched every round before r;
    surviving[r] those that also matched round r's difference, so each
    round's probability is conditioned on the prefix, and entering[r + 1]
    == surviving[r].
    """

    cipher: str
    rounds: int
    mode: str  # "full" or "sample"
    pairs_tested: int
    entering: tuple
    surviving: tuple

    @property
    def per_round_log2(self) -> tuple:
        """-log2 of each round's conditional probability.

        math.inf marks a round no pair survived; a round no pair even
        entered reports None (nothing was measured).
        """
        out = []
        for ent, sur in zip(self.entering, self.surviving):
            if ent == 0:
                out.append(None)
            elif sur == 0:
                out.append(math.inf)
            else:
                out.append(math.log2(ent / sur))
        return tuple(out)

    @property
    def total_log2(self):
        if self.surviving and self.surviving[-1]:
            return math.log2(self.pairs_tested / self.surviving[-1])
        return math.inf

    def table(self, independent=None, refined=None) -> list:
        """Rows of round / independent / refined / empirical weights."""
        emp = self.per_round_log2
        rows = []
        for r in range(self.rounds):
            rows.append({
                "round": r,
                "independent": None if independent is None
                else independent[r],
                "refined": None if refined is None else refined[r],
                "empirical": emp[r],
            })
        return rows

    def to_json(self, independent=None, refined=None) -> dict:
        return {
            "format": "arxtrail.empirical/1",
            "cipher": self.cipher,
            "rounds": self.rounds,
            "mode": self.mode,
            "pairs_tested": self.pairs_tested,
            "entering": list(self.entering),
            "surviving": list(self.surviving),
            "total_log2": self.total_log2,
            "per_round": self.table(independent, refined),
        }


def write_report_csv(report: EmpiricalReport, path,
                     independent=None, refined=None):
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, ("round", "independent", "refined",
                                "empirical"))
        w.writeheader()
        w.writerows(report.table(independent, refined))


def write_report_json(report: EmpiricalReport, path,
                      independent=None, refined=None):
    with open(path, "w") as fh:
        json.dump(report.to_json(independent, refined), fh, indent=1)
        fh.write("\n")


def _rot_amount(circuit, wire: str) -> int:
    for op in circuit.ops:
        if op.out == wire:
            return op.right
    raise ValueError(f"circuit {circuit.name!r} has no wire {wire!r}")


def _chaskey_stepper(circuit):
    n = circuit.n
    m = _np_dtype(n)(mask(n)) if n < 32 else np.uint32(mask(n))
    half = n - _rot_amount(circuit, "w0_0")
    ra = n - _rot_amount(circuit, "a1_0")
    rb = n - _rot_amount(circuit, "a3_0")
    rc = n - _rot_amount(circuit, "b3_0")
    rd = n - _rot_amount(circuit, "b1_0")

    def rl(v, r):
        return (((v << r) & m) | (v >> (n - r))) if r else v

    def step(state, rnd):
        v0, v1, v2, v3 = state
        s0 = (v0 + v1) & m
        w0 = rl(s0, half)
        w1 = rl(v1, ra) ^ s0
        w2 = (v2 + v3) & m
        w3 = rl(v3, rb) ^ w2
        v0 = (w0 + w3) & m
        v3 = rl(w3, rc) ^ v0
        s3 = (w2 + w1) & m
        return v0, rl(w1, rd) ^ s3, rl(s3, half), v3

    return step


def _speck_toy_stepper(circuit):
    n = circuit.n
    m = _np_dtype(n)(mask(n)) if n < 32 else np.uint32(mask(n))
    alpha = _rot_amount(circuit, "xa0")
    beta = n - _rot_amount(circuit, "yb0")

    def step(state, rnd):
        x, y = state
        x = ((x >> alpha) | ((x << (n - alpha)) & m))
        x = ((x + y) & m) ^ _np_dtype(n)(rnd)
        y = ((y << beta) & m) | (y >> (n - beta))
        return x, y ^ x

    return step


_TRAIL_COLUMNS = {"chaskey": ("v0", "v1", "v2", "v3"), "speck_toy": ("x", "y")}


def empirical_trail(circuit, trail, mode=FullTraversal()) -> EmpiricalReport:
    """Measure a toy trail's conditional per-round survival by encryption."""
    if circuit.family not in _TRAIL_COLUMNS:
        raise ValueError(f"no traversal for family {circuit.family!r}")
    cols = _TRAIL_COLUMNS[circuit.family]
    n, nw = circuit.n, len(cols)
    rounds = trail.rounds
    block = nw * n
    diffs = [tuple(row[c].bits for c in cols) for row in trail.rows]
    step = (_chaskey_stepper if circuit.family == "chaskey"
            else _speck_toy_stepper)(circuit)
    dt = _np_dtype(n)
    m = mask(n)

    if isinstance(mode, FullTraversal):
        if block > FULL_TRAVERSAL_MAX_BLOCK:
            raise ValueError(f"block size {block} above full-traversal cap "
                             f"{FULL_TRAVERSAL_MAX_BLOCK}")
        total = 1 << block
        chunk = 1 << min(mode.chunk_bits, block)

        def chunks():
            for lo in range(0, total, chunk):
                idx = np.arange(lo, lo + chunk, dtype=np.uint64)
                yield tuple(((idx >> (w * n)) & np.uint64(m)).astype(dt)
                            for w in range(nw))
        label, tested = "full", total
    elif isinstance(mode, Sample):
        rng = np.random.Generator(np.random.Philox(mode.seed))
        chunk = 1 << mode.chunk_bits

        def chunks():
            left = mode.pairs
            while left > 0:
                take = min(left, chunk)
                yield tuple(rng.integers(0, 1 << n, size=take, dtype=np.uint64)
                            .astype(dt) for _ in range(nw))
                left -= take
        label, tested = "sample", mode.pairs
    else:
        raise TypeError(f"unknown traversal mode {mode!r}")

    entering = [0] * rounds
    surviving = [0] * rounds
    for state in chunks():
        pair = tuple(v ^ dt(d) for v, d in zip(state, diffs[0]))
        for r in range(rounds):
            alive = len(state[0])
            if alive == 0:
                break
            entering[r] += alive
            state = step(state, r)
            pair = step(pair, r)
            ok = np.ones(alive, dtype=bool)
            for v, vp, d in zip(state, pair, diffs[r + 1]):
                ok &= (v ^ vp) == dt(d)
            state = tuple(v[ok] for v in state)
            pair = tuple(v[ok] for v in pair)
            surviving[r] += len(state[0])
    return EmpiricalReport(circuit.name, rounds, label, tested,
                           tuple(entering), tuple(surviving))
