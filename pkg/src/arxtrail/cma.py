"""Validity and exact probability of consecutive modular additions.

One addition's output feeds the next through rotation/XOR glue, so their
carry chains interact and per-addition weights stop being additive.  This
module answers two questions about such a pair (or a longer chain) under
fixed differences: can any state follow it at all, and with what exact
probability over uniform fresh inputs.

Counting backends, in default order: a carry-state transfer pass that
scans bit columns once and sums exact integers (any word size), the
enumeration/counter machinery from backends, and optionally a bit-sliced
model with the unconstrained top rescaled away.
"""

import math
import time
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .analysis import (
    Side,
    adjacency_vectors,
    align_output_vectors,
    detect_adjacent_conflict,
    detect_nonindep_positions,
    output_constraints,
)
from .backends import CountResult, count_models, solve_sat
from .cnf import CnfFormula
from .statemodel import RotateRight, XorConst, alloc_word, encode_linear, encode_modadd_state
from .words import DiffTriple, Row, Word, classify_bit, mask, xdp_valid, xdp_weight


@dataclass(frozen=True)
class Glue:
    """w = (z ^ xor) >>> rot.  Differences only feel the rotation."""

    rot: int = 0
    xor: int = 0

    def map_diff(self, w: Word) -> Word:
        return w.rotr(self.rot)

    def map_value(self, w: Word) -> Word:
        return Word(w.bits ^ (self.xor & mask(w.n)), w.n).rotr(self.rot)


IDENTITY = Glue(0, 0)


def _check_link(n, prev, glue, nxt, what):
    if prev.n != n or nxt.n != n:
        raise ValueError("word width mismatch")
    if not 0 <= glue.rot < n:
        raise ValueError("rotation amount out of range")
    if nxt.dx != glue.map_diff(prev.dz):
        raise ValueError(
            f"alignment mismatch: {what} input difference must be the glued "
            "output difference of the previous addition")


@dataclass(frozen=True)
class CmaSpec:
    n: int
    m1: DiffTriple
    glue: Glue
    m2: DiffTriple

    def __post_init__(self):
        _check_link(self.n, self.m1, self.glue, self.m2, "consumer")

    def to_chain(self):
        return ChainSpec(self.n, (self.m1, self.m2), (self.glue,))

    def nonindep_positions(self):
        r = self.glue.rot
        m1r = DiffTriple(self.m1.dx.rotr(r), self.m1.dy.rotr(r),
                         self.m1.dz.rotr(r))
        return detect_nonindep_positions(m1r, self.m2)


@dataclass(frozen=True)
class ChainSpec:
    """k additions in a row; addition s+1's first input is the glued
    output of addition s.  Fresh inputs: both words of the first addition
    and the second word of every later one."""

    n: int
    triples: tuple
    glues: tuple

    def __post_init__(self):
        if len(self.glues) != len(self.triples) - 1:
            raise ValueError("need one glue per consecutive pair")
        for i, g in enumerate(self.glues):
            _check_link(self.n, self.triples[i], g, self.triples[i + 1],
                        f"addition {i + 1}")

    @property
    def additions(self) -> int:
        return len(self.triples)

    @property
    def input_bits(self) -> int:
        return (self.additions + 1) * self.n


# ------------------------------------------------------------ value model


def build_chain_model(chain: ChainSpec):
    """Joint CNF over all additions; group "inputs" holds the fresh words."""
    n = chain.n
    f = CnfFormula()
    x = alloc_word(f, n, "x")
    y = alloc_word(f, n, "y")
    z = alloc_word(f, n, "z1")
    c = alloc_word(f, n, "c1")
    encode_modadd_state(f, x, y, z, c, chain.triples[0])
    inputs = list(x.bits) + list(y.bits)
    prev = z
    for s in range(1, chain.additions):
        g = chain.glues[s - 1]
        w = encode_linear(f, prev, XorConst(g.xor))
        w = encode_linear(f, w, RotateRight(g.rot))
        u = alloc_word(f, n, f"u{s + 1}")
        v = alloc_word(f, n, f"z{s + 1}")
        d = alloc_word(f, n, f"c{s + 1}")
        encode_modadd_state(f, w, u, v, d, chain.triples[s])
        inputs += list(u.bits)
        prev = v
    f.add_group("inputs", inputs)
    return f


def build_cma_model(spec: CmaSpec):
    return build_chain_model(spec.to_chain())


# -------------------------------------------------- exact transfer counting


def _maj(a, b, c):
    return (a & b) | (a & c) | (b & c)


def _transfer_count(chain: ChainSpec) -> int:
    """Exact #inputs following every differential, via one column scan.

    State carries two carry bits per addition (the pair's two carry
    chains).  A rotated addition starts mid-word, so its cut carries are
    guessed, checked to be zero where its bit 0 comes up, and matched
    against the guess after the wrap.
    """
    n = chain.n
    k = chain.additions
    rot_acc = [0] * k
    for s in range(1, k):
        rot_acc[s] = (rot_acc[s - 1] + chain.glues[s - 1].rot) % n
    dx = [t.dx.bits for t in chain.triples]
    dy = [t.dy.bits for t in chain.triples]
    dc = [t.dx.bits ^ t.dy.bits ^ t.dz.bits for t in chain.triples]
    kc = [g.xor & mask(n) for g in chain.glues]
    cuts = [s for s in range(1, k) if rot_acc[s] != 0]
    rem_pos = {s: 2 * k + 2 * i for i, s in enumerate(cuts)}
    carry_mask = (1 << (2 * k)) - 1

    states = {0: 1}
    for s in cuts:
        grown = {}
        for st, cnt in states.items():
            for guess in range(4):
                grown[st | guess << (2 * s) | guess << rem_pos[s]] = cnt
        states = grown

    ncombo = 1 << (k + 1)
    for t in range(n):
        bits = [(t - rot_acc[s]) % n for s in range(k)]
        # crossing an addition's word boundary: its carry out of the MSB
        # is unconstrained, and the carry into bit 0 is zero by definition
        for s in cuts:
            if bits[s] == 0:
                clear = ~(3 << (2 * s))
                merged = {}
                for st, cnt in states.items():
                    ns = st & clear
                    merged[ns] = merged.get(ns, 0) + cnt
                states = merged
        # pair-following check: carry difference equals dc at this bit
        want = 0
        for s in range(k):
            want |= ((dc[s] >> bits[s]) & 1) << s
        keep = {}
        for st, cnt in states.items():
            got = 0
            for s in range(k):
                got |= (((st >> (2 * s)) ^ (st >> (2 * s + 1))) & 1) << s
            if got == want:
                keep[st] = cnt
        states = keep
        if not states:
            return 0

        dxb = [(dx[s] >> bits[s]) & 1 for s in range(k)]
        dyb = [(dy[s] >> bits[s]) & 1 for s in range(k)]
        kb = [(kc[s] >> bits[s]) & 1 for s in range(k - 1)]
        table = []
        for carry in range(1 << (2 * k)):
            row = []
            for combo in range(ncombo):
                z_prev = 0
                out = 0
                for s in range(k):
                    c0 = (carry >> (2 * s)) & 1
                    c1 = (carry >> (2 * s + 1)) & 1
                    if s == 0:
                        a, b = combo & 1, (combo >> 1) & 1
                    else:
                        a = z_prev ^ kb[s - 1]
                        b = (combo >> (s + 1)) & 1
                    z_prev = a ^ b ^ c0
                    out |= _maj(a, b, c0) << (2 * s)
                    out |= _maj(a ^ dxb[s], b ^ dyb[s], c1) << (2 * s + 1)
                row.append(out)
            table.append(row)

        nxt = {}
        for st, cnt in states.items():
            high = st & ~carry_mask
            row = table[st & carry_mask]
            for combo in range(ncombo):
                ns = high | row[combo]
                nxt[ns] = nxt.get(ns, 0) + cnt
        states = nxt

    total = 0
    for st, cnt in states.items():
        if all((st >> (2 * s)) & 3 == (st >> rem_pos[s]) & 3 for s in cuts):
            total += cnt
    return total


# ------------------------------------------------------ vector enumeration


def _chain_bulk_eval(chain: ChainSpec):
    """Packed-input evaluator for the enumeration backend.

    Bit layout of an index: word 0 = x, word 1 = y, word s+1 = fresh input
    of addition s (matching the "inputs" group order).
    """
    n = chain.n
    m = mask(n)

    def evaluate(idx):
        idx = idx.astype(np.int64)
        x = idx & m
        y = (idx >> n) & m
        z = (x + y) & m
        ok = ((((x ^ chain.triples[0].dx.bits)
                + (y ^ chain.triples[0].dy.bits)) & m) ^ z) \
            == chain.triples[0].dz.bits
        for s in range(1, chain.additions):
            g = chain.glues[s - 1]
            w = z ^ (g.xor & m)
            if g.rot:
                w = ((w >> g.rot) | (w << (n - g.rot))) & m
            u = (idx >> ((s + 1) * n)) & m
            t = chain.triples[s]
            z = (w + u) & m
            ok &= ((((w ^ t.dx.bits) + (u ^ t.dy.bits)) & m) ^ z) == t.dz.bits
        return ok

    return evaluate


# ------------------------------------------------------------- validation


class CmaVerdict(Enum):
    VALID_CONFIRMED = "ValidConfirmed"
    INVALID_CONFLICT = "InvalidConflict"
    INVALID_BY_SAT = "InvalidBySat"


@dataclass(frozen=True)
class CmaValidation:
    verdict: CmaVerdict
    conflict_bits: tuple = ()
    records: tuple = ()
    backend: str | None = None
    elapsed: float = 0.0

    @property
    def valid(self) -> bool:
        return self.verdict is CmaVerdict.VALID_CONFIRMED


def conflict_vector(spec: CmaSpec):
    """Theorem-4 style adjacent-constraint clash, in the consumer frame."""
    out = align_output_vectors(
        adjacency_vectors(spec.m1, Side.OUTPUT),
        spec.glue.rot, Word(spec.glue.xor & mask(spec.n), spec.n))
    return detect_adjacent_conflict(out, adjacency_vectors(spec.m2, Side.INPUT))


def cma_validate(spec: CmaSpec, config=None,
                 force_backend=None) -> CmaValidation:
    start = time.monotonic()
    if not (xdp_valid(spec.m1) and xdp_valid(spec.m2)):
        return CmaValidation(CmaVerdict.INVALID_BY_SAT, backend="arith",
                             elapsed=time.monotonic() - start)
    q, records = conflict_vector(spec)
    if q.bits:
        positions = tuple(i for i in range(spec.n) if q.bit(i))
        return CmaValidation(CmaVerdict.INVALID_CONFLICT, positions, records,
                             backend="conflict",
                             elapsed=time.monotonic() - start)
    f = build_cma_model(spec)
    r = solve_sat(f, config=config, force_backend=force_backend)
    verdict = CmaVerdict.VALID_CONFIRMED if r.is_sat \
        else CmaVerdict.INVALID_BY_SAT
    return CmaValidation(verdict, backend=r.backend,
                         elapsed=time.monotonic() - start)


# ------------------------------------------------------------- probability


@dataclass(frozen=True)
class CmaProbability:
    count: int
    input_bits: int
    first_weight: int
    independent_weight: int | None
    backend: str
    elapsed: float

    @property
    def joint_log2(self) -> float:
        if self.count <= 0:
            return float("-inf")
        return math.log2(self.count) - self.input_bits

    @property
    def conditional_log2(self) -> float:
        """log2 Pr(rest of the chain | first addition's differential)."""
        return self.joint_log2 + self.first_weight

    @property
    def independent_log2(self) -> float:
        if self.independent_weight is None:
            return float("-inf")
        return -float(self.independent_weight)


def _independent_weight(triples):
    total = 0
    for t in triples:
        w = xdp_weight(t)
        if w is None:
            return None
        total += w
    return total


def chain_joint_prob(chain: ChainSpec, config=None,
                     method: str | None = None) -> CmaProbability:
    """Exact joint probability of the whole chain over uniform inputs.

    method: "dp" (default) = transfer counting; "enum" = enumeration via
    the backends module; "external" = external model counter on the CNF.
    """
    start = time.monotonic()
    if method in (None, "dp"):
        count = _transfer_count(chain)
        backend = "transfer-dp"
    elif method == "enum":
        f = build_chain_model(chain)
        r = count_models(f, projection="inputs", config=config,
                         bulk_eval=_chain_bulk_eval(chain))
        count, backend = r.count, r.backend
    elif method == "external":
        f = build_chain_model(chain)
        r = count_models(f, projection="inputs", config=config,
                         force_backend="external")
        count, backend = r.count, r.backend
    else:
        raise ValueError(f"unknown counting method {method!r}")
    w1 = xdp_weight(chain.triples[0])
    return CmaProbability(
        count=count, input_bits=chain.input_bits,
        first_weight=0 if w1 is None else w1,
        independent_weight=_independent_weight(chain.triples),
        backend=backend, elapsed=time.monotonic() - start)


def cma_joint_prob(spec: CmaSpec, config=None,
                   method: str | None = None) -> CmaProbability:
    return chain_joint_prob(spec.to_chain(), config=config, method=method)


# ----------------------------------------------------------------- pruning


@dataclass(frozen=True)
class PrunedCma:
    spec: CmaSpec
    producer_high: int        # highest retained producer bit, -1 = none
    consumer_high: int
    free_bits: int            # rescale exponent for the pruned top
    sliced: bool              # False: glue wraps, no pruning applied

    @property
    def producer_retained(self) -> tuple:
        return tuple(range(self.producer_high + 1))

    @property
    def producer_pruned(self) -> tuple:
        return tuple(range(self.producer_high + 1, self.spec.n))

    @property
    def consumer_retained(self) -> tuple:
        return tuple(range(self.consumer_high + 1))

    @property
    def consumer_pruned(self) -> tuple:
        return tuple(range(self.consumer_high + 1, self.spec.n))


def prune_bits(spec: CmaSpec) -> PrunedCma:
    """Cut away the unconstrained top of the joint model.

    Retains the low slices reachable from any carry-linking constraint:
    producer bits where the output is tied to its own carry (rows 3/4,
    whole chain down to its ground) and consumer bits where the shared
    input is tied to the consumer carry (rows 6/8, likewise).  Everything
    above rescales by one factor of 2 per fresh input bit minus one per
    cut weight bit, which count_pruned applies.
    """
    n = spec.n
    hp = -1
    if xdp_valid(spec.m1):
        for desc in output_constraints(spec.m1):
            if desc.carry_linked:
                hp = max(hp, desc.bit)
    hc = -1
    for j in range(n - 1):
        if classify_bit(spec.m2, j).row in (Row.R6, Row.R8):
            hc = max(hc, j)
    sliced = True
    if hc >= 0 and spec.glue.rot + hc > n - 1:
        # consumer slice would wrap around the producer word
        hp = hc = n - 1
        sliced = False
    else:
        hp = max(hp, spec.glue.rot + hc if hc >= 0 else -1)

    def bit_weight(t, i):
        return 1 if i <= n - 2 and classify_bit(t, i).row is not Row.R1_Free \
            else 0

    free = 0
    for i in range(hp + 1, n):
        free += 2 - bit_weight(spec.m1, i)
    for j in range(hc + 1, n):
        free += 1 - bit_weight(spec.m2, j)
    return PrunedCma(spec, hp, hc, free, sliced)


def _sliced_count(spec: CmaSpec, hp: int, hc: int) -> int:
    """Transfer count over the retained prefixes only (no glue wrap)."""
    n = spec.n
    r = spec.glue.rot
    kc = spec.glue.xor & mask(n)
    dc1 = spec.m1.dx.bits ^ spec.m1.dy.bits ^ spec.m1.dz.bits
    dc2 = spec.m2.dx.bits ^ spec.m2.dy.bits ^ spec.m2.dz.bits
    dx1, dy1 = spec.m1.dx.bits, spec.m1.dy.bits
    dx2, dy2 = spec.m2.dx.bits, spec.m2.dy.bits
    states = {0: 1}   # bits: c, c', d, d'
    for t in range(hp + 1):
        j = t - r
        active = 0 <= j <= hc
        keep = {}
        for st, cnt in states.items():
            if ((st ^ (st >> 1)) & 1) != ((dc1 >> t) & 1):
                continue
            if active and (((st >> 2) ^ (st >> 3)) & 1) != ((dc2 >> j) & 1):
                continue
            keep[st] = cnt
        states = keep
        if not states:
            return 0
        nxt = {}
        for st, cnt in states.items():
            c0, c1 = st & 1, (st >> 1) & 1
            d0, d1 = (st >> 2) & 1, (st >> 3) & 1
            for xy in range(4):
                a, b = xy & 1, (xy >> 1) & 1
                z = a ^ b ^ c0
                nc = _maj(a, b, c0) | _maj(a ^ ((dx1 >> t) & 1),
                                           b ^ ((dy1 >> t) & 1), c1) << 1
                if active:
                    w = z ^ ((kc >> t) & 1)
                    for u in range(2):
                        nd = _maj(w, u, d0) << 2 \
                            | _maj(w ^ ((dx2 >> j) & 1),
                                   u ^ ((dy2 >> j) & 1), d1) << 3
                        ns = nc | nd
                        nxt[ns] = nxt.get(ns, 0) + cnt
                else:
                    ns = nc | (st & 0b1100)
                    nxt[ns] = nxt.get(ns, 0) + cnt
        states = nxt
    # boundary: the top retained rows constrain the carry difference into
    # the first pruned bit, so check it before summing
    total = 0
    for st, cnt in states.items():
        if hp + 1 <= n - 1 and ((st ^ (st >> 1)) & 1) != ((dc1 >> (hp + 1)) & 1):
            continue
        if 0 <= hc and hc + 1 <= n - 1 \
                and (((st >> 2) ^ (st >> 3)) & 1) != ((dc2 >> (hc + 1)) & 1):
            continue
        total += cnt
    return total


def count_pruned(pm: PrunedCma) -> CountResult:
    """Full-model count recovered from the pruned slice."""
    start = time.monotonic()
    if not pm.sliced:
        n = _transfer_count(pm.spec.to_chain())
        return CountResult(n, "transfer-dp", time.monotonic() - start)
    part = _sliced_count(pm.spec, pm.producer_high, pm.consumer_high)
    return CountResult(part << pm.free_bits, "transfer-dp-pruned",
                       time.monotonic() - start)


# ------------------------------------------------------------------ report


def _fin(x):
    return None if x is None or math.isinf(x) else round(x, 4)


def cma_report(spec: CmaSpec, config=None) -> dict:
    """One JSON-able record: differences, verdict, positions, probabilities."""
    val = cma_validate(spec, config=config)
    out = {
        "n": spec.n,
        "m1": {"dx": spec.m1.dx.to_hex(), "dy": spec.m1.dy.to_hex(),
               "dz": spec.m1.dz.to_hex()},
        "glue": {"rot": spec.glue.rot, "xor": hex(spec.glue.xor)},
        "m2": {"dx": spec.m2.dx.to_hex(), "dy": spec.m2.dy.to_hex(),
               "dz": spec.m2.dz.to_hex()},
        "verdict": val.verdict.value,
        "conflict_bits": list(val.conflict_bits),
        "conflict_windows": [list(r.window) for r in val.records],
        "nonindep_positions": sorted(spec.nonindep_positions()),
        "validate_backend": val.backend,
        "validate_seconds": round(val.elapsed, 6),
    }
    w1, w2 = xdp_weight(spec.m1), xdp_weight(spec.m2)
    out["independent_weight"] = None if w1 is None or w2 is None else w1 + w2
    if val.valid:
        prob = cma_joint_prob(spec, config=config)
        out.update({
            "count": prob.count,
            "joint_log2": _fin(prob.joint_log2),
            "conditional_log2": _fin(prob.conditional_log2),
            "count_backend": prob.backend,
            "count_seconds": round(prob.elapsed, 6),
        })
    else:
        out.update({"count": 0, "joint_log2": None,
                    "conditional_log2": None})
    return out
