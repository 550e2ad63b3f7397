"""Straight-line circuits for the analyzed ARX primitives.

A circuit is a flat list of word operations over named wires: modular
additions, rotations, XORs of two wires, and XORs with a constant.  The
same description drives value evaluation (test vectors), difference
propagation (trail completion), CNF generation, and the discovery of
chained-addition pairs along rotate/xor-only paths.

Round-reduced Speck here is the related-key object: the data path starts
from the state just after the first addition (its two halves are free
plaintext material, so that addition carries no probability), while the
key schedule keeps every addition.  The toy variants are plain keyless
permutations and keep all rounds.
"""

import json
from dataclasses import dataclass, field
from enum import Enum

from .cma import ChainSpec, CmaSpec, Glue
from .words import DiffTriple, Word, mask, xdp_weight


class Part(Enum):
    """Which schedule an addition belongs to; toys only use DATA."""

    DATA = "data"
    KEY = "key"


@dataclass(frozen=True)
class Add:
    a: str
    b: str
    out: str
    rnd: int
    part: Part


@dataclass(frozen=True)
class Rot:
    """out = src >>> right (right rotation by a fixed amount)."""

    src: str
    out: str
    right: int


@dataclass(frozen=True)
class Xor:
    a: str
    b: str
    out: str


@dataclass(frozen=True)
class XorK:
    """out = src ^ k for a compile-time constant k."""

    src: str
    out: str
    k: int


@dataclass(frozen=True)
class ArxCircuit:
    name: str
    family: str  # "speck", "speck_toy" or "chaskey"
    n: int
    inputs: tuple
    ops: tuple
    outputs: tuple

    def __post_init__(self):
        defined = set()
        for w in self.inputs:
            if w in defined:
                raise ValueError(f"duplicate input wire {w!r}")
            defined.add(w)
        for op in self.ops:
            for src in _op_inputs(op):
                if src not in defined:
                    raise ValueError(f"wire {src!r} used before definition")
            out = op.out
            if out in defined:
                raise ValueError(f"wire {out!r} assigned twice")
            if isinstance(op, Rot) and not 0 <= op.right < self.n:
                raise ValueError("rotation amount out of range")
            if isinstance(op, XorK) and not 0 <= op.k <= mask(self.n):
                raise ValueError("xor constant does not fit the word")
            defined.add(out)
        for w in self.outputs:
            if w not in defined:
                raise ValueError(f"output wire {w!r} never defined")

    @property
    def additions(self) -> tuple:
        return tuple(op for op in self.ops if isinstance(op, Add))

    def wires(self) -> tuple:
        return self.inputs + tuple(op.out for op in self.ops)

    def evaluate(self, values: dict) -> dict:
        """Run the circuit on concrete words; returns every wire's value."""
        m = mask(self.n)
        env = {}
        for w in self.inputs:
            if w not in values:
                raise ValueError(f"missing input {w!r}")
            v = values[w]
            if not 0 <= v <= m:
                raise ValueError(f"input {w!r} does not fit the word")
            env[w] = v
        for op in self.ops:
            if isinstance(op, Add):
                env[op.out] = (env[op.a] + env[op.b]) & m
            elif isinstance(op, Rot):
                v = env[op.src]
                env[op.out] = ((v >> op.right) | (v << (self.n - op.right))) & m
            elif isinstance(op, Xor):
                env[op.out] = env[op.a] ^ env[op.b]
            else:
                env[op.out] = env[op.src] ^ op.k
        return env

    def output_values(self, values: dict) -> tuple:
        env = self.evaluate(values)
        return tuple(env[w] for w in self.outputs)


def _op_inputs(op):
    if isinstance(op, Add):
        return (op.a, op.b)
    if isinstance(op, Xor):
        return (op.a, op.b)
    return (op.src,)


class _Builder:
    def __init__(self, n: int):
        self.n = n
        self.ops = []
        self.inputs = []
        self._defined = set()

    def input(self, w: str) -> str:
        self.inputs.append(w)
        self._defined.add(w)
        return w

    def _emit(self, op):
        self.ops.append(op)
        self._defined.add(op.out)
        return op.out

    def add(self, a, b, out, rnd, part):
        return self._emit(Add(a, b, out, rnd, part))

    def rotr(self, src, out, r):
        return self._emit(Rot(src, out, r % self.n))

    def rotl(self, src, out, r):
        return self._emit(Rot(src, out, (self.n - r) % self.n))

    def xor(self, a, b, out):
        return self._emit(Xor(a, b, out))

    def xork(self, src, out, k):
        return self._emit(XorK(src, out, k & mask(self.n)))

    def freeze(self, name, family, outputs):
        return ArxCircuit(name, family, self.n, tuple(self.inputs),
                          tuple(self.ops), tuple(outputs))


# ------------------------------------------------------------------ Speck

_SPECK_MODES = ("search", "verify", "encrypt")


def speck_params(variant: str):
    """(word bits, alpha, beta) for a 'block/key' variant string."""
    text = variant.lower().removeprefix("speck").strip()
    try:
        block, key_bits = (int(p) for p in text.split("/"))
    except ValueError:
        raise ValueError(f"cannot parse variant {variant!r}") from None
    if block % 2:
        raise ValueError("block size must be even")
    n = block // 2
    if key_bits != 4 * n:
        raise ValueError("only four-word keys are supported")
    alpha, beta = (7, 2) if n == 16 else (8, 3)
    return n, alpha, beta


def build_speck(variant: str, rounds: int, mode: str = "search") -> ArxCircuit:
    """Related-key circuit: key schedule plus data path over `rounds` rounds.

    Key inputs are the four master-key words l2, l1, l0, k0.  In "search"
    and "verify" modes the data inputs x0, y0 are the state right after
    the first addition (x already added, y already rotated left), so the
    data path opens with two plain XORs and the first weighted data
    addition sits in round 1.  "encrypt" keeps the textbook first round
    and is only meant for evaluating test vectors.
    """
    if mode not in _SPECK_MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if rounds < 1:
        raise ValueError("need at least one round")
    n, alpha, beta = speck_params(variant)
    b = _Builder(n)
    for w in ("l2", "l1", "l0", "k0", "x0", "y0"):
        b.input(w)
    for j in range(rounds - 1):
        la = b.rotr(f"l{j}", f"la{j}", alpha)
        kz = b.add(la, f"k{j}", f"kz{j}", j, Part.KEY)
        lnew = b.xork(kz, f"l{j + 3}", j)
        kb = b.rotl(f"k{j}", f"kb{j}", beta)
        b.xor(kb, lnew, f"k{j + 1}")
    if mode == "encrypt":
        xa = b.rotr("x0", "xa0", alpha)
        xs = b.add(xa, "y0", "xs0", 0, Part.DATA)
        x1 = b.xor(xs, "k0", "x1")
        yb = b.rotl("y0", "yb0", beta)
        b.xor(yb, x1, "y1")
    else:
        x1 = b.xor("x0", "k0", "x1")
        b.xor("y0", x1, "y1")
    for i in range(1, rounds):
        xa = b.rotr(f"x{i}", f"xa{i}", alpha)
        xs = b.add(xa, f"y{i}", f"xs{i}", i, Part.DATA)
        xn = b.xor(xs, f"k{i}", f"x{i + 1}")
        yb = b.rotl(f"y{i}", f"yb{i}", beta)
        b.xor(yb, xn, f"y{i + 1}")
    name = f"speck{2 * n}_{4 * n}"
    return b.freeze(name, "speck", (f"x{rounds}", f"y{rounds}"))


def speck_round_keys(variant: str, key, rounds: int):
    """Round keys k^0..k^{rounds-1} from master key (l2, l1, l0, k0)."""
    n, alpha, beta = speck_params(variant)
    m = mask(n)
    l2, l1, l0, k0 = key
    ls = [l0, l1, l2]
    ks = [k0]
    for j in range(rounds - 1):
        rot_l = ((ls[j] >> alpha) | (ls[j] << (n - alpha))) & m
        ls.append(((rot_l + ks[j]) & m) ^ j)
        rot_k = ((ks[j] << beta) | (ks[j] >> (n - beta))) & m
        ks.append(rot_k ^ ls[j + 3])
    return ks


def speck_encrypt(variant: str, key, plaintext, rounds: int):
    """Reference encryption of (x, y), independent of the circuit path."""
    n, alpha, beta = speck_params(variant)
    m = mask(n)
    x, y = plaintext
    for k in speck_round_keys(variant, key, rounds):
        x = ((x >> alpha) | (x << (n - alpha))) & m
        x = ((x + y) & m) ^ k
        y = ((y << beta) | (y >> (n - beta))) & m
        y ^= x
    return x, y


# --------------------------------------------------------------- Chaskey

@dataclass(frozen=True)
class ChaskeyRots:
    """The five rotation amounts of one round.

    a rotates the second word before its XOR, b the fourth; half is the
    amount applied to both mixed sums; c and d rotate the two cross
    words before the closing XORs.
    """

    a: int = 5
    b: int = 8
    half: int = 16
    c: int = 13
    d: int = 7

    def check(self, n: int):
        for r in (self.a, self.b, self.half, self.c, self.d):
            if not 0 < r < n:
                raise ValueError("rotation amount out of range")


def build_chaskey(rounds: int, n: int = 32,
                  rotations: ChaskeyRots = ChaskeyRots(),
                  name: str = "chaskey") -> ArxCircuit:
    """Permutation circuit on four n-bit words v0..v3.

    Additions come in two interleaved chains: v0+v1 feeds the w0+w3 sum
    of the same round, whose output is next round's v0; v2+v3 feeds
    w2+w1, whose rotated output is next round's v2.
    """
    if rounds < 1:
        raise ValueError("need at least one round")
    rotations.check(n)
    rc = rotations
    b = _Builder(n)
    for w in range(4):
        b.input(f"v{w}_0")
    for r in range(rounds):
        v0, v1, v2, v3 = (f"v{w}_{r}" for w in range(4))
        s0 = b.add(v0, v1, f"s0_{r}", r, Part.DATA)
        w0 = b.rotl(s0, f"w0_{r}", rc.half)
        a1 = b.rotl(v1, f"a1_{r}", rc.a)
        w1 = b.xor(a1, s0, f"w1_{r}")
        s2 = b.add(v2, v3, f"s2_{r}", r, Part.DATA)
        a3 = b.rotl(v3, f"a3_{r}", rc.b)
        w3 = b.xor(a3, s2, f"w3_{r}")
        v0n = b.add(w0, w3, f"v0_{r + 1}", r, Part.DATA)
        b3 = b.rotl(w3, f"b3_{r}", rc.c)
        b.xor(b3, v0n, f"v3_{r + 1}")
        s3 = b.add(s2, w1, f"s3_{r}", r, Part.DATA)
        b.rotl(s3, f"v2_{r + 1}", rc.half)
        b1 = b.rotl(w1, f"b1_{r}", rc.d)
        b.xor(b1, s3, f"v1_{r + 1}")
    outs = tuple(f"v{w}_{rounds}" for w in range(4))
    return b.freeze(name, "chaskey", outs)


def chaskey_permute(state, rounds: int, n: int = 32,
                    rotations: ChaskeyRots = ChaskeyRots()):
    """Reference permutation, written against the usual word equations."""
    rotations.check(n)
    m = mask(n)

    def rl(v, r):
        return ((v << r) | (v >> (n - r))) & m

    v0, v1, v2, v3 = state
    for _ in range(rounds):
        s0 = (v0 + v1) & m
        w0 = rl(s0, rotations.half)
        w1 = rl(v1, rotations.a) ^ s0
        w2 = (v2 + v3) & m
        w3 = rl(v3, rotations.b) ^ w2
        v0 = (w0 + w3) & m
        v3 = rl(w3, rotations.c) ^ v0
        s3 = (w2 + w1) & m
        v2 = rl(s3, rotations.half)
        v1 = rl(w1, rotations.d) ^ s3
    return v0, v1, v2, v3


# ------------------------------------------------------------------ toys

TOY_CHASKEY_ROTS = ChaskeyRots(a=3, b=2, half=3, c=2, d=2)


def build_speck_toy(rounds: int, n: int = 14, alpha: int = 6,
                    beta: int = 3) -> ArxCircuit:
    """Keyless data path with the round counter XORed in; all rounds count."""
    if rounds < 1:
        raise ValueError("need at least one round")
    b = _Builder(n)
    b.input("x0")
    b.input("y0")
    for i in range(rounds):
        xa = b.rotr(f"x{i}", f"xa{i}", alpha)
        xs = b.add(xa, f"y{i}", f"xs{i}", i, Part.DATA)
        xn = b.xork(xs, f"x{i + 1}", i)
        yb = b.rotl(f"y{i}", f"yb{i}", beta)
        b.xor(yb, xn, f"y{i + 1}")
    return b.freeze(f"speck_toy{2 * n}", "speck_toy",
                    (f"x{rounds}", f"y{rounds}"))


def speck_toy_encrypt(pair, rounds: int, n: int = 14, alpha: int = 6,
                      beta: int = 3):
    m = mask(n)
    x, y = pair
    for i in range(rounds):
        x = ((x >> alpha) | (x << (n - alpha))) & m
        x = ((x + y) & m) ^ i
        y = ((y << beta) | (y >> (n - beta))) & m
        y ^= x
    return x, y


def build_toy(kind: str, rounds: int, n: int = None) -> ArxCircuit:
    """Small-word variants used for exhaustive cross-checks.

    kind "chaskey32" is the permutation on four bytes, "chaskey28" the
    same structure on 7-bit words, "speck28" the keyless data path on
    14-bit words (word size overridable via n).
    """
    k = kind.lower()
    if k == "chaskey32":
        return build_chaskey(rounds, n or 8, TOY_CHASKEY_ROTS,
                             name="chaskey_toy32")
    if k == "chaskey28":
        return build_chaskey(rounds, n or 7, TOY_CHASKEY_ROTS,
                             name="chaskey_toy28")
    if k == "speck28":
        return build_speck_toy(rounds, n or 14)
    raise ValueError(f"unknown toy {kind!r}")


# ----------------------------------------------------------------- trails

TRAIL_FORMAT = "arxtrail.trail/1"

_ROW_DIFF_KEYS = ("l", "k", "x", "y", "v0", "v1", "v2", "v3")
_ROW_NUM_KEYS = ("wk", "wd", "w")


@dataclass(frozen=True)
class Trail:
    """A differential trail as a table of per-round word differences.

    rows[i] maps short column names to Word differences plus optional
    integer weight columns; which columns appear depends on the circuit
    family.  weak_key, when present, is a concrete master key realizing
    the trail, in circuit input order (l2, l1, l0, k0).
    """

    cipher: str
    n: int
    rounds: int
    rows: tuple
    weak_key: tuple = None
    meta: dict = field(default_factory=dict)

    def column(self, key: str):
        return tuple(row.get(key) for row in self.rows)


def trail_to_json(trail: Trail) -> dict:
    rows = []
    for row in trail.rows:
        out = {}
        for k, v in row.items():
            out[k] = v.to_hex() if isinstance(v, Word) else v
        rows.append(out)
    doc = {
        "format": TRAIL_FORMAT,
        "cipher": trail.cipher,
        "word_bits": trail.n,
        "rounds": trail.rounds,
        "rows": rows,
    }
    if trail.weak_key is not None:
        doc["weak_key"] = [w.to_hex() for w in trail.weak_key]
    if trail.meta:
        doc["meta"] = dict(trail.meta)
    return doc


def trail_from_json(doc: dict) -> Trail:
    if doc.get("format") != TRAIL_FORMAT:
        raise ValueError(f"not a trail document: {doc.get('format')!r}")
    n = doc["word_bits"]
    rows = []
    for raw in doc["rows"]:
        row = {}
        for k, v in raw.items():
            if k in _ROW_DIFF_KEYS:
                row[k] = Word.parse(v, n) if isinstance(v, str) else Word(v, n)
            elif k in _ROW_NUM_KEYS:
                row[k] = v
            else:
                raise ValueError(f"unknown trail column {k!r}")
        rows.append(row)
    weak = doc.get("weak_key")
    if weak is not None:
        weak = tuple(Word.parse(w, n) if isinstance(w, str) else Word(w, n)
                     for w in weak)
    return Trail(doc["cipher"], n, doc["rounds"], tuple(rows), weak,
                 dict(doc.get("meta", {})))


def save_trail(trail: Trail, path):
    with open(path, "w") as fh:
        json.dump(trail_to_json(trail), fh, indent=1)
        fh.write("\n")


def load_trail(path) -> Trail:
    with open(path) as fh:
        return trail_from_json(json.load(fh))


_FAMILY_COLUMNS = {
    "speck": {"l": "l{}", "k": "k{}", "x": "x{}", "y": "y{}"},
    "speck_toy": {"x": "x{}", "y": "y{}"},
    "chaskey": {f"v{w}": f"v{w}_{{}}" for w in range(4)},
}


def trail_wire_diffs(circuit: ArxCircuit, trail: Trail) -> dict:
    """Map trail rows onto circuit wires; row i names the round-i state."""
    if trail.n != circuit.n:
        raise ValueError("trail and circuit word sizes differ")
    columns = _FAMILY_COLUMNS[circuit.family]
    wires = set(circuit.wires())
    out = {}
    for i, row in enumerate(trail.rows):
        for key, value in row.items():
            if not isinstance(value, Word):
                continue
            if key not in columns:
                raise ValueError(f"column {key!r} has no wire in "
                                 f"{circuit.family} circuits")
            wire = columns[key].format(i)
            if wire not in wires:
                raise ValueError(f"trail row {i} names missing wire {wire!r}")
            out[wire] = value
    return out


def propagate_diffs(circuit: ArxCircuit, known: dict) -> dict:
    """Complete a partial difference assignment through the linear layer.

    Rotations move differences both ways, constant XORs are transparent,
    and a two-input XOR determines any one wire from the other two.
    Additions propagate nothing.  Raises if the closure contradicts a
    given difference.
    """
    diffs = dict(known)

    def put(wire, value):
        old = diffs.get(wire)
        if old is None:
            diffs[wire] = value
            return True
        if old != value:
            raise ValueError(f"inconsistent differences at wire {wire!r}: "
                             f"{old.to_hex()} vs {value.to_hex()}")
        return False

    changed = True
    while changed:
        changed = False
        for op in circuit.ops:
            if isinstance(op, Rot):
                if op.src in diffs:
                    changed |= put(op.out, diffs[op.src].rotr(op.right))
                if op.out in diffs:
                    changed |= put(op.src, diffs[op.out].rotl(op.right))
            elif isinstance(op, XorK):
                if op.src in diffs:
                    changed |= put(op.out, diffs[op.src])
                if op.out in diffs:
                    changed |= put(op.src, diffs[op.out])
            elif isinstance(op, Xor):
                have = [w for w in (op.a, op.b, op.out) if w in diffs]
                if len(have) == 2:
                    missing = next(w for w in (op.a, op.b, op.out)
                                   if w not in diffs)
                    others = [diffs[w] for w in (op.a, op.b, op.out)
                              if w is not missing]
                    changed |= put(missing, others[0] ^ others[1])
                elif len(have) == 3:
                    if diffs[op.a] ^ diffs[op.b] != diffs[op.out]:
                        raise ValueError(
                            f"inconsistent differences at wire {op.out!r}: "
                            "xor relation violated")
    return diffs


def addition_triples(circuit: ArxCircuit, diffs: dict):
    """(op, DiffTriple or None) per addition, None while any leg is open."""
    out = []
    for op in circuit.additions:
        words = tuple(diffs.get(w) for w in (op.a, op.b, op.out))
        if any(w is None for w in words):
            out.append((op, None))
        else:
            out.append((op, DiffTriple(*words)))
    return out


def trail_weight_report(circuit: ArxCircuit, trail: Trail) -> dict:
    """Independence-assumption weights of every addition along a trail.

    Returns per-site weights plus totals split by schedule; an addition
    whose differential admits no pair gets weight None and poisons the
    totals.
    """
    diffs = propagate_diffs(circuit, trail_wire_diffs(circuit, trail))
    sites = []
    totals = {Part.DATA: 0, Part.KEY: 0}
    valid = True
    for op, t in addition_triples(circuit, diffs):
        if t is None:
            raise ValueError(f"trail leaves addition {op.out!r} undetermined")
        w = xdp_weight(t)
        sites.append((op.rnd, op.part.value, op.out, w))
        if w is None:
            valid = False
        else:
            totals[op.part] += w
    return {
        "sites": tuple(sites),
        "valid": valid,
        "data_weight": totals[Part.DATA] if valid else None,
        "key_weight": totals[Part.KEY] if valid else None,
    }


# ------------------------------------------------------- chained additions

@dataclass(frozen=True)
class CmaInstance:
    """A run of additions linked by rotate/xor-only dataflow.

    chain holds the aligned difference triples and glue maps; adds the
    circuit operations in chain order; links[i] lists the bit positions
    where additions i and i+1 pin the shared word to both carries.  A
    non-empty tuple marks the pair for exact re-weighting; an empty one
    keeps the independence estimate (the screen is a filter, not a
    certificate -- see detect_nonindep_positions).
    """

    chain: ChainSpec
    adds: tuple
    links: tuple

    @property
    def flagged(self) -> bool:
        return any(self.links)

    @property
    def sites(self) -> tuple:
        return tuple((op.rnd, op.part.value, op.out) for op in self.adds)

    def pair_spec(self) -> CmaSpec:
        if self.chain.additions != 2:
            raise ValueError("not a two-addition chain")
        return CmaSpec(self.chain.n, self.chain.triples[0],
                       self.chain.glues[0], self.chain.triples[1])


def _rotl_int(v: int, r: int, n: int) -> int:
    r %= n
    m = mask(n)
    return ((v << r) | (v >> (n - r))) & m


def _chain_edges(circuit: ArxCircuit):
    """(producer, consumer, glue, slot) for every rotate/xor-only path
    from an addition output into another addition's input."""
    users = {}
    for op in circuit.ops:
        for w in _op_inputs(op):
            users.setdefault(w, []).append(op)
    index = {op: i for i, op in enumerate(circuit.ops)}
    edges = []
    for prod in circuit.additions:
        stack = [(prod.out, Glue(0, 0))]
        while stack:
            wire, glue = stack.pop()
            for op in users.get(wire, ()):
                if isinstance(op, Rot):
                    stack.append((op.out,
                                  Glue((glue.rot + op.right) % circuit.n,
                                       glue.xor)))
                elif isinstance(op, XorK):
                    stack.append((op.out,
                                  Glue(glue.rot,
                                       glue.xor ^ _rotl_int(op.k, glue.rot,
                                                            circuit.n))))
                elif isinstance(op, Add):
                    if wire == op.a:
                        edges.append((prod, op, glue, "a"))
                    if wire == op.b:
                        edges.append((prod, op, glue, "b"))
    edges.sort(key=lambda e: (index[e[0]], index[e[1]]))
    return edges


def _aligned_triple(triple: DiffTriple, slot: str) -> DiffTriple:
    # chain models expect the glued difference in the first input slot;
    # addition is symmetric in its inputs, so swapping is free
    if slot == "a":
        return triple
    return DiffTriple(triple.dy, triple.dx, triple.dz)


def enumerate_cmas(circuit: ArxCircuit, trail: Trail,
                   group_size: int = 2) -> tuple:
    """Chained-addition instances along a trail, with interaction flags.

    group_size 2 yields one instance per producer/consumer edge, so
    consecutive links of a longer lineage appear as overlapping pairs.
    Larger sizes cut each maximal chain into consecutive runs of at most
    group_size additions (the grouping used for joint counting).
    """
    if group_size < 2:
        raise ValueError("group size must be at least 2")
    diffs = propagate_diffs(circuit, trail_wire_diffs(circuit, trail))
    triples = dict(addition_triples(circuit, diffs))
    edges = _chain_edges(circuit)

    incoming = {}
    outgoing = {}
    for prod, cons, glue, slot in edges:
        if cons in incoming:
            raise ValueError(f"addition {cons.out!r} is chained from more "
                             "than one producer")
        if prod in outgoing:
            raise ValueError(f"addition {prod.out!r} chains into more than "
                             "one consumer")
        incoming[cons] = (prod, glue, slot)
        outgoing[prod] = (cons, glue, slot)

    def link_positions(spec: CmaSpec) -> tuple:
        return tuple(sorted(spec.nonindep_positions()))

    instances = []
    if group_size == 2:
        for prod, cons, glue, slot in edges:
            tp, tc = triples[prod], triples[cons]
            if tp is None or tc is None:
                continue
            tc = _aligned_triple(tc, slot)
            spec = CmaSpec(circuit.n, tp, glue, tc)
            instances.append(CmaInstance(spec.to_chain(), (prod, cons),
                                         (link_positions(spec),)))
        return tuple(instances)

    heads = [op for op in circuit.additions
             if op not in incoming and op in outgoing]
    for head in heads:
        path = [head]
        while path[-1] in outgoing:
            path.append(outgoing[path[-1]][0])
        for start in range(0, len(path), group_size):
            run = path[start:start + group_size]
            if len(run) < 2:
                continue
            run_triples = []
            run_glues = []
            run_links = []
            ok = True
            for pos, op in enumerate(run):
                t = triples[op]
                if t is None:
                    ok = False
                    break
                if pos == 0:
                    run_triples.append(t)
                    continue
                _, glue, slot = incoming[op]
                t = _aligned_triple(t, slot)
                run_triples.append(t)
                run_glues.append(glue)
                spec = CmaSpec(circuit.n, run_triples[pos - 1], glue, t)
                run_links.append(link_positions(spec))
            if not ok:
                continue
            chain = ChainSpec(circuit.n, tuple(run_triples), tuple(run_glues))
            instances.append(CmaInstance(chain, tuple(run),
                                         tuple(run_links)))
    return tuple(instances)
