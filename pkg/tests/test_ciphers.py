"""Circuit construction, evaluation, trail plumbing and chain discovery."""

import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from arxtrail.ciphers import (
    Add, ArxCircuit, ChaskeyRots, CmaInstance, Part, Rot, Trail,
    TOY_CHASKEY_ROTS, TRAIL_FORMAT, XorK, Xor, addition_triples,
    build_chaskey, build_speck, build_speck_toy, build_toy, chaskey_permute,
    enumerate_cmas, load_trail, propagate_diffs, save_trail, speck_encrypt,
    speck_params, speck_round_keys, speck_toy_encrypt, trail_from_json,
    trail_to_json, trail_weight_report, trail_wire_diffs,
)
from arxtrail.words import Word, xdp_weight

# published test vectors: (variant, key words, plaintext, rounds, ciphertext)
SPECK_VECTORS = [
    ("32/64", (0x1918, 0x1110, 0x0908, 0x0100),
     (0x6574, 0x694C), 22, (0xA868, 0x42F2)),
    ("48/96", (0x1A1918, 0x121110, 0x0A0908, 0x020100),
     (0x6D2073, 0x696874), 23, (0x735E10, 0xB6445D)),
    ("64/128", (0x1B1A1918, 0x13121110, 0x0B0A0908, 0x03020100),
     (0x3B726574, 0x7475432D), 27, (0x8C6FA548, 0x454E028B)),
]

VARIANTS = ["32/64", "48/96", "64/128"]


def key_env(key):
    return dict(zip(("l2", "l1", "l0", "k0"), key))


def wire_xor(circuit, env_a, env_b):
    ea, eb = circuit.evaluate(env_a), circuit.evaluate(env_b)
    return {w: Word(ea[w] ^ eb[w], circuit.n) for w in ea}


class TestSpeckReference:
    @pytest.mark.parametrize("variant,key,pt,rounds,ct", SPECK_VECTORS)
    def test_published_vectors(self, variant, key, pt, rounds, ct):
        assert speck_encrypt(variant, key, pt, rounds) == ct

    @pytest.mark.parametrize("variant,key,pt,rounds,ct", SPECK_VECTORS)
    def test_encrypt_circuit_matches_vectors(self, variant, key, pt,
                                             rounds, ct):
        c = build_speck(variant, rounds, mode="encrypt")
        env = {**key_env(key), "x0": pt[0], "y0": pt[1]}
        assert c.output_values(env) == ct

    def test_round_key_count(self):
        ks = speck_round_keys("32/64", (1, 2, 3, 4), 9)
        assert len(ks) == 9 and ks[0] == 4

    def test_variant_parsing(self):
        assert speck_params("32/64") == (16, 7, 2)
        assert speck_params("Speck48/96") == (24, 8, 3)
        assert speck_params("64/128") == (32, 8, 3)
        with pytest.raises(ValueError):
            speck_params("48/72")  # three-word key
        with pytest.raises(ValueError):
            speck_params("garbage")


class TestCircuitEvaluation:
    @settings(max_examples=30, deadline=None)
    @given(st.sampled_from(VARIANTS), st.integers(1, 6), st.data())
    def test_search_circuit_matches_reference(self, variant, rounds, data):
        n, alpha, beta = speck_params(variant)
        m = (1 << n) - 1
        key = tuple(data.draw(st.integers(0, m)) for _ in range(4))
        x = data.draw(st.integers(0, m))
        y = data.draw(st.integers(0, m))
        # inputs of the search shape: state after the opening addition
        xp = (((x >> alpha) | (x << (n - alpha))) & m)
        xp = (xp + y) & m
        yp = ((y << beta) | (y >> (n - beta))) & m
        c = build_speck(variant, rounds, mode="search")
        env = {**key_env(key), "x0": xp, "y0": yp}
        assert c.output_values(env) == speck_encrypt(variant, key,
                                                     (x, y), rounds)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(1, 10), st.data())
    def test_chaskey_circuit_matches_reference(self, rounds, data):
        c = build_chaskey(rounds)
        state = tuple(data.draw(st.integers(0, 2**32 - 1)) for _ in range(4))
        env = {f"v{w}_0": state[w] for w in range(4)}
        assert c.output_values(env) == chaskey_permute(state, rounds)

    def test_verify_mode_same_shape_as_search(self):
        a = build_speck("32/64", 5, mode="search")
        b = build_speck("32/64", 5, mode="verify")
        assert a.ops == b.ops

    def test_toy_chaskey_circuits_match_reference(self):
        rng = random.Random(11)
        for kind, n in (("chaskey32", 8), ("chaskey28", 7)):
            c = build_toy(kind, 5)
            assert c.n == n
            state = tuple(rng.getrandbits(n) for _ in range(4))
            env = {f"v{w}_0": state[w] for w in range(4)}
            assert c.output_values(env) == chaskey_permute(
                state, 5, n, TOY_CHASKEY_ROTS)

    def test_toy_chaskey_round_equations(self):
        # one round on 8-bit words against the written-out word equations
        n, m = 8, 0xFF
        rl = lambda v, r: ((v << r) | (v >> (n - r))) & m
        v = (0x12, 0xB7, 0x5E, 0xC3)
        s0 = (v[0] + v[1]) & m
        w0 = rl(s0, 3)
        w1 = rl(v[1], 3) ^ s0
        w2 = (v[2] + v[3]) & m
        w3 = rl(v[3], 2) ^ w2
        out0 = (w0 + w3) & m
        out3 = rl(w3, 2) ^ out0
        s3 = (w2 + w1) & m
        out2 = rl(s3, 3)
        out1 = rl(w1, 2) ^ s3
        c = build_toy("chaskey32", 1)
        env = {f"v{w}_0": v[w] for w in range(4)}
        assert c.output_values(env) == (out0, out1, out2, out3)

    def test_toy_speck_circuit_and_round_counter(self):
        rng = random.Random(3)
        c = build_toy("speck28", 8)
        assert c.n == 14
        pair = (rng.getrandbits(14), rng.getrandbits(14))
        env = {"x0": pair[0], "y0": pair[1]}
        assert c.output_values(env) == speck_toy_encrypt(pair, 8)
        # round counter enters as a constant: round i xors i into x
        consts = [op.k for op in c.ops if isinstance(op, XorK)]
        assert consts == list(range(8))

    def test_toy_speck_word_size_override(self):
        c = build_toy("speck28", 3, n=7)
        assert c.n == 7 and c.name == "speck_toy14"

    def test_keyless_toys_have_no_key_part(self):
        for kind in ("chaskey32", "chaskey28", "speck28"):
            c = build_toy(kind, 4)
            assert all(op.part is Part.DATA for op in c.additions)

    def test_build_errors(self):
        with pytest.raises(ValueError):
            build_speck("32/64", 0)
        with pytest.raises(ValueError):
            build_speck("32/64", 4, mode="banana")
        with pytest.raises(ValueError):
            build_toy("simon32", 4)
        with pytest.raises(ValueError):
            build_chaskey(4, n=7)  # default rotations too wide for 7 bits

    def test_circuit_wiring_validation(self):
        with pytest.raises(ValueError, match="used before"):
            ArxCircuit("t", "speck_toy", 4, ("a",),
                       (Xor("a", "b", "c"),), ("c",))
        with pytest.raises(ValueError, match="assigned twice"):
            ArxCircuit("t", "speck_toy", 4, ("a", "b"),
                       (Xor("a", "b", "a"),), ("a",))
        with pytest.raises(ValueError, match="rotation"):
            ArxCircuit("t", "speck_toy", 4, ("a",),
                       (Rot("a", "b", 4),), ("b",))
        with pytest.raises(ValueError, match="never defined"):
            ArxCircuit("t", "speck_toy", 4, ("a",), (), ("z",))
        with pytest.raises(ValueError, match="constant"):
            ArxCircuit("t", "speck_toy", 4, ("a",),
                       (XorK("a", "b", 16),), ("b",))

    def test_evaluate_input_checks(self):
        c = build_toy("speck28", 1)
        with pytest.raises(ValueError, match="missing input"):
            c.evaluate({"x0": 1})
        with pytest.raises(ValueError, match="fit"):
            c.evaluate({"x0": 1 << 14, "y0": 0})

    def test_rotation_range_check(self):
        with pytest.raises(ValueError):
            ChaskeyRots().check(16)
        ChaskeyRots().check(32)


class TestTrailSerialization:
    def make_trail(self):
        rows = (
            {"x": Word(0x25, 14), "y": Word(0x9, 14), "wd": 3},
            {"x": Word(0x1, 14), "y": Word(0x121, 14)},
        )
        return Trail("speck_toy28", 14, 1, rows,
                     weak_key=None, meta={"note": "round trip"})

    def test_round_trip(self):
        t = self.make_trail()
        doc = trail_to_json(t)
        assert doc["format"] == TRAIL_FORMAT
        assert doc["rows"][0]["x"] == "0x0025"
        back = trail_from_json(doc)
        assert back == t

    def test_weak_key_round_trip(self):
        rows = ({"k": Word(3, 16)},)
        t = Trail("speck32_64", 16, 1, rows,
                  weak_key=(Word(1, 16), Word(2, 16), Word(3, 16),
                            Word(4, 16)))
        back = trail_from_json(trail_to_json(t))
        assert back.weak_key == t.weak_key

    def test_file_round_trip(self, tmp_path):
        t = self.make_trail()
        p = tmp_path / "t.json"
        save_trail(t, p)
        assert load_trail(p) == t
        # the on-disk form is plain json with hex words
        doc = json.loads(p.read_text())
        assert doc["word_bits"] == 14

    def test_rejects_foreign_documents(self):
        with pytest.raises(ValueError, match="not a trail"):
            trail_from_json({"format": "something/9", "rows": []})

    def test_rejects_unknown_columns(self):
        doc = {"format": TRAIL_FORMAT, "cipher": "x", "word_bits": 4,
               "rounds": 1, "rows": [{"q": "0x1"}]}
        with pytest.raises(ValueError, match="unknown trail column"):
            trail_from_json(doc)


def speck_pair_trail(variant, rounds, seed):
    """Trail harvested from two real related-key computations, printing
    the master-key l words, every round key, and the x/y state rows."""
    n, _, _ = speck_params(variant)
    rng = random.Random(seed)
    c = build_speck(variant, rounds, mode="search")
    base = {w: rng.getrandbits(n) for w in ("l2", "l1", "l0", "k0")}
    other = {w: rng.getrandbits(n) for w in ("l2", "l1", "l0", "k0")}
    data = {"x0": rng.getrandbits(n), "y0": rng.getrandbits(n)}
    d = wire_xor(c, {**base, **data}, {**other, **data})
    rows = []
    for i in range(rounds + 1):
        row = {}
        if i <= 2:
            row["l"] = d[f"l{i}"]
        if f"k{i}" in d:
            row["k"] = d[f"k{i}"]
        row["x"] = d[f"x{i}"]
        row["y"] = d[f"y{i}"]
        rows.append(row)
    return c, Trail(c.name, n, rounds, tuple(rows)), d


def chaskey_pair_trail(kind, rounds, seed):
    rng = random.Random(seed)
    c = build_toy(kind, rounds)
    a = {f"v{w}_0": rng.getrandbits(c.n) for w in range(4)}
    b = {f"v{w}_0": rng.getrandbits(c.n) for w in range(4)}
    d = wire_xor(c, a, b)
    rows = tuple({f"v{w}": d[f"v{w}_{r}"] for w in range(4)}
                 for r in range(rounds + 1))
    return c, Trail(c.name, c.n, rounds, rows), d


class TestPropagation:
    def test_speck_rows_determine_every_wire(self):
        c, t, d = speck_pair_trail("32/64", 15, seed=7)
        full = propagate_diffs(c, trail_wire_diffs(c, t))
        assert full == d

    def test_chaskey_rows_determine_every_wire(self):
        c, t, d = chaskey_pair_trail("chaskey32", 5, seed=8)
        full = propagate_diffs(c, trail_wire_diffs(c, t))
        assert full == d

    def test_real_pair_weights_are_finite(self):
        c, t, _ = speck_pair_trail("48/96", 10, seed=9)
        rep = trail_weight_report(c, t)
        assert rep["valid"]
        per_site = {out: w for _, _, out, w in rep["sites"]}
        diffs = propagate_diffs(c, trail_wire_diffs(c, t))
        for op, triple in addition_triples(c, diffs):
            assert per_site[op.out] == xdp_weight(triple)
        assert rep["data_weight"] == sum(
            w for _, part, _, w in rep["sites"] if part == "data")

    def test_toy_speck_counter_is_transparent(self):
        # across the constant xor the difference passes unchanged
        rng = random.Random(5)
        c = build_toy("speck28", 4)
        a = {"x0": rng.getrandbits(14), "y0": rng.getrandbits(14)}
        b = {"x0": rng.getrandbits(14), "y0": rng.getrandbits(14)}
        d = wire_xor(c, a, b)
        for i in range(4):
            assert d[f"xs{i}"] == d[f"x{i + 1}"]

    def test_conflicting_rows_raise(self):
        # the x and y columns are tied by a linear relation, so a
        # corrupted y entry cannot go unnoticed
        c, t, _ = speck_pair_trail("32/64", 6, seed=10)
        rows = [dict(r) for r in t.rows]
        rows[3]["y"] = rows[3]["y"] ^ Word(1, 16)
        bad = Trail(t.cipher, t.n, t.rounds, tuple(rows))
        with pytest.raises(ValueError, match="inconsistent|violated"):
            propagate_diffs(c, trail_wire_diffs(c, bad))

    def test_wire_mapping_errors(self):
        c = build_toy("speck28", 2)
        with pytest.raises(ValueError, match="word sizes differ"):
            trail_wire_diffs(c, Trail("x", 7, 2, ({},)))
        t = Trail("x", 14, 2, ({"v0": Word(1, 14)},))
        with pytest.raises(ValueError, match="no wire"):
            trail_wire_diffs(c, t)
        t = Trail("x", 14, 2, ({}, {}, {}, {"x": Word(1, 14)}))
        with pytest.raises(ValueError, match="missing wire"):
            trail_wire_diffs(c, t)

    def test_undetermined_addition_rejected_in_report(self):
        c, t, _ = speck_pair_trail("32/64", 6, seed=12)
        rows = [dict(r) for r in t.rows]
        del rows[5]["k"]  # last round key: its schedule addition opens up
        bad = Trail(t.cipher, t.n, t.rounds, tuple(rows))
        with pytest.raises(ValueError, match="undetermined"):
            trail_weight_report(c, bad)


class TestChainDiscovery:
    def test_speck_key_schedule_lineages(self):
        c, t, _ = speck_pair_trail("32/64", 15, seed=21)
        inst = enumerate_cmas(c, t)
        assert len(inst) == 11
        for i in inst:
            prod, cons = i.adds
            assert prod.part is Part.KEY and cons.part is Part.KEY
            assert cons.rnd == prod.rnd + 3
            glue = i.chain.glues[0]
            assert (glue.rot, glue.xor) == (7, prod.rnd)
            assert i.pair_spec().glue == glue
        # data-path additions feed nothing through the linear layer
        assert all(op.part is Part.KEY for i in inst for op in i.adds)

    def test_speck_groups_of_four(self):
        c, t, _ = speck_pair_trail("32/64", 15, seed=21)
        groups = enumerate_cmas(c, t, group_size=4)
        assert [[a.rnd for a in g.adds] for g in groups] == \
            [[0, 3, 6, 9], [1, 4, 7, 10], [2, 5, 8, 11]]

    def test_chaskey_two_chains(self):
        c, t, _ = chaskey_pair_trail("chaskey32", 5, seed=22)
        inst = enumerate_cmas(c, t)
        by_out = [(i.adds[0].out, i.adds[1].out, i.chain.glues[0].rot)
                  for i in inst]
        # chain through v0: sum, cross sum, alternating rotations 5 and 0
        assert ("s0_0", "v0_1", 5) in by_out
        assert ("v0_1", "s0_1", 0) in by_out
        # chain through v2: plain link first, rotated link second
        assert ("s2_0", "s3_0", 0) in by_out
        assert ("s3_0", "s2_1", 5) in by_out
        assert len(inst) == 18

    def test_chaskey_groups_of_four(self):
        c, t, _ = chaskey_pair_trail("chaskey32", 8, seed=23)
        groups = enumerate_cmas(c, t, group_size=4)
        names = [[a.out for a in g.adds] for g in groups]
        assert names == [
            ["s0_0", "v0_1", "s0_1", "v0_2"],
            ["s0_2", "v0_3", "s0_3", "v0_4"],
            ["s0_4", "v0_5", "s0_5", "v0_6"],
            ["s0_6", "v0_7", "s0_7", "v0_8"],
            ["s2_0", "s3_0", "s2_1", "s3_1"],
            ["s2_2", "s3_2", "s2_3", "s3_3"],
            ["s2_4", "s3_4", "s2_5", "s3_5"],
            ["s2_6", "s3_6", "s2_7", "s3_7"],
        ]
        for g in groups:
            assert g.chain.additions == 4
            with pytest.raises(ValueError):
                g.pair_spec()

    def test_trailing_short_group_is_kept(self):
        c, t, _ = chaskey_pair_trail("chaskey32", 5, seed=24)
        groups = enumerate_cmas(c, t, group_size=4)
        sizes = sorted(g.chain.additions for g in groups)
        assert sizes == [2, 2, 4, 4, 4, 4]

    def test_group_size_validation(self):
        c, t, _ = chaskey_pair_trail("chaskey32", 2, seed=25)
        with pytest.raises(ValueError):
            enumerate_cmas(c, t, group_size=1)

    def test_edges_with_open_triples_are_skipped(self):
        c, t, _ = speck_pair_trail("32/64", 15, seed=26)
        rows = [dict(r) for r in t.rows]
        del rows[14]["k"]  # round-13 schedule addition becomes undetermined
        pruned = Trail(t.cipher, t.n, t.rounds, tuple(rows))
        inst = enumerate_cmas(c, pruned)
        assert len(inst) == 10
        assert all(i.adds[1].rnd != 13 for i in inst)

    def test_second_slot_chaining_swaps_inputs(self):
        # producer output reaches the consumer's second input; the chain
        # model wants it first, and addition lets the inputs swap
        ops = (
            Add("p", "q", "t", 0, Part.DATA),
            Rot("t", "tr", 1),
            Add("f", "tr", "u", 1, Part.DATA),
        )
        c = ArxCircuit("swap", "speck_toy", 4, ("p", "q", "f"), ops, ("u",))
        rng = random.Random(27)
        a = {w: rng.getrandbits(4) for w in ("p", "q", "f")}
        b = {w: rng.getrandbits(4) for w in ("p", "q", "f")}
        d = wire_xor(c, a, b)
        inst = _enumerate_with_diffs(c, d)
        assert len(inst) == 1
        chain = inst[0].chain
        assert chain.glues[0].rot == 1
        assert chain.triples[1].dx == d["tr"]
        assert chain.triples[1].dy == d["f"]

    def test_fanout_and_fanin_are_rejected(self):
        fanout = (
            Add("p", "q", "t", 0, Part.DATA),
            Add("t", "r", "u", 1, Part.DATA),
            Add("t", "s", "v", 1, Part.DATA),
        )
        c = ArxCircuit("fanout", "speck_toy", 4, ("p", "q", "r", "s"),
                       fanout, ("u", "v"))
        diffs = {w: Word(0, 4) for w in c.wires()}
        with pytest.raises(ValueError, match="more than one consumer"):
            _enumerate_with_diffs(c, diffs)
        fanin = (
            Add("p", "q", "t", 0, Part.DATA),
            Add("r", "s", "w", 0, Part.DATA),
            Add("t", "w", "u", 1, Part.DATA),
        )
        c = ArxCircuit("fanin", "speck_toy", 4, ("p", "q", "r", "s"),
                       fanin, ("u",))
        with pytest.raises(ValueError, match="more than one producer"):
            _enumerate_with_diffs(c, diffs)


def _enumerate_with_diffs(circuit, diffs):
    """Route a raw wire map through enumerate_cmas by faking a trail."""
    import arxtrail.ciphers as mod
    real_propagate = mod.propagate_diffs
    real_map = mod.trail_wire_diffs
    mod.trail_wire_diffs = lambda c, t: diffs
    mod.propagate_diffs = lambda c, k: dict(k)
    try:
        return mod.enumerate_cmas(circuit, None)
    finally:
        mod.trail_wire_diffs = real_map
        mod.propagate_diffs = real_propagate
