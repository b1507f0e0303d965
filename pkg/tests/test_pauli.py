from __future__ import annotations

import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import dense, random_pauli, random_stabilizer_group
from stabgames.pauli import (
    PauliError,
    PauliOperator,
    StabilizerGenerators,
    commutes,
    enumerate_group,
    group_element,
    independence_check,
    multiply,
    parse_generators,
    product_phase,
)
from stabgames.states import ghz_generators, graph_generators, GraphSpec, ToricLattice

P = PauliOperator.from_string


class TestParsing:
    @pytest.mark.parametrize("text", ["+XYZ", "-XYY", "IIII", "-Z"])
    def test_round_trip(self, text):
        s = str(P(text))
        assert P(s) == P(text)

    def test_site_one_is_low_bit(self):
        p = P("XIZ")
        assert (p.x, p.z) == (0b001, 0b100)

    def test_y_counts(self):
        assert P("YIY").weight_y == 2

    @pytest.mark.parametrize("bad", ["XQZ", "", "-", "X Z"])
    def test_rejects_bad_letters(self, bad):
        with pytest.raises(PauliError):
            P(bad)

    def test_generator_file_format(self):
        gens = parse_generators("# GHZ\n+XXX\nZZI  # comment\n-IZZ\n")
        assert gens.r == 3 and gens.signs == (0, 0, 1)
        assert parse_generators(gens.to_text()).generators == gens.generators

    def test_generators_reject_imaginary(self):
        with pytest.raises(PauliError):
            parse_generators("iXX\nZZ\n")


class TestMultiply:
    @pytest.mark.parametrize(
        "a, b, expected",
        [
            ("+XXX", "+ZZI", "-YYX"),  # GHZ stabilizer list
            ("+XZZ", "+ZXZ", "+YYI"),  # cyclic n=3 stabilizer list
            ("-XYZ", "+III", "-XYZ"),
            ("X", "Z", "-iY"),
            ("Z", "X", "+iY"),
            ("Y", "Y", "I"),
        ],
    )
    def test_examples(self, a, b, expected):
        assert multiply(P(a), P(b)) == P(expected)

    def test_length_mismatch(self):
        with pytest.raises(PauliError):
            P("XX") * P("X")

    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_dense_oracle(self, n):
        rng = random.Random(n)
        for _ in range(2500):
            p, q = random_pauli(n, rng), random_pauli(n, rng)
            assert np.allclose(dense(p * q), dense(p) @ dense(q), atol=0)

    @given(st.integers(1, 5), st.data())
    def test_associative(self, n, data):
        ops = [PauliOperator(n, data.draw(st.integers(0, (1 << n) - 1)), data.draw(st.integers(0, (1 << n) - 1)),
                             data.draw(st.integers(0, 3))) for _ in range(3)]
        a, b, c = ops
        assert (a * b) * c == a * (b * c)


class TestProductPhase:
    @pytest.mark.parametrize(
        "v1, v2, e",
        [
            (0b01, 0b10, 1),  # X, Z  -> i XZ = Y
            (0b11, 0b11, 0),  # Y, Y
            (0b10, 0b01, 3),  # Z, X  -> ZX = iY
        ],
    )
    def test_single_qubit(self, v1, v2, e):
        assert product_phase(v1, v2, 1) == e

    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_dense_identity(self, n):
        """``sigma_{v1+v2} = i^e sigma_{v1} sigma_{v2}`` as matrices."""
        rng = random.Random(100 + n)
        mask = (1 << n) - 1
        for _ in range(2500):
            v1, v2 = rng.getrandbits(2 * n), rng.getrandbits(2 * n)
            op = lambda v: PauliOperator(n, v & mask, v >> n)  # noqa: E731
            e = product_phase(v1, v2, n)
            lhs = dense(op(v1 ^ v2))
            rhs = (1j ** e) * dense(op(v1)) @ dense(op(v2))
            assert np.allclose(lhs, rhs, atol=0)


class TestCommutes:
    @pytest.mark.parametrize("a, b, expected", [("X", "X", True), ("X", "Z", False), ("XZZ", "ZXZ", True), ("XY", "YX", True)])
    def test_examples(self, a, b, expected):
        assert commutes(P(a), P(b)) is expected

    def test_matches_dense(self):
        rng = random.Random(7)
        for _ in range(300):
            p, q = random_pauli(3, rng, 0), random_pauli(3, rng, 0)
            comm = np.allclose(dense(p) @ dense(q), dense(q) @ dense(p))
            assert commutes(p, q) == comm


class TestStabilizerGenerators:
    def test_rejects_anticommuting(self):
        with pytest.raises(PauliError):
            StabilizerGenerators([P("X"), P("Z")])

    def test_rejects_dependent(self):
        with pytest.raises(PauliError):
            StabilizerGenerators([P("XX"), P("ZZ"), P("-YY")])

    def test_rejects_mixed_lengths(self):
        with pytest.raises(PauliError):
            StabilizerGenerators([P("XX"), P("Z")])

    def test_independence_examples(self):
        assert independence_check(ghz_generators(3)) == 3
        assert independence_check([P("XX"), P("XX")]) == 1
        lat = ToricLattice(2)
        full = [lat.star_operator(r, c) for r, c in lat.sites()] + [lat.plaquette_operator(r, c) for r, c in lat.sites()]
        assert independence_check(full) == 6


class TestGroupElement:
    def test_ghz_example(self):
        op, parity = group_element(ghz_generators(3), (1, 1, 0))
        assert op == P("-YYX") and parity == 1

    def test_cycle_example(self):
        op, parity = group_element(graph_generators(GraphSpec.cycle(3)), 0b111)
        assert op == P("-XXX") and parity == 1

    def test_identity(self):
        op, parity = group_element(ghz_generators(4), 0)
        assert op == PauliOperator.identity(4) and parity == 0

    def test_ghz_list(self):
        listed = {"III", "IZZ", "ZIZ", "ZZI", "XXX", "-XYY", "-YXY", "-YYX"}
        assert {str(op).lstrip("+") for op in enumerate_group(ghz_generators(3))} == listed

    def test_homomorphism(self):
        rng = random.Random(3)
        for _ in range(20):
            gens = random_stabilizer_group(5, rng.randint(1, 5), rng)
            r = gens.r
            for _ in range(20):
                x, y = rng.getrandbits(r), rng.getrandbits(r)
                a, _ = group_element(gens, x)
                b, _ = group_element(gens, y)
                c, _ = group_element(gens, x ^ y)
                assert a * b == c  # commuting group: product lands on the element exactly
                assert c.phase in (0, 2)

    def test_enumeration_order(self):
        gens = ghz_generators(3)
        elems = enumerate_group(gens)
        assert all(elems[x] == group_element(gens, x)[0] for x in range(8))
