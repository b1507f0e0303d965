"""One test per acceptance criterion; the terminal summary lists pass/fail for each."""

from __future__ import annotations

import itertools
import math
import random
from fractions import Fraction

import numpy as np

from helpers import appendix_rows, dense, parse_fraction, random_connected_graph, random_stabilizer_group
from stabgames import cli
from stabgames.anf import TruthTable, nl1
from stabgames.bounds import coset_value_by_rank, toric_bound
from stabgames.cluster import (
    TABLE_HEADER,
    StrategyUV,
    classical_value_cluster,
    jsr_upper_bound,
    lower_bound_closed_form,
    payoff,
    payoff_bruteforce,
    payoff_full,
    singular_value_bound,
    verify_invariant_polytope,
)
from stabgames.game import build_game, check_refutation, classical_value, find_refutation, restrict_to_coset
from stabgames.parityfn import group_polynomials
from stabgames.pauli import PauliOperator, enumerate_group, group_element, product_phase
from stabgames.qsim import StateVector, fidelity, ghz_state, quantum_win_probability, stabilizer_state
from stabgames.states import GraphSpec, ghz_generators, graph_generators, toric_generators, toric_parity_polynomial


def test_criterion_1_appendix_table(capsys):
    assert cli.main(["cluster-table", "--n-max", "12"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == ",".join(TABLE_HEADER)
    fixture = {int(r["n"]): r for r in appendix_rows()}
    got = {int(line.split(",")[0]): line.split(",") for line in lines[1:]}
    assert sorted(got) == list(range(3, 13))
    for n, cells in got.items():
        row = fixture[n]
        assert parse_fraction(cells[1]) == parse_fraction(row["lower_bound"])
        assert parse_fraction(cells[2]) == parse_fraction(row["exact"])
        assert cells[3] == row["F_c"]
    assert got[3][1:] == ["7/8", "7/8", "0.7500"]
    assert got[6][2:] == ["46/64", "0.4375"]
    assert got[10][2:] == ["664/1024", "0.2969"]
    assert got[12][2:] == ["2520/4096", "0.2305"]


def test_criterion_2_ghz_closed_forms():
    for n in range(3, 9):
        gens = ghz_generators(n)
        assert classical_value(build_game(gens)).value == Fraction(3, 4) + Fraction(1, 2 ** (math.ceil(n / 2) + 1))
        res = restrict_to_coset(gens, {0: 1})
        assert coset_value_by_rank(res.parity) == Fraction(1, 2) + Fraction(1, 2 ** math.ceil(n / 2))


def test_criterion_3_seven_eighths_sweep():
    rng = random.Random(2025)
    with_refutation = 0
    for _ in range(220):
        g = build_game(graph_generators(random_connected_graph(rng.randint(2, 6), rng)))
        if find_refutation(g) is not None:
            with_refutation += 1
            assert classical_value(g).value <= Fraction(7, 8)
    assert with_refutation >= 150


def test_criterion_4_toric_bound():
    expected = {2: Fraction(7, 8), 3: Fraction(7, 8), 4: Fraction(49, 64)}
    for L, value in expected.items():
        tb = toric_bound(L)
        assert tb.value == value
        assert tb.certified_rank >= 2 * (L // 2) ** 2
    assert float(toric_bound(4).value) == 0.765625
    c = toric_parity_polynomial(2)
    gens = toric_generators(2)
    assert c.n_vars == 6
    for x, op in enumerate(enumerate_group(gens)):
        assert c.evaluate(x) == op.sign_bit


def test_criterion_5_spectral_bounds():
    fixture = {int(r["n"]): parse_fraction(r["exact"]) for r in appendix_rows()}
    for n in range(3, 13):
        value, _ = classical_value_cluster(n)
        assert value == fixture[n]
        low = lower_bound_closed_form(n)
        assert low <= value <= min(singular_value_bound(n), jsr_upper_bound(n), Fraction(7, 8))
        if n >= 5:
            assert low == value
    assert verify_invariant_polytope(1e-9).passed


def test_criterion_6_oracle_equivalences():
    rng = random.Random(6)
    # phase formula against dense matrices
    for k in range(10_000):
        n = 1 + k % 4
        mask = (1 << n) - 1
        v1, v2 = rng.getrandbits(2 * n), rng.getrandbits(2 * n)
        op = lambda v: PauliOperator(n, v & mask, v >> n)  # noqa: E731
        lhs = dense(op(v1 ^ v2))
        rhs = (1j ** product_phase(v1, v2, n)) * dense(op(v1)) @ dense(op(v2))
        assert np.array_equal(lhs, rhs)
    # parity polynomial against group-element signs, exhaustive up to r = 12
    for r in range(1, 13):
        n = r if r % 3 == 0 else rng.randint(r, 12)
        gens = random_stabilizer_group(n, r, rng)
        c = group_polynomials(gens).parity
        for x, el in enumerate(enumerate_group(gens)):
            assert c.evaluate(x) == el.sign_bit
    assert group_element(ghz_generators(3), 0b011)[1] == 1
    # cluster payoff three ways
    for k in range(200):
        n = 3 + k % 8
        s = StrategyUV(tuple(rng.getrandbits(1) for _ in range(n)), tuple(rng.getrandbits(1) for _ in range(n)), k % 2)
        assert payoff(s) == payoff_full(s) == payoff_bruteforce(s)
    # nl1 via Walsh against the affine brute force
    for r in range(1, 5):
        xs = np.arange(1 << r)
        affine = []
        for u in range(1 << r):
            lin = (np.bitwise_count(xs & u) & 1).astype(np.uint8)
            affine += [lin, lin ^ 1]
        affine = np.array(affine)
        for v in range(1 << (1 << r)):
            bits = ((v >> xs) & 1).astype(np.uint8)
            brute = int(np.count_nonzero(affine != bits, axis=1).min())
            assert nl1(TruthTable(r, bits)) == brute


def test_criterion_7_quantum_oracle():
    for gens in (ghz_generators(3), ghz_generators(5), graph_generators(GraphSpec.cycle(5)), toric_generators(2)):
        p = quantum_win_probability(build_game(gens), stabilizer_state(gens))
        assert abs(p - 1) < 1e-10
    gen = np.random.default_rng(7)
    for k in range(100):
        n = 3 + k % 4
        gens = graph_generators(GraphSpec.cycle(n))
        psi = StateVector.random(n, gen)
        p = quantum_win_probability(build_game(gens), psi)
        assert abs(p - 0.5 * (1 + fidelity(psi, stabilizer_state(gens)))) < 1e-10
    for k in range(100):
        n = 2 + k % 5
        psi = StateVector.random(n, gen)
        p = quantum_win_probability(build_game(ghz_generators(n), "coset:x1=1"), psi)
        assert abs(p - 0.5 * (1 + fidelity(psi, ghz_state(n)) - fidelity(psi, ghz_state(n, -1)))) < 1e-10


def test_criterion_8_refutation_soundness():
    rng = random.Random(8)
    instances = [(ghz_generators(n), "full") for n in range(2, 9)]
    instances += [(ghz_generators(n), "coset:x1=1") for n in range(2, 9)]
    instances += [(graph_generators(GraphSpec.cycle(n)), "full") for n in range(3, 9)]
    instances += [(graph_generators(GraphSpec.path(n)), "full") for n in range(2, 9)]
    instances += [(toric_generators(2), "full")]
    for _ in range(60):
        n = rng.randint(1, 6)
        instances.append((random_stabilizer_group(n, rng.randint(1, n), rng), "full"))
    for _ in range(20):
        instances.append((graph_generators(random_connected_graph(rng.randint(2, 7), rng)), "full"))
    seen = {True: 0, False: 0}
    for gens, spec in instances:
        g = build_game(gens, spec)
        assert g.query_count <= 1 << 12
        ref = find_refutation(g)
        value = classical_value(g).value
        assert (ref is None) == (value == 1)
        if ref is not None:
            assert check_refutation(g, ref)
        seen[ref is None] += 1
    assert seen[True] and seen[False]
