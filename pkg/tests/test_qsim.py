from __future__ import annotations

import random

import numpy as np
import pytest

from helpers import dense, random_connected_graph, random_stabilizer_group
from stabgames.anf import CapExceeded
from stabgames.game import build_game
from stabgames.pauli import PauliError, PauliOperator, StabilizerGenerators, enumerate_group
from stabgames.qsim import (
    StateVector,
    apply_pauli,
    expectation,
    fidelity,
    ghz_state,
    quantum_win_probability,
    stabilizer_state,
)
from stabgames.states import GraphSpec, ghz_generators, graph_generators, toric_generators

P = PauliOperator.from_string
TOL = 1e-10


def graph_state(gr: GraphSpec) -> np.ndarray:
    """``2^(-n/2) sum_x (-1)^(number of edges inside x) |x>``."""
    k = np.arange(1 << gr.n)
    signs = np.ones(1 << gr.n)
    for i, j in gr.edges:
        signs *= 1 - 2 * (((k >> i) & 1) & ((k >> j) & 1))
    return signs / 2 ** (gr.n / 2)


def same_ray(a: np.ndarray, b: np.ndarray) -> bool:
    return abs(abs(np.vdot(a, b)) - 1) < TOL


class TestStates:
    def test_ghz3(self):
        s = stabilizer_state(ghz_generators(3))
        expected = np.zeros(8)
        expected[[0, 7]] = 1 / np.sqrt(2)
        assert same_ray(s.amplitudes, expected)
        assert same_ray(ghz_state(3).amplitudes, expected)

    def test_plus(self):
        s = stabilizer_state(StabilizerGenerators([P("X")]))
        assert same_ray(s.amplitudes, np.array([1, 1]) / np.sqrt(2))

    @pytest.mark.parametrize("n", [3, 4, 5, 6])
    def test_cycle_graph_state(self, n):
        gr = GraphSpec.cycle(n)
        assert same_ray(stabilizer_state(graph_generators(gr)).amplitudes, graph_state(gr))

    def test_random_graphs(self):
        rng = random.Random(4)
        for _ in range(10):
            gr = random_connected_graph(rng.randint(2, 6), rng)
            assert same_ray(stabilizer_state(graph_generators(gr)).amplitudes, graph_state(gr))

    def test_signs_respected(self):
        s = stabilizer_state(StabilizerGenerators.from_strings(["-Z"]))
        assert same_ray(s.amplitudes, np.array([0, 1]))

    def test_cap(self):
        with pytest.raises(CapExceeded):
            stabilizer_state(ghz_generators(15))

    def test_amplitude_shape(self):
        with pytest.raises(ValueError):
            StateVector(2, np.zeros(3, dtype=complex))
        with pytest.raises(ValueError):
            StateVector.from_amplitudes([0, 0])


class TestPauliAction:
    def test_matches_dense(self):
        rng = random.Random(10)
        gen = np.random.default_rng(10)
        for _ in range(100):
            n = rng.randint(1, 4)
            p = PauliOperator(n, rng.getrandbits(n), rng.getrandbits(n), rng.randrange(4))
            psi = StateVector.random(n, gen).amplitudes
            assert np.allclose(apply_pauli(p, psi), dense(p) @ psi, atol=1e-12)

    def test_examples(self):
        assert expectation(P("X"), StateVector.basis(1, 0)) == 0
        assert abs(expectation(P("XIZ"), ghz_state(3))) < TOL
        for m in enumerate_group(ghz_generators(3)):
            assert abs(expectation(m, ghz_state(3)) - 1) < TOL

    @pytest.mark.parametrize("seed", range(8))
    def test_group_elements_stabilize(self, seed):
        rng = random.Random(seed)
        n = rng.randint(1, 6)
        gens = random_stabilizer_group(n, rng.randint(1, n), rng)
        s = stabilizer_state(gens)
        for m in enumerate_group(gens):
            assert abs(expectation(m, s) - 1) < TOL

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            expectation(P("XX"), ghz_state(3))


class TestWinProbability:
    @pytest.mark.parametrize(
        "gens",
        [ghz_generators(3), ghz_generators(6), graph_generators(GraphSpec.cycle(5)), toric_generators(2)],
        ids=["ghz3", "ghz6", "cycle5", "toric2"],
    )
    def test_constructed_state_wins(self, gens):
        g = build_game(gens)
        assert abs(quantum_win_probability(g, stabilizer_state(gens)) - 1) < TOL

    def test_orthogonal_basis_state(self):
        g = build_game(ghz_generators(3))
        assert abs(quantum_win_probability(g, StateVector.basis(3, 1)) - 0.5) < TOL

    def test_ghz_minus_on_coset(self):
        g = build_game(ghz_generators(4), "coset:x1=1")
        assert abs(quantum_win_probability(g, ghz_state(4, -1))) < TOL

    def test_fidelity_examples(self):
        assert abs(fidelity(ghz_state(3), ghz_state(3)) - 1) < TOL
        assert abs(fidelity(ghz_state(3), ghz_state(3, -1))) < TOL

    def test_fidelity_formula(self):
        gen = np.random.default_rng(1)
        for k in range(100):
            n = 2 + k % 5
            gens = graph_generators(GraphSpec.cycle(n)) if k % 2 and n >= 3 else ghz_generators(n)
            target = stabilizer_state(gens)
            psi = StateVector.random(n, gen)
            p = quantum_win_probability(build_game(gens), psi)
            assert abs(p - 0.5 * (1 + fidelity(psi, target))) < TOL

    def test_ghz_coset_identity(self):
        gen = np.random.default_rng(2)
        for k in range(100):
            n = 2 + k % 5
            psi = StateVector.random(n, gen)
            p = quantum_win_probability(build_game(ghz_generators(n), "coset:x1=1"), psi)
            expected = 0.5 * (1 + fidelity(psi, ghz_state(n)) - fidelity(psi, ghz_state(n, -1)))
            assert abs(p - expected) < TOL

    def test_inconsistent_signs(self):
        gens = StabilizerGenerators([P("ZZ"), P("-ZZ")], validate=False)
        with pytest.raises(PauliError):
            stabilizer_state(gens)
