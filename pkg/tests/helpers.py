"""Independent oracles shared by the test modules."""

from __future__ import annotations

import csv
import itertools
import random
from fractions import Fraction
from functools import reduce
from pathlib import Path

import numpy as np

from stabgames.pauli import PauliOperator, StabilizerGenerators, commutes, independence_check
from stabgames.states import GraphSpec

FIXTURES = Path(__file__).parent / "fixtures"

_MATS = {
    0: np.eye(2, dtype=complex),
    1: np.array([[0, 1], [1, 0]], dtype=complex),
    2: np.array([[0, -1j], [1j, 0]], dtype=complex),
    3: np.array([[1, 0], [0, -1]], dtype=complex),
}


def dense(p: PauliOperator) -> np.ndarray:
    """Matrix of ``p`` with qubit 0 as the least significant basis bit."""
    mats = [_MATS[p.letter(j)] for j in reversed(range(p.n))]
    return (1j ** p.phase) * reduce(np.kron, mats, np.eye(1, dtype=complex))


def random_pauli(n: int, rng: random.Random, phase: int | None = None) -> PauliOperator:
    ph = rng.randrange(4) if phase is None else phase
    return PauliOperator(n, rng.getrandbits(n), rng.getrandbits(n), ph)


def random_stabilizer_group(n: int, r: int, rng: random.Random) -> StabilizerGenerators:
    """Independent commuting signed Paulis, grown by rejection sampling."""
    gens: list[PauliOperator] = []
    for _ in range(100000):
        if len(gens) == r:
            return StabilizerGenerators(gens)
        p = PauliOperator(n, rng.getrandbits(n), rng.getrandbits(n), 2 * rng.getrandbits(1))
        if p.x == 0 and p.z == 0:
            continue
        if all(commutes(p, g) for g in gens) and independence_check(gens + [p]) == len(gens) + 1:
            gens.append(p)
    raise RuntimeError("sampling failed")


def random_connected_graph(n: int, rng: random.Random, p: float = 0.5) -> GraphSpec:
    while True:
        edges = [(i, j) for i, j in itertools.combinations(range(n), 2) if rng.random() < p]
        g = GraphSpec.from_edges(n, edges)
        if g.is_connected():
            return g


def brute_force_value(A_rows: list[int], c: list[int], width: int, mask: int | None = None):
    """Best win count and lexicographically smallest optimal strategy (bit 0 first).

    ``A_rows`` are row bitmasks; strategies range over subsets of ``mask``.
    """
    mask = (1 << width) - 1 if mask is None else mask
    free = [t for t in range(width) if (mask >> t) & 1]
    best, witness = -1, None
    for bits in itertools.product((0, 1), repeat=len(free)):
        b = sum(v << t for v, t in zip(bits, free))
        wins = sum(1 for row, ci in zip(A_rows, c) if (row & b).bit_count() % 2 == ci)
        key = tuple((b >> t) & 1 for t in range(width))
        if wins > best or (wins == best and key < witness[1]):
            best, witness = wins, (b, key)
    return best, witness[0]


def appendix_rows() -> list[dict[str, str]]:
    with open(FIXTURES / "appendix_b.csv", newline="") as fh:
        return list(csv.DictReader(fh))


def parse_fraction(text: str) -> Fraction:
    num, den = text.split("/")
    return Fraction(int(num), int(den))
