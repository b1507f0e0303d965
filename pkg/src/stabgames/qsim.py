"""Dense state-vector oracle for small stabilizer games.

Basis index ``k`` has qubit ``j`` (site ``j + 1``) in bit ``j``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from stabgames.anf import CapExceeded
from stabgames.game import GameInstance
from stabgames.pauli import PauliError, PauliOperator, StabilizerGenerators

QSIM_CAP = 14
_I_POW = np.array([1, 1j, -1, -1j])


@dataclass(frozen=True)
class StateVector:
    n: int
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        if self.amplitudes.shape != (1 << self.n,):
            raise ValueError("amplitude count must be 2^n")

    @classmethod
    def basis(cls, n: int, k: int) -> StateVector:
        a = np.zeros(1 << n, dtype=complex)
        a[k] = 1
        return cls(n, a)

    @classmethod
    def from_amplitudes(cls, amps) -> StateVector:
        a = np.asarray(amps, dtype=complex)
        n = a.size.bit_length() - 1
        norm = np.linalg.norm(a)
        if norm == 0:
            raise ValueError("zero vector")
        return cls(n, a / norm)

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> StateVector:
        return cls.from_amplitudes(rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n))

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


def _check(n: int) -> None:
    if n > QSIM_CAP:
        raise CapExceeded(f"dense simulation supports n <= {QSIM_CAP}, got {n}")


def apply_pauli(p: PauliOperator, amps: np.ndarray) -> np.ndarray:
    """``P |psi>`` without building a matrix."""
    k = np.arange(amps.size, dtype=np.int64)
    coeff = _I_POW[(p.phase + (p.x & p.z).bit_count()) % 4]
    zsign = 1 - 2 * (np.bitwise_count(k & p.z).astype(np.int64) & 1)
    out = np.empty_like(amps)
    out[k ^ p.x] = coeff * zsign * amps
    return out


def stabilizer_state(gens: StabilizerGenerators) -> StateVector:
    """Project computational basis seeds (index order) onto the stabilized subspace."""
    n = gens.n
    _check(n)
    for seed in range(1 << n):
        a = np.zeros(1 << n, dtype=complex)
        a[seed] = 1
        for g in gens:
            a = (a + apply_pauli(g, a)) / 2
        norm = np.linalg.norm(a)
        if norm > 1e-9:
            return StateVector(n, a / norm)
    raise PauliError("projector annihilates every seed; generator signs are inconsistent")


def expectation(p: PauliOperator, s: StateVector) -> float:
    if p.n != s.n:
        raise ValueError("qubit counts differ")
    val = np.vdot(s.amplitudes, apply_pauli(p, s.amplitudes))
    assert abs(val.imag) < 1e-12, f"non-real expectation {val}"
    return float(val.real)


def quantum_win_probability(g: GameInstance, s: StateVector) -> float:
    """``1/2 + (1 / 2|Q|) sum_M <psi|M|psi>`` over the signed query operators."""
    if g.n != s.n:
        raise ValueError("qubit counts differ")
    _check(s.n)
    xs, zs, ph = g._elements
    total = 0.0
    for x, z, e in zip(xs.tolist(), zs.tolist(), ph.tolist()):
        total += expectation(PauliOperator(g.n, x, z, e), s)
    return 0.5 + total / (2 * g.query_count)


def fidelity(a: StateVector, b: StateVector) -> float:
    if a.n != b.n:
        raise ValueError("qubit counts differ")
    return float(abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)


def ghz_state(n: int, sign: int = 1) -> StateVector:
    """``(|0...0> + sign |1...1>) / sqrt 2``."""
    _check(n)
    a = np.zeros(1 << n, dtype=complex)
    a[0], a[-1] = 1, sign
    return StateVector.from_amplitudes(a)
