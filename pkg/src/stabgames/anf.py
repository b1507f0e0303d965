"""Boolean polynomials over F2 in algebraic normal form.

Variables are 0-based internally; the text format and ``str`` use 1-based
names (``x1*x2 + x3 + 1``).  A monomial is a bitmask over variables, the
empty mask being the constant 1.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from stabgames.gf2 import rank as gf2_rank

TABLE_CAP = 24
NL2_CAP = 7


class CapExceeded(RuntimeError):
    """An exact computation was requested beyond its configured size cap."""


@dataclass(frozen=True)
class BooleanPolynomial:
    n_vars: int
    monomials: frozenset[int]

    def __post_init__(self) -> None:
        limit = 1 << self.n_vars
        for m in self.monomials:
            if m < 0 or m >= limit:
                raise ValueError(f"monomial {m:#x} uses variables beyond n_vars={self.n_vars}")

    @classmethod
    def from_monomials(cls, n_vars: int, monomials: Iterable[Iterable[int] | int]) -> BooleanPolynomial:
        """Build from monomials given as variable-index iterables or masks.

        Repeated monomials cancel in pairs.
        """
        acc: set[int] = set()
        for m in monomials:
            mask = m if isinstance(m, int) else sum(1 << v for v in set(m))
            acc ^= {mask}
        return cls(n_vars, frozenset(acc))

    @classmethod
    def zero(cls, n_vars: int) -> BooleanPolynomial:
        return cls(n_vars, frozenset())

    @classmethod
    def parse(cls, text: str, n_vars: int | None = None) -> BooleanPolynomial:
        """Parse ``"x1*x2*x3 + x1*x2 + 1"``; ``"0"`` is the zero polynomial."""
        text = text.strip()
        monos: list[int] = []
        top = 0
        if text not in ("", "0"):
            for term in text.split("+"):
                term = term.strip()
                if term == "1":
                    monos.append(0)
                    continue
                mask = 0
                for factor in term.split("*"):
                    m = re.fullmatch(r"x(\d+)", factor.strip())
                    if not m or int(m.group(1)) < 1:
                        raise ValueError(f"bad monomial factor {factor!r}")
                    v = int(m.group(1)) - 1
                    top = max(top, v + 1)
                    mask |= 1 << v
                monos.append(mask)
        if n_vars is None:
            n_vars = top
        elif n_vars < top:
            raise ValueError(f"polynomial uses x{top} but n_vars={n_vars}")
        return cls.from_monomials(n_vars, monos)

    def __str__(self) -> str:
        if not self.monomials:
            return "0"
        terms = []
        for m in sorted(self.monomials, key=lambda m: (-m.bit_count(), _var_list(m))):
            terms.append("1" if m == 0 else "*".join(f"x{v + 1}" for v in _var_list(m)))
        return " + ".join(terms)

    def __add__(self, other: BooleanPolynomial) -> BooleanPolynomial:
        return BooleanPolynomial(max(self.n_vars, other.n_vars), self.monomials ^ other.monomials)

    def __mul__(self, other: BooleanPolynomial) -> BooleanPolynomial:
        acc: set[int] = set()
        for a in self.monomials:
            for b in other.monomials:
                acc ^= {a | b}
        return BooleanPolynomial(max(self.n_vars, other.n_vars), frozenset(acc))

    def degree(self) -> int:
        return max((m.bit_count() for m in self.monomials), default=0)

    def evaluate(self, x: int | Sequence[int]) -> int:
        if not isinstance(x, int):
            if len(x) != self.n_vars:
                raise ValueError(f"expected {self.n_vars} bits, got {len(x)}")
            x = sum(b << i for i, b in enumerate(x))
        return sum(1 for m in self.monomials if m & x == m) & 1

    def homogeneous_part(self, d: int) -> BooleanPolynomial:
        return BooleanPolynomial(self.n_vars, frozenset(m for m in self.monomials if m.bit_count() == d))

    def substitute(self, assignment: dict[int, int]) -> BooleanPolynomial:
        """Fix variables and renumber the free ones consecutively."""
        free = [v for v in range(self.n_vars) if v not in assignment]
        remap = {v: i for i, v in enumerate(free)}
        ones = sum(1 << v for v, b in assignment.items() if b)
        fixed = sum(1 << v for v in assignment)
        acc: set[int] = set()
        for m in self.monomials:
            if m & fixed & ~ones:
                continue
            rest = m & ~fixed
            acc ^= {sum(1 << remap[v] for v in _var_list(rest))}
        return BooleanPolynomial(len(free), frozenset(acc))

    def truth_table(self, cap: int = TABLE_CAP) -> TruthTable:
        return truth_table(self, cap)


def _var_list(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def evaluate(p: BooleanPolynomial, x: int | Sequence[int]) -> int:
    return p.evaluate(x)


def degree(p: BooleanPolynomial) -> int:
    return p.degree()


@dataclass(frozen=True, eq=False)
class TruthTable:
    """Values ``f(x)`` at every ``x``; index ``i`` holds ``f`` at the bits of ``i``."""

    n_vars: int
    bits: np.ndarray

    def __post_init__(self) -> None:
        if self.bits.shape != (1 << self.n_vars,):
            raise ValueError("truth table length must be 2**n_vars")

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, TruthTable)
            and self.n_vars == other.n_vars
            and bool(np.array_equal(self.bits, other.bits))
        )

    def weight(self) -> int:
        return int(self.bits.sum())

    def to_hex(self) -> str:
        """Packed little-endian hex: table index 0 is bit 0 of the first byte."""
        packed = np.packbits(self.bits.astype(np.uint8), bitorder="little")
        return packed.tobytes().hex()

    @classmethod
    def from_hex(cls, text: str, n_vars: int) -> TruthTable:
        raw = np.frombuffer(bytes.fromhex(text), dtype=np.uint8)
        bits = np.unpackbits(raw, bitorder="little")[: 1 << n_vars]
        if bits.size != 1 << n_vars:
            raise ValueError("hex string too short for n_vars")
        return cls(n_vars, bits.astype(np.uint8))

    @classmethod
    def from_function(cls, n_vars: int, f) -> TruthTable:
        return cls(n_vars, np.array([f(i) & 1 for i in range(1 << n_vars)], dtype=np.uint8))

    def to_polynomial(self) -> BooleanPolynomial:
        coeffs = _mobius(self.bits.copy(), self.n_vars)
        return BooleanPolynomial(self.n_vars, frozenset(int(i) for i in np.flatnonzero(coeffs)))


def _mobius(a: np.ndarray, n: int) -> np.ndarray:
    # self-inverse over F2: ANF coefficients <-> truth table
    for i in range(n):
        a = a.reshape(-1, 2, 1 << i)
        a[:, 1, :] ^= a[:, 0, :]
    return a.reshape(-1)


def _check_cap(n: int, cap: int) -> None:
    if n > cap:
        raise CapExceeded(f"{n} variables exceeds the truth-table cap of {cap}")


def truth_table(p: BooleanPolynomial, cap: int = TABLE_CAP) -> TruthTable:
    _check_cap(p.n_vars, cap)
    coeffs = np.zeros(1 << p.n_vars, dtype=np.uint8)
    for m in p.monomials:
        coeffs[m] = 1
    return TruthTable(p.n_vars, _mobius(coeffs, p.n_vars))


def walsh_transform(t: TruthTable, cap: int = TABLE_CAP) -> np.ndarray:
    """``W_f(u) = sum_x (-1)^(f(x) + <u,x>)`` for every ``u``, by butterfly."""
    _check_cap(t.n_vars, cap)
    w = 1 - 2 * t.bits.astype(np.int64)
    for i in range(t.n_vars):
        w = w.reshape(-1, 2, 1 << i)
        a, b = w[:, 0, :].copy(), w[:, 1, :]
        w[:, 0, :] += b
        w[:, 1, :] = a - b
    return w.reshape(-1)


def nl1(t: TruthTable) -> int:
    """First-order nonlinearity: distance to the nearest affine function."""
    return (1 << t.n_vars) // 2 - int(np.abs(walsh_transform(t)).max()) // 2 if t.n_vars else 0


def best_affine(t: TruthTable) -> tuple[int, int]:
    """An affine function at distance ``nl1``: ``(u, constant)``.

    Lowest ``u`` first, then the lowest constant.
    """
    w = walsh_transform(t)
    best = int(np.abs(w).max())
    for u in range(w.size):
        if w[u] == best:
            return u, 0
        if -w[u] == best:
            return u, 1
    raise AssertionError("unreachable")


@dataclass(frozen=True)
class QuadraticForm:
    """``sum_{i<j} coupling[i] bit j * x_i x_j + <linear, x> + constant``.

    ``coupling`` holds one row mask per variable with bits only above the
    diagonal.
    """

    n_vars: int
    coupling: tuple[int, ...]
    linear: int = 0
    constant: int = 0

    def __post_init__(self) -> None:
        if len(self.coupling) != self.n_vars:
            raise ValueError("coupling needs one row per variable")
        for i, row in enumerate(self.coupling):
            if row & ((1 << (i + 1)) - 1) or row >> self.n_vars:
                raise ValueError("coupling must be strictly upper triangular")

    @classmethod
    def from_polynomial(cls, p: BooleanPolynomial) -> QuadraticForm:
        if p.degree() > 2:
            raise ValueError("polynomial has degree above 2")
        rows = [0] * p.n_vars
        linear = constant = 0
        for m in p.monomials:
            k = m.bit_count()
            if k == 0:
                constant = 1
            elif k == 1:
                linear |= m
            else:
                i, j = _var_list(m)
                rows[i] |= 1 << j
        return cls(p.n_vars, tuple(rows), linear, constant)

    def alternating(self) -> list[int]:
        rows = list(self.coupling)
        for i, row in enumerate(self.coupling):
            for j in _var_list(row):
                rows[j] |= 1 << i
        return rows

    def to_polynomial(self) -> BooleanPolynomial:
        monos = [(1 << i) | (1 << j) for i, row in enumerate(self.coupling) for j in _var_list(row)]
        monos += [1 << v for v in _var_list(self.linear)]
        if self.constant:
            monos.append(0)
        return BooleanPolynomial.from_monomials(self.n_vars, monos)


def quadratic_rank(q: QuadraticForm | BooleanPolynomial) -> int:
    """F2 rank of the alternating matrix ``C + C^T`` (always even)."""
    if isinstance(q, BooleanPolynomial):
        q = QuadraticForm.from_polynomial(q)
    r = gf2_rank(q.alternating())
    assert r % 2 == 0
    return r


def coupling_rank(p: BooleanPolynomial) -> int:
    """Rank of the degree-2 part of ``p`` (higher-degree terms are ignored)."""
    return quadratic_rank(p.homogeneous_part(2))


def boolean_derivative(p: BooleanPolynomial, a: int | Sequence[int]) -> BooleanPolynomial:
    """``D_a p(x) = p(x) + p(x + a)``, computed symbolically.

    Each monomial ``prod_{i in S} x_i`` contributes every ``S \\ T`` for the
    nonempty subsets ``T`` of ``S`` inside the support of ``a``.
    """
    if not isinstance(a, int):
        if len(a) != p.n_vars:
            raise ValueError(f"direction needs {p.n_vars} bits, got {len(a)}")
        a = sum(b << i for i, b in enumerate(a))
    if a >> p.n_vars:
        raise ValueError("direction has bits beyond n_vars")
    acc: set[int] = set()
    for m in p.monomials:
        hit = _var_list(m & a)
        for k in range(1, len(hit) + 1):
            for t in itertools.combinations(hit, k):
                acc ^= {m & ~sum(1 << v for v in t)}
    return BooleanPolynomial(p.n_vars, frozenset(acc))


def nl2_exact(t: TruthTable, cap: int = NL2_CAP) -> int:
    """Distance from ``f`` to RM(2, r), enumerating every quadratic part.

    For each of the ``2**(r(r-1)/2)`` quadratic forms ``q`` the best affine
    correction comes from the Walsh spectrum of ``f + q``, so the minimum over
    all of RM(2, r) is covered exactly.
    """
    r = t.n_vars
    if r > cap:
        raise CapExceeded(f"nl2_exact supports r <= {cap}, got {r}")
    if r < 2:
        return 0
    pairs = list(itertools.combinations(range(r), 2))
    xs = np.arange(1 << r)
    pair_tables = np.array([((xs >> i) & (xs >> j) & 1) for i, j in pairs], dtype=np.uint8)
    f = t.bits.astype(np.uint8)
    best = 1 << r
    total = 1 << len(pairs)
    chunk = 1 << min(len(pairs), 12)
    # quadratic part for index q: XOR of pair_tables over the set bits of q
    low_bits = min(len(pairs), 12)
    low = np.zeros((1 << low_bits, 1 << r), dtype=np.uint8)
    for k in range(low_bits):
        low[1 << k : 1 << (k + 1)] = low[: 1 << k] ^ pair_tables[k]
    for hi in range(0, total, chunk):
        high = f.copy()
        h = hi >> low_bits
        k = low_bits
        while h:
            if h & 1:
                high ^= pair_tables[k]
            h >>= 1
            k += 1
        block = (low ^ high).astype(np.int64)
        w = 1 - 2 * block
        for i in range(r):
            w = w.reshape(w.shape[0], -1, 2, 1 << i)
            a, b = w[:, :, 0, :].copy(), w[:, :, 1, :]
            w[:, :, 0, :] += b
            w[:, :, 1, :] = a - b
        w = w.reshape(w.shape[0], -1)
        peak = int(np.abs(w).max())
        best = min(best, (1 << r) // 2 - peak // 2)
        if best == 0:
            break
    return best


def nl_asymptotic_reference(r: int, s: int) -> float:
    """Leading terms of the known large-``r`` nonlinearity estimate.

    Reported for context only; it is not a certified bound.
    """
    return 2 ** (r - 1) - (15 ** 0.5) / 2 * (1 + 2 ** 0.5) ** (s - 2) * 2 ** (r / 2)
