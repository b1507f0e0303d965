"""Signed Pauli strings in symplectic binary form.

A Pauli string on ``n`` qubits is stored as two ``n``-bit integers (the X and
Z parts, site 1 in the least significant bit) together with an exponent ``e``
of ``i``.  The operator is ``i**e`` times the tensor product of the letters
I, X, Y, Z read off site by site from ``(x_j, z_j)``, with Y the Hermitian
letter.  A valid stabilizer element therefore has ``e`` in ``{0, 2}``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from stabgames.gf2 import rank as gf2_rank

LETTERS = "IXYZ"

# (x, z) -> letter index in the standard encoding I=0, X=1, Y=2, Z=3
_ENCODE = {(0, 0): 0, (1, 0): 1, (1, 1): 2, (0, 1): 3}
_DECODE = {0: (0, 0), 1: (1, 0), 2: (1, 1), 3: (0, 1)}


class PauliError(ValueError):
    """Raised for malformed Pauli input or invalid generator sets."""


def _popcount(v: int) -> int:
    return v.bit_count()


@dataclass(frozen=True)
class PauliOperator:
    n: int
    x: int
    z: int
    phase: int = 0

    def __post_init__(self) -> None:
        mask = (1 << self.n) - 1
        if self.x & ~mask or self.z & ~mask:
            raise PauliError("bit vectors exceed qubit count")
        object.__setattr__(self, "phase", self.phase % 4)

    @classmethod
    def identity(cls, n: int) -> PauliOperator:
        return cls(n, 0, 0, 0)

    @classmethod
    def from_string(cls, text: str) -> PauliOperator:
        """Parse ``"-XYY"``, ``"+ZZI"`` or ``"XIZ"``.

        The first letter is site 1.  A leading ``i`` or ``-i`` is accepted so
        that intermediate products can round-trip, but stabilizer input files
        only ever carry ``+``/``-``.
        """
        s = text.strip().replace("−", "-")
        phase = 0
        if s.startswith("-i") or s.startswith("+i") or s.startswith("i"):
            phase = 3 if s.startswith("-") else 1
            s = s[2:] if s[0] in "+-" else s[1:]
        elif s[:1] == "-":
            phase, s = 2, s[1:]
        elif s[:1] == "+":
            s = s[1:]
        if not s:
            raise PauliError(f"empty Pauli string: {text!r}")
        x = z = 0
        for j, ch in enumerate(s):
            if ch not in LETTERS:
                raise PauliError(f"invalid Pauli letter {ch!r} in {text!r}")
            xb, zb = _DECODE[LETTERS.index(ch)]
            x |= xb << j
            z |= zb << j
        return cls(len(s), x, z, phase)

    @classmethod
    def from_letters(cls, letters: Sequence[int], phase: int = 0) -> PauliOperator:
        x = z = 0
        for j, k in enumerate(letters):
            xb, zb = _DECODE[k]
            x |= xb << j
            z |= zb << j
        return cls(len(letters), x, z, phase)

    @property
    def weight_y(self) -> int:
        return _popcount(self.x & self.z)

    @property
    def sign_bit(self) -> int:
        if self.phase % 2:
            raise PauliError(f"{self} carries a residual factor of i")
        return self.phase // 2

    def letter(self, j: int) -> int:
        """Letter index (0..3 for I, X, Y, Z) on site ``j`` (0-based)."""
        return _ENCODE[((self.x >> j) & 1, (self.z >> j) & 1)]

    def letters(self) -> tuple[int, ...]:
        return tuple(self.letter(j) for j in range(self.n))

    def symplectic(self) -> int:
        """The vector ``(x | z)`` packed as ``x + (z << n)``."""
        return self.x | (self.z << self.n)

    def __mul__(self, other: PauliOperator) -> PauliOperator:
        return multiply(self, other)

    def __str__(self) -> str:
        prefix = {0: "+", 1: "+i", 2: "-", 3: "-i"}[self.phase]
        return prefix + "".join(LETTERS[k] for k in self.letters())


def _check_n(p: PauliOperator, q: PauliOperator) -> None:
    if p.n != q.n:
        raise PauliError(f"qubit count mismatch: {p.n} vs {q.n}")


def multiply(p: PauliOperator, q: PauliOperator) -> PauliOperator:
    """Exact operator product ``p @ q``."""
    _check_n(p, q)
    # letter-wise Y = i X Z, so sigma_v = i^{W_Y(v)} X^x Z^z, and
    # (X^x1 Z^z1)(X^x2 Z^z2) = (-1)^{z1.x2} X^(x1^x2) Z^(z1^z2)
    x, z = p.x ^ q.x, p.z ^ q.z
    e = (
        p.phase
        + q.phase
        + p.weight_y
        + q.weight_y
        - _popcount(x & z)
        + 2 * _popcount(p.z & q.x)
    )
    return PauliOperator(p.n, x, z, e % 4)


def product_phase(v1: int, v2: int, n: int) -> int:
    """Exponent ``e`` with ``sigma_{v1+v2} = i**e sigma_{v1} sigma_{v2}``.

    ``v1`` and ``v2`` are packed symplectic vectors ``x | (z << n)``; the
    letter-wise operators carry no extra phase.  The formula is the Y-count
    bookkeeping plus twice the form ``v1^T B v2 = x1 . z2``.
    """
    mask = (1 << n) - 1
    if (v1 | v2) >> (2 * n):
        raise PauliError("symplectic vectors longer than 2n")
    x1, z1 = v1 & mask, v1 >> n
    x2, z2 = v2 & mask, v2 >> n
    x, z = x1 ^ x2, z1 ^ z2
    wy = _popcount(x1 & z1) + _popcount(x2 & z2) - _popcount(x & z)
    return (wy + 2 * _popcount(x1 & z2)) % 4


def commutes(p: PauliOperator, q: PauliOperator) -> bool:
    _check_n(p, q)
    return (_popcount(p.x & q.z) + _popcount(p.z & q.x)) % 2 == 0


class StabilizerGenerators:
    """An independent, pairwise commuting list of signed Pauli strings."""

    def __init__(self, generators: Sequence[PauliOperator], *, validate: bool = True):
        gens = tuple(generators)
        if not gens:
            raise PauliError("at least one generator is required")
        n = gens[0].n
        for g in gens:
            if g.n != n:
                raise PauliError("generators act on different qubit counts")
        self.n = n
        self.generators = gens
        if validate:
            for g in gens:
                if g.phase not in (0, 2):
                    raise PauliError(f"generator {g} is not Hermitian with sign +-1")
            for a in range(len(gens)):
                for b in range(a + 1, len(gens)):
                    if not commutes(gens[a], gens[b]):
                        raise PauliError(f"generators {gens[a]} and {gens[b]} anticommute")
            if independence_check(gens) != len(gens):
                raise PauliError("generators are linearly dependent")

    @classmethod
    def from_strings(cls, lines: Iterable[str]) -> StabilizerGenerators:
        return cls([PauliOperator.from_string(s) for s in lines if s.strip()])

    @property
    def r(self) -> int:
        return len(self.generators)

    @property
    def signs(self) -> tuple[int, ...]:
        return tuple(g.phase // 2 for g in self.generators)

    def __len__(self) -> int:
        return len(self.generators)

    def __iter__(self) -> Iterator[PauliOperator]:
        return iter(self.generators)

    def __getitem__(self, i: int) -> PauliOperator:
        return self.generators[i]

    def __repr__(self) -> str:
        return f"StabilizerGenerators([{', '.join(str(g) for g in self.generators)}])"

    def to_text(self) -> str:
        return "\n".join(str(g) for g in self.generators) + "\n"


def parse_generators(text: str) -> StabilizerGenerators:
    """Parse the one-generator-per-line text format (``#`` starts a comment)."""
    lines = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            if line.lstrip("+-−")[:1] == "i":
                raise PauliError(f"generator {line!r} is not Hermitian")
            lines.append(line)
    return StabilizerGenerators.from_strings(lines)


def independence_check(gens: Iterable[PauliOperator]) -> int:
    """F2 rank of the generators' symplectic vectors."""
    return gf2_rank([g.symplectic() for g in gens])


def group_element(gens: StabilizerGenerators, x: int | Sequence[int]) -> tuple[PauliOperator, int]:
    """``g_1^{x_1} ... g_r^{x_r}`` and its parity bit.

    ``x`` is either a bit sequence or an integer with ``x_1`` least significant.
    """
    if not isinstance(x, int):
        bits = list(x)
        if len(bits) != gens.r:
            raise PauliError(f"expected {gens.r} exponents, got {len(bits)}")
        x = sum(b << i for i, b in enumerate(bits))
    m = PauliOperator.identity(gens.n)
    i = 0
    while x:
        if x & 1:
            m = multiply(m, gens[i])
        x >>= 1
        i += 1
    if m.phase % 2:
        raise PauliError("odd phase in group element; generators do not commute")
    return m, m.phase // 2


def enumerate_group(gens: StabilizerGenerators) -> list[PauliOperator]:
    """All ``2**r`` elements, indexed by little-endian exponent vector."""
    out = [PauliOperator.identity(gens.n)]
    for g in gens:
        out += [multiply(m, g) for m in out]
    return out
