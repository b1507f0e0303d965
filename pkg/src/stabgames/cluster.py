"""Cyclic cluster state games via 3x3 transfer matrices.

For a strategy summarised by bit vectors ``u`` and ``v`` the payoff
``f_n = sum_x (-1)^(...)`` (satisfied minus violated queries) equals the
trace of an ordered product of reduced transfer matrices; the winning
probability is ``1/2 + f_n / 2^(n+1)``.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from decimal import ROUND_HALF_EVEN, Decimal, localcontext
from fractions import Fraction

import numpy as np

from stabgames.anf import CapExceeded

CLUSTER_CAP = 14
HALF = Fraction(1, 2)
DYADIC_BITS = 64


def reduced_transfer(u: int, v: int) -> np.ndarray:
    su, suv = (-1) ** u, (-1) ** (u + v)
    return np.array([[1, su, suv], [1, 0, 0], [0, suv, -su]], dtype=np.int64)


def full_transfer(u: int, v: int) -> np.ndarray:
    """Two-bond matrix indexed by ``(x_{j-1} x_j) -> (x_j x_{j+1})``."""
    su, suv = (-1) ** u, (-1) ** (u + v)
    return np.array(
        [[1, 1, 0, 0], [0, 0, su, suv], [1, 1, 0, 0], [0, 0, suv, -su]], dtype=np.int64
    )


def qr_factors(u: int, v: int) -> tuple[np.ndarray, np.ndarray]:
    """``full_transfer(u, v) = Q R`` with ``Q`` 4x3 and ``R`` 3x4 (rank three)."""
    su, suv = (-1) ** u, (-1) ** (u + v)
    s = math.sqrt(2)
    q = np.array([[1, 0, 0], [0, su, suv], [1, 0, 0], [0, suv, -su]], dtype=float) / s
    r = np.array([[s, s, 0, 0], [0, 0, s, 0], [0, 0, 0, s]], dtype=float)
    return q, r


@dataclass(frozen=True)
class StrategyUV:
    """Payoff-relevant summary of a strategy: linear bits ``u``, coupling bits ``v``
    and the parity ``w`` of the identity answers, which flips the payoff sign."""

    u: tuple[int, ...]
    v: tuple[int, ...]
    w: int = 0

    def __post_init__(self) -> None:
        if len(self.u) != len(self.v):
            raise ValueError("u and v must have equal length")
        if self.w not in (0, 1):
            raise ValueError("w must be 0 or 1")

    @property
    def n(self) -> int:
        return len(self.u)

    @classmethod
    def zeros(cls, n: int) -> StrategyUV:
        return cls((0,) * n, (0,) * n)

    @classmethod
    def from_strategy(cls, b: int, n: int) -> StrategyUV:
        """Summarise a ``4n``-bit strategy (``b[4j + k]`` answers letter ``k`` at site ``j``)."""
        bit = lambda j, k: (b >> (4 * (j % n) + k)) & 1  # noqa: E731
        u = tuple(
            (bit(j - 1, 0) + bit(j, 0) + bit(j + 1, 0) + bit(j - 1, 3) + bit(j, 1) + bit(j + 1, 3)) & 1
            for j in range(n)
        )
        v = tuple((bit(j, 0) + bit(j, 1) + bit(j, 2) + bit(j, 3)) & 1 for j in range(n))
        w = sum(bit(j, 0) for j in range(n)) & 1
        return cls(u, v, w)

    def to_strategy(self) -> int:
        """A strategy realising this summary.

        ``b^X_j = u_j`` and ``b^Y_j = v_j + u_j`` with Z answers 0 give
        ``u_j`` directly and ``v_j = b^X_j + b^Y_j``.  For ``w = 1`` site 0
        also answers 1 to I and Z, and flips its X and Y answers.
        """
        b = 0
        for j in range(self.n):
            b |= self.u[j] << (4 * j + 1)
            b |= (self.u[j] ^ self.v[j]) << (4 * j + 2)
        if self.w:
            b ^= 0b1111
        return b

    def key(self) -> tuple[int, ...]:
        return self.u + self.v + (self.w,)


def _check_n(n: int) -> None:
    if n < 3:
        raise ValueError("cyclic cluster games need n >= 3")


def payoff(s: StrategyUV) -> int:
    _check_n(s.n)
    m = np.eye(3, dtype=np.int64)
    for u, v in zip(s.u, s.v):
        m = m @ reduced_transfer(u, v)
    return (-1) ** s.w * int(np.trace(m))


def payoff_full(s: StrategyUV) -> int:
    _check_n(s.n)
    m = np.eye(4, dtype=np.int64)
    for u, v in zip(s.u, s.v):
        m = m @ full_transfer(u, v)
    return (-1) ** s.w * int(np.trace(m))


def payoff_bruteforce(s: StrategyUV) -> int:
    """Direct signed sum over all ``2^n`` queries."""
    n = s.n
    _check_n(n)
    total = 0
    for x in range(1 << n):
        e = s.w
        for j in range(n):
            xm, xj, xp = (x >> ((j - 1) % n)) & 1, (x >> j) & 1, (x >> ((j + 1) % n)) & 1
            e += xm * xj * xp + s.u[j] * xj + s.v[j] * xj * (xm + xp)
        total += -1 if e & 1 else 1
    return total


def win_probability(s: StrategyUV) -> Fraction:
    return HALF + Fraction(payoff(s), 1 << (s.n + 1))


# symbol k = 2u + v for one site
_SYMBOLS = [reduced_transfer(k >> 1, k & 1) for k in range(4)]


def _half_products(m: int) -> np.ndarray:
    """Products over ``m`` sites for all ``4^m`` words; word digit ``j`` (base 4) is site ``j``."""
    prods = np.eye(3, dtype=np.int64)[None]
    for _ in range(m):
        # new site is the last factor; its digit is the most significant
        prods = np.concatenate([prods @ t for t in _SYMBOLS])
    return prods


def _scan_block(args) -> tuple[int, int, list[tuple[int, int]], list[tuple[int, int]]]:
    left, right_t, offset = args
    scores = left @ right_t
    hi, lo = int(round(scores.max())), int(round(scores.min()))
    at = lambda v: [(int(a) + offset, int(b)) for a, b in zip(*np.nonzero(scores == v))]  # noqa: E731
    return hi, lo, at(hi), at(lo)


def classical_value_cluster(
    n: int, cap: int = CLUSTER_CAP, workers: int = 1, *, lhv: bool = False
) -> tuple[Fraction, StrategyUV]:
    """Exact optimum over all summaries, with the smallest ``(u, v, w)`` witness.

    Split the ring into a left word of ``h`` sites and a right word of
    ``n - h``; the trace of a product is the dot product of the left matrix
    with the transposed right matrix, so every pair is scored by one matrix
    product.  Entries stay below ``3 * 1.85^n``, exact in float64 for n < 50.
    An odd number of identity answers negates the payoff, so the classical
    value uses the largest ``|trace|``; with ``lhv`` only ``w = 0`` counts.
    """
    _check_n(n)
    if n > cap:
        raise CapExceeded(f"n={n} exceeds the cluster cap {cap}")
    if 3 * (2 + math.sqrt(2)) ** (n / 2) >= 2 ** 52:
        raise CapExceeded("payoff magnitudes would exceed exact float range")
    h = n // 2
    left = _half_products(h).reshape(-1, 9).astype(np.float64)
    right = _half_products(n - h)
    right_t = right.transpose(0, 2, 1).reshape(-1, 9).astype(np.float64).T.copy()
    rows = max(1, (1 << 24) // right_t.shape[1])
    jobs = [(left[i:i + rows], right_t, i) for i in range(0, left.shape[0], rows)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(workers) as ex:
            parts = list(ex.map(_scan_block, jobs))
    else:
        parts = [_scan_block(j) for j in jobs]
    top = max(p[0] for p in parts)
    best = top if lhv else max(top, -min(p[1] for p in parts))
    witness = None
    for hi, lo, hi_at, lo_at in parts:
        found = [(a, b, 0) for a, b in hi_at] if hi == best else []
        if not lhv and lo == -best:
            found += [(a, b, 1) for a, b in lo_at]
        for a, b, w in found:
            digits = [(a >> (2 * j)) & 3 for j in range(h)] + [(b >> (2 * j)) & 3 for j in range(n - h)]
            cand = StrategyUV(tuple(d >> 1 for d in digits), tuple(d & 1 for d in digits), w)
            if witness is None or cand.key() < witness.key():
                witness = cand
    assert payoff(witness) == best
    return HALF + Fraction(best, 1 << (n + 1)), witness


def power_sum(n: int) -> int:
    """``lambda0^n + lambda+^n + lambda-^n`` for the roots of ``l^3 - 2l - 2``."""
    p = [3, 0, 4]
    while len(p) <= n:
        p.append(2 * p[-2] + 2 * p[-3])
    return p[n]


def lower_bound_closed_form(n: int) -> Fraction:
    _check_n(n)
    return HALF + Fraction(power_sum(n), 1 << (n + 1))


def _dyadic_ceil(x: Fraction, bits: int = DYADIC_BITS) -> Fraction:
    return Fraction(math.ceil(x * (1 << bits)), 1 << bits)


class Sqrt2Element:
    """``a + b sqrt(2)`` with integer coefficients."""

    __slots__ = ("a", "b")

    def __init__(self, a: int, b: int = 0):
        self.a, self.b = a, b

    def __mul__(self, o: Sqrt2Element) -> Sqrt2Element:
        return Sqrt2Element(self.a * o.a + 2 * self.b * o.b, self.a * o.b + self.b * o.a)

    def __add__(self, o: Sqrt2Element) -> Sqrt2Element:
        return Sqrt2Element(self.a + o.a, self.b + o.b)

    def __eq__(self, o: object) -> bool:
        return isinstance(o, Sqrt2Element) and (self.a, self.b) == (o.a, o.b)

    def __hash__(self) -> int:
        return hash((self.a, self.b))

    def __repr__(self) -> str:
        return f"Sqrt2Element({self.a}, {self.b})"

    def __pow__(self, k: int) -> Sqrt2Element:
        out, base = Sqrt2Element(1), self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def upper(self, bits: int = 200) -> Fraction:
        """A rational upper bound within ``2^-bits`` relative slack."""
        scale = 1 << bits
        root = math.isqrt(2 * scale * scale)  # floor(sqrt2 * scale)
        b_term = self.b * (root + 1) if self.b >= 0 else self.b * root
        return Fraction(self.a * scale + b_term, scale)


def singular_value_sum_upper(n: int) -> Fraction:
    """Certified upper bound on ``s1^n + s2^n + s3^n`` (exact for even ``n``)."""
    m, odd = divmod(n, 2)
    plus, minus = Sqrt2Element(2, 1) ** m, Sqrt2Element(2, -1) ** m
    if not odd:
        total = plus + minus + Sqrt2Element(2 ** m)
        assert total.b == 0
        return Fraction(total.a)
    # odd n: s1^n = (2+r2)^m sqrt(2+r2), s2^n = 2^m sqrt2, s3^n = (2-r2)^m sqrt(2-r2)
    bits = 200
    scale = 1 << bits
    r2_hi = Fraction(math.isqrt(2 * scale * scale) + 1, scale)
    s1_hi = Fraction(math.isqrt(math.ceil((2 + r2_hi) * scale * scale)) + 1, scale)
    s3_hi = Fraction(math.isqrt(math.ceil((2 - r2_hi + 2 * Fraction(1, scale)) * scale * scale)) + 1, scale)
    return plus.upper(bits) * s1_hi + (2 ** m) * r2_hi + minus.upper(bits) * s3_hi


def singular_value_bound(n: int) -> Fraction:
    _check_n(n)
    m, odd = divmod(n, 2)
    s = singular_value_sum_upper(n)
    value = HALF + s / (1 << (n + 1))
    return value if not odd else _dyadic_ceil(value)


class CubicFieldElement:
    """``a + b l + c l^2`` in ``Q[l] / (l^3 - 2l - 2)``."""

    __slots__ = ("a", "b", "c")

    def __init__(self, a=0, b=0, c=0):
        self.a, self.b, self.c = Fraction(a), Fraction(b), Fraction(c)

    @classmethod
    def generator(cls) -> CubicFieldElement:
        return cls(0, 1, 0)

    def coeffs(self) -> tuple[Fraction, Fraction, Fraction]:
        return self.a, self.b, self.c

    def __eq__(self, o: object) -> bool:
        return isinstance(o, CubicFieldElement) and self.coeffs() == o.coeffs()

    def __repr__(self) -> str:
        return f"CubicFieldElement({self.a}, {self.b}, {self.c})"

    def __add__(self, o: CubicFieldElement) -> CubicFieldElement:
        return CubicFieldElement(self.a + o.a, self.b + o.b, self.c + o.c)

    def __sub__(self, o: CubicFieldElement) -> CubicFieldElement:
        return CubicFieldElement(self.a - o.a, self.b - o.b, self.c - o.c)

    def __mul__(self, o: CubicFieldElement | int | Fraction) -> CubicFieldElement:
        if not isinstance(o, CubicFieldElement):
            return CubicFieldElement(self.a * o, self.b * o, self.c * o)
        # degree-4 product, then l^3 = 2l + 2 and l^4 = 2l^2 + 2l
        d0 = self.a * o.a
        d1 = self.a * o.b + self.b * o.a
        d2 = self.a * o.c + self.b * o.b + self.c * o.a
        d3 = self.b * o.c + self.c * o.b
        d4 = self.c * o.c
        return CubicFieldElement(d0 + 2 * d3, d1 + 2 * d3 + 2 * d4, d2 + 2 * d4)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> CubicFieldElement:
        out, base = CubicFieldElement(1), self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def interval(self, lo: Fraction, hi: Fraction) -> tuple[Fraction, Fraction]:
        """Range of the real embedding when the root lies in ``[lo, hi]`` (``lo > 0``)."""
        lo_v, hi_v = self.a, self.a
        for coef, (p, q) in ((self.b, (lo, hi)), (self.c, (lo * lo, hi * hi))):
            if coef >= 0:
                lo_v, hi_v = lo_v + coef * p, hi_v + coef * q
            else:
                lo_v, hi_v = lo_v + coef * q, hi_v + coef * p
        return lo_v, hi_v

    def sign(self, max_bits: int = 400) -> int:
        """Sign at the real root, refining the bracket until decided."""
        bits = 32
        while bits <= max_bits:
            lo, hi = lambda0_bracket(bits)
            a, b = self.interval(lo, hi)
            if a > 0:
                return 1
            if b < 0:
                return -1
            if self == CubicFieldElement():
                return 0
            bits *= 2
        raise ArithmeticError("sign undecided at the precision limit")


def _cubic(x: Fraction) -> Fraction:
    return x * x * x - 2 * x - 2


def lambda0_bracket(bits: int = 80) -> tuple[Fraction, Fraction]:
    """Rational bracket of width at most ``2^-bits`` around the real root, by bisection from ``[1.7, 1.8]``."""
    lo, hi = Fraction(17, 10), Fraction(18, 10)
    assert _cubic(lo) < 0 < _cubic(hi)
    width = Fraction(1, 1 << bits)
    while hi - lo > width:
        mid = (lo + hi) / 2
        if _cubic(mid) < 0:
            lo = mid
        else:
            hi = mid
    return lo, hi


def lambda0_power_upper(n: int, bits: int = 96) -> Fraction:
    lo, hi = lambda0_bracket(bits)
    return (CubicFieldElement.generator() ** n).interval(lo, hi)[1]


def jsr_upper_bound(n: int, clamp: bool = True) -> Fraction:
    """``1/2 + 3 lambda0^n / 2^(n+1)`` rounded up to a dyadic; clamped to 1."""
    _check_n(n)
    value = _dyadic_ceil(HALF + 3 * lambda0_power_upper(n) / (1 << (n + 1)))
    return min(Fraction(1), value) if clamp else value


def fidelity_threshold(n: int, exact: Fraction | None = None) -> tuple[Fraction, Fraction | None]:
    """Certified ``3 (lambda0 / 2)^n`` (upper-rounded) and, if given, ``2 p* - 1``."""
    _check_n(n)
    rig = _dyadic_ceil(3 * lambda0_power_upper(n) / (1 << n))
    return rig, None if exact is None else 2 * exact - 1


def format_fc(x: Fraction, places: int = 4) -> str:
    with localcontext() as ctx:
        ctx.prec = 50
        d = Decimal(x.numerator) / Decimal(x.denominator)
        return str(d.quantize(Decimal(1).scaleb(-places), rounding=ROUND_HALF_EVEN))


def over_power_of_two(x: Fraction, n: int) -> str:
    """``x`` written over the denominator ``2^n`` (not reduced)."""
    num = x * (1 << n)
    assert num.denominator == 1
    return f"{num.numerator}/{1 << n}"


@dataclass(frozen=True)
class TableRow:
    n: int
    lower: Fraction
    exact: Fraction
    witness: StrategyUV

    def cells(self) -> list[str]:
        return [
            str(self.n),
            over_power_of_two(self.lower, self.n),
            over_power_of_two(self.exact, self.n),
            format_fc(2 * self.exact - 1),
        ]


def cluster_table(n_max: int, n_min: int = 3, cap: int = CLUSTER_CAP, workers: int = 1) -> list[TableRow]:
    if n_max > cap:
        raise CapExceeded(f"n_max={n_max} exceeds the cluster cap {cap}")
    rows = []
    for n in range(n_min, n_max + 1):
        exact, wit = classical_value_cluster(n, cap=cap, workers=workers)
        rows.append(TableRow(n, lower_bound_closed_form(n), exact, wit))
    return rows


TABLE_HEADER = ["n", "lower_bound", "exact", "F_c"]


def table_csv(rows: list[TableRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TABLE_HEADER)
    for row in rows:
        w.writerow(row.cells())
    return buf.getvalue()


# invariant polytope ---------------------------------------------------------


_SIGNS = np.array([[a, b, c] for a in (1, -1) for b in (1, -1) for c in (1, -1)])


def polytope_vertices(lam: float) -> np.ndarray:
    """The three base points and their reflections in the coordinate planes (24 vertices)."""
    s = math.sqrt(4 * lam * lam + 8 * lam + 6)
    base = np.array(
        [
            [lam * (lam + 1), lam + 1, 1],
            [lam + 2, lam + 1, (lam + 2) / lam],
            [2 * (lam * lam + lam - 1) / (lam * lam), (lam + 2) / lam, lam + 1],
        ]
    ) / s
    return np.concatenate([base[i] * _SIGNS for i in range(3)])


def lambda0_float() -> float:
    lo, hi = lambda0_bracket(60)
    return float((lo + hi) / 2)


@dataclass(frozen=True)
class PolytopeReport:
    passed: bool
    max_outside: float  # worst image point beyond the target (direction a)
    max_uncovered: float  # worst target vertex beyond the image hull (direction b)
    tolerance: float

    @property
    def max_violation(self) -> float:
        return max(self.max_outside, self.max_uncovered)


def verify_invariant_polytope(
    tolerance: float = 1e-9,
    lam: float | None = None,
    vertices: np.ndarray | None = None,
    scale: float = 1.0,
) -> PolytopeReport:
    """Check ``scale * lam * P = conv(S T P)`` over the four reduced matrices.

    ``S`` ranges over the coordinate reflections, under which ``P`` is
    symmetric, so the closure leaves the joint spectral radius unchanged.
    (a) every image satisfies the facet inequalities of the target;
    (b) every target vertex satisfies those of the image hull.
    """
    from scipy.spatial import ConvexHull

    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    lam = lambda0_float() if lam is None else lam
    verts = polytope_vertices(lam) if vertices is None else np.asarray(vertices, dtype=float)
    images = np.concatenate([verts @ reduced_transfer(k >> 1, k & 1).T for k in range(4)])
    images = np.concatenate([images * sg for sg in _SIGNS])
    target = scale * lam * verts
    hull_t = ConvexHull(target)
    outside = float((images @ hull_t.equations[:, :3].T + hull_t.equations[:, 3]).max())
    hull_i = ConvexHull(images)
    uncovered = float((target @ hull_i.equations[:, :3].T + hull_i.equations[:, 3]).max())
    passed = outside <= tolerance and uncovered <= tolerance
    return PolytopeReport(passed, outside, uncovered, tolerance)
