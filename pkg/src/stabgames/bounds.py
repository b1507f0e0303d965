"""Upper and lower bounds on the classical value.

Every upper bound here is certified: rationals are exact and the one square
root that appears is rounded upwards.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from stabgames.anf import (
    TABLE_CAP,
    BooleanPolynomial,
    CapExceeded,
    QuadraticForm,
    boolean_derivative,
    coupling_rank,
    nl1,
    nl2_exact,
    quadratic_rank,
    truth_table,
)
from stabgames.gf2 import rank as gf2_rank
from stabgames.states import ToricLattice, toric_derivative_direction, toric_parity_polynomial

HALF = Fraction(1, 2)
BOUND_NAMES = ("RM78", "NL1", "NL2", "DERIV1", "DERIV2", "TORIC")
SQRT_SLACK_BITS = 64


@dataclass
class BoundReport:
    instance: str
    lower: Fraction
    upper_candidates: dict[str, Fraction] = field(default_factory=dict)
    exact: Fraction | None = None

    @property
    def best_upper(self) -> Fraction:
        return min(self.upper_candidates.values(), default=Fraction(1))

    def consistent(self) -> bool:
        if self.exact is None:
            return self.lower <= self.best_upper
        return self.lower <= self.exact <= self.best_upper

    @property
    def gap(self) -> Fraction | None:
        """Finite-size difference ``2 (1 - p*)`` when the exact value is known."""
        return None if self.exact is None else 2 * (1 - self.exact)

    def csv_row(self) -> list[str]:
        cell = lambda v: "" if v is None else f"{v.numerator}/{v.denominator}"  # noqa: E731
        return (
            [self.instance, cell(self.lower)]
            + [cell(self.upper_candidates.get(k)) for k in BOUND_NAMES]
            + [cell(self.best_upper), cell(self.exact)]
        )


CSV_HEADER = ["instance", "lower", *BOUND_NAMES, "best_upper", "exact"]


def reports_csv(reports: list[BoundReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for rep in reports:
        w.writerow(rep.csv_row())
    return buf.getvalue()


def rm78_bound(has_advantage: bool) -> Fraction:
    """7/8 whenever the full-query game admits a refutation, else 1."""
    return Fraction(7, 8) if has_advantage else Fraction(1)


def nl2_bound(c: BooleanPolynomial) -> Fraction:
    """``1 - nl2(c) / 2^r`` for the full query set."""
    return 1 - Fraction(nl2_exact(truth_table(c)), 1 << c.n_vars)


def nl2_lower_from_derivatives(c: BooleanPolynomial, directions: list[int] | None = None) -> int:
    """Certified ``nl2(c) >= ceil(max_a nl1(D_a c) / 2)``."""
    if directions is None:
        directions = list(range(1, 1 << c.n_vars))
    best = max(nl1(truth_table(boolean_derivative(c, a))) for a in directions)
    return (best + 1) // 2


def nl1_coset_bound(c_restricted: BooleanPolynomial) -> Fraction:
    """``1 - nl1(c') / 2^(r-t)`` for a coset with affine incidence span."""
    m = c_restricted.n_vars
    if c_restricted.degree() <= 2:
        rk = quadratic_rank(QuadraticForm.from_polynomial(c_restricted))
        dist = (1 << m) // 2 - (1 << m >> (rk // 2 + 1)) if m else 0
    else:
        dist = nl1(truth_table(c_restricted))
    return 1 - Fraction(dist, 1 << m)


def nl_bounds(c: BooleanPolynomial, regime: str = "FULL") -> Fraction:
    """``FULL``: the RM(2) distance bound; ``PARTIAL``: the nl1 bound on ``c`` already restricted."""
    if regime == "FULL":
        return nl2_bound(c)
    if regime == "PARTIAL":
        if c.degree() > 2:
            raise ValueError("partial regime needs a quadratic restricted parity")
        return nl1_coset_bound(c)
    raise ValueError(f"unknown regime {regime!r}")


def coset_value_by_rank(q: QuadraticForm | BooleanPolynomial) -> Fraction:
    """``1/2 + 2^(-rank/2 - 1)`` for a quadratic restricted parity."""
    rk = quadratic_rank(q)
    if rk == 0:
        raise ValueError("restricted parity has no quadratic part")
    return HALF + Fraction(1, 1 << (rk // 2 + 1))


def affine_span_full(incidence: dict, n_vars: int) -> bool:
    """Do the restricted incidence polynomials span every affine function?"""
    rows = []
    for p in incidence.values():
        if p.degree() > 1:
            return False
        rows.append(sum(1 << (m.bit_length() if m else 0) for m in p.monomials))
    return gf2_rank(rows) == n_vars + 1


def default_directions(c: BooleanPolynomial) -> list[int]:
    """Unit vectors plus the pair supports inside cubic monomials."""
    dirs = {1 << i for i in range(c.n_vars)}
    for m in c.homogeneous_part(3).monomials:
        bits = [i for i in range(c.n_vars) if (m >> i) & 1]
        for i, j in itertools.combinations(bits, 2):
            dirs.add((1 << i) | (1 << j))
    return sorted(dirs)


def derivative_rank(c: BooleanPolynomial, a: int) -> int:
    return coupling_rank(boolean_derivative(c, a))


def deriv1_from_rank(max_rank: int) -> Fraction:
    return Fraction(3, 4) + Fraction(1, 1 << (max_rank // 2 + 2))


def cubic_couplings(c: BooleanPolynomial) -> list[np.ndarray]:
    """Per variable ``k``, the alternating matrix (row masks) that ``a_k`` adds to the coupling of ``D_a c``."""
    r = c.n_vars
    mats = [np.zeros(r, dtype=np.uint64) for _ in range(r)]
    for m in c.homogeneous_part(3).monomials:
        bits = [i for i in range(r) if (m >> i) & 1]
        for k in bits:
            i, j = (b for b in bits if b != k)
            mats[k][i] ^= np.uint64(1 << j)
            mats[k][j] ^= np.uint64(1 << i)
    return mats


def batch_rank(mats: np.ndarray, r: int) -> np.ndarray:
    """F2 ranks of a batch ``(B, r)`` of row-mask matrices."""
    m = mats.copy()
    out = np.zeros(m.shape[0], dtype=np.int64)
    idx = np.arange(m.shape[0])
    for col in range(r):
        bit = np.uint64(1 << col)
        has = (m & bit) != 0
        found = has.any(axis=1)
        piv = m[idx, has.argmax(axis=1)]
        m ^= np.where(has, piv[:, None], np.uint64(0))
        out += found
    return out


def derivative_rank_histogram(c: BooleanPolynomial, cap: int = TABLE_CAP) -> dict[int, int]:
    """How many directions ``a`` (all ``2^r``) give each coupling rank of ``D_a c``."""
    r = c.n_vars
    if r > cap:
        raise CapExceeded(f"full direction sweep supports r <= {cap}, got {r}")
    mats = cubic_couplings(c)
    k_lo = min(r, 14)
    table = np.zeros((1 << k_lo, r), dtype=np.uint64)
    for k in range(k_lo):
        table[1 << k: 2 << k] = table[: 1 << k] ^ mats[k]
    hist: dict[int, int] = {}
    for hi in range(1 << (r - k_lo)):
        extra = np.zeros(r, dtype=np.uint64)
        for k in range(r - k_lo):
            if (hi >> k) & 1:
                extra ^= mats[k_lo + k]
        ranks = batch_rank(table ^ extra, r)
        for v, cnt in zip(*np.unique(ranks, return_counts=True)):
            hist[int(v)] = hist.get(int(v), 0) + int(cnt)
    return hist


def sqrt_upper(x: Fraction, bits: int = SQRT_SLACK_BITS) -> Fraction:
    """Smallest multiple of ``2^-bits`` whose square is at least ``x``."""
    scaled = x * (1 << (2 * bits))
    y = math.isqrt(scaled.numerator // scaled.denominator)
    while Fraction(y * y) < scaled:
        y += 1
    return Fraction(y, 1 << bits)


def deriv2_from_histogram(hist: dict[int, int], r: int) -> Fraction:
    total = sum(Fraction(cnt, 1 << (rk // 2)) for rk, cnt in hist.items())
    return HALF + HALF * sqrt_upper(total / (1 << r))


def derivative_bounds(
    c: BooleanPolynomial, directions: list[int] | None = None, *, average: bool = True, cap: int = TABLE_CAP
) -> tuple[Fraction, Fraction | None]:
    """Bound (i) from the best supplied direction and bound (ii) from the full average.

    Bound (ii) is ``None`` when ``average`` is off or ``r`` exceeds ``cap``.
    """
    if directions is None:
        directions = default_directions(c)
    best = max((derivative_rank(c, a) for a in directions), default=0)
    b1 = deriv1_from_rank(best)
    b2 = None
    if average and c.n_vars <= cap:
        b2 = deriv2_from_histogram(derivative_rank_histogram(c, cap), c.n_vars)
    return b1, b2


@dataclass(frozen=True)
class ToricBound:
    L: int
    value: Fraction
    direction: int
    certified_rank: int
    required_rank: int
    plaquette_block_rank: int


def toric_bound(L: int) -> ToricBound:
    """``3/4 + 2^(-floor(L/2)^2 - 2)`` with its derivative direction checked."""
    lat = ToricLattice(L)
    c = toric_parity_polynomial(lat)
    a = toric_derivative_direction(lat)
    d = boolean_derivative(c, a)
    rk = coupling_rank(d)
    need = 2 * (L // 2) ** 2
    plaq = range(L * L - 1, 2 * L * L - 2)
    keep = sum(1 << v for v in plaq)
    pp = BooleanPolynomial(
        d.n_vars, frozenset(m for m in d.homogeneous_part(2).monomials if m & keep == m)
    )
    pp_rank = coupling_rank(pp)
    if rk < need or pp_rank < need:
        raise AssertionError(f"derivative rank {rk} (plaquette block {pp_rank}) below {need}")
    value = Fraction(3, 4) + Fraction(1, 1 << ((L // 2) ** 2 + 2))
    return ToricBound(L, value, a, rk, need, pp_rank)
