"""Stabilizer-testing games: incidence data, classical values and refutations.

Query ``x`` (an exponent vector, ``x_1`` least significant) asks site ``j`` the
letter of ``prod_i g_i^{x_i}`` at ``j``; the expected XOR of the answers is
the parity bit of that element.  A deterministic classical strategy is a
vector ``b`` of ``4n`` bits, ``b[4j + k]`` being site ``j``'s answer to letter
``k`` (0..3 for I, X, Y, Z).
"""

from __future__ import annotations

import json
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np

from stabgames.anf import BooleanPolynomial, CapExceeded
from stabgames.gf2 import IncrementalBasis, bit_reverse_key, coset_min, reduced_lowpivot_basis
from stabgames.parityfn import group_polynomials
from stabgames.pauli import PauliError, StabilizerGenerators

DIM_CAP = 26
QUERY_CAP = 1 << 20
# budget for the low-combination table, in 64-bit words
_TABLE_WORDS = 1 << 22


@dataclass(frozen=True)
class QuerySpec:
    """Full query set, or the coset fixing some exponent variables (0-based)."""

    fixed: tuple[tuple[int, int], ...] = ()

    @classmethod
    def full(cls) -> QuerySpec:
        return cls()

    @classmethod
    def coset(cls, assignment: dict[int, int]) -> QuerySpec:
        for b in assignment.values():
            if b not in (0, 1):
                raise ValueError("coset values must be bits")
        return cls(tuple(sorted(assignment.items())))

    @classmethod
    def parse(cls, text: str) -> QuerySpec:
        """``"full"`` or ``"coset:x1=1,x3=0"`` (1-based variables)."""
        text = text.strip()
        if text == "full":
            return cls.full()
        if not text.startswith("coset:"):
            raise ValueError(f"unknown query spec {text!r}")
        assignment = {}
        for part in text[len("coset:"):].split(","):
            m = re.fullmatch(r"\s*x(\d+)\s*=\s*([01])\s*", part)
            if not m or int(m.group(1)) < 1:
                raise ValueError(f"bad coset term {part!r}")
            assignment[int(m.group(1)) - 1] = int(m.group(2))
        return cls.coset(assignment)

    @property
    def is_full(self) -> bool:
        return not self.fixed

    def __str__(self) -> str:
        if self.is_full:
            return "full"
        return "coset:" + ",".join(f"x{v + 1}={b}" for v, b in self.fixed)


@dataclass
class GameInstance:
    gens: StabilizerGenerators
    queries: QuerySpec = field(default_factory=QuerySpec)
    query_cap: int = QUERY_CAP

    def __post_init__(self) -> None:
        r = self.gens.r
        fixed = dict(self.queries.fixed)
        if any(v < 0 or v >= r for v in fixed):
            raise ValueError(f"coset fixes a variable outside 1..{r}")
        if len(fixed) >= r and r > 0 and fixed:
            raise ValueError("coset must leave at least one variable free")
        self.free = [v for v in range(r) if v not in fixed]
        if (1 << len(self.free)) > self.query_cap:
            raise CapExceeded(f"{1 << len(self.free)} queries exceed the cap {self.query_cap}")

    @property
    def n(self) -> int:
        return self.gens.n

    @property
    def r(self) -> int:
        return self.gens.r

    @property
    def query_count(self) -> int:
        return 1 << len(self.free)

    def exponent(self, q: int) -> int:
        """Full exponent vector of query index ``q``."""
        x = sum(1 << v for v, b in self.queries.fixed if b)
        for i, v in enumerate(self.free):
            if (q >> i) & 1:
                x |= 1 << v
        return x

    @cached_property
    def _elements(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        n = self.n
        if n > 64:
            raise CapExceeded("materializing rows needs n <= 64")
        gens = list(self.gens)
        base = None
        for v, b in self.queries.fixed:
            if b:
                base = gens[v] if base is None else base * gens[v]
        xs = np.array([base.x if base else 0], dtype=np.uint64)
        zs = np.array([base.z if base else 0], dtype=np.uint64)
        ph = np.array([base.phase if base else 0], dtype=np.int64)
        for v in self.free:
            g = gens[v]
            gx, gz = np.uint64(g.x), np.uint64(g.z)
            nx, nz = xs ^ gx, zs ^ gz
            wy = lambda a, b: np.bitwise_count(a & b).astype(np.int64)  # noqa: E731
            nph = (
                ph + g.phase + wy(xs, zs) + (g.x & g.z).bit_count() - wy(nx, nz)
                + 2 * np.bitwise_count(zs & gx).astype(np.int64)
            ) % 4
            xs, zs, ph = np.concatenate([xs, nx]), np.concatenate([zs, nz]), np.concatenate([ph, nph])
        if np.any(ph % 2):
            raise PauliError("odd phase in a group element")
        return xs, zs, ph

    @cached_property
    def letters(self) -> np.ndarray:
        """``(queries, n)`` array of letter indices."""
        xs, zs, _ = self._elements
        j = np.arange(self.n, dtype=np.uint64)
        xb = ((xs[:, None] >> j) & np.uint64(1)).astype(np.uint8)
        zb = ((zs[:, None] >> j) & np.uint64(1)).astype(np.uint8)
        # (x, z): (0,0)->I=0, (1,0)->X=1, (1,1)->Y=2, (0,1)->Z=3
        return np.where(zb == 1, np.where(xb == 1, 2, 3), xb).astype(np.uint8)

    @cached_property
    def parity(self) -> np.ndarray:
        return (self._elements[2] // 2).astype(np.uint8)

    def row(self, q: int) -> int:
        """Incidence row of query ``q`` as a ``4n``-bit mask."""
        return sum(1 << (4 * j + int(k)) for j, k in enumerate(self.letters[q]))

    def column(self, t: int) -> np.ndarray:
        j, k = divmod(t, 4)
        return (self.letters[:, j] == k).astype(np.uint8)

    def answers(self, b: int) -> np.ndarray:
        """``A b`` over F2 for strategy mask ``b``."""
        out = np.zeros(self.query_count, dtype=np.uint8)
        for j in range(self.n):
            table = np.array([(b >> (4 * j + k)) & 1 for k in range(4)], dtype=np.uint8)
            out ^= table[self.letters[:, j]]
        return out

    def pairs(self) -> list[tuple[str, int]]:
        """Question-answer pairs: letters as digits 0..3 and the parity."""
        return [("".join(str(int(k)) for k in row), int(c)) for row, c in zip(self.letters, self.parity)]


def build_game(
    gens: StabilizerGenerators, queries: QuerySpec | str | None = None, query_cap: int = QUERY_CAP
) -> GameInstance:
    if queries is None:
        queries = QuerySpec.full()
    elif isinstance(queries, str):
        queries = QuerySpec.parse(queries)
    return GameInstance(gens, queries, query_cap)


def _strategy_mask(b) -> int:
    if isinstance(b, (int, np.integer)):
        return int(b)
    return sum(int(v) << t for t, v in enumerate(b))


def strategy_win_probability(g: GameInstance, b) -> Fraction:
    """Exact winning probability of the deterministic strategy ``b``."""
    mask = _strategy_mask(b)
    if mask >> (4 * g.n):
        raise ValueError("strategy has more than 4n bits")
    wins = int(np.count_nonzero(g.answers(mask) == g.parity))
    return Fraction(wins, g.query_count)


def bias_lower_bound(g: GameInstance) -> Fraction:
    wt = Fraction(int(g.parity.sum()), g.query_count)
    return Fraction(1, 2) + abs(Fraction(1, 2) - wt)


def _pack(bits: np.ndarray) -> int:
    return int.from_bytes(np.packbits(bits, bitorder="little").tobytes(), "little")


def _words(v: int, w: int) -> np.ndarray:
    return np.frombuffer(v.to_bytes(8 * w, "little"), dtype=np.uint64)


@dataclass(frozen=True)
class ClassicalResult:
    value: Fraction
    witness: int
    distance: int
    image_dim: int
    optimal_codewords: int


def _scan(args) -> tuple[int, list[tuple[int, int]]]:
    """Scan high combinations ``start..stop`` (Gray order) against the low table."""
    table, hi_basis, target, start, stop = args
    best = None
    hits: list[tuple[int, int]] = []
    h = start ^ (start >> 1)
    cur = target.copy()
    for i, vec in enumerate(hi_basis):
        if (h >> i) & 1:
            cur ^= vec
    for step in range(start, stop):
        if step != start:
            flip = ((step ^ (step >> 1)) ^ h).bit_length() - 1
            h ^= 1 << flip
            cur ^= hi_basis[flip]
        dist = np.bitwise_count(table ^ cur).sum(axis=1, dtype=np.int64)
        m = int(dist.min())
        if best is None or m < best:
            best, hits = m, []
        if m == best:
            hits.extend((int(lo), h) for lo in np.flatnonzero(dist == m))
    return best, hits


def classical_value(
    g: GameInstance, *, lhv: bool = False, dim_cap: int = DIM_CAP, workers: int = 1
) -> ClassicalResult:
    """Exact optimum of ``1 - d(im A, c) / |Q|`` by enumerating ``im A``.

    Columns are reduced to a basis of the image while recording preimages.
    All codewords are walked as (low table) x (high Gray sequence); every
    optimal codeword's preimage coset is minimised lexicographically (column
    0 first) to fix the witness.  With ``lhv`` the identity-question answers
    are pinned to 0.
    """
    cols = [t for t in range(4 * g.n) if not (lhv and t % 4 == 0)]
    basis = IncrementalBasis()
    image: list[tuple[int, int]] = []  # (codeword, preimage mask over strategy bits)
    kernel: list[int] = []
    for t in cols:
        w, combo, added = basis.insert(_pack(g.column(t)))
        # residue = column + recorded combination, so both cases carry the new label
        labels = combo ^ (1 << (basis.count - 1))
        pre = sum(1 << cols[i] for i in range(basis.count) if (labels >> i) & 1)
        if added:
            image.append((w, pre))
        else:
            kernel.append(pre)
    dim = len(image)
    if dim > dim_cap:
        raise CapExceeded(f"im(A) has dimension {dim} > cap {dim_cap}")

    q = g.query_count
    w = (q + 63) // 64
    target = _words(_pack(g.parity), w)
    vecs = [_words(v, w) for v, _ in image]
    k_lo = min(dim, max(0, (_TABLE_WORDS // w).bit_length() - 1))
    table = np.zeros((1 << k_lo, w), dtype=np.uint64)
    for i in range(k_lo):
        table[1 << i: 2 << i] = table[: 1 << i] ^ vecs[i]
    table ^= target
    hi = vecs[k_lo:]
    total = 1 << len(hi)
    zero = np.zeros(w, dtype=np.uint64)
    if workers > 1 and total >= 2 * workers:
        bounds = [total * k // workers for k in range(workers + 1)]
        jobs = [(table, hi, zero, bounds[k], bounds[k + 1]) for k in range(workers)]
        with ProcessPoolExecutor(workers) as ex:
            parts = list(ex.map(_scan, jobs))
        best = min(p[0] for p in parts)
        hits = [h for p in parts if p[0] == best for h in p[1]]
    else:
        best, hits = _scan((table, hi, zero, 0, total))

    reduced_kernel = reduced_lowpivot_basis(kernel)
    width = 4 * g.n
    witness = None
    for lo, h in hits:
        combo = lo | (h << k_lo)
        pre = 0
        for i in range(dim):
            if (combo >> i) & 1:
                pre ^= image[i][1]
        cand = coset_min(pre, reduced_kernel)
        if witness is None or bit_reverse_key(cand, width) < bit_reverse_key(witness, width):
            witness = cand
    return ClassicalResult(Fraction(q - best, q), witness, best, dim, len(hits))


@dataclass(frozen=True)
class Refutation:
    support: tuple[int, ...]

    def indicator(self, q: int) -> np.ndarray:
        k = np.zeros(q, dtype=np.uint8)
        k[list(self.support)] = 1
        return k


def find_refutation(g: GameInstance, query_cap: int = QUERY_CAP) -> Refutation | None:
    """A set of queries whose rows sum to zero while their parities sum to one.

    Rows of ``[A | c]`` are inserted into a lowest-pivot basis; the first row
    that reduces to the bare parity bit closes a refutation, read off from
    the recorded combination.  ``None`` means ``A b = c`` is solvable.
    """
    if g.query_count > query_cap:
        raise CapExceeded(f"{g.query_count} queries exceed the cap {query_cap}")
    top = 1 << (4 * g.n)
    basis = IncrementalBasis()
    shift = 4 * np.arange(g.n, dtype=np.int64)
    letters = g.letters.astype(np.int64)
    parity = g.parity
    for q in range(g.query_count):
        row = sum(1 << int(v) for v in letters[q] + shift) | (top if parity[q] else 0)
        w, combo, _ = basis.insert(row)
        if w == top:
            mask = combo ^ (1 << q)
            return Refutation(tuple(i for i in range(mask.bit_length()) if (mask >> i) & 1))
    return None


def check_refutation(g: GameInstance, k: Refutation) -> bool:
    ind = k.indicator(g.query_count).astype(bool)
    if not ind.any():
        return False
    col_sums_even = all(
        int(np.count_nonzero(g.letters[ind, j] == letter)) % 2 == 0
        for j in range(g.n)
        for letter in range(4)
    )
    return col_sums_even and int(g.parity[ind].sum()) % 2 == 1


@dataclass(frozen=True)
class CosetRestriction:
    incidence: dict[tuple[int, int], BooleanPolynomial]
    parity: BooleanPolynomial
    free_vars: tuple[int, ...]
    incidence_linear: bool
    parity_quadratic: bool


def restrict_to_coset(gens: StabilizerGenerators, assignment: dict[int, int]) -> CosetRestriction:
    """Fix exponent variables (0-based) and renumber the free ones."""
    gp = group_polynomials(gens)
    if len(assignment) >= gens.r and assignment:
        raise ValueError("assignment must leave a variable free")
    inc = {key: p.substitute(assignment) for key, p in gp.incidence.items()}
    par = gp.parity.substitute(assignment)
    free = tuple(v for v in range(gens.r) if v not in assignment)
    return CosetRestriction(
        inc,
        par,
        free,
        all(p.degree() <= 1 for p in inc.values()),
        par.degree() <= 2,
    )


def quantum_advantage_predicate(gens: StabilizerGenerators) -> bool:
    """True iff the parity polynomial is cubic."""
    return group_polynomials(gens).parity.degree() == 3


def game_report(
    g: GameInstance, *, dim_cap: int = DIM_CAP, query_cap: int = QUERY_CAP, workers: int = 1
) -> dict:
    """JSON-ready summary of one instance."""
    res = classical_value(g, dim_cap=dim_cap, workers=workers)
    lhv = classical_value(g, lhv=True, dim_cap=dim_cap, workers=workers)
    ref = find_refutation(g, query_cap)
    return {
        "n": g.n,
        "r": g.r,
        "queries": str(g.queries),
        "query_count": g.query_count,
        "classical_value": f"{res.value.numerator}/{res.value.denominator}",
        "lhv_value": f"{lhv.value.numerator}/{lhv.value.denominator}",
        "has_quantum_advantage": ref is not None,
        "refutation_support": list(ref.support) if ref else [],
        "witness_strategy": format(res.witness, f"0{g.n}x"),
    }


def report_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"
