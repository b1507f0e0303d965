"""Canonical generating sets, local Pauli rotations, and parity polynomials.

The parity function ``c(x)`` of a stabilizer group records the sign of
``g_1^{x_1} ... g_r^{x_r}``.  For a generating set whose sites each carry at
most two distinct non-identity letters, rotated so those letters are X and Z,
``c`` has degree at most three and every incidence column has degree at most
two.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from stabgames.anf import BooleanPolynomial
from stabgames.pauli import PauliError, PauliOperator, StabilizerGenerators, multiply

I, X, Y, Z = 0, 1, 2, 3

# one step of the cyclic relabelling X -> Y -> Z -> X (I fixed)
_CYCLE = {I: I, X: Y, Y: Z, Z: X}


class NonCanonicalError(PauliError):
    """Generators do not satisfy the at-most-two-letters-per-site form."""


def _proj(p: PauliOperator, j: int) -> int:
    """Site-``j`` projection packed as ``x | z << 1`` (0 means identity)."""
    return ((p.x >> j) & 1) | (((p.z >> j) & 1) << 1)


def site_letters(gens: StabilizerGenerators | list[PauliOperator]) -> list[frozenset[int]]:
    gens = list(gens)
    n = gens[0].n
    return [frozenset(g.letter(j) for g in gens) - {I} for j in range(n)]


def is_canonical(gens: StabilizerGenerators | list[PauliOperator]) -> bool:
    return all(len(s) <= 2 for s in site_letters(gens))


SEARCH_CAP = 16


def canonicalize(gens: StabilizerGenerators, search_cap: int = SEARCH_CAP) -> StabilizerGenerators:
    """Re-base the group so that every site shows at most two letters.

    Input that already has the property is returned unchanged, which keeps
    the variables of structured families (graph states, toric code) tied to
    their natural generators.  Otherwise the two-round elimination and the
    frame elimination run in turn; when both leave three letters somewhere,
    a complete backtracking search over group elements decides.  Such a
    basis need not exist when ``r < n``: :class:`NonCanonicalError` is then
    raised.
    """
    if is_canonical(gens):
        return gens
    try:
        out = _two_round_elimination(gens)
    except StopIteration:
        out = None
    if out is not None and is_canonical(out):
        return out
    out = _frame_elimination(gens)
    if is_canonical(out):
        return out
    if gens.r > search_cap:
        raise NonCanonicalError(
            f"eliminations left a site with three letters and r={gens.r} exceeds the search cap"
        )
    return _basis_search(gens)


def _frame_elimination(gens: StabilizerGenerators) -> StabilizerGenerators:
    """Reduce the X block to the identity after swapping x/z at some sites.

    Swapping is chosen so the swapped X block has full row rank: pivots of
    the X block are kept, and the rows with empty X block get their pivots
    among the remaining columns of their Z block (commutation guarantees
    these exist).  After reduction each generator owns one pivot site,
    where it alone has a nonzero swapped-x bit, so every pivot site shows
    at most two letters.  With ``r == n`` every site is a pivot.
    """
    rows = [(g.x, g.z, g) for g in gens]

    def reduce(key, rows):
        """Gauss-Jordan on ``key(row)``; returns reduced rows and pivot columns."""
        rows = list(rows)
        pivots = []
        k = 0
        for col in range(gens.n):
            hit = next((i for i in range(k, len(rows)) if (key(rows[i]) >> col) & 1), None)
            if hit is None:
                continue
            rows[k], rows[hit] = rows[hit], rows[k]
            x0, z0, g0 = rows[k]
            for i in range(len(rows)):
                if i != k and (key(rows[i]) >> col) & 1:
                    x, z, g = rows[i]
                    rows[i] = (x ^ x0, z ^ z0, multiply(g, g0))
            pivots.append(col)
            k += 1
        return rows, pivots

    rows, xpiv = reduce(lambda t: t[0], rows)
    k = len(xpiv)
    taken = sum(1 << c for c in xpiv)
    zrows, zpiv = reduce(lambda t: t[1] & ~taken, rows[k:])
    swap = sum(1 << c for c in zpiv)
    rows, _ = reduce(lambda t: (t[0] & ~swap) | (t[1] & swap), rows[:k] + zrows)
    return StabilizerGenerators([g for _, _, g in rows], validate=False)


def _two_round_elimination(gens: StabilizerGenerators) -> StabilizerGenerators:
    """Block elimination forwards over sites, then clean-up backwards.

    Round I is block Gaussian elimination along the site order.  Round II
    walks the sites backwards and adds pivot rows (or, where a site has no
    pivot, two chosen earlier rows) to clear the third letter.  Ties are
    broken by lowest row position.  Products are taken as operators, so the
    signs of the new generators are exact.  The no-pivot branch can spoil
    sites handled earlier, so callers must check the result.
    """
    n = gens.n
    rows = list(gens.generators)
    remaining = list(range(len(rows)))
    blocks: dict[int, list[int]] = {}

    # Round I
    for i in range(n):
        cand = [k for k in remaining if _proj(rows[k], i)]
        if not cand:
            continue
        r1 = cand[0]
        v1 = _proj(rows[r1], i)
        block = [r1]
        v2 = 0
        for k in cand[1:]:
            if _proj(rows[k], i) != v1:
                block.append(k)
                v2 = _proj(rows[k], i)
                break
        for k in remaining:
            if k in block:
                continue
            p = _proj(rows[k], i)
            if p == 0:
                continue
            if p == v1:
                rows[k] = multiply(rows[k], rows[r1])
            elif p == v2:
                rows[k] = multiply(rows[k], rows[block[1]])
            else:
                rows[k] = multiply(multiply(rows[k], rows[r1]), rows[block[1]])
        blocks[i] = block
        remaining = [k for k in remaining if k not in block]
    assert not remaining, "dependent generators survived Round I"

    order = [k for i in sorted(blocks) for k in blocks[i]]
    block_of = {k: i for i in blocks for k in blocks[i]}

    # Round II
    for i in range(n - 1, -1, -1):
        span_i = {0}
        for g in rows:
            p = _proj(g, i)
            span_i |= {p ^ q for q in span_i}
        k_i = {1: 0, 2: 1, 4: 2}[len(span_i)]
        if k_i < 2:
            continue
        earlier = [k for k in order if block_of[k] < i]
        block = blocks.get(i, [])
        if len(block) == 2:
            b1, b2 = block
            v1, v2 = _proj(rows[b1], i), _proj(rows[b2], i)
            for s in earlier:
                p = _proj(rows[s], i)
                if p == v1:
                    rows[s] = multiply(rows[s], rows[b1])
                elif p == v2:
                    rows[s] = multiply(rows[s], rows[b2])
                elif p:
                    rows[s] = multiply(multiply(rows[s], rows[b1]), rows[b2])
        elif len(block) == 1:
            (b1,) = block
            v = _proj(rows[b1], i)
            w = next(_proj(rows[s], i) for s in earlier if _proj(rows[s], i) not in (0, v))
            for s in earlier:
                p = _proj(rows[s], i)
                if p == v or p == w ^ v:
                    rows[s] = multiply(rows[s], rows[b1])
        else:
            s1 = next(s for s in earlier if _proj(rows[s], i))
            p1 = _proj(rows[s1], i)
            s2 = next(s for s in earlier if _proj(rows[s], i) not in (0, p1))
            p2 = _proj(rows[s2], i)
            for s in earlier:
                if s in (s1, s2):
                    continue
                p = _proj(rows[s], i)
                if p == p1:
                    rows[s] = multiply(rows[s], rows[s1])
                elif p == p2:
                    rows[s] = multiply(rows[s], rows[s2])
                elif p:
                    rows[s] = multiply(multiply(rows[s], rows[s1]), rows[s2])

    return StabilizerGenerators([rows[k] for k in order])


def _span_rank(vectors, target: int) -> int:
    """Rank of the integer bit-vectors, stopping once ``target`` is reached."""
    pivots: dict[int, int] = {}
    for v in vectors:
        v = int(v)
        while v:
            top = v.bit_length() - 1
            if top not in pivots:
                pivots[top] = v
                break
            v ^= pivots[top]
        if len(pivots) == target:
            break
    return len(pivots)


def _basis_search(gens: StabilizerGenerators) -> StabilizerGenerators:
    """Complete search for a two-letters-per-site basis of the group.

    Every site whose projection is two-dimensional must avoid one of X, Y,
    Z across the basis.  Forbidden letters are assigned site by site (X
    before Y before Z); a branch survives while the group elements that
    respect all assignments still span the group.  A full assignment yields
    the basis of lightest admissible elements (ties by exponent index).
    """
    from stabgames.pauli import enumerate_group

    r = gens.r
    elems = enumerate_group(gens)
    letters = np.array([e.letters() for e in elems], dtype=np.uint8)
    sites = [j for j in range(gens.n) if len(set(letters[:, j].tolist()) - {I}) == 3]
    index = np.arange(len(elems), dtype=np.int64)

    def search(pos: int, allowed: np.ndarray) -> np.ndarray | None:
        if pos == len(sites):
            return allowed
        col = letters[:, sites[pos]]
        for c in (X, Y, Z):
            nxt = allowed & (col != c)
            if _span_rank(index[nxt], r) == r:
                found = search(pos + 1, nxt)
                if found is not None:
                    return found
        return None

    allowed = search(0, np.ones(len(elems), dtype=bool))
    if allowed is None:
        raise NonCanonicalError("no two-letters-per-site basis exists")
    weight = (letters != 0).sum(axis=1)
    cand = sorted(np.flatnonzero(allowed).tolist(), key=lambda k: (int(weight[k]), k))
    picked: list[int] = []
    pivots: dict[int, int] = {}
    for k in cand:
        v = k
        while v and (v.bit_length() - 1) in pivots:
            v ^= pivots[v.bit_length() - 1]
        if v:
            pivots[v.bit_length() - 1] = v
            picked.append(k)
    return StabilizerGenerators([elems[k] for k in picked])


def _rotation_power(letters: frozenset[int]) -> int:
    for p in range(3):
        img = set(letters)
        for _ in range(p):
            img = {_CYCLE[a] for a in img}
        if img <= {X, Z}:
            return p
    raise NonCanonicalError(f"site letters {sorted(letters)} cannot be rotated into {{X, Z}}")


def rotate_letter(letter: int, power: int) -> int:
    for _ in range(power % 3):
        letter = _CYCLE[letter]
    return letter


def rotate_operator(p: PauliOperator, powers: tuple[int, ...]) -> PauliOperator:
    """Apply the per-site cyclic relabelling; the sign is unchanged."""
    return PauliOperator.from_letters(
        [rotate_letter(a, powers[j]) for j, a in enumerate(p.letters())], p.phase
    )


@dataclass(frozen=True)
class CanonicalGenerators:
    """A two-letters-per-site basis together with its X/Z rotation."""

    base: StabilizerGenerators
    site_letters: tuple[frozenset[int], ...]
    rotation: tuple[int, ...]

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def r(self) -> int:
        return self.base.r

    @property
    def rotated(self) -> StabilizerGenerators:
        return StabilizerGenerators(
            [rotate_operator(g, self.rotation) for g in self.base], validate=False
        )

    def original_letter(self, site: int, rotated_letter: int) -> int:
        """Letter of the base generators that rotates onto ``rotated_letter``."""
        return rotate_letter(rotated_letter, 3 - self.rotation[site])


def rotate_to_xz(gens: StabilizerGenerators) -> CanonicalGenerators:
    letters = site_letters(gens)
    if any(len(s) > 2 for s in letters):
        raise NonCanonicalError("a site carries three distinct letters; canonicalize first")
    return CanonicalGenerators(gens, tuple(letters), tuple(_rotation_power(s) for s in letters))


def canonical_form(gens: StabilizerGenerators) -> CanonicalGenerators:
    """``rotate_to_xz(canonicalize(gens))``."""
    return rotate_to_xz(canonicalize(gens))


def _as_canonical(cg: CanonicalGenerators | StabilizerGenerators) -> CanonicalGenerators:
    return cg if isinstance(cg, CanonicalGenerators) else rotate_to_xz(cg)


def _site_sets(cg: CanonicalGenerators) -> list[tuple[int, int]]:
    """Per site, the generator masks carrying rotated X and rotated Z."""
    xs = [0] * cg.n
    zs = [0] * cg.n
    for i, g in enumerate(cg.rotated):
        for j in range(cg.n):
            a = g.letter(j)
            if a == X:
                xs[j] |= 1 << i
            elif a == Z:
                zs[j] |= 1 << i
    return list(zip(xs, zs))


def parity_polynomial(cg: CanonicalGenerators | StabilizerGenerators) -> BooleanPolynomial:
    """ANF of the sign of ``g_1^{x_1} ... g_r^{x_r}`` in the rotated frame.

    Cubic part: for every site carrying both letters, each pair from one
    letter class times each member of the other.  Quadratic part: half of
    the antisymmetrised symplectic overlaps, taken over the integers.
    Linear part: the generator signs.
    """
    cg = _as_canonical(cg)
    r = cg.r
    gens = cg.rotated
    monos: list[int] = []
    for xs, zs in _site_sets(cg):
        if not xs or not zs:
            continue
        for a, b in ((xs, zs), (zs, xs)):
            idx = _bits(a)
            for k, l in itertools.combinations(idx, 2):
                for m in _bits(b):
                    monos.append((1 << k) | (1 << l) | (1 << m))
    for i in range(r):
        for j in range(i + 1, r):
            nij = (gens[i].x & gens[j].z).bit_count()
            nji = (gens[j].x & gens[i].z).bit_count()
            if (nij + nji) % 2:
                raise PauliError(f"generators {i + 1} and {j + 1} anticommute")
            if ((nij - nji) // 2) % 2:
                monos.append((1 << i) | (1 << j))
    for i, g in enumerate(gens):
        if g.sign_bit:
            monos.append(1 << i)
    return BooleanPolynomial.from_monomials(r, monos)


def incidence_polynomials(
    cg: CanonicalGenerators | StabilizerGenerators,
) -> dict[tuple[int, int], BooleanPolynomial]:
    """Indicator polynomials of the letter each site shows, keyed by ``(site, letter)``.

    Letters refer to the base (unrotated) generators.  With ``alpha`` and
    ``beta`` the parities of the rotated X and Z classes at a site, the
    rotated indicators are ``Y: alpha*beta``, ``X: alpha + alpha*beta``,
    ``Z: beta + alpha*beta`` and ``I: 1 + alpha + beta + alpha*beta``.
    """
    cg = _as_canonical(cg)
    r = cg.r
    one = BooleanPolynomial.from_monomials(r, [0])
    out: dict[tuple[int, int], BooleanPolynomial] = {}
    for j, (xs, zs) in enumerate(_site_sets(cg)):
        alpha = BooleanPolynomial.from_monomials(r, [1 << k for k in _bits(xs)])
        beta = BooleanPolynomial.from_monomials(r, [1 << k for k in _bits(zs)])
        ab = alpha * beta
        rotated = {Y: ab, X: alpha + ab, Z: beta + ab, I: one + alpha + beta + ab}
        for letter, poly in rotated.items():
            out[(j, cg.original_letter(j, letter))] = poly
    return out


def parity_table(gens: StabilizerGenerators) -> list[int]:
    """Parity bits of all group elements by direct multiplication (oracle)."""
    from stabgames.pauli import enumerate_group

    return [e.sign_bit for e in enumerate_group(gens)]


def _bits(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def exponent_coordinates(gens: StabilizerGenerators, ops: list[PauliOperator]) -> list[int]:
    """Exponent vector (bitmask over ``gens``) of each group element in ``ops``."""
    from stabgames.gf2 import IncrementalBasis

    basis = IncrementalBasis()
    for g in gens:
        basis.insert(g.symplectic())
    out = []
    for op in ops:
        w, combo = basis.reduce(op.symplectic())
        if w:
            raise PauliError(f"{op} is not in the group")
        out.append(combo)
    return out


def linear_substitute(p: BooleanPolynomial, forms: list[int], n_vars: int) -> BooleanPolynomial:
    """``p(y)`` with ``y_k`` replaced by the linear form ``forms[k]`` (a mask over ``n_vars``)."""
    acc: set[int] = set()
    for m in p.monomials:
        terms = {0}
        for k in _bits(m):
            nxt: set[int] = set()
            for t in terms:
                for v in _bits(forms[k]):
                    nxt ^= {t | (1 << v)}
            terms = nxt
        for t in terms:
            acc ^= {t}
    return BooleanPolynomial(n_vars, frozenset(acc))


@dataclass(frozen=True)
class GroupPolynomials:
    """Parity and incidence polynomials in the variables of the caller's generators.

    ``canonical`` is ``None`` when the group has no two-letters-per-site
    basis and the polynomials came from the sign table instead.
    """

    parity: BooleanPolynomial
    incidence: dict[tuple[int, int], BooleanPolynomial]
    canonical: CanonicalGenerators | None


def group_polynomials(gens: StabilizerGenerators) -> GroupPolynomials:
    """Derive polynomials on a canonical basis, then pull them back.

    With ``h_k = prod_i g_i^{T_ki}`` the element ``prod_i g_i^{x_i}`` equals
    ``prod_k h_k^{y_k}`` where ``y = x T^{-1}``; signs agree because both
    describe the same operator.  The substitution is linear, so degrees are
    preserved.  Groups without a canonical basis fall back to the Moebius
    transform of the sign table (up to ``SEARCH_CAP`` generators).
    """
    try:
        cg = canonical_form(gens)
    except NonCanonicalError:
        return _table_polynomials(gens)
    r = gens.r
    if cg.base is gens or list(cg.base) == list(gens):
        return GroupPolynomials(parity_polynomial(cg), incidence_polynomials(cg), cg)
    # rows of T: coordinates of h_k in terms of g
    t_rows = exponent_coordinates(gens, list(cg.base))
    # invert T over F2: y_k = sum_i x_i (T^-1)_{ik}
    inv = _gf2_inverse(t_rows, r)
    forms = [sum(((inv[i] >> k) & 1) << i for i in range(r)) for k in range(r)]
    parity = linear_substitute(parity_polynomial(cg), forms, r)
    inc = {key: linear_substitute(p, forms, r) for key, p in incidence_polynomials(cg).items()}
    return GroupPolynomials(parity, inc, cg)


def _table_polynomials(gens: StabilizerGenerators) -> GroupPolynomials:
    from stabgames.anf import CapExceeded, TruthTable

    r = gens.r
    if r > SEARCH_CAP:
        raise CapExceeded(f"no canonical basis found and r={r} exceeds the search cap {SEARCH_CAP}")
    parity = TruthTable(r, np.array(parity_table(gens), dtype=np.uint8)).to_polynomial()
    one = BooleanPolynomial.from_monomials(r, [0])
    inc: dict[tuple[int, int], BooleanPolynomial] = {}
    for j in range(gens.n):
        alpha = BooleanPolynomial.from_monomials(r, [1 << i for i, g in enumerate(gens) if (g.x >> j) & 1])
        beta = BooleanPolynomial.from_monomials(r, [1 << i for i, g in enumerate(gens) if (g.z >> j) & 1])
        ab = alpha * beta
        inc.update({(j, Y): ab, (j, X): alpha + ab, (j, Z): beta + ab, (j, I): one + alpha + beta + ab})
    return GroupPolynomials(parity, inc, None)


def _gf2_inverse(rows: list[int], r: int) -> list[int]:
    """Inverse of an invertible ``r x r`` F2 matrix given as row bitmasks."""
    a = list(rows)
    inv = [1 << i for i in range(r)]
    for col in range(r):
        piv = next(i for i in range(col, r) if (a[i] >> col) & 1)
        a[col], a[piv] = a[piv], a[col]
        inv[col], inv[piv] = inv[piv], inv[col]
        for i in range(r):
            if i != col and (a[i] >> col) & 1:
                a[i] ^= a[col]
                inv[i] ^= inv[col]
    return inv
