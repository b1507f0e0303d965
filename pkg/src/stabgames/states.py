"""Generator sets for GHZ states, graph states and the toric code."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from stabgames.anf import BooleanPolynomial
from stabgames.parityfn import parity_polynomial, rotate_to_xz
from stabgames.pauli import PauliError, PauliOperator, StabilizerGenerators, independence_check


def ghz_generators(n: int) -> StabilizerGenerators:
    """``X...X, Z1 Z2, Z2 Z3, ..., Z_{n-1} Z_n``."""
    if n < 2:
        raise ValueError("GHZ needs n >= 2")
    full = (1 << n) - 1
    gens = [PauliOperator(n, full, 0)]
    gens += [PauliOperator(n, 0, 0b11 << j) for j in range(n - 1)]
    return StabilizerGenerators(gens)


@dataclass(frozen=True)
class GraphSpec:
    """Simple undirected graph on vertices ``0..n-1``; edges stored as ``(i, j)`` with ``i < j``."""

    n: int
    edges: frozenset[tuple[int, int]]

    def __post_init__(self) -> None:
        for i, j in self.edges:
            if not (0 <= i < j < self.n):
                raise ValueError(f"bad edge ({i}, {j}) for n={self.n}")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> GraphSpec:
        norm = set()
        for i, j in edges:
            if i == j:
                raise ValueError(f"self-loop at vertex {i}")
            norm.add((min(i, j), max(i, j)))
        return cls(n, frozenset(norm))

    @classmethod
    def path(cls, n: int) -> GraphSpec:
        return cls.from_edges(n, [(i, i + 1) for i in range(n - 1)])

    @classmethod
    def cycle(cls, n: int) -> GraphSpec:
        if n < 3:
            raise ValueError("cycle needs n >= 3")
        return cls.from_edges(n, [(i, (i + 1) % n) for i in range(n)])

    @classmethod
    def star(cls, leaves: int) -> GraphSpec:
        return cls.from_edges(leaves + 1, [(0, k) for k in range(1, leaves + 1)])

    @classmethod
    def parse(cls, text: str) -> GraphSpec:
        """First line ``n``, then one 1-based ``i j`` edge per line."""
        lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
        lines = [ln for ln in lines if ln]
        if not lines:
            raise ValueError("empty graph file")
        n = int(lines[0])
        edges = []
        for ln in lines[1:]:
            parts = ln.split()
            if len(parts) != 2:
                raise ValueError(f"bad edge line {ln!r}")
            i, j = int(parts[0]) - 1, int(parts[1]) - 1
            edges.append((i, j))
        return cls.from_edges(n, edges)

    def to_text(self) -> str:
        body = "".join(f"{i + 1} {j + 1}\n" for i, j in sorted(self.edges))
        return f"{self.n}\n{body}"

    def neighbors(self, v: int) -> list[int]:
        return sorted({j for i, j in self.edges if i == v} | {i for i, j in self.edges if j == v})

    def adjacency(self) -> list[int]:
        """Row bitmasks of the symmetric adjacency matrix."""
        rows = [0] * self.n
        for i, j in self.edges:
            rows[i] |= 1 << j
            rows[j] |= 1 << i
        return rows

    def is_connected(self) -> bool:
        rows = self.adjacency()
        seen, frontier = 1, 1
        while frontier:
            nxt = 0
            for v in range(self.n):
                if frontier >> v & 1:
                    nxt |= rows[v]
            frontier = nxt & ~seen
            seen |= nxt
        return seen == (1 << self.n) - 1


def graph_generators(g: GraphSpec) -> StabilizerGenerators:
    """``X_i prod_{j in N(i)} Z_j`` for every vertex."""
    return StabilizerGenerators([PauliOperator(g.n, 1 << i, row) for i, row in enumerate(g.adjacency())])


def graph_parity_polynomial(g: GraphSpec) -> BooleanPolynomial:
    """Vertex-and-two-neighbours triple sum, written down directly."""
    monos = []
    for v in range(g.n):
        nb = g.neighbors(v)
        for a in range(len(nb)):
            for b in range(a + 1, len(nb)):
                monos.append((1 << v) | (1 << nb[a]) | (1 << nb[b]))
    return BooleanPolynomial.from_monomials(g.n, monos)


class ToricLattice:
    """Edges of an ``L x L`` periodic square lattice.

    Qubit ``d*L*L + r*L + c`` is the horizontal (``d = 0``) edge from vertex
    ``(r, c)`` to ``(r, c+1)`` or the vertical (``d = 1``) edge from ``(r, c)``
    to ``(r+1, c)``.  Star ``(r, c)`` sits on vertex ``(r, c)``; plaquette
    ``(r, c)`` is the face whose top-left corner is that vertex.
    """

    def __init__(self, L: int):
        if L < 2:
            raise ValueError("toric lattice needs L >= 2")
        self.L = L
        self.n = 2 * L * L

    def h(self, r: int, c: int) -> int:
        L = self.L
        return (r % L) * L + (c % L)

    def v(self, r: int, c: int) -> int:
        L = self.L
        return L * L + (r % L) * L + (c % L)

    def star(self, r: int, c: int) -> tuple[int, ...]:
        return (self.h(r, c), self.h(r, c - 1), self.v(r, c), self.v(r - 1, c))

    def plaquette(self, r: int, c: int) -> tuple[int, ...]:
        return (self.h(r, c), self.h(r + 1, c), self.v(r, c), self.v(r, c + 1))

    def sites(self) -> list[tuple[int, int]]:
        return [(r, c) for r in range(self.L) for c in range(self.L)]

    def star_operator(self, r: int, c: int) -> PauliOperator:
        return PauliOperator(self.n, sum(1 << e for e in self.star(r, c)), 0)

    def plaquette_operator(self, r: int, c: int) -> PauliOperator:
        return PauliOperator(self.n, 0, sum(1 << e for e in self.plaquette(r, c)))

    def logical_z_loops(self) -> list[PauliOperator]:
        """Z on the horizontal edges of row 0 and on the vertical edges of column 0."""
        row = sum(1 << self.h(0, c) for c in range(self.L))
        col = sum(1 << self.v(r, 0) for r in range(self.L))
        return [PauliOperator(self.n, 0, row), PauliOperator(self.n, 0, col)]

    def star_var(self, r: int, c: int) -> int:
        """Variable index of star ``(r, c)``; star 0 is dropped."""
        k = (r % self.L) * self.L + (c % self.L)
        if k == 0:
            raise KeyError("star (0, 0) is not a generator")
        return k - 1

    def plaquette_var(self, r: int, c: int) -> int:
        k = (r % self.L) * self.L + (c % self.L)
        if k == 0:
            raise KeyError("plaquette (0, 0) is not a generator")
        return self.L * self.L - 1 + k - 1

    @property
    def r(self) -> int:
        return 2 * self.L * self.L - 2


def toric_generators(lat: ToricLattice | int, *, with_loops: bool = False) -> StabilizerGenerators:
    """Stars ``1..L^2-1`` then plaquettes ``1..L^2-1`` (row-major), optionally two Z loops."""
    if isinstance(lat, int):
        lat = ToricLattice(lat)
    sites = lat.sites()[1:]
    gens = [lat.star_operator(r, c) for r, c in sites]
    gens += [lat.plaquette_operator(r, c) for r, c in sites]
    if with_loops:
        gens += lat.logical_z_loops()
    out = StabilizerGenerators(gens, validate=False)
    if independence_check(out) != len(gens):
        raise PauliError("toric generators are dependent")
    return StabilizerGenerators(gens)


def toric_parity_polynomial(lat: ToricLattice | int, *, with_loops: bool = False) -> BooleanPolynomial:
    """Parity polynomial of :func:`toric_generators` (dropped variables fixed to 0)."""
    return parity_polynomial(rotate_to_xz(toric_generators(lat, with_loops=with_loops)))


def toric_derivative_direction(lat: ToricLattice | int) -> int:
    """Indicator of the stars at odd coordinates ``(2i+1, 2j+1)``.

    These ``floor(L/2)**2`` stars are pairwise non-adjacent and never the
    dropped star ``(0, 0)``.
    """
    if isinstance(lat, int):
        lat = ToricLattice(lat)
    half = lat.L // 2
    a = 0
    for i in range(half):
        for j in range(half):
            a |= 1 << lat.star_var(2 * i + 1, 2 * j + 1)
    return a
