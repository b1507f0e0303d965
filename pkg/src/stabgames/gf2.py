"""Small GF(2) linear algebra helpers on int bitsets."""

from __future__ import annotations

from typing import Sequence


def rank(rows: Sequence[int]) -> int:
    """Rank over GF(2) of a list of row bitmasks."""
    basis: dict[int, int] = {}
    for v in rows:
        while v:
            top = v.bit_length() - 1
            if top in basis:
                v ^= basis[top]
            else:
                basis[top] = v
                break
    return len(basis)


class IncrementalBasis:
    """Echelon basis that records how each stored vector was formed.

    Every inserted vector gets a sequential label.  ``reduce`` returns the
    residue of a vector together with the set (bitmask over labels) of
    inserted vectors whose XOR was subtracted.  Pivots are lowest set bits.
    """

    def __init__(self) -> None:
        self.pivots: dict[int, tuple[int, int]] = {}  # pivot bit -> (vector, label mask)
        self.count = 0

    def reduce(self, v: int) -> tuple[int, int]:
        combo = 0
        w = v
        while w:
            low = (w & -w).bit_length() - 1
            hit = self.pivots.get(low)
            if hit is None:
                # later bits may still be reducible but the pivot is fixed here
                break
            w ^= hit[0]
            combo ^= hit[1]
        return w, combo

    def insert(self, v: int) -> tuple[int, int, bool]:
        """Insert ``v``; returns ``(residue, combo, added)``.

        If the residue is nonzero it becomes a new basis vector whose combo
        includes the new label.  ``combo`` always expresses
        ``v ^ residue`` in terms of earlier labels.
        """
        label = 1 << self.count
        self.count += 1
        w, combo = self.reduce(v)
        if w:
            low = (w & -w).bit_length() - 1
            self.pivots[low] = (w, combo ^ label)
            return w, combo, True
        return w, combo, False

    @property
    def dim(self) -> int:
        return len(self.pivots)


def row_basis(rows: Sequence[int]) -> list[int]:
    """A basis of the row span (reduced so that pivots are distinct top bits)."""
    basis: dict[int, int] = {}
    for v in rows:
        while v:
            top = v.bit_length() - 1
            if top in basis:
                v ^= basis[top]
            else:
                basis[top] = v
                break
    return [basis[k] for k in sorted(basis)]


def reduced_lowpivot_basis(vectors: Sequence[int]) -> list[int]:
    """Fully reduced echelon basis with distinct lowest-set-bit pivots.

    Reducing any vector against this basis in increasing pivot order yields
    the element of its coset with the smallest value when bit 0 is read as
    the most significant position.
    """
    basis: dict[int, int] = {}
    for v in vectors:
        for p in sorted(basis):
            if (v >> p) & 1:
                v ^= basis[p]
        if v:
            low = (v & -v).bit_length() - 1
            for p in basis:
                if (basis[p] >> low) & 1:
                    basis[p] ^= v
            basis[low] = v
    return [basis[p] for p in sorted(basis)]


def coset_min(v: int, reduced: Sequence[int]) -> int:
    """Lexicographically smallest element of ``v + span(reduced)`` (bit 0 first)."""
    for b in reduced:
        low = (b & -b).bit_length() - 1
        if (v >> low) & 1:
            v ^= b
    return v


def bit_reverse_key(v: int, width: int) -> int:
    """Sort key making bit 0 the most significant position."""
    return int(format(v, f"0{width}b")[::-1], 2) if width else 0
