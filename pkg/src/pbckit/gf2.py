"""Incremental GF(2) linear algebra over int-packed bit vectors."""

from __future__ import annotations

__all__ = ["Gf2Basis", "gf2_rank"]


class Gf2Basis:
    """Row basis over GF(2) that tracks how each reduction decomposes.

    Rows are Python ints (bit i = column i).  ``decompose(v)`` returns the
    index set of inserted rows summing to ``v``, or None if ``v`` is
    independent of the basis.  ``add(v)`` inserts an independent row.
    """

    def __init__(self):
        self._pivots: dict[int, tuple[int, int]] = {}  # pivot bit -> (row, member mask)
        self._count = 0

    def __len__(self) -> int:
        return self._count

    def _reduce(self, v: int) -> tuple[int, int]:
        members = 0
        while v:
            pivot = v.bit_length() - 1
            hit = self._pivots.get(pivot)
            if hit is None:
                return v, members
            row, mask = hit
            v ^= row
            members ^= mask
        return 0, members

    def decompose(self, v: int) -> list[int] | None:
        """Indices (insertion order) of rows XOR-ing to ``v``; None if independent."""
        residue, members = self._reduce(v)
        if residue:
            return None
        return [i for i in range(self._count) if (members >> i) & 1]

    def add(self, v: int) -> None:
        residue, members = self._reduce(v)
        if not residue:
            raise ValueError("row is dependent on the basis")
        self._pivots[residue.bit_length() - 1] = (residue, members | (1 << self._count))
        self._count += 1


def gf2_rank(rows: list[int]) -> int:
    """Rank of a list of int-packed rows over GF(2)."""
    basis = Gf2Basis()
    for row in rows:
        if basis.decompose(row) is None:
            basis.add(row)
    return len(basis)
