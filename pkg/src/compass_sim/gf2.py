"""Tiny GF(2) linear algebra on Python-int bit vectors."""

from __future__ import annotations


class XorBasis:
    """Incremental row-echelon basis; vectors are non-negative ints."""

    def __init__(self, vectors=()):
        self.pivots: dict[int, int] = {}
        for v in vectors:
            self.add(v)

    def reduce(self, v: int) -> int:
        while v:
            top = v.bit_length() - 1
            row = self.pivots.get(top)
            if row is None:
                return v
            v ^= row
        return 0

    def add(self, v: int) -> bool:
        """Insert ``v``; returns False if it was already in the span."""
        r = self.reduce(v)
        if r == 0:
            return False
        self.pivots[r.bit_length() - 1] = r
        return True

    def contains(self, v: int) -> bool:
        return self.reduce(v) == 0

    @property
    def rank(self) -> int:
        return len(self.pivots)


def symplectic(p) -> int:
    """Pack a PauliOperator as ``x | z << n`` (sign dropped)."""
    return p.x | (p.z << p.n)
