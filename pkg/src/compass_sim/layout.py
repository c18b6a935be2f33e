"""Assignment of circuit qubits to ion positions in a linear chain."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class ChainLayout:
    """``order[j]`` is the qubit held by ion ``j``."""

    order: tuple[int, ...]
    extra_edge_count: int | None = None
    time_cost: float | None = None

    def __post_init__(self):
        order = tuple(int(q) for q in self.order)
        if sorted(order) != list(range(len(order))):
            raise ValueError(f"chain order must be a permutation of 0..{len(order) - 1}")
        object.__setattr__(self, "order", order)

    @classmethod
    def identity(cls, n: int) -> "ChainLayout":
        return cls(tuple(range(n)))

    def __len__(self) -> int:
        return len(self.order)

    @property
    def position(self) -> dict[int, int]:
        return {q: j for j, q in enumerate(self.order)}

    def adjacent_pairs(self) -> list[tuple[int, int]]:
        return list(zip(self.order, self.order[1:]))

    def concatenate(self, other: "ChainLayout") -> "ChainLayout":
        """``self`` followed by ``other`` with its qubits shifted past ``self``'s."""
        n = len(self)
        return ChainLayout(self.order + tuple(q + n for q in other.order))

    def to_text(self) -> str:
        return " ".join(map(str, self.order))
