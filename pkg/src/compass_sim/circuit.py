"""Clifford circuits over the gate set {X, H, CNOT, prep |0>, measure Z}.

Measurements are numbered in program order.  A ``fixup`` op applies a Pauli
when a recorded measurement returned 1; it models a software-tracked
feed-forward and is never compiled into physical gates.
"""

from __future__ import annotations

from dataclasses import dataclass, field

LOGICAL_OPS = ("prep", "x", "h", "cnot", "measure", "fixup")


@dataclass(frozen=True)
class Op:
    name: str
    qubits: tuple[int, ...]
    # fixup only: measurement index and the Pauli letters applied on `qubits`
    meas: int | None = None
    letters: str = ""


@dataclass
class Circuit:
    n: int
    ops: list[Op] = field(default_factory=list)
    num_measurements: int = 0

    def _q(self, *qs):
        for q in qs:
            if not 0 <= q < self.n:
                raise ValueError(f"qubit {q} out of range for {self.n}-qubit circuit")

    def prep(self, q: int):
        self._q(q)
        self.ops.append(Op("prep", (q,)))

    def x(self, q: int):
        self._q(q)
        self.ops.append(Op("x", (q,)))

    def h(self, q: int):
        self._q(q)
        self.ops.append(Op("h", (q,)))

    def cnot(self, c: int, t: int):
        self._q(c, t)
        if c == t:
            raise ValueError("CNOT control and target must differ")
        self.ops.append(Op("cnot", (c, t)))

    def measure(self, q: int) -> int:
        self._q(q)
        self.ops.append(Op("measure", (q,)))
        self.num_measurements += 1
        return self.num_measurements - 1

    def fixup(self, meas: int, terms: dict[int, str]):
        if not 0 <= meas < self.num_measurements:
            raise ValueError(f"fix-up refers to unknown measurement {meas}")
        qs = tuple(sorted(terms))
        self._q(*qs)
        self.ops.append(Op("fixup", qs, meas, "".join(terms[q] for q in qs)))

    def append(self, other: "Circuit", qubit_map: list[int] | None = None) -> int:
        """Append ``other`` with its qubits relabelled; returns the measurement offset."""
        qubit_map = list(range(other.n)) if qubit_map is None else list(qubit_map)
        offset = self.num_measurements
        for op in other.ops:
            qs = tuple(qubit_map[q] for q in op.qubits)
            self._q(*qs)
            meas = None if op.meas is None else op.meas + offset
            self.ops.append(Op(op.name, qs, meas, op.letters))
        self.num_measurements += other.num_measurements
        return offset

    def count(self, name: str) -> int:
        return sum(op.name == name for op in self.ops)

    def instructions(self):
        """Yield ``(op_index, instruction)`` in the simulator instruction set.

        Instructions are ``("rot", qubits, letters, k)`` for
        ``exp(-i k pi/4 P)``, ``("prep", q)``, ``("meas", q)`` and
        ``("cond", meas, qubits, letters)``.
        """
        for i, op in enumerate(self.ops):
            for ins in _logical_to_instructions(op):
                yield i, ins


def _logical_to_instructions(op: Op):
    name, qs = op.name, op.qubits
    if name == "prep":
        return [("prep", qs[0])]
    if name == "measure":
        return [("meas", qs[0])]
    if name == "x":
        return [("rot", qs, "X", 2)]
    if name == "h":
        # Z (a pi rotation) then RY(pi/2) equals H exactly
        return [("rot", qs, "Z", 2), ("rot", qs, "Y", 1)]
    if name == "cnot":
        c, t = qs
        return [
            ("rot", (c,), "Y", 1),
            ("rot", (c, t), "XX", 1),
            ("rot", (c,), "X", -1),
            ("rot", (t,), "X", -1),
            ("rot", (c,), "Y", -1),
        ]
    if name == "fixup":
        return [("cond", op.meas, qs, op.letters)]
    raise ValueError(f"unknown op {name!r}")
