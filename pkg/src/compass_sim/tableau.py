"""Stabilizer tableau simulation (reference runs and the frame-sampling oracle)."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .pauli import PauliOperator, commutes, conjugate_by_rotation, multiply


def _sparse(n: int, qubits, letters: str) -> PauliOperator:
    return PauliOperator.from_sparse(n, dict(zip(qubits, letters)))


class Tableau:
    """Stabilizer and destabilizer rows of an n-qubit stabilizer state.

    Starts in ``|0...0>``.  Rows are :class:`PauliOperator` values; the
    destabilizer phases carry no meaning and are never read.
    """

    def __init__(self, n: int):
        self.n = n
        self.stab = [PauliOperator.single(n, q, "Z") for q in range(n)]
        self.destab = [PauliOperator.single(n, q, "X") for q in range(n)]

    def copy(self) -> "Tableau":
        t = Tableau.__new__(Tableau)
        t.n = self.n
        t.stab = list(self.stab)
        t.destab = list(self.destab)
        return t

    # -- gates -------------------------------------------------------------
    def rotate(self, generator: PauliOperator, quarter_turns: int):
        """Apply ``exp(-i k pi/4 G)``; only Clifford angles are meaningful."""
        self.stab = [conjugate_by_rotation(r, generator, quarter_turns) for r in self.stab]
        self.destab = [conjugate_by_rotation(r, generator, quarter_turns) for r in self.destab]

    def apply_pauli(self, p: PauliOperator):
        self.rotate(p, 2)

    # -- measurement -------------------------------------------------------
    def measure(self, q: int, rng: np.random.Generator | None = None, forced: int | None = None) -> tuple[int, bool]:
        """Measure Z on qubit ``q``; returns ``(outcome, deterministic)``.

        ``forced`` fixes the outcome of a random measurement (ignored when
        the outcome is deterministic).
        """
        bit = 1 << q
        p = next((i for i, r in enumerate(self.stab) if r.x & bit), None)
        if p is None:
            acc = PauliOperator.identity(self.n)
            for i, d in enumerate(self.destab):
                if d.x & bit:
                    acc = multiply(acc, self.stab[i])
            return (0 if acc.sign > 0 else 1), True
        sp = self.stab[p]
        for i, r in enumerate(self.stab):
            if i != p and r.x & bit:
                self.stab[i] = multiply(r, sp)
        for i, d in enumerate(self.destab):
            if i != p and d.x & bit:
                self.destab[i] = multiply(d, sp)
        if forced is None:
            if rng is None:
                raise ValueError("random measurement needs an rng or a forced outcome")
            forced = int(rng.integers(2))
        self.destab[p] = sp
        self.stab[p] = PauliOperator.from_sparse(self.n, {q: "Z"}, -1 if forced else 1)
        return forced, False

    def reset(self, q: int, rng: np.random.Generator | None = None):
        out, _ = self.measure(q, rng, forced=0)
        if out:
            self.apply_pauli(PauliOperator.single(self.n, q, "X"))

    def expectation(self, p: PauliOperator) -> int:
        """+1/-1 if ``p`` (Hermitian) is in the stabilizer group up to sign, else 0."""
        if not all(commutes(p, s) for s in self.stab):
            return 0
        acc = PauliOperator.identity(self.n)
        for i, d in enumerate(self.destab):
            if not commutes(d, p):
                acc = multiply(acc, self.stab[i])
        if not acc.equal_up_to_phase(p):
            raise AssertionError("tableau is inconsistent")
        return acc.sign * p.sign

    def is_valid(self) -> bool:
        n = self.n
        for i in range(n):
            for j in range(n):
                if not commutes(self.stab[i], self.stab[j]):
                    return False
                if commutes(self.destab[i], self.stab[j]) != (i != j):
                    return False
        return True


@dataclass
class ReferenceRun:
    outcomes: list[int]
    deterministic: list[bool]
    tableau: Tableau
    trace: list[Tableau] = field(default_factory=list)


def simulate(circuit, seed=None, faults=None, forced=None, keep_trace=False) -> ReferenceRun:
    """Run ``circuit`` (anything with ``.n`` and ``.instructions()``) on a tableau.

    ``faults`` maps an op position to a list of Paulis inserted *before* the
    op at that position (``len(ops)`` means after the last op).  ``forced``
    maps measurement index to the outcome used if that measurement is random.
    """
    rng = np.random.default_rng(seed)
    faults = faults or {}
    forced = forced or {}
    n = circuit.n
    tab = Tableau(n)
    outcomes: list[int] = []
    det: list[bool] = []
    trace = []
    last = -1

    def inject(upto):
        nonlocal last
        for pos in range(last + 1, upto + 1):
            for f in faults.get(pos, ()):
                tab.apply_pauli(f)
        last = upto

    for pos, ins in circuit.instructions():
        if pos > last:
            inject(pos)
        kind = ins[0]
        if kind == "rot":
            _, qs, letters, k = ins
            tab.rotate(_sparse(n, qs, letters), k)
        elif kind == "prep":
            tab.reset(ins[1], rng)
        elif kind == "meas":
            m = len(outcomes)
            out, d = tab.measure(ins[1], rng, forced.get(m))
            outcomes.append(out)
            det.append(d)
        elif kind == "cond":
            _, m, qs, letters = ins
            if m >= len(outcomes):
                raise ValueError(f"feed-forward on future measurement {m}")
            if outcomes[m]:
                tab.apply_pauli(_sparse(n, qs, letters))
        else:
            raise ValueError(f"unknown instruction {kind!r}")
        if keep_trace:
            trace.append(tab.copy())
    inject(max(faults, default=-1) if faults else -1)
    return ReferenceRun(outcomes, det, tab, trace)


def run_reference(circuit, seed=None, keep_trace=False) -> ReferenceRun:
    """Noiseless run recording each random outcome chosen from ``seed``."""
    prepared = set()
    for _, ins in circuit.instructions():
        if ins[0] == "prep":
            prepared.add(ins[1])
        elif ins[0] == "meas" and ins[1] not in prepared:
            raise ValueError(f"qubit {ins[1]} measured before being prepared")
    return simulate(circuit, seed=seed, keep_trace=keep_trace)
