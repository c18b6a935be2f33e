"""Pauli-frame propagation, batched over independent frames.

Each column of the frame arrays is one frame (a shot or a single fault
variant).  All circuits here are Clifford and all noise is stochastic
Pauli, so the frame fully describes a faulty run relative to the noiseless
reference run.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .pauli import PauliOperator


@dataclass
class PauliFrame:
    frame: PauliOperator
    measurement_flips: np.ndarray

    @classmethod
    def empty(cls, n: int, num_measurements: int = 0) -> "PauliFrame":
        return cls(PauliOperator.identity(n), np.zeros(num_measurements, dtype=np.uint8))


@dataclass
class Injections:
    """Flat arrays of single-qubit Pauli components to XOR into frames.

    Entry ``i`` flips ``x``/``z`` of qubit ``qubit[i]`` in column
    ``column[i]`` just before the op at ``position[i]``.
    """

    position: np.ndarray
    column: np.ndarray
    qubit: np.ndarray
    xbit: np.ndarray
    zbit: np.ndarray

    @classmethod
    def from_paulis(cls, items) -> "Injections":
        """``items``: iterable of ``(position, column, PauliOperator)``."""
        pos, col, qb, xb, zb = [], [], [], [], []
        for p, c, pauli in items:
            for q in pauli.support:
                pos.append(p)
                col.append(c)
                qb.append(q)
                xb.append(pauli.x >> q & 1)
                zb.append(pauli.z >> q & 1)
        return cls(*(np.asarray(a, dtype=np.int64) for a in (pos, col, qb, xb, zb)))

    def grouped(self):
        if len(self.position) == 0:
            return {}
        order = np.argsort(self.position, kind="stable")
        pos = self.position[order]
        cuts = np.flatnonzero(np.diff(pos)) + 1
        out = {}
        for chunk in np.split(order, cuts):
            out[int(self.position[chunk[0]])] = chunk
        return out


class FrameBatch:
    """``columns`` frames on ``n`` qubits, propagated instruction by instruction."""

    def __init__(self, n: int, columns: int):
        self.n = n
        self.columns = columns
        self.x = np.zeros((n, columns), dtype=np.uint8)
        self.z = np.zeros((n, columns), dtype=np.uint8)
        self.flips: list[np.ndarray] = []

    def _inject(self, inj: Injections, idx: np.ndarray):
        q, c = inj.qubit[idx], inj.column[idx]
        np.bitwise_xor.at(self.x, (q, c), inj.xbit[idx].astype(np.uint8))
        np.bitwise_xor.at(self.z, (q, c), inj.zbit[idx].astype(np.uint8))

    def rotate(self, qubits, letters: str, k: int):
        if k % 2 == 0:
            return
        x, z = self.x, self.z
        c = np.zeros(self.columns, dtype=np.uint8)
        for q, a in zip(qubits, letters):
            if a == "X":
                c ^= z[q]
            elif a == "Z":
                c ^= x[q]
            else:
                c ^= x[q] ^ z[q]
        for q, a in zip(qubits, letters):
            if a in "XY":
                x[q] ^= c
            if a in "ZY":
                z[q] ^= c

    def run(self, circuit, injections: Injections | None = None, stop: int | None = None):
        """Propagate through ``circuit``; ``stop`` ends before that op position."""
        groups = injections.grouped() if injections is not None else {}
        pending = sorted(groups)
        gi = 0
        for pos, ins in circuit.instructions():
            if stop is not None and pos >= stop:
                break
            while gi < len(pending) and pending[gi] <= pos:
                self._inject(injections, groups[pending[gi]])
                gi += 1
            kind = ins[0]
            if kind == "rot":
                self.rotate(ins[1], ins[2], ins[3])
            elif kind == "prep":
                self.x[ins[1]] = 0
                self.z[ins[1]] = 0
            elif kind == "meas":
                q = ins[1]
                self.flips.append(self.x[q].copy())
                # a Z on a freshly measured qubit acts trivially
                self.z[q] = 0
            elif kind == "cond":
                _, m, qs, letters = ins
                f = self.flips[m]
                for q, a in zip(qs, letters):
                    if a in "XY":
                        self.x[q] ^= f
                    if a in "ZY":
                        self.z[q] ^= f
            else:
                raise ValueError(f"unknown instruction {kind!r}")
        while gi < len(pending) and (stop is None or pending[gi] < stop):
            self._inject(injections, groups[pending[gi]])
            gi += 1
        return self

    def flip_matrix(self) -> np.ndarray:
        """(num_measurements, columns) array of measurement flips."""
        if not self.flips:
            return np.zeros((0, self.columns), dtype=np.uint8)
        return np.array(self.flips, dtype=np.uint8)

    def frame(self, column: int) -> PauliOperator:
        x = z = 0
        for q in range(self.n):
            x |= int(self.x[q, column]) << q
            z |= int(self.z[q, column]) << q
        return PauliOperator(self.n, x, z, bin(x & z).count("1"))


def _valid_position(circuit, position: int):
    n_ops = len(circuit.ops) if hasattr(circuit, "ops") else len(circuit.gates)
    if not 0 <= position <= n_ops:
        raise ValueError(f"fault position {position} outside 0..{n_ops}")


def propagate_frame(frame: PauliFrame, circuit, faults) -> PauliFrame:
    """Propagate one frame through ``circuit`` with ``faults`` injected.

    ``faults`` is a list of ``(position, PauliOperator)``; a fault at
    position ``p`` acts just before op ``p``.  The incoming frame acts before
    the first op and its recorded flips are kept as a prefix.
    """
    items = []
    for pos, p in faults:
        _valid_position(circuit, pos)
        if p.n != circuit.n:
            raise ValueError("fault acts on the wrong number of qubits")
        items.append((pos, 0, p))
    if not frame.frame.is_identity():
        items.insert(0, (0, 0, frame.frame))
    batch = FrameBatch(circuit.n, 1).run(circuit, Injections.from_paulis(items))
    flips = batch.flip_matrix()[:, 0]
    return PauliFrame(batch.frame(0), np.concatenate([frame.measurement_flips.astype(np.uint8), flips]))
