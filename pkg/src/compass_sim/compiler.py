"""Compilation of {X, H, CNOT} circuits into trapped-ion native gates, and scheduling.

Native gates are RX/RY/RZ rotations, the Molmer-Sorensen ``XX`` gate,
``PREPZ`` and ``MEASZ``.  Angles are kept as integer degrees so that the
cancellation logic is exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .circuit import Circuit
from .pauli import PauliOperator, conjugate_by_rotation

T1Q_US = 10.0
T2Q_US = 200.0

ROTATIONS = ("RX", "RY", "RZ")
NATIVE_KINDS = ROTATIONS + ("XX", "PREPZ", "MEASZ", "COND")
_AXIS = {"RX": "X", "RY": "Y", "RZ": "Z"}


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: tuple[int, ...]
    angle: int = 0  # degrees
    meas: int | None = None  # COND only
    letters: str = ""  # COND only

    def __post_init__(self):
        if self.kind not in NATIVE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if self.kind in ROTATIONS and self.angle % 90:
            raise ValueError(f"non-Clifford angle {self.angle} for {self.kind}")
        if self.kind == "XX":
            if len(self.qubits) != 2 or self.qubits[0] == self.qubits[1]:
                raise ValueError("XX acts on two distinct qubits")
            if self.angle % 45:
                raise ValueError(f"non-Clifford XX angle {self.angle}")

    @property
    def is_rotation(self) -> bool:
        return self.kind in ROTATIONS

    @property
    def quarter_turns(self) -> int:
        """k such that the gate is ``exp(-i k pi/4 P)``."""
        return self.angle // 45 if self.kind == "XX" else self.angle // 90

    def duration(self, t1q=T1Q_US, t2q=T2Q_US, t_prep=0.0, t_meas=0.0) -> float:
        return {"XX": t2q, "PREPZ": t_prep, "MEASZ": t_meas, "COND": 0.0}.get(self.kind, t1q)

    def instruction(self):
        if self.is_rotation:
            return ("rot", self.qubits, _AXIS[self.kind], self.quarter_turns)
        if self.kind == "XX":
            return ("rot", self.qubits, "XX", self.quarter_turns)
        if self.kind == "PREPZ":
            return ("prep", self.qubits[0])
        if self.kind == "MEASZ":
            return ("meas", self.qubits[0])
        return ("cond", self.meas, self.qubits, self.letters)

    def to_text(self) -> str:
        qs = " ".join(f"q{q}" for q in self.qubits)
        if self.is_rotation or self.kind == "XX":
            return f"{self.kind} {qs} {self.angle}"
        if self.kind == "COND":
            terms = " ".join(f"{a} q{q}" for a, q in zip(self.letters, self.qubits))
            return f"COND m{self.meas} {terms}"
        return f"{self.kind} {qs}"


def RX(q, deg):
    return Gate("RX", (q,), deg)


def RY(q, deg):
    return Gate("RY", (q,), deg)


def XX(a, b, deg):
    return Gate("XX", (a, b), deg)


def conjugate_by_gate(p: PauliOperator, g: Gate) -> PauliOperator:
    """``g p g^dagger`` for a native Clifford gate."""
    ins = g.instruction()
    if ins[0] != "rot":
        raise ValueError(f"{g.kind} is not a unitary gate")
    _, qs, letters, k = ins
    gen = PauliOperator.from_sparse(p.n, dict(zip(qs, letters)))
    return conjugate_by_rotation(p, gen, k)


# -- gate compilations ---------------------------------------------------------

def compile_h(q: int, variant: str = "a") -> list[Gate]:
    """H as ``RX(-180), RY(90)`` (variant a) or ``RY(-90), RX(180)`` (variant b).

    Both equal H up to a Pauli, which is irrelevant for frame simulation.
    """
    if variant == "a":
        return [RX(q, -180), RY(q, 90)]
    if variant == "b":
        return [RY(q, -90), RX(q, 180)]
    raise ValueError(f"unknown H variant {variant!r}")


def compile_cnot(c: int, t: int, s: int = 1, v: int = 1) -> list[Gate]:
    if c == t:
        raise ValueError("CNOT control and target must differ")
    if s not in (1, -1) or v not in (1, -1):
        raise ValueError("s and v must be +1 or -1")
    return [
        RY(c, 90 * v),
        XX(c, t, 45 * s),
        RX(c, -90 * s),
        RX(t, -90 * v * s),
        RY(c, -90 * v),
    ]


def _cancels(a: Gate, b: Gate) -> bool:
    return a.kind == b.kind and a.is_rotation and a.qubits == b.qubits and (a.angle + b.angle) % 360 == 0


class _Emitter:
    """Appends gates while cancelling adjacent inverse rotations on the fly.

    With ``local`` an XX gate seals the tails of all qubits it does not
    touch, so no cancellation leaves a bystander qubit in a rotated frame
    while some other pair is entangled.
    """

    def __init__(self, local: bool = False):
        self.out: list[Gate | None] = []
        self.tail: dict[int, list[int]] = {}
        self.local = local

    def last(self, q: int) -> Gate | None:
        stack = self.tail.get(q)
        return self.out[stack[-1]] if stack else None

    def emit(self, g: Gate):
        if g.is_rotation:
            q = g.qubits[0]
            prev = self.last(q)
            if prev is not None and _cancels(prev, g):
                self.out[self.tail[q].pop()] = None
                return
        self.out.append(g)
        if self.local and g.kind == "XX":
            for q in self.tail:
                if q not in g.qubits:
                    self.tail[q] = []
        for q in g.qubits:
            self.tail.setdefault(q, []).append(len(self.out) - 1)

    def gates(self) -> list[Gate]:
        return [g for g in self.out if g is not None]


def peephole_cancel(seq: list[Gate]) -> list[Gate]:
    """Remove adjacent same-axis rotations on a qubit whose angles sum to 0 mod 360."""
    em = _Emitter()
    for g in seq:
        em.emit(g)
    return em.gates()


def compile_circuit(circuit: Circuit, greedy: bool = True, local: bool = True) -> list[Gate]:
    """Compile a logical circuit to native gates.

    With ``greedy`` the H variant and the CNOT sign ``v`` are chosen per gate
    so that the first emitted rotation cancels the preceding gate on that
    qubit when possible; ``s`` has no such freedom and stays +1.  ``local``
    forbids cancellations across XX gates on other qubits (see
    :class:`_Emitter`), which keeps crosstalk on idle qubits X-type.
    """
    em = _Emitter(local)
    for op in circuit.ops:
        qs = op.qubits
        if op.name == "prep":
            em.emit(Gate("PREPZ", qs))
        elif op.name == "measure":
            em.emit(Gate("MEASZ", qs))
        elif op.name == "x":
            em.emit(RX(qs[0], 180))
        elif op.name == "h":
            variant = "a"
            prev = em.last(qs[0])
            if greedy and prev is not None and _cancels(prev, compile_h(qs[0], "b")[0]):
                variant = "b"
            for g in compile_h(qs[0], variant):
                em.emit(g)
        elif op.name == "cnot":
            c, t = qs
            v = 1
            prev = em.last(c)
            if greedy and prev is not None and prev.kind == "RY" and prev.angle % 180 == 90:
                v = 1 if (prev.angle % 360) == 270 else -1
            for g in compile_cnot(c, t, 1, v):
                em.emit(g)
        elif op.name == "fixup":
            em.emit(Gate("COND", qs, meas=op.meas, letters=op.letters))
        else:
            raise ValueError(f"unknown op {op.name!r}")
    return em.gates()


# -- scheduling ----------------------------------------------------------------

@dataclass
class TimedCircuit:
    n: int
    gates: list[Gate]
    starts: list[float]
    durations: list[float]
    total_duration: float
    num_measurements: int
    t1q: float = T1Q_US
    t2q: float = T2Q_US
    _idle: list | None = field(default=None, repr=False)

    def instructions(self):
        for i, g in enumerate(self.gates):
            yield i, g.instruction()

    @property
    def ops(self):
        return self.gates

    def count(self, kind: str) -> int:
        return sum(g.kind == kind for g in self.gates)

    @property
    def single_qubit_count(self) -> int:
        return sum(g.is_rotation for g in self.gates)

    def busy_intervals(self, q: int) -> list[tuple[float, float, int]]:
        """(start, end, gate index) for gates with positive duration on ``q``."""
        return [
            (s, s + d, i)
            for i, (g, s, d) in enumerate(zip(self.gates, self.starts, self.durations))
            if q in g.qubits and d > 0
        ]

    def timeline(self, q: int) -> list[tuple[float, float, bool]]:
        """Alternating busy/idle intervals tiling ``[0, total_duration]``."""
        out = []
        t = 0.0
        for s, e, _ in self.busy_intervals(q):
            if s > t:
                out.append((t, s, False))
            out.append((s, e, True))
            t = e
        if self.total_duration > t:
            out.append((t, self.total_duration, False))
        return out

    def idle_intervals(self) -> list[tuple[int, float, float, int]]:
        """``(qubit, start, end, position)`` for every maximal idle gap.

        ``position`` is the index of the next gate with positive duration on
        that qubit (``len(gates)`` at the end); a dephasing fault is
        injected just before it.
        """
        if self._idle is None:
            idle = []
            for q in range(self.n):
                t = 0.0
                for s, e, i in self.busy_intervals(q):
                    if s > t:
                        idle.append((q, t, s, i))
                    t = e
                if self.total_duration > t:
                    idle.append((q, t, self.total_duration, len(self.gates)))
            self._idle = idle
        return self._idle

    def to_text(self) -> str:
        return "\n".join(g.to_text() for g in self.gates) + "\n"


def schedule(seq: list[Gate], n: int | None = None, t1q=T1Q_US, t2q=T2Q_US, t_prep=0.0, t_meas=0.0) -> TimedCircuit:
    """ASAP schedule: per-qubit order kept, at most one XX gate active at a time."""
    if n is None:
        n = 1 + max((q for g in seq for q in g.qubits), default=-1)
    free = [0.0] * n
    xx_free = 0.0
    starts, durs = [], []
    nmeas = 0
    for g in seq:
        d = g.duration(t1q, t2q, t_prep, t_meas)
        s = max(free[q] for q in g.qubits)
        if g.kind == "XX":
            s = max(s, xx_free)
            xx_free = s + d
        for q in g.qubits:
            free[q] = s + d
        starts.append(s)
        durs.append(d)
        nmeas += g.kind == "MEASZ"
    total = max([s + d for s, d in zip(starts, durs)], default=0.0)
    return TimedCircuit(n, list(seq), starts, durs, total, nmeas, t1q, t2q)


def parse_text(text: str, n: int | None = None, **timing) -> TimedCircuit:
    """Inverse of :meth:`TimedCircuit.to_text` (schedule is recomputed)."""
    gates = []
    for lineno, line in enumerate(text.splitlines(), 1):
        parts = line.split()
        if not parts or parts[0].startswith("#"):
            continue
        kind = parts[0]
        try:
            if kind in ROTATIONS:
                gates.append(Gate(kind, (int(parts[1][1:]),), int(parts[2])))
            elif kind == "XX":
                gates.append(Gate(kind, (int(parts[1][1:]), int(parts[2][1:])), int(parts[3])))
            elif kind in ("PREPZ", "MEASZ"):
                gates.append(Gate(kind, (int(parts[1][1:]),)))
            elif kind == "COND":
                m = int(parts[1][1:])
                letters = "".join(parts[2::2])
                qs = tuple(int(p[1:]) for p in parts[3::2])
                gates.append(Gate("COND", qs, meas=m, letters=letters))
            else:
                raise ValueError(f"unknown gate {kind!r}")
        except (IndexError, ValueError) as exc:
            raise ValueError(f"line {lineno}: {line!r}: {exc}") from None
    return schedule(gates, n, **timing)


def compile_and_schedule(circuit: Circuit, greedy: bool = True, local: bool = True, **timing) -> TimedCircuit:
    return schedule(compile_circuit(circuit, greedy, local), circuit.n, **timing)
