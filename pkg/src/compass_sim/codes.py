"""The four [[9,1,3]] compass codes: stabilizers, gauges, logicals, ancillas, circuits.

Data qubit ``q`` sits at row ``q // 3``, column ``q % 3`` of the 3x3 lattice.
Stabilizer strings keep their listed qubit order; that order is also the
order in which a syndrome block touches the data qubits.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations, product

from .circuit import Circuit
from .gf2 import XorBasis, symplectic
from .pauli import PauliOperator, commutes

N_DATA = 9

CODE_NAMES = ("BaconShor13", "Surface17", "Shor6Z2X", "Shor6X2Z")

_ALIASES = {
    "baconshor13": "BaconShor13", "bs13": "BaconShor13", "bacon-shor-13": "BaconShor13",
    "surface17": "Surface17", "s17": "Surface17", "surface-17": "Surface17",
    "shor6z2x": "Shor6Z2X", "shor-6z2x": "Shor6Z2X", "6z2x": "Shor6Z2X",
    "shor6x2z": "Shor6X2Z", "shor-6x2z": "Shor6X2Z", "6x2z": "Shor6X2Z",
}

# stabilizers in table order; each entry is (pauli string, ancilla qubit)
_TABLE = {
    "BaconShor13": [
        ("Z0Z3Z1Z4Z2Z5", 9), ("Z3Z6Z4Z7Z5Z8", 10),
        ("X0X1X3X4X6X7", 11), ("X1X2X4X5X7X8", 12),
    ],
    "Shor6Z2X": [
        ("X0X1X3X4X6X7", 9), ("X1X2X4X5X7X8", 10),
        ("Z0Z3", 11), ("Z1Z4", 12), ("Z2Z5", 13), ("Z3Z6", 14), ("Z4Z7", 15), ("Z5Z8", 16),
    ],
    "Shor6X2Z": [
        ("Z0Z3Z1Z4Z2Z5", 9), ("Z3Z6Z4Z7Z5Z8", 10),
        ("X0X1", 11), ("X1X2", 12), ("X3X4", 13), ("X4X5", 14), ("X6X7", 15), ("X7X8", 16),
    ],
    # ancillas numbered in reading order of the plaquette positions
    "Surface17": [
        ("Z1Z4Z2Z5", 12), ("Z0Z3", 10), ("Z3Z6Z4Z7", 13), ("Z5Z8", 15),
        ("X0X1X3X4", 11), ("X6X7", 16), ("X4X5X7X8", 14), ("X1X2", 9),
    ],
}

_LOGICALS = {
    "BaconShor13": ("Z0Z1Z2", "X0X3X6"),
    "Shor6Z2X": ("Z0Z1Z2", "X0X3X6"),
    "Shor6X2Z": ("Z0Z1Z2", "X0X3X6"),
    "Surface17": ("Z0Z4Z8", "X2X4X6"),
}

# how each logical basis state is prepared
_BASIS_PREP = {
    "BaconShor13": {"Z": "unitary", "X": "unitary"},
    "Shor6Z2X": {"Z": "projective", "X": "unitary"},
    "Shor6X2Z": {"Z": "unitary", "X": "projective"},
    "Surface17": {"Z": "projective", "X": "projective"},
}

PUBLISHED_CHAINS = {
    "Surface17": (0, 2, 1, 9, 10, 11, 12, 3, 4, 5, 13, 14, 15, 16, 7, 6, 8),
    "BaconShor13": (0, 6, 3, 11, 9, 1, 4, 7, 10, 12, 5, 2, 8),
    "Shor6X2Z": (0, 2, 1, 11, 12, 9, 13, 3, 4, 5, 14, 10, 15, 6, 7, 8, 16),
    "Shor6Z2X": (3, 11, 0, 6, 12, 1, 7, 13, 9, 10, 14, 4, 15, 2, 8, 16, 5),
}


def canonical_name(name: str) -> str:
    if name in CODE_NAMES:
        return name
    key = name.lower().replace("_", "")
    if key in _ALIASES:
        return _ALIASES[key]
    raise ValueError(f"unknown code {name!r}; choose from {', '.join(CODE_NAMES)}")


def _ordered_support(text: str) -> tuple[int, ...]:
    return tuple(int(t) for t in text.replace("X", " ").replace("Z", " ").split())


def compass_gauges() -> list[PauliOperator]:
    """Horizontal XX and vertical ZZ links of the 3x3 compass lattice."""
    out = []
    for r, c in product(range(3), range(2)):
        q = 3 * r + c
        out.append(PauliOperator.from_sparse(N_DATA, {q: "X", q + 1: "X"}))
    for r, c in product(range(2), range(3)):
        q = 3 * r + c
        out.append(PauliOperator.from_sparse(N_DATA, {q: "Z", q + 3: "Z"}))
    return out


@dataclass(frozen=True)
class CodeSpec:
    name: str
    stabilizers: tuple[PauliOperator, ...]
    supports: tuple[tuple[int, ...], ...]  # data order used by each syndrome block
    types: tuple[str, ...]  # "Z" or "X" per stabilizer
    ancillas: tuple[int, ...]  # ancilla qubit per stabilizer
    logical_z: PauliOperator
    logical_x: PauliOperator
    gauges: tuple[PauliOperator, ...] = ()
    basis_prep: dict = field(default_factory=dict)

    n_data = N_DATA

    @property
    def n_ancilla(self) -> int:
        return len(self.ancillas)

    @property
    def n_qubits(self) -> int:
        return N_DATA + self.n_ancilla

    @property
    def num_stabilizers(self) -> int:
        return len(self.stabilizers)

    @property
    def ancilla_map(self) -> dict[int, int]:
        """Ancilla qubit -> index of the stabilizer it measures."""
        return {a: i for i, a in enumerate(self.ancillas)}

    def indices(self, kind: str) -> list[int]:
        return [i for i, t in enumerate(self.types) if t == kind]

    @property
    def round_order(self) -> list[int]:
        """Stabilizer indices in measurement order: Z-type blocks, then X-type."""
        return self.indices("Z") + self.indices("X")

    @property
    def is_subsystem(self) -> bool:
        return bool(self.gauges)

    # -- algebra ---------------------------------------------------------
    def syndrome(self, error: PauliOperator) -> tuple[int, ...]:
        """One bit per stabilizer (table order): 1 iff it anticommutes with ``error``."""
        return tuple(int(not commutes(s, error)) for s in self.stabilizers)

    def group_basis(self) -> XorBasis:
        """Span of stabilizers and gauge generators (signs ignored)."""
        return XorBasis(symplectic(p) for p in self.stabilizers + self.gauges)

    def in_stabilizer_gauge_group(self, p: PauliOperator) -> bool:
        return self.group_basis().contains(symplectic(p))

    def logical_class(self, p: PauliOperator) -> str:
        """Logical action of an undetected data Pauli: ``none``, ``X``, ``Z`` or ``Y``."""
        flips_z = not commutes(p, self.logical_z)
        flips_x = not commutes(p, self.logical_x)
        return {(False, False): "none", (True, False): "X", (False, True): "Z", (True, True): "Y"}[(flips_z, flips_x)]

    def undetected_logicals(self, max_weight: int = 2) -> list[PauliOperator]:
        """Data Paulis of weight <= max_weight with zero syndrome that are not in the stabilizer*gauge group."""
        basis = self.group_basis()
        bad = []
        for w in range(1, max_weight + 1):
            for qs in combinations(range(N_DATA), w):
                for letters in product("XYZ", repeat=w):
                    p = PauliOperator.from_sparse(N_DATA, dict(zip(qs, letters)))
                    if any(self.syndrome(p)):
                        continue
                    if not basis.contains(symplectic(p)):
                        bad.append(p)
        return bad

    def check(self) -> dict[str, bool]:
        stabs = self.stabilizers
        res = {
            "stabilizers_commute": all(commutes(a, b) for a, b in combinations(stabs, 2)),
            "logicals_commute_with_stabilizers": all(
                commutes(s, lg) for s in stabs for lg in (self.logical_z, self.logical_x)
            ),
            "logicals_anticommute": not commutes(self.logical_z, self.logical_x),
            "gauges_commute_with_stabilizers": all(commutes(g, s) for g in self.gauges for s in stabs),
            "gauges_commute_with_logicals": all(
                commutes(g, lg) for g in self.gauges for lg in (self.logical_z, self.logical_x)
            ),
            "distance_3": not self.undetected_logicals(2),
        }
        # one encoded qubit: 9 - rank(stabilizers) - (gauge qubits) = 1
        stab_rank = XorBasis(symplectic(s) for s in stabs).rank
        gauge_qubits = (self.group_basis().rank - stab_rank) // 2
        res["encodes_one_qubit"] = N_DATA - stab_rank - gauge_qubits == 1
        return res

    # -- export ------------------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "n_data": N_DATA,
            "n_ancilla": self.n_ancilla,
            "stabilizers": [
                "".join(f"{t}{q}" for q in sup) for t, sup in zip(self.types, self.supports)
            ],
            "gauges": [g.to_string() for g in self.gauges],
            "logical_z": self.logical_z.to_string(),
            "logical_x": self.logical_x.to_string(),
            "ancilla_map": {str(a): "".join(f"{self.types[i]}{q}" for q in self.supports[i])
                            for a, i in sorted(self.ancilla_map.items())},
            "basis_prep": dict(self.basis_prep),
            "published_chain": list(PUBLISHED_CHAINS[self.name]),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


_CACHE: dict[str, CodeSpec] = {}


def build_code(name: str) -> CodeSpec:
    name = canonical_name(name)
    if name not in _CACHE:
        rows = _TABLE[name]
        stabs = tuple(PauliOperator.from_string(s, N_DATA) for s, _ in rows)
        lz, lx = (PauliOperator.from_string(s, N_DATA) for s in _LOGICALS[name])
        _CACHE[name] = CodeSpec(
            name=name,
            stabilizers=stabs,
            supports=tuple(_ordered_support(s) for s, _ in rows),
            types=tuple(s[0] for s, _ in rows),
            ancillas=tuple(a for _, a in rows),
            logical_z=lz,
            logical_x=lx,
            gauges=tuple(compass_gauges()) if name == "BaconShor13" else (),
            basis_prep=dict(_BASIS_PREP[name]),
        )
    return _CACHE[name]


def all_codes() -> list[CodeSpec]:
    return [build_code(n) for n in CODE_NAMES]


# -- circuits -----------------------------------------------------------------

@dataclass(frozen=True)
class SyndromeBlock:
    stabilizer: int
    ancilla: int
    kind: str
    data: tuple[int, ...]


@dataclass(frozen=True)
class SyndromeSchedule:
    code: str
    blocks: tuple[SyndromeBlock, ...]

    def to_circuit(self, n: int) -> Circuit:
        c = Circuit(n)
        append_blocks(c, self.blocks)
        return c


def append_blocks(c: Circuit, blocks, qubit_map=None) -> list[int]:
    """Append serialized bare-ancilla blocks; returns the measurement indices."""
    qm = (lambda q: q) if qubit_map is None else (lambda q: qubit_map[q])
    meas = []
    for b in blocks:
        a = qm(b.ancilla)
        c.prep(a)
        if b.kind == "Z":
            for d in b.data:
                c.cnot(qm(d), a)
        else:
            c.h(a)
            for d in b.data:
                c.cnot(a, qm(d))
            c.h(a)
        meas.append(c.measure(a))
    return meas


def syndrome_round(code: CodeSpec) -> SyndromeSchedule:
    blocks = tuple(
        SyndromeBlock(i, code.ancillas[i], code.types[i], code.supports[i]) for i in code.round_order
    )
    return SyndromeSchedule(code.name, blocks)


def random_stabilizers(code: CodeSpec, basis: str) -> list[int]:
    """Stabilizers whose first measurement is random after a product-state start."""
    return code.indices("X" if basis == "Z" else "Z")


def _fanout(c: Circuit, rep: int, others):
    c.h(rep)
    for q in others:
        c.cnot(rep, q)


def preparation_circuit(code: CodeSpec, basis: str) -> Circuit:
    """Encoded ``|0>_L`` (basis ``Z``) or ``|+>_L`` (basis ``X``) on ``code.n_qubits`` qubits.

    Unitary encoders build GHZ states along rows (in the X basis) or along
    columns (in the Z basis), so every single fault leaves at most a
    correctable or gauge-equivalent error.  Projective preparation starts
    from a product state, measures each stabilizer once and fixes the random
    outcomes with a software Pauli.
    """
    if basis not in ("Z", "X"):
        raise ValueError(f"basis must be 'Z' or 'X', got {basis!r}")
    c = Circuit(code.n_qubits)
    for q in range(N_DATA):
        c.prep(q)
    if code.basis_prep[basis] == "unitary":
        if basis == "Z":
            # rows in (|+++> + |--->)
            for r in range(3):
                row = [3 * r, 3 * r + 1, 3 * r + 2]
                _fanout(c, row[0], row[1:])
                for q in row:
                    c.h(q)
        else:
            # columns in (|000> + |111>)
            for col in range(3):
                _fanout(c, col, [col + 3, col + 6])
        return c

    from .decoder import build_lookup

    table = build_lookup(code)
    if basis == "X":
        for q in range(N_DATA):
            c.h(q)
    random = set(random_stabilizers(code, basis))
    blocks = syndrome_round(code).blocks
    meas = append_blocks(c, blocks)
    for b, m in zip(blocks, meas):
        if b.stabilizer in random:
            bits = [0] * code.num_stabilizers
            bits[b.stabilizer] = 1
            fix = table.decode(bits)
            c.fixup(m, {q: fix.letter(q) for q in fix.support})
    return c
