"""Syndrome lookup decoders for the compass codes.

The codes are CSS, so X and Z errors decode independently: Z-type
stabilizer bits select an X-type correction and X-type bits select a
Z-type correction.  Each half is filled by walking all 512 Paulis of that
type in order of weight, then lexicographic support; the first Pauli seen
for a syndrome is its correction.  Every syndrome ends up with a
minimum-weight correction, and the zero syndrome maps to the identity.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .codes import N_DATA, CodeSpec, build_code
from .pauli import PauliOperator, multiply

RESIDUALS = ("none", "X", "Z", "Y")


def _masks(code: CodeSpec, kind: str) -> list[int]:
    """Support bit masks of the stabilizers of one type (table order)."""
    return [sum(1 << q for q in code.supports[i]) for i in code.indices(kind)]


def _parities(masks: list[int], errors: int) -> int:
    s = 0
    for j, m in enumerate(masks):
        s |= (bin(m & errors).count("1") & 1) << j
    return s


def _fill(masks: list[int]) -> np.ndarray:
    """Minimum-weight error mask for each syndrome value (first found wins)."""
    table = np.full(1 << len(masks), -1, dtype=np.int64)
    for w in range(N_DATA + 1):
        for qs in combinations(range(N_DATA), w):
            e = sum(1 << q for q in qs)
            s = _parities(masks, e)
            if table[s] < 0:
                table[s] = e
    if (table < 0).any():
        raise AssertionError("stabilizers of one type are not independent")
    return table


@dataclass(frozen=True)
class DecoderTable:
    code: str
    z_stabs: tuple[int, ...]  # stabilizer indices of Z type
    x_stabs: tuple[int, ...]
    z_masks: tuple[int, ...]  # supports of the Z-type stabilizers
    x_masks: tuple[int, ...]
    x_correction: np.ndarray  # Z-type syndrome value -> X correction mask
    z_correction: np.ndarray  # X-type syndrome value -> Z correction mask
    gauge_aware: bool

    @property
    def num_stabilizers(self) -> int:
        return len(self.z_stabs) + len(self.x_stabs)

    def split(self, syndrome) -> tuple[int, int]:
        """Full syndrome (table order) -> (Z-type value, X-type value)."""
        bits = list(syndrome)
        if len(bits) != self.num_stabilizers:
            raise ValueError(f"syndrome has {len(bits)} bits, expected {self.num_stabilizers}")
        zs = sum(int(bits[i]) << j for j, i in enumerate(self.z_stabs))
        xs = sum(int(bits[i]) << j for j, i in enumerate(self.x_stabs))
        return zs, xs

    def decode(self, syndrome) -> PauliOperator:
        zs, xs = self.split(syndrome)
        return PauliOperator.from_sparse(N_DATA, _letters(int(self.x_correction[zs]), int(self.z_correction[xs])))

    def to_dict(self) -> dict:
        """Syndrome (hex, bit i = stabilizer i) -> correction string."""
        n = self.num_stabilizers
        out = {}
        for s in range(1 << n):
            bits = [(s >> i) & 1 for i in range(n)]
            out[format(s, "x")] = self.decode(bits).to_string()
        return {"code": self.code, "gauge_aware": self.gauge_aware, "table": out}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=False)


def _letters(xmask: int, zmask: int) -> dict[int, str]:
    out = {}
    for q in range(N_DATA):
        x, z = xmask >> q & 1, zmask >> q & 1
        if x or z:
            out[q] = "Y" if x and z else ("X" if x else "Z")
    return out


_TABLES: dict[str, DecoderTable] = {}


def build_lookup(code: CodeSpec | str) -> DecoderTable:
    if isinstance(code, str):
        code = build_code(code)
    if code.name not in _TABLES:
        zm, xm = _masks(code, "Z"), _masks(code, "X")
        _TABLES[code.name] = DecoderTable(
            code=code.name,
            z_stabs=tuple(code.indices("Z")),
            x_stabs=tuple(code.indices("X")),
            z_masks=tuple(zm),
            x_masks=tuple(xm),
            x_correction=_fill(zm),
            z_correction=_fill(xm),
            gauge_aware=code.is_subsystem,
        )
    return _TABLES[code.name]


def decode(table: DecoderTable, syndrome) -> PauliOperator:
    return table.decode(syndrome)


def logical_residual(code: CodeSpec, error: PauliOperator, correction: PauliOperator) -> str:
    """Logical class of ``error * correction``: ``none``, ``X``, ``Z`` or ``Y``.

    The class is read off from anticommutation with the table logicals,
    which commute with every stabilizer and gauge operator; ``X`` means the
    residual flips ``logical_z``.
    """
    r = multiply(error, correction)
    if code.in_stabilizer_gauge_group(r):
        return "none"
    return code.logical_class(r)


def residual_after_decoding(code: CodeSpec, error: PauliOperator) -> str:
    """Decode ``error``'s own syndrome and classify what is left."""
    corr = build_lookup(code).decode(code.syndrome(error))
    if any(code.syndrome(multiply(error, corr))):
        raise RuntimeError(f"{code.name} lookup correction does not clear the syndrome of {error}")
    return logical_residual(code, error, corr)


def syndrome_values(masks, flips: np.ndarray) -> np.ndarray:
    """Vectorized parity check: ``flips`` is (..., 9) uint8 -> packed syndrome ints."""
    out = np.zeros(flips.shape[:-1], dtype=np.int64)
    for j, m in enumerate(masks):
        qs = [q for q in range(N_DATA) if m >> q & 1]
        out |= (np.bitwise_xor.reduce(flips[..., qs], axis=-1).astype(np.int64) & 1) << j
    return out
