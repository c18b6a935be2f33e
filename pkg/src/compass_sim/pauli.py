"""Pauli operators on up to 64 qubits, stored as packed X/Z bit masks."""

from __future__ import annotations

import re
from dataclasses import dataclass

MAX_QUBITS = 64

_TOKEN = re.compile(r"([IXYZ])(\d+)")


def _popcount(v: int) -> int:
    return bin(v).count("1")


@dataclass(frozen=True)
class PauliOperator:
    """An n-qubit Pauli ``i**phase * prod_q X_q**x_q Z_q**z_q``.

    ``phase`` is kept modulo 4 in the X-then-Z product convention, so ``Y``
    on one qubit is ``PauliOperator(1, 1, 1, phase=1)``.  The public
    :attr:`sign` refers to the Hermitian form written with ``Y`` letters.
    """

    n: int
    x: int = 0
    z: int = 0
    phase: int = 0

    def __post_init__(self):
        if not 0 < self.n <= MAX_QUBITS:
            raise ValueError(f"qubit count must be in 1..{MAX_QUBITS}, got {self.n}")
        mask = (1 << self.n) - 1
        if self.x & ~mask or self.z & ~mask:
            raise ValueError("bit mask exceeds qubit count")
        object.__setattr__(self, "phase", self.phase % 4)

    # ------------------------------------------------------------------
    # construction
    @classmethod
    def identity(cls, n: int) -> "PauliOperator":
        return cls(n)

    @classmethod
    def single(cls, n: int, qubit: int, letter: str) -> "PauliOperator":
        return cls.from_sparse(n, {qubit: letter})

    @classmethod
    def from_sparse(cls, n: int, terms: dict[int, str] | list[tuple[int, str]], sign: int = 1) -> "PauliOperator":
        """Build a Hermitian Pauli from ``{qubit: letter}`` with the given sign."""
        items = terms.items() if isinstance(terms, dict) else terms
        x = z = 0
        ny = 0
        for q, letter in items:
            if not 0 <= q < n:
                raise ValueError(f"qubit {q} out of range for n={n}")
            bit = 1 << q
            if (x | z) & bit:
                raise ValueError(f"qubit {q} listed twice")
            if letter in "XY":
                x |= bit
            if letter in "ZY":
                z |= bit
            ny += letter == "Y"
        if sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        # Y = i X Z, so the Hermitian product carries i**ny in XZ convention
        return cls(n, x, z, ny + (2 if sign < 0 else 0))

    @classmethod
    def from_string(cls, text: str, n: int) -> "PauliOperator":
        """Parse ``"Z0Z3Z1Z4"`` (optionally prefixed by ``+``/``-``)."""
        text = text.strip()
        sign = 1
        if text[:1] in "+-":
            sign = -1 if text[0] == "-" else 1
            text = text[1:]
        terms = {}
        pos = 0
        for m in _TOKEN.finditer(text):
            if m.start() != pos:
                raise ValueError(f"cannot parse Pauli string {text!r}")
            pos = m.end()
            if m.group(1) != "I":
                q = int(m.group(2))
                if q in terms:
                    raise ValueError(f"qubit {q} listed twice in {text!r}")
                terms[q] = m.group(1)
        if pos != len(text):
            raise ValueError(f"cannot parse Pauli string {text!r}")
        return cls.from_sparse(n, terms, sign)

    @classmethod
    def from_label(cls, label: str) -> "PauliOperator":
        """Dense label such as ``"XIZY"``; character ``k`` acts on qubit ``k``."""
        sign = 1
        if label[:1] in "+-":
            sign = -1 if label[0] == "-" else 1
            label = label[1:]
        return cls.from_sparse(len(label), {q: c for q, c in enumerate(label) if c != "I"}, sign)

    # ------------------------------------------------------------------
    # inspection
    @property
    def support(self) -> list[int]:
        v = self.x | self.z
        return [q for q in range(self.n) if v >> q & 1]

    @property
    def weight(self) -> int:
        return _popcount(self.x | self.z)

    @property
    def is_hermitian(self) -> bool:
        return (self.phase - _popcount(self.x & self.z)) % 2 == 0

    @property
    def sign(self) -> int:
        """+1 or -1 for Hermitian operators (in the ``Y``-letter form)."""
        k = (self.phase - _popcount(self.x & self.z)) % 4
        if k % 2:
            raise ValueError("operator is not Hermitian")
        return 1 if k == 0 else -1

    def letter(self, q: int) -> str:
        return "IXZY"[(self.x >> q & 1) | (self.z >> q & 1) << 1]

    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    def unsigned(self) -> "PauliOperator":
        """Same Pauli letters with sign +1."""
        return PauliOperator(self.n, self.x, self.z, _popcount(self.x & self.z))

    def to_string(self, signed: bool = False) -> str:
        body = "".join(f"{self.letter(q)}{q}" for q in self.support) or "I"
        if signed:
            return ("-" if self.sign < 0 else "+") + body
        return body

    def to_label(self) -> str:
        return "".join(self.letter(q) for q in range(self.n))

    def __str__(self) -> str:
        return self.to_string(signed=self.is_hermitian and self.sign < 0)

    def __repr__(self) -> str:
        return f"PauliOperator({self.to_label()!r}, phase={self.phase})"

    # ------------------------------------------------------------------
    # algebra
    def __mul__(self, other: "PauliOperator") -> "PauliOperator":
        return multiply(self, other)

    def commutes(self, other: "PauliOperator") -> bool:
        return commutes(self, other)

    def equal_up_to_phase(self, other: "PauliOperator") -> bool:
        return self.n == other.n and self.x == other.x and self.z == other.z

    def embed(self, n: int, mapping: list[int] | None = None) -> "PauliOperator":
        """Relabel qubit ``q`` to ``mapping[q]`` (default: same index) on ``n`` qubits."""
        if mapping is None:
            mapping = list(range(self.n))
        x = z = 0
        for q in self.support:
            b = 1 << mapping[q]
            if self.x >> q & 1:
                x |= b
            if self.z >> q & 1:
                z |= b
        # phase carries over because the X-then-Z order is per-qubit
        return PauliOperator(n, x, z, self.phase)

    def restrict(self, qubits: list[int]) -> "PauliOperator":
        """Pauli on ``len(qubits)`` qubits taking the letters at ``qubits`` (sign dropped)."""
        terms = {i: self.letter(q) for i, q in enumerate(qubits) if self.letter(q) != "I"}
        return PauliOperator.from_sparse(len(qubits), terms)


def _check(a: PauliOperator, b: PauliOperator):
    if a.n != b.n:
        raise ValueError(f"qubit count mismatch: {a.n} vs {b.n}")


def multiply(a: PauliOperator, b: PauliOperator) -> PauliOperator:
    """Group product ``a @ b`` with the phase tracked exactly."""
    _check(a, b)
    # X^xa Z^za X^xb Z^zb = (-1)^{|za & xb|} X^(xa^xb) Z^(za^zb)
    phase = a.phase + b.phase + 2 * _popcount(a.z & b.x)
    return PauliOperator(a.n, a.x ^ b.x, a.z ^ b.z, phase)


def commutes(a: PauliOperator, b: PauliOperator) -> bool:
    """True iff the symplectic inner product vanishes."""
    _check(a, b)
    return (_popcount(a.x & b.z) + _popcount(a.z & b.x)) % 2 == 0


def conjugate_by_rotation(p: PauliOperator, generator: PauliOperator, quarter_turns: int) -> PauliOperator:
    """Return ``U p U^dagger`` for ``U = exp(-i * quarter_turns * pi/4 * generator)``.

    ``generator`` must be a Hermitian Pauli.  Only operators anticommuting
    with the generator change: they pick up ``exp(-i k pi/2 G)``.
    """
    if commutes(p, generator):
        return p
    k = quarter_turns % 4
    if k == 0:
        return p
    if k == 2:
        return PauliOperator(p.n, p.x, p.z, p.phase + 2)
    gp = multiply(generator, p)
    # k=1: -i G p ; k=3: +i G p
    return PauliOperator(p.n, gp.x, gp.z, gp.phase + (3 if k == 1 else 1))
