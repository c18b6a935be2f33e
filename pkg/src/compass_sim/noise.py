"""Stochastic Pauli channels of a trapped-ion chain and their fault locations."""

from __future__ import annotations

import math
from decimal import Decimal
from dataclasses import dataclass
from itertools import product

import numpy as np

from .compiler import T1Q_US, T2Q_US, TimedCircuit
from .pauli import PauliOperator

CHANNELS = ("Depol1", "Depol2", "Overrot1", "OverrotMS", "Idle", "Crosstalk")
CENTRAL_MODES = ("amplitude", "probability")


def idle_flip_probability(t_idle: float, t2: float) -> float:
    """Dephasing probability ``(1 - exp(-t/(2 T2))) / 2`` (same time units)."""
    if t_idle < 0:
        raise ValueError(f"idle time must be non-negative, got {t_idle}")
    if t2 <= 0:
        raise ValueError(f"T2 must be positive, got {t2}")
    if math.isinf(t2) or t_idle == 0:
        return 0.0
    return 0.5 * (1.0 - math.exp(-t_idle / (2.0 * t2)))


def crosstalk_probability(rabi_ratio: float) -> float:
    """``sin^2(r pi/4)``; whole-number ratios return the exact values 0, 1/2, 1."""
    if rabi_ratio < 0:
        raise ValueError(f"Rabi ratio must be non-negative, got {rabi_ratio}")
    if float(rabi_ratio).is_integer():
        return (0.0, 0.5, 1.0, 0.5)[int(rabi_ratio) % 4]
    return math.sin(rabi_ratio * math.pi / 4) ** 2


def overrotation_probability(eps: float) -> float:
    return math.sin(eps) ** 2


def epsilon_for_probability(p: float) -> float:
    """Overrotation angle whose stochastic flip probability is ``p``."""
    if not 0 <= p <= 1:
        raise ValueError(f"probability out of range: {p}")
    return math.asin(math.sqrt(p))


@dataclass(frozen=True)
class NoiseParams:
    """Noise strengths; times in microseconds except ``t2`` (seconds).

    Overrotations are stored as their flip probabilities ``p1q = sin^2(eps1q)``
    and ``p_ms = sin^2(eps_ms)``; :meth:`from_angles` takes the angles.
    ``p2d > 0`` selects the depolarizing model, which replaces all
    ion-trap channels and uses ``p1d = p2d / 10``.
    """

    p1q: float = 0.0
    p_ms: float = 0.0
    t2: float = math.inf
    rabi_ratio: float = 0.0
    p2d: float = 0.0
    t1q: float = T1Q_US
    t2q: float = T2Q_US
    central_mode: str = "amplitude"

    def __post_init__(self):
        for name in ("p1q", "p_ms", "rabi_ratio", "p2d", "t1q", "t2q"):
            v = getattr(self, name)
            if not v >= 0:
                raise ValueError(f"{name} must be non-negative, got {v}")
        for name in ("p1q", "p_ms"):
            if getattr(self, name) > 1:
                raise ValueError(f"{name} must be at most 1, got {getattr(self, name)}")
        if not self.t2 > 0:
            raise ValueError(f"T2 must be positive, got {self.t2}")
        if self.p2d > 1:
            raise ValueError(f"p2d must be at most 1, got {self.p2d}")
        if self.central_mode not in CENTRAL_MODES:
            raise ValueError(f"central_mode must be one of {CENTRAL_MODES}")
        if self.p2d > 0 and (self.p1q or self.p_ms or self.rabi_ratio or not math.isinf(self.t2)):
            raise ValueError("depolarizing mode excludes the ion-trap channels")

    @classmethod
    def from_rates(cls, p1q=0.0, p2q=0.0, inv_t2=0.0, rabi_ratio=0.0, **kw) -> "NoiseParams":
        """Build from flip probabilities and ``1/T2`` in s^-1."""
        if inv_t2 < 0:
            raise ValueError(f"1/T2 must be non-negative, got {inv_t2}")
        return cls(p1q=p1q, p_ms=p2q, t2=math.inf if inv_t2 == 0 else 1.0 / inv_t2, rabi_ratio=rabi_ratio, **kw)

    @classmethod
    def from_angles(cls, eps1q=0.0, eps_ms=0.0, **kw) -> "NoiseParams":
        return cls(p1q=overrotation_probability(eps1q), p_ms=overrotation_probability(eps_ms), **kw)

    @classmethod
    def depolarizing(cls, p2d: float, **kw) -> "NoiseParams":
        return cls(p2d=p2d, **kw)

    @property
    def depolarizing_mode(self) -> bool:
        return self.p2d > 0

    @property
    def eps1q(self) -> float:
        return epsilon_for_probability(self.p1q)

    @property
    def eps_ms(self) -> float:
        return epsilon_for_probability(self.p_ms)

    @property
    def inv_t2(self) -> float:
        return 0.0 if math.isinf(self.t2) else 1.0 / self.t2

    @property
    def p1d(self) -> float:
        return self.p2d / 10.0

    @property
    def p_crosstalk(self) -> float:
        return crosstalk_probability(self.rabi_ratio)

    @property
    def p_crosstalk_central(self) -> float:
        """Probability for a pair reached from both gate ions through the central ion."""
        if self.central_mode == "amplitude":
            return crosstalk_probability(4 * self.rabi_ratio)
        return min(1.0, 4 * self.p_crosstalk)

    def idle_probability(self, t_us: float) -> float:
        return idle_flip_probability(t_us * 1e-6, self.t2)

    def to_dict(self) -> dict:
        return {
            "p1q": self.p1q, "p_ms": self.p_ms, "inv_t2": self.inv_t2, "rabi_ratio": self.rabi_ratio,
            "p2d": self.p2d, "t1q": self.t1q, "t2q": self.t2q, "central_mode": self.central_mode,
            "eps1q": self.eps1q, "eps_ms": self.eps_ms, "p_crosstalk": self.p_crosstalk,
        }


def physical_comparator_rate(noise: NoiseParams) -> float:
    """Unencoded-CNOT failure estimate ``p2q + 4 p1q + 8 pc + 2 p_idle``.

    ``p_idle`` uses the idle time of one compiled CNOT, ``t2q + 3 t1q``.
    In depolarizing mode ``p2q = p2d`` and ``p1q = p2d / 10``.
    """
    if noise.depolarizing_mode:
        return _decimal_sum((noise.p2d, 1), (noise.p1d, 4))
    p_idle = noise.idle_probability(noise.t2q + 3 * noise.t1q)
    return _decimal_sum((noise.p_ms, 1), (noise.p1q, 4), (noise.p_crosstalk, 8), (p_idle, 2))


def _decimal_sum(*terms) -> float:
    # sum the shortest decimal forms so that e.g. 1e-4 + 4 * 1e-5 gives 1.4e-4
    return float(sum(Decimal(repr(v)) * k for v, k in terms))


@dataclass(frozen=True)
class FaultLocation:
    """A place where one stochastic Pauli may strike.

    The fault acts just before circuit op ``position``.  ``outcomes`` are
    the possible Paulis and ``weights`` their conditional probabilities.
    """

    position: int
    channel: str
    support: tuple[int, ...]
    probability: float
    outcomes: tuple[PauliOperator, ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        if self.channel not in CHANNELS:
            raise ValueError(f"unknown channel {self.channel!r}")
        if len(self.outcomes) != len(self.weights) or abs(sum(self.weights) - 1) > 1e-12:
            raise ValueError("outcome weights must sum to 1")


_AXIS = {"RX": "X", "RY": "Y", "RZ": "Z"}


def _paulis(n, qubits):
    """All non-identity Paulis supported on ``qubits`` (lexicographic in IXYZ)."""
    out = []
    for letters in product("IXYZ", repeat=len(qubits)):
        if set(letters) != {"I"}:
            out.append(PauliOperator.from_sparse(n, {q: a for q, a in zip(qubits, letters) if a != "I"}))
    return tuple(out)


def crosstalk_pairs(gate_pair, position: dict[int, int], order) -> list[tuple[int, int, int]]:
    """``(neighbor, participant, multiplicity)`` crosstalk pairs of one XX gate.

    Each gate ion couples to the ions next to either gate ion.  A pair that
    is reached twice (the ion between two gate ions one site apart) has
    multiplicity 2.
    """
    a, b = gate_pair
    pa, pb = position[a], position[b]
    n = len(order)
    counts: dict[tuple[int, int], int] = {}
    for p in (a, b):
        for site in (pa - 1, pa + 1, pb - 1, pb + 1):
            if 0 <= site < n and site not in (pa, pb):
                key = (order[site], p)
                counts[key] = counts.get(key, 0) + 1
    return [(nb, p, m) for (nb, p), m in counts.items()]


def enumerate_faults(circuit: TimedCircuit, layout, params: NoiseParams, include_crosstalk: bool = True,
                     keep_zero: bool = False) -> list[FaultLocation]:
    """Fault locations of ``circuit`` under ``params`` on the chain ``layout``.

    ``layout`` is a :class:`~compass_sim.layout.ChainLayout` or a qubit order.
    Locations with probability 0 are dropped unless ``keep_zero``.
    """
    order = tuple(getattr(layout, "order", layout))
    position = {q: j for j, q in enumerate(order)}
    used = {q for g in circuit.gates for q in g.qubits}
    missing = used - set(position)
    if missing:
        raise ValueError(f"qubits {sorted(missing)} are not placed on the chain")
    n = circuit.n
    locs: list[FaultLocation] = []

    def add(pos, channel, support, prob, outcomes, weights=None):
        if prob > 0 or keep_zero:
            if weights is None:
                weights = (1.0 / len(outcomes),) * len(outcomes)
            locs.append(FaultLocation(pos, channel, tuple(support), float(prob), tuple(outcomes), tuple(weights)))

    for i, g in enumerate(circuit.gates):
        after = i + 1
        if g.is_rotation:
            q = g.qubits[0]
            if params.depolarizing_mode:
                add(after, "Depol1", (q,), params.p1d, _paulis(n, (q,)))
            else:
                add(after, "Overrot1", (q,), params.p1q, (PauliOperator.single(n, q, _AXIS[g.kind]),))
        elif g.kind == "XX":
            if params.depolarizing_mode:
                add(after, "Depol2", g.qubits, params.p2d, _paulis(n, g.qubits))
                continue
            a, b = g.qubits
            add(after, "OverrotMS", g.qubits, params.p_ms, (PauliOperator.from_sparse(n, {a: "X", b: "X"}),))
            if include_crosstalk:
                for nb, p, mult in crosstalk_pairs(g.qubits, position, order):
                    prob = params.p_crosstalk if mult == 1 else params.p_crosstalk_central
                    add(after, "Crosstalk", (nb, p), prob, (PauliOperator.from_sparse(n, {nb: "X", p: "X"}),))
    if not params.depolarizing_mode:
        for q, start, end, pos in circuit.idle_intervals():
            add(pos, "Idle", (q,), params.idle_probability(end - start), (PauliOperator.single(n, q, "Z"),))
    return locs


def sample_faults(locations, rng: np.random.Generator) -> list[tuple[FaultLocation, PauliOperator]]:
    """Independent Bernoulli draw per location, then one outcome by weight."""
    if not locations:
        return []
    probs = np.array([loc.probability for loc in locations])
    hits = np.flatnonzero(rng.random(len(locations)) < probs)
    out = []
    for i in hits:
        loc = locations[i]
        k = rng.choice(len(loc.outcomes), p=np.asarray(loc.weights)) if len(loc.outcomes) > 1 else 0
        out.append((loc, loc.outcomes[k]))
    return out
