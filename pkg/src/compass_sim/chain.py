"""Crosstalk-safe qubit orderings for a linear ion chain.

A pair of qubits is *bad* if placing them next to each other lets a single
crosstalk XX fault cause a logical failure.  Safe pairs form a graph, and
a good chain is a Hamiltonian path in it.  When none exists we look for the
path needing the fewest non-edges, breaking ties by total ion distance
spanned by the XX gates of the experiment.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, permutations

import numpy as np

from .codes import N_DATA, PUBLISHED_CHAINS, CodeSpec, build_code
from .decoder import build_lookup
from .experiment import BASES, ExperimentCircuit, experiment_setup
from .frame import FrameBatch, Injections
from .layout import ChainLayout
from .pauli import PauliOperator


@dataclass(frozen=True)
class CrosstalkGraph:
    n: int
    edges: frozenset  # safe pairs (u, v) with u < v
    weights: dict = field(default_factory=dict, compare=False)  # (u, v) -> XX gate count, for the tie-break

    def __post_init__(self):
        for u, v in self.edges:
            if not (0 <= u < v < self.n):
                raise ValueError(f"bad edge {(u, v)}")

    def has_edge(self, u: int, v: int) -> bool:
        return (min(u, v), max(u, v)) in self.edges

    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.n, self.n), bool)
        for u, v in self.edges:
            a[u, v] = a[v, u] = True
        return a

    def degree(self, q: int) -> int:
        return sum(q in e for e in self.edges)

    def extra_edges(self, order) -> list[tuple[int, int]]:
        """Adjacent chain pairs that are not safe edges."""
        return [(a, b) for a, b in zip(order, order[1:]) if not self.has_edge(a, b)]

    def time_cost(self, order) -> int:
        pos = {q: j for j, q in enumerate(order)}
        return sum(w * abs(pos[a] - pos[b]) for (a, b), w in self.weights.items())


# -- classification ------------------------------------------------------------------

def _xx_gates(exp: ExperimentCircuit):
    for i, g in enumerate(exp.compiled.gates):
        if g.kind == "XX":
            yield i, g.qubits


def _pair_injections(exp: ExperimentCircuit, u: int, v: int) -> list[tuple[int, PauliOperator]]:
    """XX faults that ion adjacency of block qubits ``u`` and ``v`` makes possible.

    Whenever one of them takes part in an XX gate and the other does not,
    the bystander may pick up an XX with either gate ion.
    """
    n, N = exp.n_block, exp.compiled.n
    out = []
    for off in (0, n):
        a, b = u + off, v + off
        for i, (p, q) in _xx_gates(exp):
            for x, y in ((a, b), (b, a)):
                if x in (p, q) and y not in (p, q):
                    for partner in (p, q):
                        out.append((i + 1, PauliOperator.from_sparse(N, {y: "X", partner: "X"})))
    return out


def _readout_start(exp: ExperimentCircuit) -> int:
    """Position of the first rotation or measurement after the second syndrome round."""
    first = min(exp.readout[0] + exp.readout[1])
    seen = 0
    for i, g in enumerate(exp.compiled.gates):
        if g.kind == "MEASZ":
            if seen == first:
                break
            seen += 1
    while i > 0 and exp.compiled.gates[i - 1].is_rotation and exp.compiled.gates[i - 1].qubits[0] in _data(exp):
        i -= 1  # readout basis change
    return i


def _data(exp: ExperimentCircuit) -> set[int]:
    n = exp.n_block
    return {q + off for off in (0, n) for q in range(N_DATA)}


def logical_failures(exp: ExperimentCircuit, faults) -> np.ndarray:
    """Whether each fault changes the logical two-block state after ideal decoding.

    Faults are propagated to just before the readout and the data error of
    each block is corrected with the lookup decoder from its exact
    syndrome.  The blocks then hold a logical Bell pair, so a residual
    matters only if it flips ``Z_L1 Z_L2`` or ``X_L1 X_L2``; a logical
    operator that stabilizes the pair (say ``Z_L`` on a fresh ``|0>_L``)
    is harmless.  Measurement flips along the way are ignored.
    """
    faults = list(faults)
    if not faults:
        return np.zeros(0, bool)
    code, table = exp.code, build_lookup(exp.code)
    inj = Injections.from_paulis((pos, j, p) for j, (pos, p) in enumerate(faults))
    fb = FrameBatch(exp.compiled.n, len(faults)).run(exp.compiled, inj, stop=_readout_start(exp))
    shifts = np.arange(N_DATA, dtype=np.int64)[:, None]
    zl = sum(1 << q for q in code.logical_z.support)
    xl = sum(1 << q for q in code.logical_x.support)
    flips_zz = np.zeros(len(faults), np.int64)
    flips_xx = np.zeros(len(faults), np.int64)
    for off in (0, exp.n_block):
        x = (fb.x[off:off + N_DATA].astype(np.int64) << shifts).sum(axis=0)
        z = (fb.z[off:off + N_DATA].astype(np.int64) << shifts).sum(axis=0)
        xr = x ^ table.x_correction[_syndromes(table.z_masks, x)]
        zr = z ^ table.z_correction[_syndromes(table.x_masks, z)]
        flips_zz ^= _popcount(xr & zl) & 1
        flips_xx ^= _popcount(zr & xl) & 1
    return (flips_zz | flips_xx).astype(bool)


def _popcount(a: np.ndarray) -> np.ndarray:
    a = a.copy()
    c = np.zeros_like(a)
    while a.any():
        c += a & 1
        a >>= 1
    return c


def _syndromes(masks, errors: np.ndarray) -> np.ndarray:
    s = np.zeros_like(errors)
    for j, m in enumerate(masks):
        s |= (_popcount(errors & m) & 1) << j
    return s


def classify_pairs(code: CodeSpec | str) -> dict[tuple[int, int], bool]:
    """``{(u, v): is_bad}`` for every unordered pair of code qubits."""
    if isinstance(code, str):
        code = build_code(code)
    exp, _ = experiment_setup(code.name, "Z")
    pairs = list(combinations(range(code.n_qubits), 2))
    faults, owner = [], []
    for k, (u, v) in enumerate(pairs):
        inj = _pair_injections(exp, u, v)
        faults += inj
        owner += [k] * len(inj)
    fails = logical_failures(exp, faults)
    bad = dict.fromkeys(pairs, False)
    for k in np.unique(np.asarray(owner, dtype=np.int64)[fails]):
        bad[pairs[k]] = True
    return bad


def classify_pair(code: CodeSpec | str, u: int, v: int) -> str:
    """``"bad"`` or ``"safe"``."""
    if isinstance(code, str):
        code = build_code(code)
    if u == v:
        raise ValueError("a crosstalk pair needs two distinct qubits")
    for q in (u, v):
        if not 0 <= q < code.n_qubits:
            raise ValueError(f"qubit {q} is not in {code.name}")
    exp, _ = experiment_setup(code.name, "Z")
    return "bad" if logical_failures(exp, _pair_injections(exp, min(u, v), max(u, v))).any() else "safe"


def gate_weights(code: CodeSpec) -> dict[tuple[int, int], int]:
    """XX gate counts per block-qubit pair, over both experiment bases and blocks."""
    w: dict[tuple[int, int], int] = {}
    for basis in BASES:
        exp, _ = experiment_setup(code.name, basis)
        n = exp.n_block
        for _, (p, q) in _xx_gates(exp):
            if (p < n) != (q < n):
                continue  # transversal gates span a fixed distance
            a, b = sorted((p % n, q % n))
            w[(a, b)] = w.get((a, b), 0) + 1
    return w


_GRAPHS: dict[str, CrosstalkGraph] = {}


def build_graph(code: CodeSpec | str) -> CrosstalkGraph:
    if isinstance(code, str):
        code = build_code(code)
    if code.name not in _GRAPHS:
        bad = classify_pairs(code)
        safe = frozenset(p for p, b in bad.items() if not b)
        _GRAPHS[code.name] = CrosstalkGraph(code.n_qubits, safe, gate_weights(code))
    return _GRAPHS[code.name]


# -- minimum extra-edge Hamiltonian path ------------------------------------------------

def _cut_weights(n: int, weights: dict) -> np.ndarray:
    """Total gate weight crossing ``(S, V - S)`` for every subset ``S``."""
    masks = np.arange(1 << n, dtype=np.int64)
    cut = np.zeros(1 << n, dtype=np.int64)
    for (a, b), w in weights.items():
        cut += w * (((masks >> a) ^ (masks >> b)) & 1)
    return cut


def min_extra_edge_path(graph: CrosstalkGraph, tie_break: bool = True) -> ChainLayout:
    """Ordering with the fewest adjacent non-edges, then the lowest time cost.

    DP over (visited set, last vertex).  The time cost, the gate-weighted
    sum of ion distances, equals the sum over path prefixes ``S`` of the
    weight crossing ``(S, V - S)``, so it adds up along the DP like the
    extra-edge count does.  Costs combine as ``extra * BIG + time``.
    """
    n = graph.n
    if n == 0:
        return ChainLayout((), 0, 0)
    cut = _cut_weights(n, graph.weights) if tie_break else np.zeros(1 << n, np.int64)
    big = int(cut.max()) * n + 1
    step = np.where(graph.adjacency(), 0, big).astype(np.int64)
    full = (1 << n) - 1
    inf = np.iinfo(np.int64).max // 4
    dp = np.full((1 << n, n), inf, dtype=np.int64)
    parent = np.full((1 << n, n), -1, dtype=np.int8 if n < 127 else np.int16)
    for v in range(n):
        dp[1 << v, v] = cut[1 << v]
    pop = np.array([bin(m).count("1") for m in range(1 << n)])
    for size in range(1, n):
        layer = np.flatnonzero(pop == size)
        for w in range(n):
            m = layer[(layer >> w) & 1 == 0]
            if m.size == 0:
                continue
            cand = dp[m] + step[:, w][None, :]  # (masks, previous end)
            best = np.argmin(cand, axis=1)
            val = cand[np.arange(m.size), best] + cut[m | (1 << w)]
            new = m | (1 << w)
            better = val < dp[new, w]
            dp[new[better], w] = val[better]
            parent[new[better], w] = best[better]
    end = int(np.argmin(dp[full]))
    order, mask = [], full
    while end >= 0:
        order.append(end)
        prev = int(parent[mask, end]) if mask != (1 << end) else -1
        mask ^= 1 << end
        end = prev
    order.reverse()
    extra = len(graph.extra_edges(order))
    return ChainLayout(tuple(order), extra, float(graph.time_cost(order)))


def brute_force_path(graph: CrosstalkGraph, tie_break: bool = True) -> ChainLayout:
    """Exhaustive search over all orderings (small graphs only)."""
    if graph.n > 10:
        raise ValueError("brute force is limited to 10 vertices")
    best, best_key = None, None
    for order in permutations(range(graph.n)):
        key = (len(graph.extra_edges(order)), graph.time_cost(order) if tie_break else 0)
        if best_key is None or key < best_key:
            best, best_key = order, key
    return ChainLayout(tuple(best), best_key[0], float(graph.time_cost(best)))


@dataclass(frozen=True)
class ChainReport:
    code: str
    order: tuple[int, ...]
    extra_edge_count: int
    bad_adjacencies: tuple[tuple[int, int], ...]
    time_cost: float
    optimal_extra: int

    def to_dict(self) -> dict:
        return {"code": self.code, "order": list(self.order), "extra_edge_count": self.extra_edge_count,
                "bad_adjacencies": [list(p) for p in self.bad_adjacencies], "time_cost": self.time_cost,
                "optimal_extra_edge_count": self.optimal_extra}


def validate_chain(code: CodeSpec | str, order=None) -> ChainReport:
    """Check an ordering (default: the published one) against the crosstalk graph."""
    if isinstance(code, str):
        code = build_code(code)
    order = tuple(PUBLISHED_CHAINS[code.name] if order is None else order)
    ChainLayout(order)
    if len(order) != code.n_qubits:
        raise ValueError(f"{code.name} has {code.n_qubits} qubits, ordering has {len(order)}")
    g = build_graph(code)
    bad = tuple(g.extra_edges(order))
    best = optimal_chain(code)
    return ChainReport(code.name, order, len(bad), bad, float(g.time_cost(order)), best.extra_edge_count)


_OPTIMAL: dict[str, ChainLayout] = {}


def optimal_chain(code: CodeSpec | str) -> ChainLayout:
    if isinstance(code, str):
        code = build_code(code)
    if code.name not in _OPTIMAL:
        _OPTIMAL[code.name] = min_extra_edge_path(build_graph(code))
    return _OPTIMAL[code.name]
