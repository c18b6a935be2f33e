"""The two-block transversal-CNOT experiment and its Monte Carlo estimators.

Block 1 is prepared in ``|+>_L`` and block 2 in ``|0>_L``.  Each block gets
one syndrome round, then a transversal CNOT, a second round, and finally a
destructive readout of every data qubit in the chosen basis.  A shot fails
when the decoded logical parity ``Z_L1 Z_L2`` (or ``X_L1 X_L2``) disagrees
with the noiseless reference.

All noise is stochastic Pauli and all circuits are Clifford, so the
observed bits of a shot are the XOR of the precomputed flip vectors of its
faults.  Sampling therefore reduces to drawing faults and XOR-ing packed
words; decoding is a handful of table lookups per shot.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .circuit import Circuit
from .codes import (N_DATA, PUBLISHED_CHAINS, CodeSpec, append_blocks, build_code, canonical_name,
                    preparation_circuit, syndrome_round)
from .compiler import T1Q_US, T2Q_US, TimedCircuit, compile_and_schedule
from .decoder import DecoderTable, build_lookup
from .frame import FrameBatch, Injections
from .layout import ChainLayout
from .noise import FaultLocation, NoiseParams, enumerate_faults, physical_comparator_rate
from .pauli import PauliOperator
from .subset import poisson_binomial, sample_conditional, suffix_esp

BASES = ("Z", "X")


@dataclass
class ExperimentCircuit:
    """Logical and compiled versions of the experiment plus measurement bookkeeping."""

    code: CodeSpec
    basis: str
    logical: Circuit
    compiled: TimedCircuit
    qec1: tuple[list[int], list[int]]  # measurement indices per block, stabilizer table order
    qec2: tuple[list[int], list[int]]
    readout: tuple[list[int], list[int]]  # data measurement indices per block
    boundary: int  # logical op index where the transversal CNOT starts

    @property
    def n_block(self) -> int:
        return self.code.n_qubits

    @property
    def observed(self) -> list[int]:
        """Measurement indices packed into a shot word, lowest bit first."""
        return self.qec1[0] + self.qec1[1] + self.qec2[0] + self.qec2[1] + self.readout[0] + self.readout[1]

    @property
    def num_stabilizers(self) -> int:
        return self.code.num_stabilizers


def _qec(c: Circuit, code: CodeSpec, offset: int) -> list[int]:
    blocks = syndrome_round(code).blocks
    qmap = [q + offset for q in range(code.n_qubits)]
    meas = append_blocks(c, blocks, qmap)
    by_stab = dict(zip((b.stabilizer for b in blocks), meas))
    return [by_stab[i] for i in range(code.num_stabilizers)]


def build_experiment_circuit(code: CodeSpec | str, basis: str, **timing) -> ExperimentCircuit:
    """The experiment for ``code`` read out in ``basis``; ``timing`` goes to the scheduler."""
    if isinstance(code, str):
        code = build_code(code)
    if basis not in BASES:
        raise ValueError(f"basis must be 'Z' or 'X', got {basis!r}")
    n = code.n_qubits
    c = Circuit(2 * n)
    c.append(preparation_circuit(code, "X"), list(range(n)))
    c.append(preparation_circuit(code, "Z"), list(range(n, 2 * n)))
    q1 = (_qec(c, code, 0), _qec(c, code, n))
    boundary = len(c.ops)
    for d in range(N_DATA):
        c.cnot(d, d + n)
    q2 = (_qec(c, code, 0), _qec(c, code, n))
    if basis == "X":
        for off in (0, n):
            for d in range(N_DATA):
                c.h(d + off)
    ro = tuple([c.measure(d + off) for d in range(N_DATA)] for off in (0, n))
    return ExperimentCircuit(code, basis, c, compile_and_schedule(c, **timing), q1, q2, ro, boundary)


# -- flip vectors ----------------------------------------------------------------

def pack_words(flips: np.ndarray, rows: list[int]) -> np.ndarray:
    """Pack selected measurement rows of a (M, V) flip matrix into V uint64 words."""
    if len(rows) > 64:
        raise ValueError("more than 64 observed measurements")
    sel = flips[rows].astype(np.uint64)
    shifts = np.arange(len(rows), dtype=np.uint64)[:, None]
    return np.bitwise_or.reduce(sel << shifts, axis=0) if len(rows) else np.zeros(flips.shape[1], np.uint64)


def fault_words(circuit, observed: list[int], faults, batch: int = 4096) -> np.ndarray:
    """Observed-flip word of each single fault ``(position, PauliOperator)``."""
    faults = list(faults)
    out = np.zeros(len(faults), dtype=np.uint64)
    for start in range(0, len(faults), batch):
        chunk = faults[start:start + batch]
        inj = Injections.from_paulis((pos, j, p) for j, (pos, p) in enumerate(chunk))
        fb = FrameBatch(circuit.n, len(chunk)).run(circuit, inj)
        out[start:start + len(chunk)] = pack_words(fb.flip_matrix(), observed)
    return out


@dataclass
class ShotDecoder:
    """Vectorized decoding of packed shot words for one experiment circuit.

    Word layout (lowest bit first): first-round syndromes of block 1 and
    block 2, second-round syndromes of both blocks, then the 9 readout bits
    of each block.  Syndromes are in stabilizer table order.

    A first-round syndrome is acted on only if the second round repeats it
    (after mapping it through the transversal CNOT); the correction is then
    applied in software just before the CNOT.  Whatever is left is decoded
    from the readout parities.
    """

    exp: ExperimentCircuit
    table: DecoderTable
    correction_effect: tuple[np.ndarray, np.ndarray]  # per block: first-round syndrome -> readout flips
    readout_flip: np.ndarray  # 9 readout bits -> decoded logical flip (0/1)
    zsel: np.ndarray  # full syndrome value -> Z-type part
    xsel: np.ndarray

    @classmethod
    def build(cls, exp: ExperimentCircuit) -> "ShotDecoder":
        code, table = exp.code, build_lookup(exp.code)
        S = code.num_stabilizers
        full = np.arange(1 << S)
        zsel = np.zeros(1 << S, np.int64)
        xsel = np.zeros(1 << S, np.int64)
        for j, i in enumerate(table.z_stabs):
            zsel |= ((full >> i) & 1) << j
        for j, i in enumerate(table.x_stabs):
            xsel |= ((full >> i) & 1) << j

        # readout effect of each single-qubit software correction at the boundary
        n = exp.n_block
        faults = [
            (exp.boundary, PauliOperator.single(2 * n, q + off, a))
            for off in (0, n) for a in "XZ" for q in range(N_DATA)
        ]
        ro = exp.readout[0] + exp.readout[1]
        words = fault_words(exp.logical, ro, faults)
        single = words.reshape(2, 2, N_DATA)  # block, letter, qubit
        effects = []
        for b in range(2):
            eff = np.zeros(1 << S, np.uint64)
            for s in range(1 << S):
                xm = int(table.x_correction[zsel[s]])
                zm = int(table.z_correction[xsel[s]])
                w = 0
                for q in range(N_DATA):
                    if xm >> q & 1:
                        w ^= int(single[b, 0, q])
                    if zm >> q & 1:
                        w ^= int(single[b, 1, q])
                eff[s] = w
            effects.append(eff)

        if exp.basis == "Z":
            masks, corr, logical = table.z_masks, table.x_correction, code.logical_z
        else:
            masks, corr, logical = table.x_masks, table.z_correction, code.logical_x
        lmask = sum(1 << q for q in logical.support)
        rf = np.zeros(512, np.uint8)
        for r in range(512):
            s = sum((bin(m & r).count("1") & 1) << j for j, m in enumerate(masks))
            rf[r] = bin((r ^ int(corr[s])) & lmask).count("1") & 1
        return cls(exp, table, (effects[0], effects[1]), rf, zsel, xsel)

    def violations(self, words: np.ndarray) -> np.ndarray:
        """Boolean array: decoded logical parity flipped."""
        S = self.exp.num_stabilizers
        w = np.asarray(words, dtype=np.uint64)
        smask = np.uint64((1 << S) - 1)
        s = [((w >> np.uint64(k * S)) & smask).astype(np.int64) for k in range(4)]
        a1, a2, b1, b2 = s
        z, x = self.zsel, self.xsel
        ok_z = (z[b1] == z[a1]) & (z[b2] == (z[a2] ^ z[a1]))
        ok_x = (x[b1] == (x[a1] ^ x[a2])) & (x[b2] == x[a2])
        # each correction type is gated by its own consistency check
        e1, e2 = self._typed_effects(a1, a2, ok_z, ok_x)
        ro = (w >> np.uint64(4 * S)) ^ e1 ^ e2
        r1 = (ro & np.uint64(511)).astype(np.int64)
        r2 = ((ro >> np.uint64(9)) & np.uint64(511)).astype(np.int64)
        return (self.readout_flip[r1] ^ self.readout_flip[r2]).astype(bool)

    @cached_property
    def _typed_tables(self):
        """Masks keeping only the Z-type or only the X-type bits of a syndrome."""
        S = self.exp.num_stabilizers
        full = np.arange(1 << S)
        zonly = np.zeros(1 << S, np.int64)
        xonly = np.zeros(1 << S, np.int64)
        for i in self.table.z_stabs:
            zonly |= full & (1 << i)
        for i in self.table.x_stabs:
            xonly |= full & (1 << i)
        return zonly, xonly

    def _typed_effects(self, a1, a2, ok_z, ok_x):
        zonly, xonly = self._typed_tables
        c1, c2 = self.correction_effect
        zero = np.uint64(0)
        e1 = np.where(ok_z, c1[zonly[a1]], zero) ^ np.where(ok_x, c1[xonly[a1]], zero)
        e2 = np.where(ok_z, c2[zonly[a2]], zero) ^ np.where(ok_x, c2[xonly[a2]], zero)
        return e1.astype(np.uint64), e2.astype(np.uint64)


# -- fault model compiled to flip words ---------------------------------------------

@dataclass
class FaultModel:
    """Fault locations of one experiment with each outcome's flip word.

    ``variant[i, k]`` indexes ``words`` for outcome ``k`` of location ``i``;
    ``cum[i, k]`` is the cumulative outcome weight (padded with 1).
    """

    locations: list
    probabilities: np.ndarray
    words: np.ndarray
    variant: np.ndarray
    cum: np.ndarray

    @classmethod
    def build(cls, exp: ExperimentCircuit, locations) -> "FaultModel":
        keys: dict[tuple[int, int, int], int] = {}
        faults = []
        kmax = max((len(loc.outcomes) for loc in locations), default=1)
        variant = np.zeros((len(locations), kmax), np.int64)
        cum = np.ones((len(locations), kmax))
        for i, loc in enumerate(locations):
            acc = 0.0
            for k, (p, w) in enumerate(zip(loc.outcomes, loc.weights)):
                key = (loc.position, p.x, p.z)
                if key not in keys:
                    keys[key] = len(faults)
                    faults.append((loc.position, p))
                variant[i, k] = keys[key]
                acc += w
                cum[i, k] = acc
            variant[i, len(loc.outcomes):] = variant[i, len(loc.outcomes) - 1]
            cum[i, len(loc.outcomes) - 1:] = 1.0
        words = fault_words(exp.compiled, exp.observed, faults)
        probs = np.array([loc.probability for loc in locations], dtype=float)
        return cls(list(locations), probs, words, variant, cum)

    def __len__(self) -> int:
        return len(self.locations)

    def outcome_words(self, loc_idx: np.ndarray, u: np.ndarray) -> np.ndarray:
        """Words for locations ``loc_idx`` with outcomes picked by uniforms ``u``."""
        k = (u[:, None] >= self.cum[loc_idx]).sum(axis=1)
        k = np.minimum(k, self.cum.shape[1] - 1)
        return self.words[self.variant[loc_idx, k]]

    def all_single_faults(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(location index, outcome index, word) for every outcome of every location."""
        li, ki, ws = [], [], []
        for i, loc in enumerate(self.locations):
            for k in range(len(loc.outcomes)):
                li.append(i)
                ki.append(k)
                ws.append(self.words[self.variant[i, k]])
        return np.array(li, np.int64), np.array(ki, np.int64), np.array(ws, np.uint64)


# -- estimators -----------------------------------------------------------------------

DEFAULT_CHUNK = 1 << 15


def wilson_interval(k: int, n: int, confidence: float = 0.95) -> tuple[float, float]:
    from scipy.stats import binomtest

    if n <= 0:
        return (0.0, 1.0)
    ci = binomtest(int(k), int(n)).proportion_ci(confidence_level=confidence, method="wilson")
    return (float(ci.low), float(ci.high))


@dataclass
class ExperimentResult:
    code: str
    basis: str
    shots: int
    violations: float  # a count for direct runs, an expected count for subset runs
    rate: float
    ci_low: float
    ci_high: float
    std_error: float
    p_phys: float
    mode: str = "direct"
    strata: list = field(default_factory=list)
    tail_bound: float = 0.0

    def to_dict(self) -> dict:
        return {
            "code": self.code, "basis": self.basis, "mode": self.mode, "shots": self.shots,
            "violations": self.violations, "rate": self.rate, "ci_low": self.ci_low,
            "ci_high": self.ci_high, "std_error": self.std_error, "p_phys": self.p_phys,
            "tail_bound": self.tail_bound, "strata": self.strata,
        }


def _chunk_rng(seed: int, chunk: int, tag: int = 0) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(tag), int(chunk)]))


DENSE_P = 0.05


def _scatter(n_shots: int, counts: np.ndarray, rng) -> tuple[np.ndarray, np.ndarray]:
    """Distinct shot indices for ``counts[i]`` hits of each location ``i``."""
    loc = np.repeat(np.arange(len(counts)), counts)
    shot = rng.integers(0, n_shots, size=loc.size)
    while loc.size:
        key = loc * n_shots + shot
        order = np.argsort(key, kind="stable")
        dup = np.zeros(loc.size, bool)
        dup[order[1:]] = key[order[1:]] == key[order[:-1]]
        if not dup.any():
            break
        shot[dup] = rng.integers(0, n_shots, size=int(dup.sum()))
    return loc, shot


def sample_fault_words(model: "FaultModel", n_shots: int, rng) -> np.ndarray:
    """XOR of the fault words of ``n_shots`` independent noisy shots."""
    p = model.probabilities
    dense = p >= DENSE_P
    counts = np.where(dense, 0, rng.binomial(n_shots, np.where(dense, 0.0, p)))
    loc, shot = _scatter(n_shots, counts, rng)
    for i in np.flatnonzero(dense):
        hit = np.flatnonzero(rng.random(n_shots) < p[i])
        loc = np.concatenate([loc, np.full(hit.size, i)])
        shot = np.concatenate([shot, hit])
    acc = np.zeros(n_shots, np.uint64)
    if loc.size:
        np.bitwise_xor.at(acc, shot, model.outcome_words(loc, rng.random(loc.size)))
    return acc


def sample_direct_chunk(model: "FaultModel", decoder: ShotDecoder, n_shots: int, rng) -> int:
    """Violations among ``n_shots`` independent shots."""
    return int(decoder.violations(sample_fault_words(model, n_shots, rng)).sum())


def _run_chunks(fn, n_chunks: int, workers: int) -> list:
    if workers <= 1 or n_chunks <= 1:
        return [fn(i) for i in range(n_chunks)]
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(n_chunks)))


def _chunks(total: int, size: int) -> list[int]:
    return [min(size, total - s) for s in range(0, total, size)]


# -- experiment runs --------------------------------------------------------------------

METHODS = ("direct", "subset")


@dataclass(frozen=True)
class ExperimentSpec:
    """Everything that determines one estimate."""

    code: str
    basis: str
    noise: NoiseParams
    shots: int = 100_000
    seed: int = 0
    layout: tuple[int, ...] | None = None  # block chain; default is the published one
    method: str = "direct"
    kmax: int = 4
    include_crosstalk: bool = True
    chunk: int = DEFAULT_CHUNK
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "code", canonical_name(self.code))
        if self.basis not in BASES:
            raise ValueError(f"basis must be 'Z' or 'X', got {self.basis!r}")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        if self.shots <= 0 or self.chunk <= 0:
            raise ValueError("shots and chunk must be positive")
        if self.method == "subset" and self.kmax < 2:
            raise ValueError("subset sampling needs kmax >= 2")

    def block_layout(self) -> ChainLayout:
        return ChainLayout(self.layout if self.layout is not None else PUBLISHED_CHAINS[self.code])


_EXP_CACHE: dict[tuple, tuple[ExperimentCircuit, ShotDecoder]] = {}


def experiment_setup(code: str, basis: str, t1q: float = T1Q_US, t2q: float = T2Q_US) -> tuple[ExperimentCircuit, ShotDecoder]:
    """Cached experiment circuit and decoder for the given gate durations."""
    key = (canonical_name(code), basis, float(t1q), float(t2q))
    if key not in _EXP_CACHE:
        exp = build_experiment_circuit(key[0], basis, t1q=t1q, t2q=t2q)
        _EXP_CACHE[key] = (exp, ShotDecoder.build(exp))
    return _EXP_CACHE[key]


def _setup(spec: "ExperimentSpec") -> tuple[ExperimentCircuit, ShotDecoder]:
    return experiment_setup(spec.code, spec.basis, spec.noise.t1q, spec.noise.t2q)


def fault_model(spec: ExperimentSpec, exp: ExperimentCircuit | None = None) -> FaultModel:
    exp = exp or _setup(spec)[0]
    block = spec.block_layout()
    if len(block) != exp.n_block:
        raise ValueError(f"layout has {len(block)} ions, code needs {exp.n_block}")
    locs = enumerate_faults(exp.compiled, block.concatenate(block), spec.noise, spec.include_crosstalk)
    return FaultModel.build(exp, locs)


def run_direct(spec: ExperimentSpec) -> ExperimentResult:
    """Plain Monte Carlo over ``spec.shots`` shots with a Wilson interval."""
    exp, dec = _setup(spec)
    model = fault_model(spec, exp)
    sizes = _chunks(spec.shots, spec.chunk)
    counts = _run_chunks(lambda c: sample_direct_chunk(model, dec, sizes[c], _chunk_rng(spec.seed, c)),
                         len(sizes), spec.workers)
    k, n = int(sum(counts)), spec.shots
    rate = k / n
    lo, hi = wilson_interval(k, n)
    se = float(np.sqrt(rate * (1 - rate) / n))
    return ExperimentResult(spec.code, spec.basis, n, k, rate, lo, hi, se,
                            physical_comparator_rate(spec.noise), "direct")


def single_fault_failures(model: FaultModel, decoder: ShotDecoder) -> list[tuple[FaultLocation, PauliOperator]]:
    """Every (location, outcome) whose lone occurrence flips the decoded parity."""
    li, ki, words = model.all_single_faults()
    bad = np.flatnonzero(decoder.violations(words))
    return [(model.locations[li[j]], model.locations[li[j]].outcomes[ki[j]]) for j in bad]


def exact_first_stratum(model: FaultModel, decoder: ShotDecoder) -> float:
    """Failure probability given exactly one fault, computed exactly."""
    li, ki, words = model.all_single_faults()
    fail = decoder.violations(words)
    w = model.probabilities / (1 - np.minimum(model.probabilities, 1 - 1e-300))
    ow = np.array([model.locations[i].weights[k] for i, k in zip(li, ki)])
    tot = w.sum()
    return float((w[li] * ow * fail).sum() / tot) if tot > 0 else 0.0


def exact_low_order_rates(model: FaultModel, decoder: ShotDecoder, batch: int = 1 << 20) -> tuple[float, float]:
    """Exact violation probability from shots with exactly one and exactly two faults.

    Every single fault and every pair of faults at distinct locations is
    decoded; each pattern is weighted by its probability of being the
    whole fault set of a shot.
    """
    p = model.probabilities
    if np.any(p >= 1):
        raise ValueError("enumeration needs every fault probability below 1")
    li, ki, words = model.all_single_faults()
    ow = np.array([model.locations[i].weights[k] for i, k in zip(li, ki)])
    q0 = float(np.exp(np.log1p(-p).sum()))
    w = (p / (1 - p))[li] * ow
    r1 = q0 * float((w * decoder.violations(words)).sum())
    r2 = 0.0
    a, b = np.triu_indices(len(li), 1)
    keep = li[a] != li[b]
    a, b = a[keep], b[keep]
    for s in range(0, a.size, batch):
        i, j = a[s:s + batch], b[s:s + batch]
        r2 += float((w[i] * w[j] * decoder.violations(words[i] ^ words[j])).sum())
    return r1, q0 * r2


def run_subset(spec: ExperimentSpec) -> ExperimentResult:
    """Stratified estimate ``sum_k P(k) f(k)`` for ``k <= kmax``.

    ``f(1)`` is exact; strata ``2..kmax`` share ``spec.shots`` equally and
    are sampled exactly given their fault count.  ``P(k > kmax)`` is
    reported as ``tail_bound`` and added to the upper interval end.
    """
    exp, dec = _setup(spec)
    model = fault_model(spec, exp)
    p = model.probabilities
    if np.any(p >= 1):
        raise ValueError("subset sampling needs every fault probability below 1; use direct sampling")
    pk = poisson_binomial(p, spec.kmax)
    tail = max(0.0, 1.0 - float(pk.sum()))
    table = suffix_esp(p / (1 - p), spec.kmax)
    strata = [{"k": 0, "p_k": float(pk[0]), "shots": 0, "failures": 0, "f": 0.0, "lo": 0.0, "hi": 0.0}]
    f1 = exact_first_stratum(model, dec)
    strata.append({"k": 1, "p_k": float(pk[1]), "shots": 0, "failures": 0, "f": f1, "lo": f1, "hi": f1})
    per = max(1, spec.shots // (spec.kmax - 1))
    for k in range(2, spec.kmax + 1):
        fails = 0
        sizes = _chunks(per, spec.chunk)

        def one(c, k=k, sizes=sizes):
            rng = _chunk_rng(spec.seed, c, tag=k)
            idx = sample_conditional(p, k, sizes[c], rng, table)
            words = model.outcome_words(idx.ravel(), rng.random(idx.size)).reshape(idx.shape)
            return int(dec.violations(np.bitwise_xor.reduce(words, axis=1)).sum())

        if table[k, 0] > 0:
            fails = sum(_run_chunks(one, len(sizes), spec.workers))
        f = fails / per
        lo, hi = wilson_interval(fails, per)
        strata.append({"k": k, "p_k": float(pk[k]), "shots": per, "failures": fails, "f": f, "lo": lo, "hi": hi})
    rate = sum(s["p_k"] * s["f"] for s in strata)
    lo = sum(s["p_k"] * s["lo"] for s in strata)
    hi = min(1.0, sum(s["p_k"] * s["hi"] for s in strata) + tail)
    var = sum(s["p_k"] ** 2 * s["f"] * (1 - s["f"]) / s["shots"] for s in strata if s["shots"])
    return ExperimentResult(spec.code, spec.basis, per * (spec.kmax - 1), rate * per * (spec.kmax - 1), rate, lo, hi,
                            float(np.sqrt(var)), physical_comparator_rate(spec.noise), "subset", strata, tail)


def run_experiment(spec: ExperimentSpec) -> ExperimentResult:
    return run_subset(spec) if spec.method == "subset" else run_direct(spec)


def noiseless_bell_check(code: str, basis: str, shots: int = 10_000, tableau_runs: int = 4,
                         seed: int = 0) -> int:
    """Parity violations with all noise off; 0 on a correct build.

    ``shots`` go through the frame sampler with an empty fault model.  The
    ``tableau_runs`` full state-vector-free tableau executions use fresh
    random outcomes for every non-deterministic measurement, so they also
    check that the decoded parity never depends on those outcomes.
    """
    from .tableau import run_reference, simulate

    exp, dec = experiment_setup(code, basis)
    empty = FaultModel.build(exp, [])
    bad = sample_direct_chunk(empty, dec, shots, np.random.default_rng(seed)) if shots else 0
    ref = np.array(run_reference(exp.compiled, seed=seed).outcomes, dtype=np.uint8)
    rng = np.random.default_rng(seed)
    for _ in range(tableau_runs):
        run = simulate(exp.compiled, seed=int(rng.integers(2**63)))
        flips = (np.array(run.outcomes, dtype=np.uint8) ^ ref)[:, None]
        bad += int(dec.violations(pack_words(flips, exp.observed)).sum())
    return bad
