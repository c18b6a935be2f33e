import numpy as np
import pytest

from compass_sim.codes import CODE_NAMES, N_DATA
from compass_sim.experiment import (BASES, ExperimentSpec, ShotDecoder, experiment_setup, fault_model, fault_words,
                                    noiseless_bell_check, run_direct, run_experiment, run_subset,
                                    single_fault_failures, wilson_interval)
from compass_sim.noise import NoiseParams
from compass_sim.pauli import PauliOperator

ION_TRAP = NoiseParams.from_rates(p1q=1e-4, p2q=1e-3, inv_t2=1.0)
PAIRS = [(c, b) for c in CODE_NAMES for b in BASES]


def _readout_flip(name, basis, pauli_of):
    exp, dec = experiment_setup(name, basis)
    meas = [i for i, g in enumerate(exp.compiled.gates) if g.kind == "MEASZ"]
    first = meas[min(exp.readout[0] + exp.readout[1])]
    logical = pauli_of(exp.code)
    # flip the Z-measured data of the second block on the logical's support
    n = exp.compiled.n
    flip = PauliOperator.from_sparse(n, {q + exp.n_block: "X" for q in logical.support})
    return dec.violations(fault_words(exp.compiled, exp.observed, [(first, flip)]))[0]


@pytest.mark.parametrize("name", CODE_NAMES)
def test_readout_logical_flip_is_a_violation(name):
    assert _readout_flip(name, "Z", lambda c: c.logical_x)
    assert _readout_flip(name, "X", lambda c: c.logical_z)


@pytest.mark.parametrize("name", CODE_NAMES)
def test_readout_stabilizer_flip_is_harmless(name):
    def x_stab(code):
        return next(s for s, k in zip(code.stabilizers, code.types) if k == "X")

    def z_stab(code):
        return next(s for s, k in zip(code.stabilizers, code.types) if k == "Z")

    # an X-type stabilizer on Z-measured data, a Z-type one on X-measured data
    assert not _readout_flip(name, "Z", x_stab)
    assert not _readout_flip(name, "X", z_stab)


@pytest.mark.parametrize("name,basis", PAIRS)
def test_zero_noise_gives_no_violations(name, basis):
    assert noiseless_bell_check(name, basis, shots=2000, tableau_runs=1) == 0
    r = run_direct(ExperimentSpec(name, basis, NoiseParams(), shots=1000))
    assert r.violations == 0 and r.rate == 0


@pytest.mark.parametrize("name,basis", PAIRS)
def test_single_ion_trap_faults_never_fail(name, basis):
    spec = ExperimentSpec(name, basis, ION_TRAP, include_crosstalk=False)
    exp, dec = experiment_setup(name, basis)
    assert single_fault_failures(fault_model(spec, exp), dec) == []


@pytest.mark.parametrize("name,basis,expected", [
    ("BaconShor13", "Z", 0), ("BaconShor13", "X", 0), ("Surface17", "Z", 0), ("Surface17", "X", 0),
    ("Shor6Z2X", "Z", 80), ("Shor6X2Z", "X", 80)])
def test_depolarizing_first_order_failures(name, basis, expected):
    # the bare weight-6 check of the Shor variants has a weight-3 hook that one fault can cause
    spec = ExperimentSpec(name, basis, NoiseParams.depolarizing(1e-3))
    exp, dec = experiment_setup(name, basis)
    assert len(single_fault_failures(fault_model(spec, exp), dec)) == expected


def test_subset_estimate_invariants():
    spec = ExperimentSpec("Surface17", "Z", ION_TRAP, shots=3000, method="subset", kmax=3)
    r = run_subset(spec)
    assert 0 <= r.ci_low <= r.rate <= r.ci_high <= 1
    p = fault_model(spec).probabilities
    assert r.tail_bound == pytest.approx(1 - sum(s["p_k"] for s in r.strata), abs=1e-12)
    assert r.tail_bound >= 0 and r.tail_bound < p.sum() ** 4
    assert [s["k"] for s in r.strata] == [0, 1, 2, 3]
    assert r.strata[1]["f"] == 0


def test_runs_are_deterministic_and_worker_independent():
    base = ExperimentSpec("BaconShor13", "X", ION_TRAP, shots=20_000, seed=7, chunk=4096)
    one = run_experiment(base)
    again = run_experiment(base)
    many = run_experiment(ExperimentSpec("BaconShor13", "X", ION_TRAP, shots=20_000, seed=7, chunk=4096, workers=4))
    assert one.to_dict() == again.to_dict() == many.to_dict()
    other = run_experiment(ExperimentSpec("BaconShor13", "X", ION_TRAP, shots=20_000, seed=8, chunk=4096))
    assert other.to_dict() != one.to_dict() or one.violations == 0


def test_subset_worker_independence():
    kw = dict(shots=2000, seed=3, method="subset", kmax=3, chunk=512)
    a = run_experiment(ExperimentSpec("Shor6X2Z", "Z", ION_TRAP, **kw))
    b = run_experiment(ExperimentSpec("Shor6X2Z", "Z", ION_TRAP, workers=3, **kw))
    assert a.to_dict() == b.to_dict()


def test_direct_rate_near_physical_rate_at_high_noise():
    r = run_direct(ExperimentSpec("Surface17", "Z", NoiseParams.from_rates(p2q=2e-2, p1q=2e-3), shots=5000))
    assert 0 < r.rate < 0.5
    assert r.ci_low <= r.rate <= r.ci_high


def test_wilson_interval():
    lo, hi = wilson_interval(0, 100)
    assert lo == 0 and 0 < hi < 0.05
    lo, hi = wilson_interval(50, 100)
    assert lo < 0.5 < hi and lo + hi == pytest.approx(1)
    assert wilson_interval(0, 0) == (0.0, 1.0)


@pytest.mark.parametrize("kw", [dict(basis="Y"), dict(method="exact"), dict(shots=0),
                                dict(method="subset", kmax=1), dict(code="Steane7")])
def test_spec_validation(kw):
    args = dict(code="Surface17", basis="Z", noise=NoiseParams())
    args.update(kw)
    with pytest.raises((ValueError, KeyError)):
        ExperimentSpec(**args)


def test_layout_size_checked():
    spec = ExperimentSpec("Surface17", "Z", ION_TRAP, layout=tuple(range(13)))
    with pytest.raises(ValueError):
        fault_model(spec)


def test_observed_word_fits():
    for name in CODE_NAMES:
        exp, dec = experiment_setup(name, "Z")
        assert len(exp.observed) == 4 * exp.num_stabilizers + 2 * N_DATA <= 64
        assert isinstance(dec, ShotDecoder)


def test_low_order_enumeration_matches_brute_force():
    from itertools import combinations

    from compass_sim.experiment import FaultModel, exact_low_order_rates

    spec = ExperimentSpec("BaconShor13", "Z", NoiseParams.from_rates(inv_t2=50.0, p2q=0.05, p1q=0.0),
                          include_crosstalk=False)
    exp, dec = experiment_setup("BaconShor13", "Z")
    full = fault_model(spec, exp)
    # a handful of locations, some with several outcomes, so pairs can fail
    locs = [loc for loc in full.locations if loc.channel == "OverrotMS"][:6] + \
        [loc for loc in full.locations if loc.channel == "Idle"][:6]
    model = FaultModel.build(exp, locs)
    p = np.array([loc.probability for loc in locs])
    want = [0.0, 0.0]
    for k in (1, 2):
        for sub in combinations(range(len(locs)), k):
            base = np.prod([p[i] if i in sub else 1 - p[i] for i in range(len(locs))])
            choices = [[(o, w) for o, w in zip(locs[i].outcomes, locs[i].weights)] for i in sub]
            for combo in np.ndindex(*[len(c) for c in choices]):
                picked = [choices[j][c] for j, c in enumerate(combo)]
                faults = [(locs[i].position, o) for i, (o, _) in zip(sub, picked)]
                word = np.bitwise_xor.reduce(fault_words(exp.compiled, exp.observed, faults))
                if dec.violations(np.array([word]))[0]:
                    want[k - 1] += base * np.prod([w for _, w in picked])
    assert want[1] > 0
    got = exact_low_order_rates(model, dec)
    assert got == pytest.approx(tuple(want), rel=1e-9, abs=1e-15)
