import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from compass_sim.experiment import experiment_setup
from compass_sim.frame import FrameBatch, Injections
from compass_sim.pauli import PauliOperator
from compass_sim.tableau import Tableau, run_reference, simulate


def random_fault(rng, n, n_ops):
    letters = {int(q): "XYZ"[rng.integers(3)] for q in rng.choice(n, size=rng.integers(1, 3), replace=False)}
    return int(rng.integers(0, n_ops + 1)), PauliOperator.from_sparse(n, letters)


@pytest.mark.parametrize("code", ["BaconShor13", "Shor6X2Z"])
def test_frame_flips_equal_tableau_outcomes(code):
    """A faulted tableau run reproduces reference XOR frame flips on every measurement.

    Random measurements are forced to the frame's prediction; deterministic
    ones must agree on their own.
    """
    exp, _ = experiment_setup(code, "Z")
    circ = exp.compiled
    ref = run_reference(circ, seed=3)
    rng = np.random.default_rng(11)
    faults = [random_fault(rng, circ.n, len(circ.gates)) for _ in range(12)]
    inj = Injections.from_paulis((pos, j, p) for j, (pos, p) in enumerate(faults))
    flips = FrameBatch(circ.n, len(faults)).run(circ, inj).flip_matrix()
    for j, (pos, p) in enumerate(faults):
        want = [r ^ int(f) for r, f in zip(ref.outcomes, flips[:, j])]
        forced = dict(enumerate(want))
        run = simulate(circ, seed=3, faults={pos: [p]}, forced=forced)
        det = [m for m, d in enumerate(run.deterministic) if d]
        assert det, "expected some deterministic measurements"
        assert [run.outcomes[m] for m in det] == [want[m] for m in det]


def test_bell_pair_parities():
    t = Tableau(2)
    t.rotate(PauliOperator.from_label("XX"), 1)  # |00> -> (|00> - i|11>)/sqrt2
    zz = PauliOperator.from_label("ZZ")
    assert abs(t.expectation(zz)) == 1
    out0, d0 = t.measure(0, np.random.default_rng(0))
    out1, d1 = t.measure(1, np.random.default_rng(0))
    assert not d0 and d1 and out0 == out1


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_reference_run_is_reproducible(seed):
    exp, _ = experiment_setup("Surface17", "X")
    assert run_reference(exp.compiled, seed=seed).outcomes == run_reference(exp.compiled, seed=seed).outcomes


def test_measuring_unprepared_qubit_rejected():
    from compass_sim.circuit import Circuit

    c = Circuit(2)
    c.prep(0)
    c.measure(1)
    with pytest.raises(ValueError):
        run_reference(c)
