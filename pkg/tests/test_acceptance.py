"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run ``pytest tests/test_acceptance.py -v`` for the summary block at the end
of the session, or ``python tests/test_acceptance.py`` for the lines alone.
"""

import math
import time
from itertools import combinations, product

import numpy as np
import pytest

from compass_sim.chain import brute_force_path, classify_pair, CrosstalkGraph, min_extra_edge_path, optimal_chain, \
    validate_chain
from compass_sim.cli import main as cli_main
from compass_sim.codes import CODE_NAMES, N_DATA, build_code
from compass_sim.decoder import residual_after_decoding
from compass_sim.experiment import (ExperimentSpec, exact_low_order_rates, experiment_setup, fault_model,
                                    noiseless_bell_check, run_experiment, single_fault_failures)
from compass_sim.noise import (NoiseParams, crosstalk_probability, idle_flip_probability,
                               physical_comparator_rate)
from compass_sim.pauli import PauliOperator
from compass_sim.sweep import bias_zz, bias_zz_error, noise_from, run_both_bases

LINES: list[str] = []


def report(n: int, ok: bool, detail: str) -> None:
    line = f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    LINES.append(line)
    print(line)
    assert ok, line


def combined(code, noise, shots, seed, include_crosstalk=True):
    """Mean of the two basis rates and its standard error."""
    rs = [run_experiment(ExperimentSpec(code, b, noise, shots=shots, seed=seed + i,
                                        include_crosstalk=include_crosstalk)) for i, b in enumerate("ZX")]
    return sum(r.rate for r in rs) / 2, math.sqrt(sum(r.std_error ** 2 for r in rs)) / 2


def separated(a, b, sigmas=3.0):
    """True when ``a`` lies below ``b`` by at least ``sigmas`` combined errors."""
    return b[0] - a[0] >= sigmas * math.hypot(a[1], b[1])


def undetected_low_weight_logicals(code):
    bad = []
    for w in (1, 2):
        for qs in combinations(range(N_DATA), w):
            for letters in product("XYZ", repeat=w):
                p = PauliOperator.from_sparse(N_DATA, dict(zip(qs, letters)))
                if not any(code.syndrome(p)) and code.logical_class(p) != "none":
                    bad.append(p.to_string())
    return bad


def test_criterion_01_code_correctness():
    t0 = time.perf_counter()
    failures = []
    for name in CODE_NAMES:
        code = build_code(name)
        failures += [f"{name}:{k}" for k, ok in code.check().items() if not ok]
        failures += [f"{name}:{p}" for p in undetected_low_weight_logicals(code)]
    dt = time.perf_counter() - t0
    report(1, not failures and dt < 10, f"{len(failures)} failed checks, {dt:.1f} s")


def test_criterion_02_noiseless_bell():
    t0 = time.perf_counter()
    bad = {(c, b): noiseless_bell_check(c, b, shots=10_000) for c in CODE_NAMES for b in "ZX"}
    dt = time.perf_counter() - t0
    total = sum(bad.values())
    report(2, total == 0 and dt < 10, f"{total} violations over 8 x 1e4 shots, {dt:.1f} s")


def test_criterion_03_single_fault_tolerance():
    t0 = time.perf_counter()
    noise = NoiseParams.from_rates(p1q=1e-4, p2q=1e-3, inv_t2=1.0)
    fails = {}
    for c in CODE_NAMES:
        for b in "ZX":
            exp, dec = experiment_setup(c, b)
            model = fault_model(ExperimentSpec(c, b, noise, include_crosstalk=False), exp)
            fails[(c, b)] = len(single_fault_failures(model, dec))
    dt = time.perf_counter() - t0
    total = sum(fails.values())
    report(3, total == 0 and dt < 120, f"{total} failing single faults, {dt:.1f} s")


def test_criterion_04_injected_pair_residuals():
    bs = residual_after_decoding(build_code("BaconShor13"), PauliOperator.from_string("X0X1", N_DATA))
    shor = residual_after_decoding(build_code("Shor6X2Z"), PauliOperator.from_string("X0X1", N_DATA))
    report(4, bs == "X" and shor == "none", f"BaconShor13 X0X1 -> {bs} (want X), Shor6X2Z X0X1 -> {shor} (want none)")


def _random_graph(rng, n):
    pairs = list(combinations(range(n), 2))
    edges = frozenset(p for p in pairs if rng.random() < rng.uniform(0.2, 0.8))
    weights = {p: int(rng.integers(0, 4)) for p in pairs if rng.random() < 0.5}
    return CrosstalkGraph(n, edges, weights)


def test_criterion_05_chain_optimizer():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    mismatches = 0
    for _ in range(200):
        g = _random_graph(rng, int(rng.integers(1, 9)))
        mismatches += min_extra_edge_path(g).extra_edge_count != brute_force_path(g).extra_edge_count
    notes = [f"{mismatches}/200 DP mismatches"]
    ok = mismatches == 0
    s17 = optimal_chain("Surface17").extra_edge_count
    s17_pub = validate_chain("Surface17").extra_edge_count
    ok &= s17 == 0 and s17_pub == 0
    notes.append(f"Surface17 opt={s17} published={s17_pub}")
    for name in ("BaconShor13", "Shor6X2Z", "Shor6Z2X"):
        opt = optimal_chain(name).extra_edge_count
        pub = validate_chain(name).extra_edge_count
        ok &= opt >= 1 and pub == opt
        notes.append(f"{name} opt={opt} published={pub}")
    dt = time.perf_counter() - t0
    report(5, ok and dt < 300, "; ".join(notes) + f"; {dt:.1f} s")


def test_criterion_06_depolarizing_ordering():
    t0 = time.perf_counter()
    noise = NoiseParams.depolarizing(1e-3)
    r = {c: combined(c, noise, 10**6, 600 + 10 * i) for i, c in enumerate(CODE_NAMES)}
    s17_best = all(separated(r["Surface17"], r[c]) for c in CODE_NAMES if c != "Surface17")
    shor = separated(r["Shor6Z2X"], r["Shor6X2Z"])
    dt = time.perf_counter() - t0
    rates = ", ".join(f"{c}={m:.3e}+-{s:.1e}" for c, (m, s) in r.items())
    report(6, s17_best and shor and dt < 1800,
           f"Surface17 lowest by 3 sigma: {s17_best}; Shor6Z2X < Shor6X2Z by 3 sigma: {shor}; {rates}")


def test_criterion_07_gate_error_regime():
    noise = noise_from({"eps_ms": math.asin(math.sqrt(1e-3)), "p1q": 0.0})
    r = {c: combined(c, noise, 10**6, 700 + 10 * i, include_crosstalk=False) for i, c in enumerate(CODE_NAMES)}
    beaten_by = [c for c in CODE_NAMES if c != "Surface17" and separated(r[c], r["Surface17"])]
    rates = ", ".join(f"{c}={m:.3e}" for c, (m, _) in r.items())
    report(7, bool(beaten_by), f"Surface17 beaten at 3 sigma by {beaten_by}; {rates}")


def test_criterion_08_subset_vs_direct():
    noise = NoiseParams.depolarizing(1e-3)
    ok, notes = True, []
    for i, c in enumerate(("Surface17", "BaconShor13")):
        for j, b in enumerate("ZX"):
            seed = 800 + 10 * i + j
            sub = run_experiment(ExperimentSpec(c, b, noise, shots=300_000, seed=seed, method="subset", kmax=3))
            direct = run_experiment(ExperimentSpec(c, b, noise, shots=10**6, seed=seed + 5))
            z = abs(sub.rate - direct.rate) / math.hypot(sub.std_error, direct.std_error)
            tail = sub.tail_bound / sub.rate
            ok &= z <= 3 and tail < 0.1
            notes.append(f"{c}/{b} z={z:.2f} tail/est={tail:.3f}")
    report(8, ok, "; ".join(notes))


def test_criterion_09_formula_spot_checks():
    a = physical_comparator_rate(NoiseParams(p1q=1e-5, p_ms=1e-4))
    b = crosstalk_probability(1)
    c = idle_flip_probability(1234.5, math.inf)
    report(9, a == 1.4e-4 and b == 0.5 and c == 0, f"comparator={a!r} crosstalk(1)={b!r} idle(t, inf)={c!r}")


def test_criterion_10_bias_direction():
    ok, notes = True, []
    dephasing = NoiseParams.from_rates(inv_t2=2.0)
    for i, c in enumerate(("BaconShor13", "Surface17")):
        rx, rz = run_both_bases(ExperimentSpec(c, "Z", dephasing, shots=10**6, seed=1000 + i))
        measured = bias_zz(rx, rz)
        oracle = {}
        for b in "ZX":
            exp, dec = experiment_setup(c, b)
            oracle[b] = sum(exact_low_order_rates(fault_model(ExperimentSpec(c, b, dephasing), exp), dec))
        predicted = bias_zz(oracle["X"], oracle["Z"])
        same = measured is not None and predicted is not None and (measured - 0.5) * (predicted - 0.5) > 0
        ok &= same
        notes.append(f"{c} T2 bias={measured:.3f} oracle={predicted:.3f}")
    crosstalk = NoiseParams.from_rates(rabi_ratio=0.02)
    rx, rz = run_both_bases(ExperimentSpec("BaconShor13", "Z", crosstalk, shots=10**6, seed=1010))
    bias, err = bias_zz(rx, rz), bias_zz_error(rx, rz)
    strong = bias is not None and bias - 0.5 >= 3 * err
    ok &= strong
    notes.append(f"BaconShor13 crosstalk bias={bias:.3f}+-{err:.3f}")
    report(10, ok, "; ".join(notes))


def test_criterion_11_worker_independence(tmp_path, capsys):
    outs = []
    for workers in (1, 8):
        sim, grid = tmp_path / f"sim{workers}.csv", tmp_path / f"grid{workers}.csv"
        common = ["--seed", "11", "--workers", str(workers), "--quiet"]
        assert cli_main(["simulate", "--codes", "all", "--p2q", "2e-3", "--inv-t2", "1", "--rabi-ratio", "0.01",
                         "--shots", "100000", "--out", str(sim), *common]) == 0
        assert cli_main(["sweep", "--codes", "Surface17,Shor6X2Z", "--x", "p2q:1e-3,3e-3", "--shots", "50000",
                         "--method", "subset", "--kmax", "3", "--out", str(grid), *common]) == 0
        outs.append((sim.read_bytes(), grid.read_bytes()))
    report(11, outs[0] == outs[1], "simulate and subset sweep files byte-identical for 1 and 8 workers")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
