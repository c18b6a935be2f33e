from itertools import combinations, product

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import chisquare

from compass_sim.subset import poisson_binomial, sample_conditional, suffix_esp

probs = st.lists(st.floats(0.0, 0.6), min_size=1, max_size=9)


def brute_pk(p):
    out = np.zeros(len(p) + 1)
    for bits in product((0, 1), repeat=len(p)):
        out[sum(bits)] += np.prod([q if b else 1 - q for q, b in zip(p, bits)])
    return out


@given(probs, st.integers(0, 10))
def test_poisson_binomial_matches_enumeration(p, kmax):
    got = poisson_binomial(p, kmax)
    want = brute_pk(p)
    k = min(kmax, len(p))
    assert np.allclose(got[:k + 1], want[:k + 1], atol=1e-12)
    assert np.all(got[k + 1:] == 0)


@given(probs)
def test_poisson_binomial_sums_to_one(p):
    assert poisson_binomial(p, len(p)).sum() == pytest.approx(1.0)


@given(st.lists(st.floats(0.0, 3.0), min_size=1, max_size=7), st.integers(0, 4))
def test_suffix_esp_matches_enumeration(w, kmax):
    E = suffix_esp(w, kmax)
    for i in range(len(w) + 1):
        for r in range(kmax + 1):
            want = sum(np.prod([w[j] for j in c]) for c in combinations(range(i, len(w)), r))
            assert E[r, i] == pytest.approx(want, abs=1e-9)


@settings(max_examples=10, deadline=None)
@given(st.lists(st.floats(0.01, 0.4), min_size=3, max_size=6), st.integers(1, 3), st.integers(0, 2**31))
def test_conditional_sampling_distribution(p, k, seed):
    if k > len(p):
        return
    n = 20_000
    draws = sample_conditional(p, k, n, np.random.default_rng(seed))
    assert draws.shape == (n, k)
    assert np.all(np.diff(draws, axis=1) > 0)
    subsets = list(combinations(range(len(p)), k))
    w = np.array(p) / (1 - np.array(p))
    exact = np.array([np.prod(w[list(s)]) for s in subsets])
    exact /= exact.sum()
    index = {s: i for i, s in enumerate(subsets)}
    counts = np.bincount([index[tuple(r)] for r in draws], minlength=len(subsets))
    if len(subsets) == 1:
        assert counts[0] == n
        return
    assert chisquare(counts, exact * n).pvalue > 1e-4


def test_zero_probability_locations_never_drawn():
    p = [0.1, 0.0, 0.2, 0.0, 0.3]
    d = sample_conditional(p, 2, 5000, np.random.default_rng(0))
    assert not np.isin(d, [1, 3]).any()


def test_too_few_live_locations():
    with pytest.raises(ValueError):
        sample_conditional([0.1, 0.0], 2, 10, np.random.default_rng(0))


def test_probability_one_rejected():
    with pytest.raises(ValueError):
        sample_conditional([1.0, 0.1], 1, 10, np.random.default_rng(0))


def test_negative_kmax():
    with pytest.raises(ValueError):
        poisson_binomial([0.1], -1)
