from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from compass_sim.chain import (CrosstalkGraph, brute_force_path, build_graph, classify_pair, min_extra_edge_path,
                               optimal_chain, validate_chain)
from compass_sim.codes import CODE_NAMES, N_DATA, PUBLISHED_CHAINS, build_code


def graph(n, edges, weights=None):
    return CrosstalkGraph(n, frozenset((min(a, b), max(a, b)) for a, b in edges), weights or {})


@st.composite
def random_graphs(draw, max_n=7):
    n = draw(st.integers(1, max_n))
    pairs = list(combinations(range(n), 2))
    edges = [p for p in pairs if draw(st.booleans())]
    weights = {p: draw(st.integers(0, 3)) for p in pairs if draw(st.booleans())}
    return graph(n, edges, weights)


def test_path_graph():
    lay = min_extra_edge_path(graph(3, [(0, 1), (1, 2)]))
    assert lay.order in ((0, 1, 2), (2, 1, 0)) and lay.extra_edge_count == 0


def test_star_graph_needs_one_extra_edge():
    assert min_extra_edge_path(graph(4, [(0, 1), (0, 2), (0, 3)])).extra_edge_count == 1


def test_complete_graph():
    lay = min_extra_edge_path(graph(5, combinations(range(5), 2)))
    assert lay.extra_edge_count == 0 and sorted(lay.order) == list(range(5))


def test_tie_break_prefers_short_gate_distances():
    # every ordering is a Hamiltonian path; heavy gate pair (0, 3) should end up adjacent
    g = graph(4, combinations(range(4), 2), {(0, 3): 5, (1, 2): 1})
    lay = min_extra_edge_path(g)
    pos = {q: j for j, q in enumerate(lay.order)}
    assert abs(pos[0] - pos[3]) == 1 and lay.time_cost == g.time_cost(lay.order)


@settings(max_examples=60, deadline=None)
@given(random_graphs())
def test_dp_matches_brute_force(g):
    dp, bf = min_extra_edge_path(g), brute_force_path(g)
    assert dp.extra_edge_count == bf.extra_edge_count
    assert dp.time_cost == bf.time_cost
    assert len(g.extra_edges(dp.order)) == dp.extra_edge_count


@settings(max_examples=40, deadline=None)
@given(random_graphs(), st.data())
def test_adding_an_edge_never_hurts(g, data):
    missing = [p for p in combinations(range(g.n), 2) if p not in g.edges]
    if not missing:
        return
    e = data.draw(st.sampled_from(missing))
    bigger = CrosstalkGraph(g.n, g.edges | {e}, g.weights)
    assert min_extra_edge_path(bigger, False).extra_edge_count <= min_extra_edge_path(g, False).extra_edge_count


def test_brute_force_size_limit():
    with pytest.raises(ValueError):
        brute_force_path(graph(11, []))


def test_invalid_edge():
    with pytest.raises(ValueError):
        graph(3, [(1, 1)])


@pytest.mark.parametrize("name", CODE_NAMES)
def test_graph_shape(name):
    code = build_code(name)
    g = build_graph(name)
    assert g.n == code.n_qubits
    assert all(u < v for u, v in g.edges)
    data = np.mean([g.degree(q) for q in range(N_DATA)])
    anc = np.mean([g.degree(q) for q in range(N_DATA, g.n)])
    assert anc > data


def test_classification_is_symmetric_and_rejects_bad_input():
    rng = np.random.default_rng(4)
    for _ in range(10):
        u, v = (int(x) for x in rng.choice(17, 2, replace=False))
        assert classify_pair("Surface17", u, v) == classify_pair("Surface17", v, u)
    with pytest.raises(ValueError):
        classify_pair("Surface17", 3, 3)
    with pytest.raises(ValueError):
        classify_pair("BaconShor13", 0, 13)


def test_bacon_shor_data_pair_next_to_a_row_stabilizer_gate_is_bad():
    assert classify_pair("BaconShor13", 0, 1) == "bad"


def test_surface17_published_chain_is_clean_and_identity_is_not():
    assert validate_chain("Surface17").extra_edge_count == 0
    assert optimal_chain("Surface17").extra_edge_count == 0
    assert validate_chain("Surface17", tuple(range(17))).extra_edge_count > 0


def test_bacon_shor_has_no_hamiltonian_path():
    assert optimal_chain("BaconShor13").extra_edge_count >= 1


def test_report_lists_offending_pairs():
    rep = validate_chain("BaconShor13")
    g = build_graph("BaconShor13")
    assert rep.extra_edge_count == len(rep.bad_adjacencies)
    assert all(not g.has_edge(a, b) for a, b in rep.bad_adjacencies)
    assert rep.order == PUBLISHED_CHAINS["BaconShor13"]


def test_validate_rejects_wrong_qubit_set():
    with pytest.raises(ValueError):
        validate_chain("Surface17", tuple(range(13)))
    with pytest.raises(ValueError):
        validate_chain("Surface17", (0,) * 17)
