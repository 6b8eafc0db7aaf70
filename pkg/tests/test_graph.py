import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from hawkesnet.errors import SchemaError
from hawkesnet.graph import (CausalGraph, build_graph, from_json, gap_threshold, load_graph, save_graph, score,
                             support_weights, to_dot, to_json)
from hawkesnet.reference import FIFTEEN_NODE_EDGES, FIVE_NODE_EDGES

coeff_arrays = arrays(float, st.tuples(st.integers(1, 3), st.integers(1, 5)).map(lambda s: (s[0], s[1], s[1])),
                      elements=st.floats(-2, 2))


def test_five_node_graph(five):
    g = build_graph(five.kernel.coeffs, sigma=0.01)
    assert g.edges() == sorted((s - 1, t - 1) for s, t in FIVE_NODE_EDGES)
    assert len(g.edges()) == 8


def test_threshold_above_max_gives_empty_graph(five):
    W = support_weights(five.kernel.coeffs)
    off = W[~np.eye(5, dtype=bool)]
    assert build_graph(five.kernel.coeffs, sigma=off.max() * 1.001).edges() == []


def test_diagonal_only_gives_empty_graph():
    coeffs = np.stack([np.diag([1.0, 2.0, 3.0])] * 2)
    g = build_graph(coeffs, sigma=0.01)
    assert g.edges() == []
    assert build_graph(coeffs).edges() == []
    np.testing.assert_array_equal(np.diag(g.weights), [2.0, 4.0, 6.0])


def test_negative_threshold_rejected():
    with pytest.raises(ValueError):
        build_graph(np.zeros((1, 2, 2)), sigma=-1.0)


def test_weights_are_summed_absolute_coefficients(five):
    W = support_weights(five.kernel.coeffs)
    assert W[1, 4] == pytest.approx(3 / 20)  # 2/20 on mode 2 plus |-1/20| on mode 3


@given(coeff_arrays, st.floats(0, 3), st.floats(0, 3))
@settings(max_examples=50)
def test_threshold_monotonicity(coeffs, s1, s2):
    lo, hi = sorted((s1, s2))
    assert set(build_graph(coeffs, hi).edges()) <= set(build_graph(coeffs, lo).edges())


@given(coeff_arrays, st.floats(0, 3), st.data())
@settings(max_examples=50)
def test_sign_invariance(coeffs, sigma, data):
    signs = data.draw(arrays(float, coeffs.shape, elements=st.sampled_from([-1.0, 1.0])))
    assert build_graph(coeffs * signs, sigma).edges() == build_graph(coeffs, sigma).edges()


@given(coeff_arrays, st.floats(0, 3), st.sampled_from([0.5, 2.0, 4.0]))
@settings(max_examples=50)
def test_scale_invariance(coeffs, sigma, c):
    # powers of two keep the comparison exact
    assert build_graph(coeffs * c, sigma * c).edges() == build_graph(coeffs, sigma).edges()


@given(coeff_arrays, st.permutations(range(5)))
@settings(max_examples=30)
def test_permutation_equivariance(coeffs, perm):
    m = coeffs.shape[1]
    p = np.array([i for i in perm if i < m])
    g = build_graph(coeffs, 0.5)
    gp = build_graph(coeffs[:, p][:, :, p], 0.5)
    np.testing.assert_array_equal(gp.adjacency, g.adjacency[p][:, p])


@given(coeff_arrays)
@settings(max_examples=50)
def test_default_threshold_is_consistent(coeffs):
    g = build_graph(coeffs)
    off = ~np.eye(g.m, dtype=bool)
    np.testing.assert_array_equal(g.adjacency[off], (g.weights >= g.sigma)[off])


# --- gap heuristic -------------------------------------------------------------

def test_gap_threshold_splits_clear_gap():
    W = np.array([[0, 1.0, 0.01], [0.9, 0, 0.02], [0.015, 0.8, 0]])
    s = gap_threshold(W)
    assert 0.02 < s < 0.8
    assert len(build_graph(W[None], s).edges()) == 3


def test_gap_threshold_ignores_gaps_among_tiny_weights():
    # 1e-6 -> 1e-3 is the largest raw ratio but both are noise next to the real weights
    W = np.array([[0, 1.0, 1e-6], [0.9, 0, 1e-3], [0.8, 0.7, 0]])
    assert gap_threshold(W) == pytest.approx(0.5 * (1e-3 + 0.7))


def test_gap_threshold_degenerate_cases():
    assert gap_threshold(np.zeros((3, 3))) == np.inf
    assert gap_threshold(np.eye(3)) == np.inf
    assert gap_threshold(np.array([[0.0]])) == np.inf
    assert gap_threshold(np.ones((3, 3))) == np.inf
    assert gap_threshold(np.array([[0, 0.3], [0.3, 0]])) == np.inf


def test_default_threshold_on_zero_coefficients_is_empty():
    assert build_graph(np.zeros((2, 4, 4))).edges() == []


# --- scoring -------------------------------------------------------------------

def test_identical_graphs_score_perfectly():
    g = CausalGraph.from_edges(5, FIVE_NODE_EDGES, one_based=True)
    s = score(g, g)
    assert (s.precision, s.recall, s.f1, s.shd) == (1.0, 1.0, 1.0, 0)


def test_empty_candidate_score():
    truth = CausalGraph.from_edges(5, FIVE_NODE_EDGES, one_based=True)
    s = score(CausalGraph.from_edges(5, []), truth)
    assert s.recall == 0.0 and s.f1 == 0.0 and s.shd == 8


def test_fifteen_node_style_counts():
    truth = CausalGraph.from_edges(15, FIFTEEN_NODE_EDGES, one_based=True)
    assert len(truth.edges()) == 102
    missing = ~truth.adjacency & ~np.eye(15, dtype=bool)
    false = [(int(s), int(t)) for t, s in zip(*np.nonzero(missing))][:34]
    cand = CausalGraph.from_edges(15, list(FIFTEEN_NODE_EDGES[:70]) + [(s + 1, t + 1) for s, t in false],
                                  one_based=True)
    s = score(cand, truth)
    assert (s.true_positives, s.false_positives, s.false_negatives) == (70, 34, 32)
    assert s.precision == pytest.approx(70 / 104)
    assert s.recall == pytest.approx(70 / 102)
    assert s.f1 == pytest.approx(2 * 70 / (104 + 102))


def test_score_size_mismatch():
    with pytest.raises(ValueError):
        score(CausalGraph.from_edges(3, []), CausalGraph.from_edges(4, []))


def test_from_edges_drops_self_loops():
    assert CausalGraph.from_edges(3, [(0, 0), (0, 1)]).edges() == [(0, 1)]


# --- serialization -------------------------------------------------------------

def test_json_roundtrip(five, tmp_path):
    g = build_graph(five.kernel.coeffs, 0.01)
    p = tmp_path / "g.json"
    save_graph(g, p)
    back = load_graph(p)
    assert back.edges() == g.edges() and back.sigma == g.sigma
    np.testing.assert_array_equal(back.weights, g.weights)
    d = json.loads(p.read_text())
    assert set(d) == {"m", "sigma", "edges", "weights"}


def test_json_empty_graph_has_null_threshold():
    g = build_graph(np.zeros((1, 3, 3)))
    d = json.loads(json.dumps(to_json(g)))
    assert d["sigma"] is None and d["edges"] == []
    assert from_json(d).sigma == np.inf


@pytest.mark.parametrize("bad", [{}, {"m": 2}, {"m": "x", "edges": []}, {"m": 2, "edges": [[0]]}])
def test_malformed_graph_json(bad):
    with pytest.raises(SchemaError):
        from_json(bad)


def test_dot_output(five):
    g = build_graph(five.kernel.coeffs, 0.01)
    dot = to_dot(g, labels=list("ABCDE"))
    assert dot.startswith("digraph")
    assert dot.count("->") == 8
    assert '0 [label="A"]' in dot
    assert "1 -> 0" in dot  # 2 -> 1 in one-based labels
