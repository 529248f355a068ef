import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import k2, path_graph
from minorwalk.errors import InputError
from minorwalk.generators import generate, random_bounded
from minorwalk.graph import BoundedDegreeGraph, NeighborOracle
from minorwalk.walks import (
    ProbabilityVector,
    all_distributions,
    escape_probability,
    exact_distribution,
    lazy_step,
    lazy_transition_matrix,
    restricted_distribution,
    sample_walk,
    sample_walks,
)


def enumerate_paths(graph, s, t, inside=None):
    """Every sequence of ``t`` slot draws, each of ``2d`` equally likely.

    Yields ``(weight, trajectory)``. With ``inside`` set, moves that would
    leave it are turned into stays (the restricted chain).
    """
    d = graph.d
    for draws in itertools.product(range(2 * d), repeat=t):
        v, traj = s, [s]
        for j in draws:
            nbrs = graph.neighbors(v)
            if j < d and j < len(nbrs) and (inside is None or nbrs[j] in inside):
                v = nbrs[j]
            traj.append(v)
        yield (2 * d) ** -t, traj


def test_isolated_vertex_stays(rng):
    o = NeighborOracle(BoundedDegreeGraph(1, 2, [[]]))
    assert all(lazy_step(o, 0, rng) == 0 for _ in range(50))
    assert o.query_count == 50


@pytest.mark.parametrize("d,p_move", [(1, 0.5), (2, 0.25)])
def test_k2_step_probabilities(d, p_move):
    o = NeighborOracle(k2(d))
    ends = sample_walks(o, np.zeros(100_000, dtype=int), 1, np.random.default_rng(1))
    assert abs(ends.mean() - p_move) < 0.01
    assert o.query_count == 100_000
    assert exact_distribution(k2(d), 0, 1)[1] == pytest.approx(p_move)


def test_zero_length_trace():
    tr = sample_walk(NeighborOracle(path_graph(3)), 1, 0, 0)
    assert tr.steps == (1,) and tr.end == 1 and len(tr) == 1


def test_trace_moves_along_edges():
    g = generate("grid", rows=4, cols=4)
    tr = sample_walk(NeighborOracle(g), 5, 40, 3)
    assert len(tr) == 41
    assert all(a == b or g.has_edge(a, b) for a, b in zip(tr.steps, tr.steps[1:]))
    assert tr.to_csv_row().startswith("5,")


def test_grid_center_empirical_tv():
    g = generate("grid", rows=5, cols=5)
    o = NeighborOracle(g)
    ends = sample_walks(o, np.full(100_000, 12), 4, np.random.default_rng(2024))
    emp = np.bincount(ends, minlength=25) / ends.size
    exact = exact_distribution(g, 12, 4).to_dense(25)
    assert 0.5 * np.abs(emp - exact).sum() <= 0.02
    assert o.query_count == 4 * 100_000


def test_grid_center_exact_matches_enumeration():
    g = generate("grid", rows=5, cols=5)
    want = np.zeros(25)
    for w, traj in enumerate_paths(g, 12, 4):
        want[traj[-1]] += w
    assert np.allclose(exact_distribution(g, 12, 4).to_dense(25), want, atol=1e-14)


def test_negative_length_rejected():
    with pytest.raises(InputError):
        sample_walks(NeighborOracle(k2()), [0], -1, 0)
    with pytest.raises(InputError):
        sample_walks(NeighborOracle(k2()), [2], 1, 0)


def test_same_seed_same_walks():
    g = generate("grid", rows=6, cols=6)
    a = sample_walks(NeighborOracle(g), np.arange(36), 10, 9, record=True)
    b = sample_walks(NeighborOracle(g), np.arange(36), 10, 9, record=True)
    assert np.array_equal(a, b)


def test_exact_examples():
    assert exact_distribution(path_graph(3), 2, 0).as_dict() == {2: 1.0}
    assert exact_distribution(k2(), 0, 2).to_dense(2) == pytest.approx([0.5, 0.5])
    assert exact_distribution(path_graph(3), 1, 1).to_dense(3) == pytest.approx([0.25, 0.5, 0.25])


def test_transition_matrix_is_symmetric_stochastic():
    m = lazy_transition_matrix(generate("binary_tree", n=15)).toarray()
    assert np.allclose(m, m.T)
    assert np.allclose(m.sum(axis=1), 1)


def test_restricted_whole_set_is_unrestricted():
    g = generate("grid", rows=4, cols=4)
    a = restricted_distribution(g, range(16), 5, 6)
    b = exact_distribution(g, 5, 6)
    assert np.allclose(a.to_dense(16), b.to_dense(16), atol=1e-15)


def test_restricted_singleton():
    g = generate("grid", rows=4, cols=4)
    assert restricted_distribution(g, [5], 5, 7).as_dict() == {5: 1.0}


def test_restricted_half_grid_matches_enumeration():
    g = generate("grid", rows=4, cols=4)
    C = {v for v in range(16) if v % 4 < 2}
    want = np.zeros(16)
    for w, traj in enumerate_paths(g, 0, 3, inside=C):
        want[traj[-1]] += w
    got = restricted_distribution(g, C, 0, 3).to_dense(16)
    assert np.allclose(got, want, atol=1e-14)
    assert got.sum() == pytest.approx(1.0, abs=1e-12)


def test_restricted_requires_start_in_set():
    with pytest.raises(InputError):
        restricted_distribution(path_graph(3), [0], 1, 2)
    with pytest.raises(InputError):
        escape_probability(path_graph(3), [0], 1, 2)


def test_escape_examples():
    g = generate("grid", rows=4, cols=4)
    assert escape_probability(g, range(16), 3, 5) == 0.0
    assert escape_probability(k2(), [0], 0, 1) == pytest.approx(0.5)


def test_escape_interior_matches_enumeration():
    g = generate("grid", rows=4, cols=4)
    C = {5, 6, 9, 10}
    want = sum(w for w, traj in enumerate_paths(g, 5, 2) if any(v not in C for v in traj))
    assert escape_probability(g, C, 5, 2) == pytest.approx(want, abs=1e-14)


def test_all_distributions_columns():
    g = generate("ladder", length=5)
    mat = all_distributions(g, 3)
    for s in range(g.n):
        assert np.allclose(mat[s], exact_distribution(g, s, 3).to_dense(g.n), atol=1e-14)


def test_probability_vector_contract():
    pv = ProbabilityVector([3, 1, 2], [0.25, 0.5, 0.0])
    assert pv.indices.tolist() == [1, 3]
    assert pv[2] == 0.0 and pv[3] == 0.25 and len(pv) == 2
    assert pv.norm_sq() == pytest.approx(0.3125)
    with pytest.raises(InputError):
        ProbabilityVector([0, 0], [0.1, 0.1])
    with pytest.raises(InputError):
        ProbabilityVector([0], [-0.1])
    with pytest.raises(InputError):
        ProbabilityVector([0, 1], [0.7, 0.7])


small_graphs = st.builds(
    random_bounded,
    n=st.integers(2, 50),
    d=st.integers(2, 4),
    p=st.floats(0.0, 1.0),
    seed=st.integers(0, 2**32),
)


@given(g=small_graphs, t=st.integers(0, 32))
def test_distributions_are_symmetric_and_normalised(g, t):
    mat = all_distributions(g, t)
    assert np.allclose(mat.sum(axis=1), 1, atol=1e-12)
    assert np.abs(mat - mat.T).max() <= 1e-12


@given(g=small_graphs, s=st.integers(0, 49))
def test_sup_norm_never_increases(g, s):
    s %= g.n
    m = lazy_transition_matrix(g)
    x = np.zeros(g.n)
    x[s] = 1.0
    prev = 1.0
    for _ in range(32):
        x = m @ x
        assert x.max() <= prev + 1e-15
        prev = x.max()


@given(g=small_graphs, s=st.integers(0, 49), t=st.integers(0, 12), data=st.data())
def test_restricted_and_escape_are_probabilities(g, s, t, data):
    s %= g.n
    C = set(data.draw(st.sets(st.integers(0, g.n - 1), max_size=g.n))) | {s}
    r = restricted_distribution(g, C, s, t)
    assert r.total() == pytest.approx(1.0, abs=1e-12)
    assert set(r.indices.tolist()) <= C
    e = escape_probability(g, C, s, t)
    assert -1e-15 <= e <= 1 + 1e-15
    # staying inside C through all t steps is exactly what the enumeration sees
    if (2 * g.d) ** t <= 4096:
        want = sum(w for w, traj in enumerate_paths(g, s, t) if any(v not in C for v in traj))
        assert e == pytest.approx(want, abs=1e-12)
