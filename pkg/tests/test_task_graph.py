import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from omtl.errors import InvalidInputError, SingularMatrixError, UndefinedCorrelationError
from omtl.task_graph import (
    TaskGraph,
    build_interaction_matrix,
    invert_interaction_matrix,
    laplacian_penalty,
    load_similarity_csv,
    similarity_from_series,
    spearman_similarity,
    stacked_quadratic_form,
)

from oracles import random_sims


@pytest.mark.parametrize("a,b,expected", [
    ([1, 2, 3], [10, 20, 30], 1.0),
    ([1, 2, 3], [3, 2, 1], 0.0),
    ([1, 2, 3], [1, 3, 2], 0.5),
])
def test_spearman_examples(a, b, expected):
    assert spearman_similarity(a, b) == pytest.approx(expected, abs=1e-12)


def test_spearman_errors():
    with pytest.raises(InvalidInputError):
        spearman_similarity([1, 2, 3], [1, 2])
    with pytest.raises(UndefinedCorrelationError):
        spearman_similarity([1, 1, 1], [1, 2, 3])


def test_interaction_matrix_examples():
    np.testing.assert_array_equal(build_interaction_matrix(np.zeros((2, 2)), 0.1), 0.1 * np.eye(2))
    A = build_interaction_matrix([[0, 0.5], [0.5, 0]], 0.1)
    np.testing.assert_allclose(A, [[0.6, -0.5], [-0.5, 0.6]], atol=1e-15)
    S = np.zeros((3, 3))
    S[0, 1], S[1, 0] = 0.2, 0.4
    np.testing.assert_allclose(build_interaction_matrix(S, 1.0),
                               [[1.2, -0.2, 0], [-0.4, 1.4, 0], [0, 0, 1]], atol=1e-15)


def test_inverse_examples():
    np.testing.assert_allclose(invert_interaction_matrix(2 * np.eye(3)), 0.5 * np.eye(3), atol=1e-15)
    inv = invert_interaction_matrix(np.array([[0.6, -0.5], [-0.5, 0.6]]))
    np.testing.assert_allclose(inv, np.array([[60, 50], [50, 60]]) / 11, atol=1e-12)
    A = np.array([[1.2, -0.2, 0], [-0.4, 1.4, 0], [0, 0, 1]])
    assert np.linalg.norm(A @ invert_interaction_matrix(A) - np.eye(3), 2) <= 1e-10


def test_singular_and_invalid():
    with pytest.raises(SingularMatrixError):
        TaskGraph.from_similarities([[0, 1], [1, 0]], gamma=0.0)
    with pytest.raises(InvalidInputError):
        build_interaction_matrix([[0, 1.5], [1.5, 0]], 1.0)
    with pytest.raises(InvalidInputError):
        build_interaction_matrix([[0.1, 0], [0, 0]], 1.0)
    with pytest.raises(InvalidInputError):
        build_interaction_matrix(np.zeros((2, 2)), -1.0)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 8), st.floats(0.01, 5.0), st.integers(0, 2**31 - 1))
def test_symmetric_graph_is_spd_and_inverse_accurate(T, gamma, seed):
    rng = np.random.default_rng(seed)
    g = TaskGraph.from_similarities(random_sims(rng, T), gamma, 1.0)
    assert np.all(np.linalg.eigvalsh(g.A) > 0)
    assert np.linalg.norm(g.A @ g.A_inv - np.eye(T), 2) <= 1e-10


def test_graph_is_immutable_and_with_lam():
    g = TaskGraph.from_similarities([[0, 0.5], [0.5, 0]], 0.1, 1.0)
    with pytest.raises(ValueError):
        g.A[0, 0] = 3.0
    g2 = g.with_lam(10.0)
    assert g2.lam == 10.0 and g2.A_inv is g.A_inv


def test_similarity_from_series_clamps_and_handles_constant():
    s = np.array([[1, 2, 3, 4], [4, 3, 2, 1], [1, 1, 1, 1]], dtype=float)
    S = similarity_from_series(s)
    assert S[0, 1] == 0.0 and S[0, 2] == 0.0 and np.all(np.diag(S) == 0)


def test_similarity_csv_roundtrip(tmp_path, rng):
    S = random_sims(rng, 4)
    g = TaskGraph.from_similarities(S)
    g.to_csv(tmp_path / "s.csv")
    np.testing.assert_array_equal(load_similarity_csv(tmp_path / "s.csv"), S)


def test_laplacian_form_matches_quadratic_form(rng):
    for _ in range(200):
        T, d = rng.integers(1, 7), rng.integers(1, 5)
        S, gamma = random_sims(rng, T, density=0.7), rng.uniform(0.01, 3)
        w = rng.standard_normal(T * d)
        A = build_interaction_matrix(S, gamma)
        q = stacked_quadratic_form(w, A)
        assert laplacian_penalty(w, S, gamma) == pytest.approx(q, rel=1e-10, abs=1e-12)


def test_edge_sum_uses_squared_similarity_weights(rng):
    # the neighbour double sum weights each pair by sim^2 (counted from both
    # ends); the quadratic form weights it by sim / 2 per ordered pair
    from omtl.task_graph import edge_sum_penalty
    for _ in range(100):
        T, d = rng.integers(2, 6), rng.integers(1, 4)
        S, gamma = random_sims(rng, T), rng.uniform(0.1, 2)
        W = rng.standard_normal((T, d))
        diffs = ((W[:, None, :] - W[None, :, :]) ** 2).sum(-1)
        expected = gamma * np.sum(W * W) + np.sum(S**2 * diffs)
        assert edge_sum_penalty(W.ravel(), S, gamma) == pytest.approx(expected, rel=1e-10)


def test_binary_graph_coupling_terms_differ_by_factor_two(rng):
    from omtl.task_graph import edge_sum_penalty
    for _ in range(100):
        T, d = rng.integers(2, 6), rng.integers(1, 4)
        S = np.triu((rng.uniform(size=(T, T)) < 0.5).astype(float), 1)
        S = S + S.T
        w = rng.standard_normal(T * d)
        gamma = 0.7
        base = gamma * float(w @ w)
        coupling_sum = edge_sum_penalty(w, S, gamma) - base
        coupling_quad = stacked_quadratic_form(w, build_interaction_matrix(S, gamma)) - base
        assert coupling_sum == pytest.approx(2 * coupling_quad, rel=1e-9, abs=1e-12)
