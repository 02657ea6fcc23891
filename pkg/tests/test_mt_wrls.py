import numpy as np
import pytest

from omtl.errors import CapacityError, InvalidInputError
from omtl.mt_wrls import MtWrls, mt_batch_oracle, mt_wrls_new, mt_wrls_step, stack_input
from omtl.task_graph import TaskGraph
from omtl.wrls import wrls_init

from oracles import primal_solution, random_sims, random_stream


def test_stack_input():
    z = stack_input([1.0, 2.0], 1, 3)
    np.testing.assert_array_equal(z, [0, 0, 1, 2, 0, 0])
    with pytest.raises(InvalidInputError):
        stack_input([1.0], 3, 3)


def test_initial_state():
    A_inv = np.array([[60, 50], [50, 60]]) / 11
    g = TaskGraph.from_similarities([[0, 0.5], [0.5, 0]], 0.1, 1.0)
    m = mt_wrls_new(g, 1)
    np.testing.assert_allclose(m.core.P, A_inv, atol=1e-12)
    np.testing.assert_array_equal(m.core.w, 0)
    m10 = mt_wrls_new(g.with_lam(10.0), 1)
    np.testing.assert_allclose(m10.core.P, 0.1 * A_inv, atol=1e-12)
    g3 = TaskGraph.from_similarities([[0, 0.5, 0], [0.5, 0, 0.2], [0, 0.2, 0]], 0.3, 2.0)
    m3 = mt_wrls_new(g3, 2)
    np.testing.assert_allclose(m3.core.P, np.kron(g3.A_inv, np.eye(2)) / 2.0, atol=1e-14)


def test_single_task_reduces_to_wrls(backend, rng):
    g = TaskGraph.edgeless(1, gamma=0.5, lam=2.0)   # lam * gamma = 1 -> P0 = I
    m = MtWrls(g, 3, sigma=0.9)
    s = wrls_init(3, sigma=0.9)
    for _ in range(25):
        x, y = rng.standard_normal(3), rng.standard_normal()
        assert m.step(0, x, y) == pytest.approx(s.step(x, y), abs=1e-13)
    np.testing.assert_allclose(m.weights[0], s.w, atol=1e-13)


def test_identical_streams_give_identical_tasks(backend, rng):
    g = TaskGraph.from_similarities([[0, 1], [1, 0]], 0.5, 1.0)
    m = MtWrls(g, 2)
    for _ in range(30):
        x, y = rng.standard_normal(2), rng.standard_normal()
        m.step(0, x, y)
        m.step(1, x, y)
        # after each pair both blocks have seen the same data
        assert np.max(np.abs(m.weights[0] - m.weights[1])) <= 1e-10


@pytest.mark.parametrize("lam", [0.1, 1.0, 10.0])
def test_matches_dense_solution_every_step(backend, rng, lam):
    T, d = 3, 2
    S = random_sims(rng, T)
    g = TaskGraph.from_similarities(S, 0.5, lam)
    tasks, X, Y = random_stream(rng, T, d, 60)
    m = MtWrls(g, d)
    for i in range(60):
        m.step(tasks[i], X[i], Y[i])
        ref = primal_solution(tasks[:i + 1], X[:i + 1], Y[:i + 1], S, 0.5, lam)
        assert np.max(np.abs(m.weights.ravel() - ref)) <= 1e-7


def test_run_matches_step_loop(backend, rng):
    g = TaskGraph.from_similarities(random_sims(rng, 4), 1.0, 0.5)
    tasks, X, Y = random_stream(rng, 4, 3, 80)
    a, b = MtWrls(g, 3, 0.95), MtWrls(g, 3, 0.95)
    preds = a.run(tasks, X, Y)
    loop = [mt_wrls_step(b, t, x, y)[0] for t, x, y in zip(tasks, X, Y)]
    np.testing.assert_allclose(preds, loop, atol=1e-12)
    np.testing.assert_allclose(a.weights, b.weights, atol=1e-12)


def test_infinite_shrinkage_gives_zero(rng):
    g = TaskGraph.edgeless(3, 1.0, 1e10)
    m = MtWrls(g, 2)
    tasks, X, Y = random_stream(rng, 3, 2, 50)
    preds = m.run(tasks, X, Y)
    assert np.max(np.abs(preds)) < 1e-8 and np.max(np.abs(m.weights)) < 1e-8


def test_batch_oracle_examples():
    # edgeless: independent ridge regressions with ridge lam * gamma
    rng = np.random.default_rng(0)
    tasks, X, Y = random_stream(rng, 2, 2, 20)
    w = mt_batch_oracle(zip(tasks, X, Y), TaskGraph.edgeless(2, 0.5, 4.0))
    for t in range(2):
        Xt, Yt = X[tasks == t], Y[tasks == t]
        ref = np.linalg.solve(Xt.T @ Xt + 2.0 * np.eye(2), Xt.T @ Yt)
        np.testing.assert_allclose(w[2 * t:2 * t + 2], ref, atol=1e-12)
    # T=2, d=1, one sample each: x=1, y=(1, 0), A=[[1.5,-.5],[-.5,1.5]], lam=1
    # (I + A) w = y  ->  [[2.5,-.5],[-.5,2.5]] w = [1, 0]  ->  w = [5/12, 1/12]
    g = TaskGraph.from_similarities([[0, 0.5], [0.5, 0]], 1.0, 1.0)
    w = mt_batch_oracle([(0, [1.0], 1.0), (1, [1.0], 0.0)], g)
    np.testing.assert_allclose(w, [5 / 12, 1 / 12], atol=1e-14)


def test_asymmetric_graph_runs_and_matches_oracle(backend, rng):
    S = np.array([[0, 0.2, 0], [0.4, 0, 0.1], [0, 0.3, 0]])
    g = TaskGraph.from_similarities(S, 1.0, 1.0)
    m = MtWrls(g, 2)
    tasks, X, Y = random_stream(rng, 3, 2, 30)
    m.run(tasks, X, Y)
    np.testing.assert_allclose(m.weights.ravel(), mt_batch_oracle(zip(tasks, X, Y), g), atol=1e-8)


def test_max_dim_and_input_checks():
    g = TaskGraph.edgeless(10, 1.0, 1.0)
    with pytest.raises(CapacityError):
        MtWrls(g, 300)
    m = MtWrls(g, 2)
    with pytest.raises(InvalidInputError):
        m.step(10, [1.0, 2.0], 1.0)
    with pytest.raises(InvalidInputError):
        m.step(0, [1.0], 1.0)
