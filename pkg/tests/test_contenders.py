import numpy as np
import pytest

from omtl.contenders import Mogd, StlEnsemble, instantaneous_objective, mogd_gradient, mogd_step, stl_wrap
from omtl.mt_oslssvr import MtOslssvr
from omtl.mt_wrls import MtWrls
from omtl.task_graph import TaskGraph
from omtl.wrls import wrls_init

from oracles import random_sims, random_stream


def test_lms_reduction_when_lam_zero(backend, rng):
    g = TaskGraph.from_similarities(random_sims(rng, 3), 1.0, 0.0)
    m = Mogd(g, 2, eta0=0.05)
    W = np.zeros((3, 2))
    tasks, X, Y = random_stream(rng, 3, 2, 40)
    for i, (t, x, y) in enumerate(zip(tasks, X, Y), start=1):
        err = y - W[t] @ x
        pred, m = mogd_step(m, t, x, y)
        assert pred == pytest.approx(W[t] @ x, abs=1e-14)
        W[t] += 2 * (0.05 / np.sqrt(i)) * err * x
        np.testing.assert_allclose(m.W, W, atol=1e-13)


def test_zero_input_no_update(backend):
    g = TaskGraph.edgeless(2, 1.0, 0.0)
    m = Mogd(g, 3, 0.1)
    m.W[:] = [[1, 2, 3], [4, 5, 6]]
    before = m.W.copy()
    m.step(1, np.zeros(3), 7.0)
    np.testing.assert_array_equal(m.W, before)


def _fd_gradient(W, g, t, x, y, h=1e-5):
    G = np.zeros_like(W)
    for idx in np.ndindex(W.shape):
        Wp, Wm = W.copy(), W.copy()
        Wp[idx] += h
        Wm[idx] -= h
        G[idx] = (instantaneous_objective(Wp, g, t, x, y) - instantaneous_objective(Wm, g, t, x, y)) / (2 * h)
    return G


@pytest.mark.parametrize("lam", [0.01, 0.5, 2.0])
@pytest.mark.parametrize("gamma", [0.1, 1.0, 5.0])
@pytest.mark.parametrize("sim", [0.0, 0.4, 1.0])
def test_gradient_matches_finite_differences(rng, lam, gamma, sim):
    T, d = 3, 4
    S = np.full((T, T), sim)
    np.fill_diagonal(S, 0)
    g = TaskGraph.from_similarities(S, gamma, lam)
    W, x, y, t = rng.standard_normal((T, d)), rng.standard_normal(d), rng.standard_normal(), 1
    fd = _fd_gradient(W, g, t, x, y)
    an = np.zeros_like(W)
    # the objective couples every block through the regularizer
    for j in range(T):
        an[j] = 2 * lam * (g.A[j] @ W)
    an[t] = mogd_gradient(W, g, t, x, y)
    assert np.max(np.abs(an - fd)) / np.max(np.abs(fd)) <= 1e-5


def test_run_matches_step_loop(backend, rng):
    g = TaskGraph.from_similarities(random_sims(rng, 3), 1.0, 0.1)
    tasks, X, Y = random_stream(rng, 3, 2, 50)
    a, b = Mogd(g, 2, 0.05), Mogd(g, 2, 0.05)
    p = a.run(tasks, X, Y)
    q = [b.step(t, x, y) for t, x, y in zip(tasks, X, Y)]
    np.testing.assert_allclose(p, q, atol=1e-13)
    np.testing.assert_allclose(a.W, b.W, atol=1e-13)
    assert a.i == b.i == 50


def test_stl_wrls_equals_edgeless_mt(backend, rng):
    tasks, X, Y = random_stream(rng, 4, 3, 80)
    stl = stl_wrap("wrls", 4, 3, gamma=0.5, lam=2.0, sigma=1.0).run(tasks, X, Y)
    mt = MtWrls(TaskGraph.edgeless(4, 0.5, 2.0), 3, 1.0).run(tasks, X, Y)
    assert np.max(np.abs(stl - mt)) <= 1e-9


def test_forgetting_is_per_stacked_sample(backend, rng):
    # with sigma < 1 the stacked learner ages every block at each sample,
    # the single-task learners only age on their own samples
    tasks, X, Y = random_stream(rng, 2, 2, 60)
    stl = stl_wrap("wrls", 2, 2, sigma=0.9).run(tasks, X, Y)
    mt = MtWrls(TaskGraph.edgeless(2, 1.0, 1.0), 2, 0.9).run(tasks, X, Y)
    assert np.max(np.abs(stl - mt)) > 1e-3
    one = np.zeros(60, dtype=np.int64)
    stl = stl_wrap("wrls", 2, 2, sigma=0.9).run(one, X, Y)
    mt = MtWrls(TaskGraph.edgeless(2, 1.0, 1.0), 2, 0.9).run(one, X, Y)
    assert np.max(np.abs(stl - mt)) <= 1e-9


def test_stl_oslssvr_equals_edgeless_mt(backend, rng):
    tasks, X, Y = random_stream(rng, 3, 2, 40)
    stl = stl_wrap("oslssvr", 3, 2, gamma=2.0, lam=0.5, nu=1e-12).run(tasks, X, Y)
    mt = MtOslssvr(TaskGraph.edgeless(3, 2.0, 0.5), 2, 1e-12).run(tasks, X, Y)
    assert np.max(np.abs(stl - mt)) <= 1e-9
    # kernel x.x'/gamma with ridge lam is the same as kernel x.x' with ridge lam*gamma
    plain = stl_wrap("oslssvr", 3, 2, gamma=1.0, lam=1.0, nu=1e-12).run(tasks, X, Y)
    assert np.max(np.abs(plain - mt)) <= 1e-9


def test_single_task_wrapper_equals_bare_method(rng):
    X, Y = rng.standard_normal((30, 3)), rng.standard_normal(30)
    wrapped = stl_wrap("wrls", 1, 3, gamma=1.0, lam=1.0, sigma=0.8)
    bare = wrls_init(3, sigma=0.8)
    p = [wrapped.step(0, x, y) for x, y in zip(X, Y)]
    q = [bare.step(x, y) for x, y in zip(X, Y)]
    np.testing.assert_allclose(p, q, atol=1e-14)


def test_stl_routes_by_task(rng):
    e = stl_wrap("wrls", 2, 2)
    assert isinstance(e, StlEnsemble)
    e.step(1, [1.0, 0.0], 1.0)
    assert e.predict(0, [1.0, 0.0]) == 0.0 and e.predict(1, [1.0, 0.0]) != 0.0
    with pytest.raises(ValueError):
        stl_wrap("svm", 2, 2)
