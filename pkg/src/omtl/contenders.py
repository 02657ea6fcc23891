"""Comparison methods: multi-task online gradient descent and single-task wrappers."""
from __future__ import annotations

import math

import numpy as np

from . import kernels
from .errors import InvalidInputError
from .mt_oslssvr import DEFAULT_CAPACITY, MtOslssvr
from .mt_wrls import MtWrls
from .task_graph import TaskGraph


def mogd_gradient(W, graph: TaskGraph, task: int, x, y) -> np.ndarray:
    """Descent direction for block ``task`` of the instantaneous objective.

    ``-2 x (y - x'w_t) + 2 lam [(A kron I_d) w]_t``.  For symmetric graphs this
    is the exact gradient of ``(y - x'w_t)^2 + lam w'(A kron I_d)w``.
    """
    W = np.asarray(W, dtype=float)
    x = np.asarray(x, dtype=float)
    err = float(y) - float(W[task] @ x)
    return -2.0 * err * x + 2.0 * graph.lam * (graph.A[task] @ W)


def instantaneous_objective(W, graph: TaskGraph, task: int, x, y) -> float:
    W = np.asarray(W, dtype=float)
    err = float(y) - float(W[task] @ np.asarray(x, dtype=float))
    return err * err + graph.lam * float(np.sum(W * (graph.A @ W)))


class Mogd:
    """Online gradient descent on the graph-regularized objective.

    Step sizes follow ``eta0 / sqrt(i)`` with ``i`` the global step count.
    Parameters are held as a ``(T, d)`` array, one row per task.
    """

    def __init__(self, graph: TaskGraph, d: int, eta0: float = 0.01):
        if not eta0 > 0:
            raise InvalidInputError(f"eta0 must be > 0, got {eta0}")
        self.graph = graph
        self.T = graph.T
        self.d = int(d)
        self.eta0 = float(eta0)
        self.W = np.zeros((self.T, self.d))
        self.i = 0
        self._A = np.ascontiguousarray(graph.A)

    @property
    def weights(self) -> np.ndarray:
        return self.W

    def _check(self, task, x):
        if not 0 <= task < self.T:
            raise InvalidInputError(f"task {task} out of range for T={self.T}")
        x = np.ascontiguousarray(x, dtype=float).ravel()
        if x.shape[0] != self.d or not np.all(np.isfinite(x)):
            raise InvalidInputError("input has wrong length or non-finite values")
        return int(task), x

    def predict(self, task, x) -> float:
        task, x = self._check(task, x)
        return float(self.W[task] @ x)

    def update(self, task, x, y) -> None:
        self.step(task, x, y)

    def step(self, task, x, y) -> float:
        task, x = self._check(task, x)
        self.i += 1
        eta = self.eta0 / math.sqrt(self.i)
        return kernels.active().mogd_step(self.W, self._A, task, x, float(y), self.graph.lam, eta)

    def run(self, tasks, X, Y) -> np.ndarray:
        tasks = np.ascontiguousarray(tasks, dtype=np.int64)
        X = np.ascontiguousarray(X, dtype=float)
        Y = np.ascontiguousarray(Y, dtype=float)
        preds = np.empty(Y.shape[0])
        kernels.active().mogd_stream(
            self.W, self._A, tasks, X, Y, self.graph.lam, self.eta0, self.i, preds
        )
        self.i += Y.shape[0]
        return preds


def mogd_step(state: Mogd, task, x, y):
    pred = state.step(task, x, y)
    return pred, state


class StlEnsemble:
    """``T`` independent single-task models routed by task index."""

    def __init__(self, models):
        self.models = list(models)
        self.T = len(self.models)

    def _model(self, task):
        if not 0 <= task < self.T:
            raise InvalidInputError(f"task {task} out of range for T={self.T}")
        return self.models[task]

    def predict(self, task, x) -> float:
        return self._model(task).predict(0, x)

    def update(self, task, x, y) -> None:
        self._model(task).step(0, x, y)

    def step(self, task, x, y) -> float:
        return self._model(task).step(0, x, y)

    def run(self, tasks, X, Y) -> np.ndarray:
        tasks = np.asarray(tasks, dtype=np.int64)
        preds = np.empty(len(Y))
        # each task's subsequence keeps its order; models never interact
        for t in range(self.T):
            idx = np.flatnonzero(tasks == t)
            if idx.size:
                preds[idx] = self._model(t).run(np.zeros(idx.size, dtype=np.int64), X[idx], Y[idx])
        return preds


def stl_wrap(method: str, T: int, d: int, *, gamma: float = 1.0, lam: float = 1.0,
             sigma: float = 1.0, nu: float = 1e-3, capacity: int = DEFAULT_CAPACITY) -> StlEnsemble:
    """Build ``T`` independent WRLS or OSLSSVR learners.

    Each learner is the multi-task method on a one-task graph ``A = [gamma]``,
    which is exactly the edgeless-graph special case restricted to one task.
    """
    graph = TaskGraph.edgeless(1, gamma, lam)
    method = method.lower()
    if method == "wrls":
        return StlEnsemble(MtWrls(graph, d, sigma) for _ in range(T))
    if method == "oslssvr":
        return StlEnsemble(MtOslssvr(graph, d, nu, capacity) for _ in range(T))
    raise InvalidInputError(f"unknown single-task method {method!r}")
