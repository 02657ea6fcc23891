"""Multi-task WRLS on the stacked parameter space.

All task parameter vectors are stacked into one vector of length ``d*T``;
a sample from task ``t`` becomes a regressor that is zero outside block
``t``.  Initializing ``P(0) = lam^{-1} A^{-1} kron I_d`` makes the plain WRLS
recursion solve the graph-regularized problem exactly at every step (for
``sigma = 1``).  Task indices are zero-based.
"""
from __future__ import annotations

import numpy as np

from . import kernels
from .errors import CapacityError, InvalidInputError, SingularMatrixError
from .task_graph import TaskGraph
from .wrls import WrlsState, wrls_init

DEFAULT_MAX_DIM = 2000


def stack_input(x, task: int, T: int) -> np.ndarray:
    """Length ``d*T`` vector with ``x`` in block ``task`` and zeros elsewhere."""
    x = np.asarray(x, dtype=float).ravel()
    if not 0 <= task < T:
        raise InvalidInputError(f"task {task} out of range for T={T}")
    out = np.zeros(x.shape[0] * T)
    out[task * x.shape[0]:(task + 1) * x.shape[0]] = x
    return out


class MtWrls:
    """Multi-task weighted recursive least squares.

    Parameters
    ----------
    graph : TaskGraph
        Supplies ``A^{-1}`` and the penalty ``lam`` (must be positive).
    d : int
        Per-task input dimension.
    sigma : float
        Forgetting factor applied at every stacked update.
    max_dim : int
        Refuse stacked dimensions above this, since ``P`` is dense.
    """

    def __init__(self, graph: TaskGraph, d: int, sigma: float = 1.0, max_dim: int = DEFAULT_MAX_DIM):
        if not graph.lam > 0:
            raise InvalidInputError("lam must be > 0 for the stacked initialization")
        if int(d) != d or d < 1:
            raise InvalidInputError(f"d must be a positive integer, got {d}")
        D = d * graph.T
        if D > max_dim:
            raise CapacityError(f"stacked dimension {D} exceeds the cap {max_dim}")
        self.graph = graph
        self.d = int(d)
        self.T = graph.T
        P0 = np.kron(graph.A_inv, np.eye(d)) / graph.lam
        self.core: WrlsState = wrls_init(D, P0, None, sigma, check_spd=graph.is_symmetric)

    @property
    def sigma(self) -> float:
        return self.core.sigma

    @property
    def weights(self) -> np.ndarray:
        """``(T, d)`` view of the stacked parameters, one row per task."""
        return self.core.w.reshape(self.T, self.d)

    def _check(self, task, x):
        if not 0 <= task < self.T:
            raise InvalidInputError(f"task {task} out of range for T={self.T}")
        x = np.ascontiguousarray(x, dtype=float).ravel()
        if x.shape[0] != self.d:
            raise InvalidInputError(f"input has length {x.shape[0]}, expected {self.d}")
        if not np.all(np.isfinite(x)):
            raise InvalidInputError("input contains non-finite values")
        return int(task), x

    def predict(self, task: int, x) -> float:
        task, x = self._check(task, x)
        return float(self.weights[task] @ x)

    def update(self, task: int, x, y) -> None:
        self.step(task, x, y)

    def step(self, task: int, x, y) -> float:
        """Predict with block ``task`` of the current parameters, then update."""
        task, x = self._check(task, x)
        y = float(y)
        if not np.isfinite(y):
            raise InvalidInputError("target is not finite")
        c = self.core
        pred = kernels.active().wrls_step(c.P, c.w, x, task * self.d, y, c.sigma, c.symmetric)
        c.n += 1
        return pred

    def run(self, tasks, X, Y) -> np.ndarray:
        """Process an interleaved stream in one compiled loop; returns predictions."""
        tasks = np.ascontiguousarray(tasks, dtype=np.int64)
        X = np.ascontiguousarray(X, dtype=float)
        Y = np.ascontiguousarray(Y, dtype=float)
        n = Y.shape[0]
        if tasks.shape != (n,) or X.shape != (n, self.d):
            raise InvalidInputError("tasks, X and Y have inconsistent shapes")
        if n and (tasks.min() < 0 or tasks.max() >= self.T):
            raise InvalidInputError("task index out of range")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(Y))):
            raise InvalidInputError("stream contains non-finite values")
        preds = np.empty(n)
        c = self.core
        try:
            kernels.active().wrls_stream(c.P, c.w, tasks * self.d, X, Y, c.sigma, c.symmetric, preds)
        except Exception as exc:
            c.n += getattr(exc, "step", 0) or 0
            raise
        c.n += n
        return preds


def mt_wrls_new(graph: TaskGraph, d: int, sigma: float = 1.0) -> MtWrls:
    return MtWrls(graph, d, sigma)


def mt_wrls_step(model: MtWrls, task: int, x, y):
    pred = model.step(task, x, y)
    return pred, model


def stacked_design(tasks, X, T: int) -> np.ndarray:
    """Block-sparse ``(n, d*T)`` design matrix for interleaved samples."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    n, d = X.shape
    Z = np.zeros((n, d * T))
    for i, t in enumerate(tasks):
        Z[i, t * d:(t + 1) * d] = X[i]
    return Z


def mt_batch_oracle(samples, graph: TaskGraph) -> np.ndarray:
    """Closed-form stacked solution ``(X'X + lam A kron I_d)^{-1} X'y``.

    ``samples`` is a sequence of ``(task, x, y)``.  Dense ``O((dT)^3)`` solve,
    kept as a reference for tests and the oracle check of the CLI.
    """
    samples = list(samples)
    if not samples:
        raise InvalidInputError("need at least one sample")
    tasks = [int(s[0]) for s in samples]
    X = np.array([np.asarray(s[1], dtype=float).ravel() for s in samples])
    y = np.array([float(s[2]) for s in samples])
    d = X.shape[1]
    Z = stacked_design(tasks, X, graph.T)
    M = Z.T @ Z + graph.lam * np.kron(graph.A, np.eye(d))
    if np.linalg.cond(M) > 1e14:
        raise SingularMatrixError("stacked normal matrix is singular")
    return np.linalg.solve(M, Z.T @ y)
