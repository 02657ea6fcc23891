"""Error metrics relative to persistence, and regret curves."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidInputError
from ..mt_wrls import mt_batch_oracle, stacked_design
from ..task_graph import TaskGraph


@dataclass(frozen=True)
class Metrics:
    rmse: float
    mae: float
    relrmse: float
    relmae: float


def rmse(pred, actual) -> float:
    e = np.asarray(pred, dtype=float) - np.asarray(actual, dtype=float)
    return float(np.sqrt(np.mean(e * e)))


def mae(pred, actual) -> float:
    return float(np.mean(np.abs(np.asarray(pred, dtype=float) - np.asarray(actual, dtype=float))))


def metrics(predictions, actuals, persistence_preds) -> Metrics:
    """RMSE and MAE of ``predictions`` plus their ratios to persistence's errors."""
    p = np.asarray(predictions, dtype=float).ravel()
    a = np.asarray(actuals, dtype=float).ravel()
    b = np.asarray(persistence_preds, dtype=float).ravel()
    if not (p.shape == a.shape == b.shape) or p.size == 0:
        raise InvalidInputError("predictions, actuals and persistence must be equal non-empty lengths")
    r, m = rmse(p, a), mae(p, a)
    rb, mb = rmse(b, a), mae(b, a)
    if rb == 0 or mb == 0:
        raise ZeroDivisionError("persistence error is zero; relative metrics undefined")
    return Metrics(r, m, r / rb, m / mb)


def regret_curve(step_losses, oracle_losses):
    """Cumulative regret and its running average.

    ``step_losses[i]`` is the learner's objective at step ``i`` and
    ``oracle_losses[i]`` the best achievable value of the same objective.
    """
    s = np.asarray(step_losses, dtype=float).ravel()
    o = np.asarray(oracle_losses, dtype=float).ravel()
    if s.shape != o.shape:
        raise InvalidInputError("loss streams differ in length")
    regret = np.cumsum(s - o)
    return regret, regret / np.arange(1, s.size + 1)


def prefix_objective(w, tasks, X, Y, graph: TaskGraph) -> float:
    """Mean regularized loss over a prefix: ``(||Xw - y||^2 + lam w'(A kron I)w) / n``."""
    Z = stacked_design(tasks, X, graph.T)
    r = Z @ w - np.asarray(Y, dtype=float)
    W = np.asarray(w, dtype=float).reshape(graph.T, -1)
    return float((r @ r + graph.lam * np.sum(W * (graph.A @ W))) / len(Y))


def prefix_regret_losses(trajectory, tasks, X, Y, graph: TaskGraph):
    """Learner vs hindsight losses per prefix.

    ``trajectory[i]`` is the learner's stacked parameter vector after step
    ``i``.  The hindsight value refits the closed-form solution on every
    prefix, so this is ``O(n (dT)^3)``; meant for short streams.
    """
    tasks = np.asarray(tasks)
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    step, best = [], []
    for i in range(len(Y)):
        sl = slice(0, i + 1)
        w_star = mt_batch_oracle(zip(tasks[sl], X[sl], Y[sl]), graph)
        step.append(prefix_objective(trajectory[i], tasks[sl], X[sl], Y[sl], graph))
        best.append(prefix_objective(w_star, tasks[sl], X[sl], Y[sl], graph))
    return np.array(step), np.array(best)
