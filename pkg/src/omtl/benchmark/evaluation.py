"""Prequential evaluation and training-segment hyperparameter search."""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from ..errors import GridSearchError, NumericalBreakdownError, OmtlError
from .methods import MethodContext, MethodSpec, get_method
from .metrics import Metrics, metrics, rmse
from .protocol import Prepared

_CANDIDATE_ERRORS = (OmtlError, ArithmeticError, np.linalg.LinAlgError)


def run_stream(model, tasks, X, Y, fast: bool = True) -> np.ndarray:
    """Predict-then-train over a stream and return the pre-update predictions.

    With ``fast`` the model's batched ``run`` is used when it exists; the
    generic path calls ``predict(task, x)`` then ``update(task, x, y)`` so the
    target is never visible before its prediction is recorded.
    """
    if fast and hasattr(model, "run"):
        return np.asarray(model.run(tasks, X, Y), dtype=float)
    preds = np.empty(len(Y))
    for i in range(len(Y)):
        try:
            preds[i] = model.predict(int(tasks[i]), X[i])
            model.update(int(tasks[i]), X[i], float(Y[i]))
        except NumericalBreakdownError as exc:
            if exc.step is None:
                exc.step = i
                exc.args = (f"{exc} (step {i})",)
            raise
    return preds


def context_for(prepared: Prepared, gamma: float = 1.0, capacity: int = 512) -> MethodContext:
    return MethodContext(prepared.T, prepared.d, prepared.sims, gamma, capacity)


@dataclass
class SearchResult:
    best: dict
    scores: list = field(default_factory=list)     # (params, rmse) for successful candidates
    failures: dict = field(default_factory=dict)   # str(params) -> reason


def grid_search(method: MethodSpec | str, prepared: Prepared, grids: dict | None = None,
                gamma: float = 1.0, capacity: int = 512, fast: bool = True) -> SearchResult:
    """Pick hyperparameters by prequential RMSE on the training segment.

    Every candidate starts from a fresh model.  Candidates that raise or give
    non-finite predictions are skipped; ties keep the earliest candidate in
    grid order.  A singleton grid is returned without being run.
    """
    spec = get_method(method) if isinstance(method, str) else method
    cands = spec.candidates(grids)
    if len(cands) == 1:
        return SearchResult(cands[0])
    ctx = context_for(prepared, gamma, capacity)
    tasks, X, Y = prepared.stream("train")
    best, best_score = None, np.inf
    result = SearchResult({})
    for params in cands:
        try:
            with np.errstate(all="ignore"):
                preds = run_stream(spec.build(ctx, params), tasks, X, Y, fast)
                score = rmse(preds, Y) if np.all(np.isfinite(preds)) else np.nan
        except _CANDIDATE_ERRORS as exc:
            result.failures[str(params)] = f"{type(exc).__name__}: {exc}"
            continue
        if not np.isfinite(score):
            result.failures[str(params)] = "non-finite predictions"
            continue
        result.scores.append((params, score))
        if score < best_score:
            best, best_score = params, score
    if best is None:
        raise GridSearchError(result.failures)
    result.best = best
    return result


@dataclass
class RunResult:
    """Outcome of one method on one prepared dataset (test segment only)."""

    method: str
    params: dict
    predictions: np.ndarray      # (T, n_test)
    actuals: np.ndarray          # (T, n_test)
    persistence: np.ndarray      # (T, n_test)
    per_task: list               # Metrics per task
    search: SearchResult | None
    seconds: float

    @property
    def mean(self) -> Metrics:
        return Metrics(*(float(np.mean([getattr(m, f) for m in self.per_task]))
                         for f in ("rmse", "mae", "relrmse", "relmae")))


def evaluate_online(method: MethodSpec | str, prepared: Prepared, params: dict | None = None,
                    grids: dict | None = None, gamma: float = 1.0, capacity: int = 512,
                    fast: bool = True) -> RunResult:
    """Tune on the training segment (unless ``params`` is given), then start a
    fresh model at the test boundary and score its prequential predictions."""
    spec = get_method(method) if isinstance(method, str) else method
    t0 = time.perf_counter()
    search = None
    if params is None:
        search = grid_search(spec, prepared, grids, gamma, capacity, fast)
        params = search.best
    tasks, X, Y = prepared.stream("test")
    T, n = prepared.T, prepared.n_test
    if spec.diagnostic:
        flat = Y.copy()
    else:
        model = spec.build(context_for(prepared, gamma, capacity), params)
        try:
            flat = run_stream(model, tasks, X, Y, fast)
        except NumericalBreakdownError as exc:
            err = NumericalBreakdownError(f"{spec.name} broke down on the test segment: {exc}")
            err.step = exc.step
            raise err from exc
    preds = flat.reshape(n, T).T
    actual = Y.reshape(n, T).T
    base = np.zeros_like(actual)
    if not np.all(np.isfinite(preds)):
        raise NumericalBreakdownError(f"{spec.name} produced non-finite test predictions")
    per_task = [metrics(preds[t], actual[t], base[t]) for t in range(T)]
    return RunResult(spec.name, dict(params), preds, actual, base, per_task, search,
                     time.perf_counter() - t0)

