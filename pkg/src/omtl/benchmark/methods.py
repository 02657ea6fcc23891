"""Registry of benchmarked methods, their hyperparameter grids and factories."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..contenders import Mogd, stl_wrap
from ..errors import InvalidInputError
from ..mt_oslssvr import DEFAULT_CAPACITY, MtOslssvr
from ..mt_wrls import MtWrls
from ..task_graph import TaskGraph

SIGMA_GRID = (0.01, 0.2, 0.4, 0.6, 0.8, 1.0)
LAM_GRID = (1e-10, 1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0, 1e3, 1e4, 1e10)
NU_GRID = (1e-3, 1e-2, 1e-1)
ETA0_GRID = (1e-4, 1e-3, 1e-2, 1e-1)

DEFAULT_GRIDS = {"sigma": SIGMA_GRID, "lam": LAM_GRID, "nu": NU_GRID, "eta0": ETA0_GRID}


@dataclass(frozen=True)
class MethodContext:
    T: int
    d: int
    sims: np.ndarray
    gamma: float = 1.0
    capacity: int = DEFAULT_CAPACITY

    def graph(self, lam: float) -> TaskGraph:
        return TaskGraph.from_similarities(self.sims, self.gamma, lam)


class Persistence:
    """No-change forecast; in differenced space it always predicts 0."""

    def predict(self, task, x) -> float:
        return 0.0

    def update(self, task, x, y) -> None:
        pass

    def step(self, task, x, y) -> float:
        return 0.0

    def run(self, tasks, X, Y) -> np.ndarray:
        return np.zeros(len(Y))


@dataclass(frozen=True)
class MethodSpec:
    name: str
    params: tuple                  # grid axes, outermost first
    build: Callable[[MethodContext, dict], object]
    diagnostic: bool = False       # not a real forecaster; excluded from normal runs

    def candidates(self, grids: dict | None = None) -> list[dict]:
        """Cartesian product of the grids in axis order (first axis varies slowest)."""
        grids = dict(DEFAULT_GRIDS, **(grids or {}))
        axes = []
        for p in self.params:
            values = list(grids[p])
            if not values:
                raise InvalidInputError(f"empty grid for {p!r}")
            axes.append(values)
        return [dict(zip(self.params, combo)) for combo in itertools.product(*axes)]


def _mt_wrls(ctx, p):
    return MtWrls(ctx.graph(p["lam"]), ctx.d, p["sigma"])


def _mt_oslssvr(ctx, p):
    return MtOslssvr(ctx.graph(p["lam"]), ctx.d, p["nu"], ctx.capacity)


def _wrls(ctx, p):
    return stl_wrap("wrls", ctx.T, ctx.d, gamma=ctx.gamma, lam=p["lam"], sigma=p["sigma"])


def _oslssvr(ctx, p):
    return stl_wrap("oslssvr", ctx.T, ctx.d, gamma=ctx.gamma, lam=p["lam"], nu=p["nu"],
                    capacity=ctx.capacity)


def _mogd(ctx, p):
    return Mogd(ctx.graph(p["lam"]), ctx.d, p["eta0"])


def _persistence(ctx, p):
    return Persistence()


METHODS = {
    "mt-wrls": MethodSpec("mt-wrls", ("sigma", "lam"), _mt_wrls),
    "mt-oslssvr": MethodSpec("mt-oslssvr", ("nu", "lam"), _mt_oslssvr),
    "wrls": MethodSpec("wrls", ("sigma", "lam"), _wrls),
    "oslssvr": MethodSpec("oslssvr", ("nu", "lam"), _oslssvr),
    "mogd": MethodSpec("mogd", ("lam", "eta0"), _mogd),
    "persistence": MethodSpec("persistence", (), _persistence),
    # hindsight-perfect predictions, for sanity-checking the statistics
    "oracle": MethodSpec("oracle", (), _persistence, diagnostic=True),
}

RUNNABLE = tuple(k for k, v in METHODS.items() if not v.diagnostic)


def get_method(name: str) -> MethodSpec:
    try:
        return METHODS[name.lower()]
    except KeyError:
        raise InvalidInputError(
            f"unknown method {name!r}; choose from {', '.join(METHODS)}"
        ) from None
