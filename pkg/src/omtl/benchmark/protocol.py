"""Train/test splitting and feature preparation for one multi-task dataset."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import InvalidInputError
from ..feature_maps import DEFAULT_LAG, ElmMap, Standardizer, ar_embed
from ..task_graph import similarity_from_series
from .data import MultiTaskDataset


@dataclass(frozen=True)
class SplitSpec:
    """Sequential split: the first ``floor(mu * n)`` samples train, the rest test."""

    mu: float

    def __post_init__(self):
        if not 0.0 < self.mu < 1.0:
            raise InvalidInputError(f"mu must lie in (0, 1), got {self.mu}")

    def counts(self, n: int) -> tuple[int, int]:
        n_train = math.floor(self.mu * n)
        if n - n_train < 1:
            raise InvalidInputError(f"split mu={self.mu} leaves no test samples out of {n}")
        return n_train, n - n_train


def split_counts(n: int, mu: float) -> tuple[int, int]:
    return SplitSpec(mu).counts(n)


@dataclass(frozen=True)
class ElmConfig:
    hidden: int = 20
    seed: int = 0
    standardize: bool = True


@dataclass
class Prepared:
    """Embedded, split data ready for streaming.

    ``X`` has shape ``(T, N, d)`` and ``Y`` shape ``(T, N)``; the first
    ``n_train`` rows of every task form the training segment.  Targets are
    differenced values, so the persistence forecast is identically 0.
    """

    X: np.ndarray
    Y: np.ndarray
    n_train: int
    sims: np.ndarray
    elm: ElmMap | None = None

    @property
    def T(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[2]

    @property
    def n_test(self) -> int:
        return self.X.shape[1] - self.n_train

    def rows(self, segment: str) -> slice:
        if segment == "train":
            return slice(0, self.n_train)
        if segment == "test":
            return slice(self.n_train, self.X.shape[1])
        raise InvalidInputError(f"unknown segment {segment!r}")

    def stream(self, segment: str):
        """Round-robin interleaving: time step by time step, tasks in index order.

        Returns ``(tasks, X, Y)`` flattened over (time, task).
        """
        sl = self.rows(segment)
        X = self.X[:, sl, :]
        Y = self.Y[:, sl]
        n = X.shape[1]
        tasks = np.tile(np.arange(self.T, dtype=np.int64), n)
        Xf = np.ascontiguousarray(X.transpose(1, 0, 2).reshape(n * self.T, self.d))
        Yf = np.ascontiguousarray(Y.T.reshape(-1))
        return tasks, Xf, Yf


def prepare(dataset: MultiTaskDataset, split: SplitSpec, lag: int = DEFAULT_LAG,
            elm: ElmConfig | None = None, similarity_source: str = "differenced") -> Prepared:
    """Difference, embed, split, and compute training-segment similarities."""
    if dataset.T < 2:
        raise InvalidInputError("multi-task runs need at least 2 tasks")
    diff = dataset.differenced().series
    pairs = [ar_embed(row, lag) for row in diff]
    X = np.stack([p[0] for p in pairs])
    Y = np.stack([p[1] for p in pairs])
    n_train, _ = split.counts(X.shape[1])
    if n_train < 1:
        raise InvalidInputError("training segment is empty")
    # series values underlying the training inputs and targets only
    if similarity_source == "differenced":
        sims = similarity_from_series(diff[:, :n_train + lag])
    elif similarity_source == "raw":
        if dataset.provenance == "differenced":
            raise InvalidInputError("raw similarities requested on an already differenced dataset")
        sims = similarity_from_series(dataset.series[:, :n_train + lag + 1])
    else:
        raise InvalidInputError(f"unknown similarity source {similarity_source!r}")
    elm_map = None
    if elm is not None:
        std = None
        if elm.standardize:
            std = Standardizer.fit(X[:, :n_train, :].reshape(-1, X.shape[2]))
        elm_map = ElmMap.create(elm.hidden, X.shape[2], elm.seed, std)
        T, N, d = X.shape
        X = elm_map.transform(X.reshape(-1, d)).reshape(T, N, elm_map.out_dim)
    return Prepared(np.ascontiguousarray(X), Y, n_train, sims, elm_map)
