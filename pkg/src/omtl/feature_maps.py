"""Input pipelines: differencing, autoregressive embedding, ELM random features."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError

DEFAULT_LAG = 9


def difference(series) -> np.ndarray:
    """First-order difference ``out[i] = s[i+1] - s[i]``."""
    s = np.asarray(series, dtype=float).ravel()
    if s.shape[0] < 2:
        raise InvalidInputError("differencing needs at least 2 points")
    return np.diff(s)


def undifference(diffs, first: float) -> np.ndarray:
    """Inverse of :func:`difference` given the first original value."""
    return np.concatenate([[float(first)], float(first) + np.cumsum(diffs)])


def ar_embed(series, lag: int = DEFAULT_LAG):
    """Autoregressive design for one-step-ahead prediction.

    Row ``i`` is ``(s[i+lag-1], ..., s[i], 1)`` (most recent lag first, then
    a constant column) and its target is ``s[i+lag]``.

    Returns
    -------
    X : ndarray, shape (n - lag, lag + 1)
    y : ndarray, shape (n - lag,)
    """
    s = np.asarray(series, dtype=float).ravel()
    if int(lag) != lag or lag < 1:
        raise InvalidInputError(f"lag must be a positive integer, got {lag}")
    n = s.shape[0]
    if n <= lag:
        raise InvalidInputError(f"series of length {n} is too short for lag {lag}")
    windows = np.lib.stride_tricks.sliding_window_view(s[:-1], lag)[:, ::-1]
    X = np.hstack([windows, np.ones((n - lag, 1))])
    return np.ascontiguousarray(X), s[lag:].copy()


@dataclass
class Standardizer:
    """Per-feature z-scoring fitted on a training block; constant columns pass through."""

    mean: np.ndarray
    scale: np.ndarray

    @classmethod
    def fit(cls, X) -> "Standardizer":
        X = np.asarray(X, dtype=float)
        mean = X.mean(axis=0)
        scale = X.std(axis=0)
        const = scale == 0
        mean[const] = 0.0
        scale[const] = 1.0
        return cls(mean, scale)

    def transform(self, X) -> np.ndarray:
        return (np.asarray(X, dtype=float) - self.mean) / self.scale


@dataclass(frozen=True)
class ElmMap:
    """Fixed random hidden layer with tanh units.

    Hidden weights are drawn i.i.d. uniform on ``[-1, 1]`` from numpy's PCG64
    generator seeded with ``seed``, so the same ``(H, d, seed)`` gives the same
    weights everywhere.  Output features are ``(1, tanh(V x))``.
    """

    H: int
    d: int
    seed: int
    V: np.ndarray = field(repr=False)
    standardizer: Standardizer | None = field(default=None, repr=False)

    @classmethod
    def create(cls, H: int = 20, d: int = DEFAULT_LAG + 1, seed: int = 0, standardizer=None) -> "ElmMap":
        if H < 1 or d < 1:
            raise InvalidInputError("H and d must be positive")
        rng = np.random.Generator(np.random.PCG64(seed))
        V = rng.uniform(-1.0, 1.0, size=(H, d))
        V.setflags(write=False)
        return cls(int(H), int(d), int(seed), V, standardizer)

    @property
    def out_dim(self) -> int:
        return self.H + 1

    def features(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float).ravel()
        if x.shape[0] != self.d:
            raise InvalidInputError(f"input has length {x.shape[0]}, expected {self.d}")
        return self.transform(x[None, :])[0]

    def transform(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.d:
            raise InvalidInputError(f"inputs have {X.shape[1]} columns, expected {self.d}")
        if self.standardizer is not None:
            X = self.standardizer.transform(X)
        return np.hstack([np.ones((X.shape[0], 1)), np.tanh(X @ self.V.T)])

    def to_dict(self) -> dict:
        out = {"H": self.H, "d": self.d, "seed": self.seed, "V": self.V.tolist()}
        if self.standardizer is not None:
            out["mean"] = self.standardizer.mean.tolist()
            out["scale"] = self.standardizer.scale.tolist()
        return out


def elm_features(elm: ElmMap, x) -> np.ndarray:
    return elm.features(x)
