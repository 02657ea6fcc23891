"""Weighted recursive least squares with a forgetting factor.

The state tracks ``w(n) = P(n) Psi(n)`` where ``P(n)`` inverts
``Phi(n) = sigma Phi(n-1) + x x'`` and ``Phi(0) = P0^{-1}``.  Every update is a
rank-one Woodbury correction, so each step costs ``O(D^2)``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import InvalidInputError, SingularMatrixError


@dataclass
class WrlsState:
    """Mutable WRLS state owned by a single stream.

    Attributes
    ----------
    w : ndarray, shape (D,)
        Current parameters.
    P : ndarray, shape (D, D)
        Inverse of the weighted correlation matrix.
    sigma : float
        Forgetting factor in ``(0, 1]``.
    n : int
        Number of updates applied.
    symmetric : bool
        Whether ``P`` is kept symmetric by averaging with its transpose after
        every update.  Only switched off for non-symmetric task graphs.
    """

    w: np.ndarray
    P: np.ndarray
    sigma: float
    n: int = 0
    symmetric: bool = True

    @property
    def dim(self) -> int:
        return self.w.shape[0]

    def predict(self, x) -> float:
        return float(np.asarray(x, dtype=float) @ self.w)

    def step(self, x, y) -> float:
        """Predict with the current ``w``, then absorb ``(x, y)``."""
        x = _as_regressor(x, self.dim)
        y = _as_target(y)
        pred = kernels.active().wrls_step(self.P, self.w, x, 0, y, self.sigma, self.symmetric)
        self.n += 1
        return pred

    def run(self, X, Y) -> np.ndarray:
        """Prequential predictions for a whole stream, updating in place."""
        X = np.ascontiguousarray(X, dtype=float)
        Y = np.ascontiguousarray(Y, dtype=float)
        if X.ndim != 2 or X.shape != (Y.shape[0], self.dim):
            raise InvalidInputError(f"expected X of shape ({Y.shape[0]}, {self.dim}), got {X.shape}")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(Y))):
            raise InvalidInputError("stream contains non-finite values")
        preds = np.empty(Y.shape[0])
        offsets = np.zeros(Y.shape[0], dtype=np.int64)
        try:
            kernels.active().wrls_stream(self.P, self.w, offsets, X, Y, self.sigma, self.symmetric, preds)
        except Exception as exc:
            self.n += getattr(exc, "step", 0) or 0
            raise
        self.n += Y.shape[0]
        return preds

    def to_text(self) -> str:
        """JSON snapshot; floats are written with round-trip precision."""
        return json.dumps(
            {
                "w": self.w.tolist(),
                "P": self.P.tolist(),
                "sigma": self.sigma,
                "n": self.n,
                "symmetric": self.symmetric,
            }
        )

    @classmethod
    def from_text(cls, text: str) -> "WrlsState":
        data = json.loads(text)
        return cls(
            np.array(data["w"], dtype=float),
            np.array(data["P"], dtype=float),
            float(data["sigma"]),
            int(data["n"]),
            bool(data.get("symmetric", True)),
        )


def _check_sigma(sigma):
    if not (0.0 < sigma <= 1.0):
        raise InvalidInputError(f"forgetting factor must be in (0, 1], got {sigma}")


def _as_regressor(x, dim):
    x = np.ascontiguousarray(x, dtype=float).ravel()
    if x.shape[0] != dim:
        raise InvalidInputError(f"regressor has length {x.shape[0]}, expected {dim}")
    if not np.all(np.isfinite(x)):
        raise InvalidInputError("regressor contains non-finite values")
    return x


def _as_target(y):
    y = float(y)
    if not np.isfinite(y):
        raise InvalidInputError("target is not finite")
    return y


def wrls_init(D: int, P0=None, w0=None, sigma: float = 1.0, *, check_spd: bool = True) -> WrlsState:
    """Create a WRLS state.

    ``P0`` defaults to the identity and ``w0`` to zeros.  With ``check_spd``
    the initial matrix must be symmetric positive-definite (verified by a
    Cholesky factorization); pass ``False`` for the non-symmetric stacked
    initializations produced by asymmetric task graphs.
    """
    if int(D) != D or D < 1:
        raise InvalidInputError(f"dimension must be a positive integer, got {D}")
    _check_sigma(sigma)
    P0 = np.eye(D) if P0 is None else np.array(P0, dtype=float)
    w0 = np.zeros(D) if w0 is None else np.array(w0, dtype=float).ravel()
    if P0.shape != (D, D) or w0.shape != (D,):
        raise InvalidInputError(f"P0 {P0.shape} / w0 {w0.shape} do not match D={D}")
    if not (np.all(np.isfinite(P0)) and np.all(np.isfinite(w0))):
        raise InvalidInputError("initial state has non-finite entries")
    symmetric = bool(np.allclose(P0, P0.T, rtol=0, atol=1e-12 * max(1.0, np.abs(P0).max())))
    if check_spd:
        if not symmetric:
            raise InvalidInputError("P0 must be symmetric")
        try:
            np.linalg.cholesky(P0)
        except np.linalg.LinAlgError:
            raise InvalidInputError("P0 must be positive-definite") from None
    if symmetric:
        P0 = 0.5 * (P0 + P0.T)
    return WrlsState(np.ascontiguousarray(w0), np.ascontiguousarray(P0), float(sigma), 0, symmetric)


def wrls_step(state: WrlsState, x, y):
    """Functional alias of :meth:`WrlsState.step`; returns ``(prediction, state)``."""
    pred = state.step(x, y)
    return pred, state


def wrls_batch_oracle(X, y, P0, sigma: float = 1.0) -> np.ndarray:
    """Direct solve of the exponentially weighted regularized normal equations.

    ``w = (sum_i s^{n-i} x_i x_i' + s^n P0^{-1})^{-1} sum_i s^{n-i} y_i x_i``
    with ``s = sigma``.  Reference for tests; ``O(D^3)``.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    n = y.shape[0]
    _check_sigma(sigma)
    weights = sigma ** (n - 1 - np.arange(n))
    Phi = sigma**n * np.linalg.inv(np.asarray(P0, dtype=float)) + (X.T * weights) @ X
    rhs = (X.T * weights) @ y
    if np.linalg.cond(Phi) > 1e14:
        raise SingularMatrixError("weighted normal matrix is singular")
    return np.linalg.solve(Phi, rhs)
