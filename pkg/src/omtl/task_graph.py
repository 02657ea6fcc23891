"""Task-relationship graph: similarities, interaction matrix and its inverse.

The interaction matrix couples the per-task parameter blocks of the stacked
problem.  Row ``t`` holds ``gamma + sum_j sim(t, j)`` on the diagonal and
``-sim(t, j)`` off the diagonal; the stacked regularizer is
``lam * w' (A kron I_d) w``.
"""
from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.linalg
from scipy import stats

from .errors import InvalidInputError, SingularMatrixError, UndefinedCorrelationError

#: Condition number above which the interaction matrix is rejected.
MAX_CONDITION = 1e12


def spearman_similarity(a, b) -> float:
    """Spearman rank correlation of two series, clamped to ``[0, 1]``.

    Ties get average ranks.  Negative correlations are floored at 0 because
    the squared-difference coupling has no way to express anticorrelation.

    Raises
    ------
    InvalidInputError
        Lengths differ, are below 3, or values are missing.
    UndefinedCorrelationError
        Either series is constant.
    """
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.shape != b.shape:
        raise InvalidInputError(f"length mismatch: {a.size} vs {b.size}")
    if a.size < 3:
        raise InvalidInputError("spearman similarity needs at least 3 points")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise InvalidInputError("series contain missing or non-finite values")
    if np.ptp(a) == 0 or np.ptp(b) == 0:
        raise UndefinedCorrelationError("correlation undefined for a constant series")
    rho = stats.spearmanr(a, b).statistic
    return float(min(1.0, max(0.0, rho)))


def similarity_from_series(series) -> np.ndarray:
    """Symmetric similarity matrix from a ``(T, n)`` array of task series.

    Pairs involving a constant series get similarity 0.
    """
    series = np.asarray(series, dtype=float)
    T = series.shape[0]
    sims = np.zeros((T, T))
    for t in range(T):
        for j in range(t + 1, T):
            try:
                s = spearman_similarity(series[t], series[j])
            except UndefinedCorrelationError:
                s = 0.0
            sims[t, j] = sims[j, t] = s
    return sims


def validate_similarities(sims) -> np.ndarray:
    sims = np.array(sims, dtype=float)
    if sims.ndim != 2 or sims.shape[0] != sims.shape[1] or sims.shape[0] < 1:
        raise InvalidInputError(f"similarity matrix must be square, got {sims.shape}")
    if not np.all(np.isfinite(sims)):
        raise InvalidInputError("similarity matrix has non-finite entries")
    if np.any(sims < 0) or np.any(sims > 1):
        raise InvalidInputError("similarities must lie in [0, 1]")
    if np.any(np.diag(sims) != 0):
        raise InvalidInputError("similarity diagonal must be exactly 0")
    return sims


def build_interaction_matrix(sims, gamma: float) -> np.ndarray:
    """Interaction matrix ``A`` for a similarity matrix and shrinkage ``gamma``."""
    if not gamma >= 0:
        raise InvalidInputError(f"gamma must be >= 0, got {gamma}")
    sims = validate_similarities(sims)
    A = -sims.copy()
    A[np.diag_indices_from(A)] = gamma + sims.sum(axis=1)
    return A


def invert_interaction_matrix(A, return_condition: bool = False):
    """Invert ``A`` through an LU factorization.

    The 1-norm condition number is estimated first; anything above
    :data:`MAX_CONDITION` is refused since a larger ``gamma`` is then needed.
    One step of iterative refinement keeps ``A @ A_inv`` within ``1e-10`` of
    the identity for well-conditioned inputs.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InvalidInputError(f"A must be square, got {A.shape}")
    T = A.shape[0]
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
            lu, piv = scipy.linalg.lu_factor(A, check_finite=True)
    except (ValueError, scipy.linalg.LinAlgError) as exc:
        raise SingularMatrixError(f"cannot factorize interaction matrix: {exc}") from exc
    if np.any(np.diag(lu) == 0):
        raise SingularMatrixError("interaction matrix is singular; increase gamma")
    cond = np.linalg.cond(A, 1)
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise SingularMatrixError(
            f"interaction matrix is ill-conditioned (cond ~ {cond:.3g}); increase gamma"
        )
    eye = np.eye(T)
    A_inv = scipy.linalg.lu_solve((lu, piv), eye)
    A_inv += scipy.linalg.lu_solve((lu, piv), eye - A @ A_inv)
    return (A_inv, cond) if return_condition else A_inv


@dataclass(frozen=True)
class TaskGraph:
    """Immutable task graph with cached interaction matrix and inverse.

    ``lam`` is the structural penalty multiplying the whole regularizer and
    ``gamma`` the general shrinkage on the diagonal of ``A``.
    """

    sims: np.ndarray
    gamma: float
    lam: float
    A: np.ndarray = field(repr=False)
    A_inv: np.ndarray = field(repr=False)
    condition: float = field(repr=False)

    @classmethod
    def from_similarities(cls, sims, gamma: float = 1.0, lam: float = 1.0) -> "TaskGraph":
        if not lam >= 0:
            raise InvalidInputError(f"lam must be >= 0, got {lam}")
        sims = validate_similarities(sims)
        A = build_interaction_matrix(sims, gamma)
        A_inv, cond = invert_interaction_matrix(A, return_condition=True)
        for arr in (sims, A, A_inv):
            arr.setflags(write=False)
        return cls(sims, float(gamma), float(lam), A, A_inv, float(cond))

    @classmethod
    def from_series(cls, series, gamma: float = 1.0, lam: float = 1.0) -> "TaskGraph":
        return cls.from_similarities(similarity_from_series(series), gamma, lam)

    @classmethod
    def edgeless(cls, T: int, gamma: float = 1.0, lam: float = 1.0) -> "TaskGraph":
        return cls.from_similarities(np.zeros((T, T)), gamma, lam)

    @property
    def T(self) -> int:
        return self.sims.shape[0]

    @property
    def is_symmetric(self) -> bool:
        return bool(np.array_equal(self.sims, self.sims.T))

    def with_lam(self, lam: float) -> "TaskGraph":
        """Same structure, different penalty; reuses the cached inverse."""
        if not lam >= 0:
            raise InvalidInputError(f"lam must be >= 0, got {lam}")
        return TaskGraph(self.sims, self.gamma, float(lam), self.A, self.A_inv, self.condition)

    def to_csv(self, path) -> None:
        save_similarity_csv(self.sims, path)


def load_similarity_csv(path) -> np.ndarray:
    """Read a headerless ``T x T`` similarity CSV."""
    with open(path, newline="") as fh:
        rows = [row for row in csv.reader(fh) if row]
    try:
        sims = np.array([[float(v) for v in row] for row in rows])
    except ValueError as exc:
        raise InvalidInputError(f"{path}: non-numeric similarity entry") from exc
    return validate_similarities(sims)


def save_similarity_csv(sims, path) -> None:
    sims = validate_similarities(sims)
    with open(Path(path), "w", newline="") as fh:
        writer = csv.writer(fh)
        for row in sims:
            writer.writerow([repr(float(v)) for v in row])


def stacked_quadratic_form(w, A) -> float:
    """``w' (A kron I_d) w`` for a stacked vector ``w`` of length ``d*T``."""
    A = np.asarray(A, dtype=float)
    W = np.asarray(w, dtype=float).reshape(A.shape[0], -1)
    return float(np.sum(W * (A @ W)))


def edge_sum_penalty(w, sims, gamma: float) -> float:
    """Regularizer written as a double sum over tasks and their neighbours.

    ``sum_t sum_{j in E_t} ||w_t sim(j,t) - w_j sim(t,j)||^2 + gamma sum_t ||w_t||^2``
    """
    sims = np.asarray(sims, dtype=float)
    T = sims.shape[0]
    W = np.asarray(w, dtype=float).reshape(T, -1)
    total = gamma * float(np.sum(W * W))
    for t in range(T):
        for j in np.flatnonzero(sims[t] > 0):
            diff = W[t] * sims[j, t] - W[j] * sims[t, j]
            total += float(diff @ diff)
    return total


def laplacian_penalty(w, sims, gamma: float) -> float:
    """Weighted-Laplacian form ``gamma sum ||w_t||^2 + 1/2 sum_t sum_j sim(t,j) ||w_t - w_j||^2``.

    Equals :func:`stacked_quadratic_form` for symmetric similarities.
    """
    sims = np.asarray(sims, dtype=float)
    T = sims.shape[0]
    W = np.asarray(w, dtype=float).reshape(T, -1)
    total = gamma * float(np.sum(W * W))
    for t in range(T):
        for j in np.flatnonzero(sims[t] > 0):
            diff = W[t] - W[j]
            total += 0.5 * sims[t, j] * float(diff @ diff)
    return total
