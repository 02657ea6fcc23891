"""Multi-task online sparse LSSVR.

The multi-task kernel ``K((x, s), (x', t)) = (x . x') A^{-1}[s, t]`` turns the
graph-regularized stacked problem into a kernel ridge problem whose dual
solution is ``alpha = (K + lam I)^{-1} y``.  The online learner keeps a
dictionary of atoms admitted by the approximate-linear-dependency (ALD) test
and solves the dictionary-compressed version of that system recursively.

Compressed problem
------------------
Every sample ``i`` is represented by coefficients ``a_i`` over the atoms
(``e_m`` for the sample that created atom ``m``).  Stacking them in ``Acoef``
gives ``K ~ Acoef K_D Acoef'`` and the dictionary coefficients

    alpha_D = (Acoef'Acoef K_D + lam I)^{-1} Acoef' y
            = K_D^{-1} theta,   theta = Q Acoef' y,
    Q = (Acoef'Acoef + lam K_D^{-1})^{-1}.

A rejected sample is a rank-one update of ``Q^{-1}``; an admitted one extends
``Q^{-1}`` by a bordered block that is again rank-one relative to
``blockdiag(Q^{-1}, 1)``.  Both cost ``O(m^2)`` plus ``O(d m)`` kernel work.
When every sample is exactly representable (``nu -> 0``) the recursion
reproduces the full dual solution.
"""
from __future__ import annotations

import csv

import numpy as np

from . import kernels
from .errors import CapacityError, InvalidInputError, NumericalBreakdownError, SingularMatrixError
from .task_graph import TaskGraph

DEFAULT_CAPACITY = 512

#: Residuals below this fraction of k(x, x) are treated as rounding noise and
#: never admitted, whatever ``nu`` is; admitting them wrecks the conditioning
#: of the dictionary kernel matrix.
ALD_RTOL = 1e-8


class MtKernel:
    """Multi-task linear kernel; every call is ``O(d)``."""

    def __init__(self, graph: TaskGraph):
        self.A_inv = graph.A_inv
        self.T = graph.T

    def _task(self, t):
        if not 0 <= t < self.T:
            raise InvalidInputError(f"task {t} out of range for T={self.T}")
        return int(t)

    def __call__(self, x, s, x2, t) -> float:
        s, t = self._task(s), self._task(t)
        return float(np.dot(x, x2)) * float(self.A_inv[s, t])

    def row(self, x, s, atoms, atom_tasks) -> np.ndarray:
        """``K((x, s), atom_m)`` for every atom."""
        return (atoms @ x) * self.A_inv[s, atom_tasks]

    def matrix(self, tasks, X) -> np.ndarray:
        """Full kernel matrix over interleaved samples."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        tasks = np.asarray(tasks, dtype=int)
        return (X @ X.T) * self.A_inv[np.ix_(tasks, tasks)]


def mt_kernel_eval(x, s, x2, t, graph: TaskGraph) -> float:
    return MtKernel(graph)(np.asarray(x, dtype=float), s, np.asarray(x2, dtype=float), t)


class KernelDictionary:
    """ALD-sparsified atom set with an incrementally maintained kernel inverse."""

    def __init__(self, kernel: MtKernel, d: int, nu: float, capacity: int = DEFAULT_CAPACITY):
        if not nu >= 0:
            raise InvalidInputError(f"ALD threshold must be >= 0, got {nu}")
        self.kernel = kernel
        self.d = d
        self.nu = float(nu)
        self.capacity = int(capacity)
        self._atoms = np.empty((0, d))
        self._tasks = np.empty(0, dtype=np.int64)
        self.K_inv = np.empty((0, 0))
        self.kernel_evals = 0

    def __len__(self):
        return self._tasks.shape[0]

    @property
    def atoms(self) -> np.ndarray:
        return self._atoms

    @property
    def tasks(self) -> np.ndarray:
        return self._tasks

    def kernel_matrix(self) -> np.ndarray:
        return self.kernel.matrix(self._tasks, self._atoms)

    def kvec(self, x, task) -> np.ndarray:
        self.kernel_evals += len(self)
        return self.kernel.row(x, task, self._atoms, self._tasks)

    def ald_test(self, x, task):
        """Return ``(delta, a, k)``: residual, reconstruction coefficients, kernel row.

        ``delta`` is floored at zero against rounding.
        """
        k = self.kvec(x, task)
        self.kernel_evals += 1
        kxx = float(x @ x) * float(self.kernel.A_inv[task, task])
        if len(self) == 0:
            return kxx, np.empty(0), k
        a = self.K_inv @ k
        return max(0.0, kxx - float(k @ a)), a, k

    def admit(self, x, task, a, delta):
        """Append an atom and border ``K_inv`` via its Schur complement ``delta``."""
        if len(self) >= self.capacity:
            raise CapacityError(f"dictionary capacity {self.capacity} reached; raise nu")
        m = len(self)
        K_inv = np.empty((m + 1, m + 1))
        K_inv[:m, :m] = self.K_inv + np.outer(a, a) / delta
        K_inv[:m, m] = K_inv[m, :m] = -a / delta
        K_inv[m, m] = 1.0 / delta
        self.K_inv = K_inv
        self._atoms = np.vstack([self._atoms, x[None, :]])
        self._tasks = np.append(self._tasks, task)


def ald_test(dictionary: KernelDictionary, x, task):
    delta, a, _ = dictionary.ald_test(np.asarray(x, dtype=float), task)
    return delta, a


class MtOslssvr:
    """Online sparse LSSVR with the multi-task kernel.

    Parameters
    ----------
    graph : TaskGraph
        Must have symmetric similarities; ``graph.lam`` is the ridge term.
    d : int
        Per-task input dimension.
    nu : float
        ALD threshold; a sample joins the dictionary only if ``delta > nu``
        (the first nonzero sample always does) and ``delta`` clears the
        rounding floor ``ALD_RTOL * k(x, x)``.
    capacity : int
        Hard cap on the number of atoms.
    """

    def __init__(self, graph: TaskGraph, d: int, nu: float = 1e-3, capacity: int = DEFAULT_CAPACITY):
        if not graph.is_symmetric:
            raise InvalidInputError("the multi-task kernel needs symmetric similarities")
        if not graph.lam >= 0:
            raise InvalidInputError("lam must be >= 0")
        self.graph = graph
        self.d = int(d)
        self.T = graph.T
        self.lam = graph.lam
        self.kernel = MtKernel(graph)
        self.dictionary = KernelDictionary(self.kernel, self.d, nu, capacity)
        self.Q = np.empty((0, 0))
        self.theta = np.empty(0)
        self.n = 0
        self.last_kernel_evals = 0
        self._alpha = None

    @property
    def nu(self) -> float:
        return self.dictionary.nu

    @property
    def m(self) -> int:
        return len(self.dictionary)

    @property
    def kernel_evals(self) -> int:
        return self.dictionary.kernel_evals

    @property
    def alpha(self) -> np.ndarray:
        """Dual coefficients over the dictionary atoms."""
        if self._alpha is None:
            self._alpha = self.dictionary.K_inv @ self.theta if self.m else np.empty(0)
        return self._alpha

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
        if self.m == 0:
            return 0.0
        before = self.dictionary.kernel_evals
        k = self.dictionary.kvec(x, task)
        self.dictionary.kernel_evals = before
        return float(k @ self.alpha)

    def update(self, task: int, x, y) -> None:
        self.step(task, x, y)

    def step(self, task: int, x, y) -> float:
        task, x = self._check(task, x)
        y = float(y)
        if not np.isfinite(y):
            raise InvalidInputError("target is not finite")
        dic = self.dictionary
        before = dic.kernel_evals
        delta, a, _ = dic.ald_test(x, task)
        pred = float(a @ self.theta) if self.m else 0.0
        kxx = float(x @ x) * float(self.kernel.A_inv[task, task])
        # an empty dictionary takes the first nonzero sample whatever nu is
        if delta > ALD_RTOL * kxx and (delta > dic.nu or self.m == 0):
            self._grow(x, task, a, delta, y, pred)
        else:
            kernels.active().rls_absorb(self.Q, self.theta, a, y)
        self.last_kernel_evals = dic.kernel_evals - before
        self._alpha = None
        self.n += 1
        return pred

    def _grow(self, x, task, a, delta, y, pred):
        kxx = float(x @ x) * float(self.kernel.A_inv[task, task])
        if not np.isfinite(delta) or delta <= 64 * np.finfo(float).eps * max(kxx, 1e-300):
            raise NumericalBreakdownError(
                f"Schur complement {delta!r} too small to extend the dictionary; raise nu or lam"
            )
        m = self.m
        self.dictionary.admit(x, task, a, delta)
        c = self.lam / delta
        Bu = np.empty(m + 1)
        Bu[:m] = self.Q @ a
        Bu[m] = -1.0
        den = 1.0 + c * (float(a @ Bu[:m]) + 1.0)
        Q = np.zeros((m + 1, m + 1))
        Q[:m, :m] = self.Q
        Q[m, m] = 1.0
        Q -= np.outer(Bu, Bu * (c / den))
        self.Q = 0.5 * (Q + Q.T)
        theta = np.append(self.theta, y)
        theta += Bu * (c * (y - pred) / den)
        self.theta = theta

    def run(self, tasks, X, Y) -> np.ndarray:
        preds = np.empty(len(Y))
        for i, (t, x, y) in enumerate(zip(tasks, X, Y)):
            try:
                preds[i] = self.step(int(t), x, y)
            except NumericalBreakdownError as exc:
                raise NumericalBreakdownError(str(exc), step=i) from None
        return preds

    def export_csv(self, path) -> None:
        """Write the dictionary snapshot: ``task, alpha, x_1..x_d`` per atom."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["task", "alpha"] + [f"x{j + 1}" for j in range(self.d)])
            for t, al, x in zip(self.dictionary.tasks, self.alpha, self.dictionary.atoms):
                writer.writerow([int(t), repr(float(al))] + [repr(float(v)) for v in x])


def oslssvr_step(state: MtOslssvr, x, task: int, y):
    pred = state.step(task, x, y)
    return pred, state


def dual_predict(state: MtOslssvr, x, task: int) -> float:
    return state.predict(task, x)


def lssvr_batch_oracle(K, y, lam: float) -> np.ndarray:
    """``(K + lam I)^{-1} y`` by a dense solve."""
    K = np.atleast_2d(np.asarray(K, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    M = K + lam * np.eye(K.shape[0])
    if np.linalg.cond(M) > 1e14:
        raise SingularMatrixError("K + lam I is singular")
    return np.linalg.solve(M, y)
