"""Pure numpy implementations of the hot kernels.

Each function mutates its array arguments in place and mirrors the compiled
version in ``_kernels.pyx`` argument for argument.
"""
import numpy as np

from .errors import NumericalBreakdownError


def wrls_step(P, w, x, offset, y, sigma, symmetric):
    """One weighted RLS update on a one-block-sparse regressor.

    The regressor is ``x`` placed at ``offset`` inside a length ``len(w)``
    vector of zeros.  Returns the a-priori prediction.
    """
    d = x.shape[0]
    blk = slice(offset, offset + d)
    g = P[:, blk] @ x
    pred = float(w[blk] @ x)
    den = sigma + float(x @ g[blk])
    if not (den > 0.0) or not np.isfinite(den) or not np.isfinite(pred):
        raise NumericalBreakdownError(f"WRLS denominator {den!r} is not a positive finite number")
    k = g / den
    w += (y - pred) * k
    if symmetric:
        P -= np.outer(k, g)
        P *= 1.0 / sigma
        P += P.T
        P *= 0.5
    else:
        r = x @ P[blk, :]
        P -= np.outer(k, r)
        P *= 1.0 / sigma
    return pred


def wrls_stream(P, w, offsets, X, Y, sigma, symmetric, preds):
    for i in range(Y.shape[0]):
        try:
            preds[i] = wrls_step(P, w, X[i], offsets[i], Y[i], sigma, symmetric)
        except NumericalBreakdownError as exc:
            raise NumericalBreakdownError(str(exc), step=i) from None
    return Y.shape[0]


def rls_absorb(Q, theta, a, y):
    """Sherman-Morrison absorption of ``(a, y)`` into ``(Q, theta)``; symmetric ``Q``."""
    q = Q @ a
    pred = float(a @ theta)
    den = 1.0 + float(a @ q)
    if not (den > 0.0) or not np.isfinite(den):
        raise NumericalBreakdownError(f"dictionary RLS denominator {den!r} is not positive")
    theta += q * ((y - pred) / den)
    Q -= np.outer(q, q / den)
    Q += Q.T
    Q *= 0.5
    return pred


def mogd_step(W, A, task, x, y, lam, eta):
    """Online gradient step on task ``task``; ``W`` is ``(T, d)``, one row per task."""
    pred = float(W[task] @ x)
    grad = -2.0 * (y - pred) * x + 2.0 * lam * (A[task] @ W)
    W[task] -= eta * grad
    return pred


def mogd_stream(W, A, tasks, X, Y, lam, eta0, i0, preds):
    for i in range(Y.shape[0]):
        eta = eta0 / np.sqrt(i0 + i + 1)
        preds[i] = mogd_step(W, A, tasks[i], X[i], Y[i], lam, eta)
        if not np.isfinite(preds[i]):
            raise NumericalBreakdownError("MOGD diverged", step=i)
    return Y.shape[0]
