# cython: language_level=3
"""Compiled versions of the hot kernels in ``_fallback``.

Same signatures and in-place semantics; see the fallback module for the
reference behaviour.
"""
from libc.math cimport sqrt, isfinite
from libc.stdlib cimport malloc, free

from omtl.errors import NumericalBreakdownError


cdef int _wrls_step(double[:, ::1] P, double[::1] w, const double[::1] x,
                    Py_ssize_t off, double y, double sigma, bint symmetric,
                    double* g, double* r, double* pred_out) noexcept nogil:
    cdef Py_ssize_t D = w.shape[0]
    cdef Py_ssize_t d = x.shape[0]
    cdef Py_ssize_t i, j
    cdef double acc, pred = 0.0, den, err, inv_sig = 1.0 / sigma, kij, kji, inv_den

    for j in range(d):
        pred += w[off + j] * x[j]
    for i in range(D):
        acc = 0.0
        for j in range(d):
            acc += P[i, off + j] * x[j]
        g[i] = acc
    den = sigma
    for j in range(d):
        den += x[j] * g[off + j]
    pred_out[0] = pred
    if not (den > 0.0) or not isfinite(den) or not isfinite(pred):
        return -1
    inv_den = 1.0 / den
    err = y - pred
    for i in range(D):
        w[i] += err * g[i] * inv_den

    if symmetric:
        for i in range(D):
            for j in range(i, D):
                kij = P[i, j] - g[i] * inv_den * g[j]
                kji = P[j, i] - g[j] * inv_den * g[i]
                acc = 0.5 * (kij + kji) * inv_sig
                P[i, j] = acc
                P[j, i] = acc
    else:
        for j in range(D):
            acc = 0.0
            for i in range(d):
                acc += x[i] * P[off + i, j]
            r[j] = acc
        for i in range(D):
            for j in range(D):
                P[i, j] = (P[i, j] - g[i] * inv_den * r[j]) * inv_sig
    return 0


def wrls_step(double[:, ::1] P, double[::1] w, const double[::1] x,
              Py_ssize_t offset, double y, double sigma, bint symmetric):
    cdef Py_ssize_t D = w.shape[0]
    cdef double pred
    cdef int status
    cdef double* buf = <double*> malloc(2 * D * sizeof(double))
    if buf == NULL:
        raise MemoryError()
    try:
        with nogil:
            status = _wrls_step(P, w, x, offset, y, sigma, symmetric, buf, buf + D, &pred)
    finally:
        free(buf)
    if status != 0:
        raise NumericalBreakdownError("WRLS denominator is not a positive finite number")
    return pred


def wrls_stream(double[:, ::1] P, double[::1] w, const long[::1] offsets,
                const double[:, ::1] X, const double[::1] Y, double sigma,
                bint symmetric, double[::1] preds):
    cdef Py_ssize_t D = w.shape[0]
    cdef Py_ssize_t n = Y.shape[0]
    cdef Py_ssize_t i, failed = -1
    cdef double pred
    cdef double* buf = <double*> malloc(2 * D * sizeof(double))
    if buf == NULL:
        raise MemoryError()
    try:
        with nogil:
            for i in range(n):
                if _wrls_step(P, w, X[i], offsets[i], Y[i], sigma, symmetric,
                              buf, buf + D, &pred) != 0:
                    failed = i
                    break
                preds[i] = pred
    finally:
        free(buf)
    if failed >= 0:
        raise NumericalBreakdownError(
            "WRLS denominator is not a positive finite number", step=failed)
    return n


def rls_absorb(double[:, ::1] Q, double[::1] theta, const double[::1] a, double y):
    cdef Py_ssize_t m = theta.shape[0]
    cdef Py_ssize_t i, j
    cdef double pred = 0.0, den = 1.0, acc, scale, qij, qji
    cdef double* q = <double*> malloc(m * sizeof(double)) if m > 0 else NULL
    if m > 0 and q == NULL:
        raise MemoryError()
    try:
        for i in range(m):
            acc = 0.0
            for j in range(m):
                acc += Q[i, j] * a[j]
            q[i] = acc
            pred += a[i] * theta[i]
        for i in range(m):
            den += a[i] * q[i]
        if not (den > 0.0) or not isfinite(den):
            raise NumericalBreakdownError("dictionary RLS denominator is not positive")
        scale = (y - pred) / den
        for i in range(m):
            theta[i] += q[i] * scale
        for i in range(m):
            for j in range(i, m):
                qij = Q[i, j] - q[i] * (q[j] / den)
                qji = Q[j, i] - q[j] * (q[i] / den)
                acc = 0.5 * (qij + qji)
                Q[i, j] = acc
                Q[j, i] = acc
    finally:
        if q != NULL:
            free(q)
    return pred


cdef double _mogd_step(double[:, ::1] W, const double[:, ::1] A, Py_ssize_t task,
                       const double[::1] x, double y, double lam, double eta,
                       double* grad) noexcept nogil:
    cdef Py_ssize_t T = W.shape[0]
    cdef Py_ssize_t d = W.shape[1]
    cdef Py_ssize_t j, c
    cdef double pred = 0.0, err, acc
    for c in range(d):
        pred += W[task, c] * x[c]
    err = y - pred
    for c in range(d):
        acc = 0.0
        for j in range(T):
            acc += A[task, j] * W[j, c]
        grad[c] = -2.0 * err * x[c] + 2.0 * lam * acc
    for c in range(d):
        W[task, c] -= eta * grad[c]
    return pred


def mogd_step(double[:, ::1] W, const double[:, ::1] A, Py_ssize_t task,
              const double[::1] x, double y, double lam, double eta):
    cdef double pred
    cdef double* grad = <double*> malloc(W.shape[1] * sizeof(double))
    if grad == NULL:
        raise MemoryError()
    try:
        pred = _mogd_step(W, A, task, x, y, lam, eta, grad)
    finally:
        free(grad)
    return pred


def mogd_stream(double[:, ::1] W, const double[:, ::1] A, const long[::1] tasks,
                const double[:, ::1] X, const double[::1] Y, double lam,
                double eta0, Py_ssize_t i0, double[::1] preds):
    cdef Py_ssize_t n = Y.shape[0]
    cdef Py_ssize_t i, failed = -1
    cdef double pred
    cdef double* grad = <double*> malloc(W.shape[1] * sizeof(double))
    if grad == NULL:
        raise MemoryError()
    try:
        with nogil:
            for i in range(n):
                pred = _mogd_step(W, A, tasks[i], X[i], Y[i], lam,
                                  eta0 / sqrt(<double>(i0 + i + 1)), grad)
                preds[i] = pred
                if not isfinite(pred):
                    failed = i
                    break
    finally:
        free(grad)
    if failed >= 0:
        raise NumericalBreakdownError("MOGD diverged", step=failed)
    return n
