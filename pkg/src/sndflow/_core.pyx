# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot kernels: pairwise flow brackets and batched sorted 1D sums.

Mirrors the formulas of the numpy fallback in _backend.py; the Python layer
selects between the two at import time.  Ratio kind codes:

    0  negative distance           -1/(2 s), 0 at coincidence
    1  smoothed distance, m=2      cubic/rational branches at d_slice=3
    2  smoothed distance, m=4      quintic/rational branches at d_slice=3
    3  gaussian                    -exp(-s^2/(2 sigma^2)) / sigma^2

All kinds return the signed kernel ratio F'(s)/s (nonpositive), so the
particle update is x -= tau * bracket.
"""

import numpy as np

cimport cython
from cython.parallel cimport prange
from libc.math cimport exp, fabs, sqrt

ctypedef fused floating:
    float
    double


cdef inline floating _ratio(int kind, floating s, floating p1) noexcept nogil:
    cdef floating u, u2
    if kind == 0:
        if s > 0:
            return -0.5 / s
        return 0.0
    if kind == 1:
        u = s / p1
        if u <= 1.0:
            return -(8.0 - 3.0 * u) / (12.0 * p1)
        return -(6.0 - 1.0 / (u * u)) / (12.0 * p1 * u)
    if kind == 2:
        u = s / p1
        if u <= 1.0:
            return -(15.0 * u * u * u - 48.0 * u * u + 160.0) / (360.0 * p1)
        if u <= 2.0:
            u2 = u * u
            return -(-5.0 * u2 * u2 + 48.0 * u2 * u - 180.0 * u2
                     + 320.0 * u - 60.0 + 4.0 / u2) / (360.0 * p1 * u)
        return -(180.0 - 60.0 / (u * u)) / (360.0 * p1 * u)
    # gaussian
    u = s / p1
    return -exp(-0.5 * u * u) / (p1 * p1)


def pairwise_bracket(floating[:, ::1] state, floating[:, ::1] target,
                     floating[:, ::1] out, int kind, floating p1,
                     int num_threads):
    """Flow bracket for every state particle.

    out[i] = (1/N) sum_n r(||x_i-x_n||) (x_i-x_n)
           - (1/M) sum_m r(||x_i-y_m||) (x_i-y_m)

    Each output row is accumulated sequentially by one worker, so results
    are bitwise reproducible for any thread count.
    """
    cdef Py_ssize_t n = state.shape[0]
    cdef Py_ssize_t m = target.shape[0]
    cdef Py_ssize_t d = state.shape[1]
    cdef Py_ssize_t i, j, k
    cdef floating s, r, diff
    cdef floating inv_n = 1.0 / n
    cdef floating inv_m = 1.0 / m

    for i in prange(n, nogil=True, schedule='static', num_threads=num_threads):
        for k in range(d):
            out[i, k] = 0.0
        for j in range(n):
            s = 0.0
            for k in range(d):
                diff = state[i, k] - state[j, k]
                s = s + diff * diff
            s = sqrt(s)
            r = _ratio(kind, s, p1) * inv_n
            for k in range(d):
                out[i, k] = out[i, k] + r * (state[i, k] - state[j, k])
        for j in range(m):
            s = 0.0
            for k in range(d):
                diff = state[i, k] - target[j, k]
                s = s + diff * diff
            s = sqrt(s)
            r = _ratio(kind, s, p1) * inv_m
            for k in range(d):
                out[i, k] = out[i, k] - r * (state[i, k] - target[j, k])


cdef inline double _sliced_deriv(int kind, double t, double eps,
                                 double tail) noexcept nogil:
    # signed sliced 1D derivative inside the window; outside it equals
    # tail * sign(t) (handled by the prefix-sum path)
    cdef double u = fabs(t) / eps if eps > 0 else 0.0
    cdef double sgn = 1.0 if t > 0 else (-1.0 if t < 0 else 0.0)
    cdef double v
    if kind == 0:
        return tail * sgn
    if kind == 1:
        if u >= 1.0:
            return tail * sgn
        return -sgn * (2.0 * u - u * u)
    # kind == 2
    if u >= 2.0:
        return tail * sgn
    if u >= 1.0:
        v = 2.0 - u
        return -sgn * (1.0 - v * v * v * v / 12.0)
    return -sgn * (0.25 * u * u * u * u - (2.0 / 3.0) * u * u * u
                   + (4.0 / 3.0) * u)


def sorted_onedsum_batch(double[:, ::1] xs, double[:, ::1] ws,
                         double[:, ::1] ys, double[:, ::1] out,
                         double window, double tail, int kind, double eps,
                         int num_threads):
    """Per-direction 1D sums sum_n w_n f'(y_m - x_n), xs sorted per row.

    The sign-like tails reduce to prefix sums; only window terms are
    evaluated directly.
    """
    cdef Py_ssize_t P = xs.shape[0]
    cdef Py_ssize_t n = xs.shape[1]
    cdef Py_ssize_t m = ys.shape[1]
    cdef Py_ssize_t p, j, lo, hi, mid, t
    cdef double y, acc, left, right, total
    cdef double[:, ::1] prefix = np.empty((P, n + 1))

    for p in prange(P, nogil=True, schedule='static', num_threads=num_threads):
        prefix[p, 0] = 0.0
        for j in range(n):
            prefix[p, j + 1] = prefix[p, j] + ws[p, j]
        total = prefix[p, n]
        for j in range(m):
            y = ys[p, j]
            # first index with xs >= y - window
            lo = 0
            hi = n
            while lo < hi:
                mid = (lo + hi) >> 1
                if xs[p, mid] < y - window:
                    lo = mid + 1
                else:
                    hi = mid
            left = prefix[p, lo]
            # first index with xs > y + window
            hi = n
            mid = lo
            while mid < hi:
                t = (mid + hi) >> 1
                if xs[p, t] <= y + window:
                    mid = t + 1
                else:
                    hi = t
            right = total - prefix[p, mid]
            acc = tail * (left - right)
            for t in range(lo, mid):
                acc = acc + ws[p, t] * _sliced_deriv(kind, y - xs[p, t], eps, tail)
            out[p, j] = acc
