"""Sturm-sequence bisection for the top eigenvalues of a symmetric tridiagonal matrix."""

import numpy as np
from numba import njit


@njit(cache=True)
def count_above(d, e2, x, m):
    """Number of eigenvalues of the leading ``m x m`` block that exceed ``x``.

    ``d`` is the diagonal and ``e2`` the squared off-diagonal.
    """
    neg = 0
    q = d[0] - x
    if q == 0.0:
        q = -1e-300
    if q < 0.0:
        neg += 1
    for i in range(1, m):
        q = d[i] - x - e2[i - 1] / q
        if q == 0.0:
            q = -1e-300
        if q < 0.0:
            neg += 1
    return m - neg


@njit(cache=True)
def top_eigenvalues(d, e2, r, m, lo_guess, tol):
    """Largest ``r`` eigenvalues (descending) of the leading ``m x m`` block."""
    out = np.empty(r)
    hi = -1e300
    for i in range(m):
        s = d[i]
        if i > 0:
            s += np.sqrt(e2[i - 1])
        if i < m - 1:
            s += np.sqrt(e2[i])
        if s > hi:
            hi = s
    lo = lo_guess
    step = 1.0
    while count_above(d, e2, lo, m) < r:
        lo -= step
        step *= 2.0
    for j in range(1, r + 1):
        a = lo
        b = hi
        while b - a > tol:
            c = 0.5 * (a + b)
            if count_above(d, e2, c, m) >= j:
                a = c
            else:
                b = c
        out[j - 1] = 0.5 * (a + b)
        hi = out[j - 1] + tol
    return out
