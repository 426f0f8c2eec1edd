"""Independent numerical oracles used by the tests.

None of these call the package's Newton solver.
"""

import math

import numpy as np


def central_gradient(fun, x, rel_step=1e-5):
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for i in range(x.size):
        h = rel_step * max(1.0, abs(x[i]))
        xp, xm = x.copy(), x.copy()
        xp[i] += h
        xm[i] -= h
        g[i] = (fun(xp) - fun(xm)) / (2 * h)
    return g


def central_jacobian(vec_fun, x, rel_step=1e-5):
    x = np.asarray(x, dtype=float)
    cols = []
    for i in range(x.size):
        h = rel_step * max(1.0, abs(x[i]))
        xp, xm = x.copy(), x.copy()
        xp[i] += h
        xm[i] -= h
        cols.append((np.asarray(vec_fun(xp)) - np.asarray(vec_fun(xm))) / (2 * h))
    return np.column_stack(cols)


def rel_close(a, b, rtol):
    """Max-norm error relative to max(1, |b|_inf)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    scale = max(1.0, float(np.max(np.abs(b)))) if b.size else 1.0
    return float(np.max(np.abs(a - b))) <= rtol * scale


def bisect(f, lo, hi, iters=200):
    flo = f(lo)
    assert flo * f(hi) < 0, "bracket does not straddle a root"
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        fm = f(mid)
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)
