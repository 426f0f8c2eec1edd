"""Residuals, potential, gradient and Hessian kernels.

Three systems are covered:

* the zero-BC system for N unknowns, in its raw arctan(c/x) form and in the
  smooth arctan(x/c) form driven by the labels I_i;
* the reduced system obtained when one root is pinned at k = 0;
* the periodic system, with the same smooth trick applied to its single
  difference kernel.

The smooth forms are gradients of strictly convex potentials; every
production path uses them. Raw forms are kept only as residual checks.
"""

from __future__ import annotations

import math

import numpy as np

from .model import SystemSpec


class UndefinedAtZero(ValueError):
    pass


class DegenerateConfiguration(ValueError):
    """Raised when a raw residual hits a singular point k_i = ±k_j (or k_i = 0)."""


def arctan_reflect(alpha: float) -> float:
    """arctan(alpha) written as (pi/2)·sgn(alpha) - arctan(1/alpha)."""
    if alpha == 0:
        raise UndefinedAtZero("reflection identity is not defined at alpha = 0")
    return math.copysign(math.pi / 2, alpha) - math.atan(1.0 / alpha)


def antiderivative_F(x, c: float):
    """Antiderivative of arctan(t/c) that vanishes at t = 0.

    F(x) = x·arctan(x/c) - (c/2)·ln(1 + x²/c²). Works on scalars and arrays.
    """
    x = np.asarray(x, dtype=float)
    r = x / c
    out = x * np.arctan(r) - 0.5 * c * np.log1p(r * r)
    return out if out.ndim else float(out)


def _kernel(x, c):
    # d/dx arctan(x/c)
    return c / (c * c + x * x)


def _pair_grids(k):
    k = np.asarray(k, dtype=float)
    diff = k[:, None] - k[None, :]
    summ = k[:, None] + k[None, :]
    return k, diff, summ


def _check_raw(diff, summ, extra=None):
    n = diff.shape[0]
    off = ~np.eye(n, dtype=bool)
    if np.any(diff[off] == 0) or np.any(summ[off] == 0):
        raise DegenerateConfiguration("k_i ± k_j = 0 for some i != j")
    if extra is not None and np.any(extra == 0):
        raise DegenerateConfiguration("k_i = 0 in the reduced raw system")


# -- full zero-BC system -----------------------------------------------------

def residual_raw(k, n, spec: SystemSpec) -> np.ndarray:
    """r_i = L k_i - pi n_i - sum_{j!=i} [atan(c/(k_i-k_j)) + atan(c/(k_i+k_j))]."""
    k, diff, summ = _pair_grids(k)
    _check_raw(diff, summ)
    c = spec.coupling
    off = ~np.eye(len(k), dtype=bool)
    terms = np.where(off, np.arctan(c / np.where(off, diff, 1.0))
                     + np.arctan(c / np.where(off, summ, 1.0)), 0.0)
    return spec.length * k - math.pi * np.asarray(n, dtype=float) - terms.sum(axis=1)


def _pair_arctan_sum(k, c):
    _, diff, summ = _pair_grids(k)
    t = np.arctan(diff / c) + np.arctan(summ / c)
    # diagonal contributes atan(0) + atan(2k_i/c); drop it
    return t.sum(axis=1) - np.arctan(2.0 * k / c)


def residual_transformed(k, I, spec: SystemSpec) -> np.ndarray:
    """Smooth residual, equal to the gradient of :func:`potential_B`."""
    k = np.asarray(k, dtype=float)
    I = np.asarray(I, dtype=float)
    return spec.length * k - math.pi * I + _pair_arctan_sum(k, spec.coupling)


def potential_B(k, I, spec: SystemSpec) -> float:
    k, diff, summ = _pair_grids(k)
    I = np.asarray(I, dtype=float)
    c = spec.coupling
    single = np.sum(0.5 * spec.length * k * k - math.pi * I * k)
    pair = antiderivative_F(diff, c) + antiderivative_F(summ, c)
    # F(0) = 0, so only the F(2k_j) diagonal needs removing
    pair_sum = np.sum(pair) - np.sum(antiderivative_F(2.0 * k, c))
    return float(single + 0.5 * pair_sum)


def hessian_B(k, spec: SystemSpec) -> np.ndarray:
    """Exact Hessian of :func:`potential_B` (independent of the labels).

    Diagonal: L + sum_{l!=i} [f(k_i-k_l) + f(k_i+k_l)];
    off-diagonal: f(k_i+k_j) - f(k_i-k_j), with f(x) = c/(c²+x²).
    """
    k, diff, summ = _pair_grids(k)
    c = spec.coupling
    fd = _kernel(diff, c)
    fs = _kernel(summ, c)
    # zero the self-pair terms before summing; f(0) = 1/c is huge at small c
    np.fill_diagonal(fd, 0.0)
    np.fill_diagonal(fs, 0.0)
    H = fs - fd
    np.fill_diagonal(H, spec.length + fd.sum(axis=1) + fs.sum(axis=1))
    # exact symmetry; the two triangles agree already up to rounding of x*x
    return 0.5 * (H + H.T)


def quadratic_form_parts(k, u, spec: SystemSpec, pinned_term: bool = False):
    """Return (uᵀHu, explicit sum-of-squares form) for the Hessian at ``k``.

    With ``pinned_term`` the reduced-system Hessian is used and the diagonal
    weight becomes L + 2c/(k_j² + c²).
    """
    k = np.asarray(k, dtype=float)
    u = np.asarray(u, dtype=float)
    if k.shape != u.shape:
        from .model import LengthMismatch
        raise LengthMismatch(f"k has length {k.size}, u has length {u.size}")
    c = spec.coupling
    H = hessian_B_reduced(k, spec) if pinned_term else hessian_B(k, spec)
    lhs = float(u @ H @ u)
    weight = spec.length + (2.0 * _kernel(k, c) if pinned_term else 0.0)
    rhs = float(np.sum(weight * u * u))
    iu, ju = np.triu_indices(k.size, 1)
    dk = k[iu] - k[ju]
    sk = k[iu] + k[ju]
    du = u[iu] - u[ju]
    su = u[iu] + u[ju]
    rhs += float(np.sum(c * du * du / (c * c + dk * dk) + c * su * su / (c * c + sk * sk)))
    return lhs, rhs


# -- reduced system (one root pinned at zero) ----------------------------------

def residual_reduced(k, I, spec: SystemSpec) -> np.ndarray:
    """Smooth reduced residual: adds 2·atan(k_i/c) to the full smooth form.

    ``I`` must come from :func:`gaudin.model.reduced_labels`.
    """
    k = np.asarray(k, dtype=float)
    return residual_transformed(k, I, spec) + 2.0 * np.arctan(k / spec.coupling)


def residual_reduced_raw(k, n, spec: SystemSpec) -> np.ndarray:
    """r_i = L k_i - pi n_i - 2 atan(c/k_i) - sum_{j!=i} [...], unknowns only."""
    k = np.asarray(k, dtype=float)
    if np.any(k == 0):
        raise DegenerateConfiguration("k_i = 0 in the reduced raw system")
    return residual_raw(k, n, spec) - 2.0 * np.arctan(spec.coupling / k)


def potential_B_reduced(k, I, spec: SystemSpec) -> float:
    k = np.asarray(k, dtype=float)
    return potential_B(k, I, spec) + 2.0 * float(np.sum(antiderivative_F(k, spec.coupling)))


def hessian_B_reduced(k, spec: SystemSpec) -> np.ndarray:
    k = np.asarray(k, dtype=float)
    H = hessian_B(k, spec)
    H[np.diag_indices_from(H)] += 2.0 * _kernel(k, spec.coupling)
    return H


# -- periodic system -------------------------------------------------------------

def residual_periodic(k, n, spec: SystemSpec) -> np.ndarray:
    """r_i = L k_i - 2 pi n_i - 2 sum_{j!=i} atan(c/(k_i-k_j))."""
    k, diff, _ = _pair_grids(k)
    off = ~np.eye(len(k), dtype=bool)
    if np.any(diff[off] == 0):
        raise DegenerateConfiguration("k_i = k_j for some i != j")
    c = spec.coupling
    terms = np.where(off, np.arctan(c / np.where(off, diff, 1.0)), 0.0)
    return spec.length * k - 2.0 * math.pi * np.asarray(n, dtype=float) - 2.0 * terms.sum(axis=1)


def periodic_labels(sorted_n) -> np.ndarray:
    """Half-integer labels J_i = n_i + i - (N+1)/2 for ascending distinct n."""
    n = np.asarray(sorted_n, dtype=float)
    if np.any(np.diff(n) <= 0):
        raise ValueError("periodic quantum numbers must be strictly increasing")
    N = n.size
    return n + np.arange(1, N + 1) - 0.5 * (N + 1)


def residual_periodic_smooth(k, J, spec: SystemSpec) -> np.ndarray:
    k, diff, _ = _pair_grids(k)
    return (spec.length * k - 2.0 * math.pi * np.asarray(J, dtype=float)
            + 2.0 * np.arctan(diff / spec.coupling).sum(axis=1))


def potential_periodic(k, J, spec: SystemSpec) -> float:
    k, diff, _ = _pair_grids(k)
    J = np.asarray(J, dtype=float)
    single = np.sum(0.5 * spec.length * k * k - 2.0 * math.pi * J * k)
    return float(single + np.sum(antiderivative_F(diff, spec.coupling)))


def hessian_periodic(k, spec: SystemSpec) -> np.ndarray:
    k, diff, _ = _pair_grids(k)
    fd = 2.0 * _kernel(diff, spec.coupling)
    np.fill_diagonal(fd, 0.0)
    H = -fd
    np.fill_diagonal(H, spec.length + fd.sum(axis=1))
    return 0.5 * (H + H.T)


def half_system_residual(k, n, spec: SystemSpec) -> np.ndarray:
    """Positive half of a mirror-antisymmetric periodic state.

    r_i = L k_i - pi n_i - atan(c/(2k_i)) - sum_{j!=i} [atan(c/(k_i-k_j)) + atan(c/(k_i+k_j))],
    with ``spec`` holding the halved particle number and length.
    """
    k = np.asarray(k, dtype=float)
    if np.any(k == 0):
        raise DegenerateConfiguration("k_i = 0 in the half system")
    return residual_raw(k, n, spec) - np.arctan(spec.coupling / (2.0 * k))
