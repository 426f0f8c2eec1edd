"""Minimization of the convex potentials and an independent root oracle.

``solve`` runs a damped Newton method on the smooth potential: the Hessian
is positive definite everywhere, so each Newton direction is a descent
direction and Armijo backtracking gives global convergence from any start.
``oracle_solve`` reaches the same roots by a completely different route
(relaxed Gauss-Seidel sweeps plus scalar bisection) and exists only to
cross-check ``solve``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from . import equations as eq
from .model import (
    CanonicalForm,
    InvalidSpec,
    SystemSpec,
    as_int_tuple,
    canonicalize,
    momentum_labels,
    reduced_labels,
    same_physical_solution,
    validate_spec,
)

INIT_MODES = ("tonks_limit", "user_supplied", "random_box")


class NoConvergence(RuntimeError):
    def __init__(self, max_iters: int, grad_norm: float):
        super().__init__(
            f"Newton iteration did not converge in {max_iters} iterations "
            f"(|grad|_inf = {grad_norm:.3e})")
        self.max_iters = max_iters
        self.grad_norm = grad_norm


class OracleStall(RuntimeError):
    pass


class FactorizationError(RuntimeError):
    """Cholesky failed on a Hessian that must be positive definite (a bug)."""


@dataclass(frozen=True)
class SolverConfig:
    grad_tol: float = 1e-12
    max_iters: int = 200
    armijo_c: float = 1e-4
    backtrack: float = 0.5
    init_mode: str = "tonks_limit"
    # only used by init_mode="random_box"
    box: float = 50.0
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.armijo_c < 1:
            raise InvalidSpec(f"armijo_c must lie in (0, 1), got {self.armijo_c}")
        if not 0 < self.backtrack < 1:
            raise InvalidSpec(f"backtrack must lie in (0, 1), got {self.backtrack}")
        if not self.grad_tol > 0:
            raise InvalidSpec(f"grad_tol must be > 0, got {self.grad_tol}")
        if self.max_iters < 1:
            raise InvalidSpec(f"max_iters must be >= 1, got {self.max_iters}")
        if self.init_mode not in INIT_MODES:
            raise InvalidSpec(f"unknown init_mode {self.init_mode!r}")


@dataclass
class SolveReport:
    """Roots of one state together with convergence and sanity evidence.

    ``roots`` are the unknowns of the canonical problem sorted ascending,
    with a pinned zero prepended for the reduced system. ``signed_roots``
    follow the raw input order and signs, so they solve the raw equations
    for the quantum numbers exactly as given.
    """

    roots: np.ndarray
    signed_roots: np.ndarray
    b_value: float
    iterations: int
    final_grad_norm: float
    grad_threshold: float
    raw_residual_norm: Optional[float]
    hessian_pd: bool
    ordering_ok: bool
    equivalence_class_size: int = 1
    system: str = "full"
    canonical: Optional[CanonicalForm] = None
    excluded_by_physics: bool = False
    coincident_magnitudes: bool = False
    minor_chain_ok: Optional[bool] = None
    b_history: list = field(default_factory=list)

    @property
    def unknowns(self) -> np.ndarray:
        return self.roots[1:] if self.system == "reduced" else self.roots


# -- damped Newton --------------------------------------------------------------

def _grad_threshold(x, spec: SystemSpec, cfg: SolverConfig) -> float:
    kmax = float(np.max(np.abs(x))) if x.size else 0.0
    return cfg.grad_tol * spec.length * max(1.0, kmax)


def newton_minimize(fun: Callable, grad: Callable, hess: Callable, x0,
                    spec: SystemSpec, cfg: SolverConfig):
    """Minimize a strictly convex function with Cholesky-Newton and Armijo steps.

    Returns ``(x, iterations, grad_norm, history)``; raises ``NoConvergence``.
    """
    x = np.array(x0, dtype=float)
    eps = np.finfo(float).eps
    history = []
    for it in range(cfg.max_iters + 1):
        g = grad(x)
        gnorm = float(np.max(np.abs(g))) if g.size else 0.0
        f0 = fun(x)
        history.append(f0)
        if gnorm <= _grad_threshold(x, spec, cfg):
            return x, it, gnorm, history
        if it == cfg.max_iters:
            raise NoConvergence(cfg.max_iters, gnorm)
        try:
            factor = cho_factor(hess(x), lower=True)
        except LinAlgError as exc:
            raise FactorizationError(f"Hessian not positive definite at iteration {it}") from exc
        p = -cho_solve(factor, g)
        if not np.all(np.isfinite(p)):
            p = -g / spec.length
        slope = float(g @ p)
        # below this, changes in B are lost to rounding of its own terms
        noise = 1e3 * eps * (abs(f0) + spec.length * float(x @ x) + 1.0)
        t = 1.0
        while True:
            x_new = x + t * p
            f_new = fun(x_new)
            if f_new <= f0 + cfg.armijo_c * t * slope:
                break
            if -t * slope <= noise:
                if np.max(np.abs(grad(x_new))) < gnorm:
                    break
            t *= cfg.backtrack
            if t < 1e-30:
                # no measurable progress possible along p
                raise NoConvergence(it, gnorm)
        x = x_new
    raise NoConvergence(cfg.max_iters, gnorm)  # pragma: no cover


def _initial_point(size: int, tonks, cfg: SolverConfig, initial) -> np.ndarray:
    if initial is not None:
        x0 = np.asarray(initial, dtype=float)
        if x0.shape != (size,):
            raise InvalidSpec(f"initial point must have length {size}, got {x0.shape}")
        return x0.copy()
    if cfg.init_mode == "user_supplied":
        raise InvalidSpec("init_mode='user_supplied' requires an initial point")
    if cfg.init_mode == "random_box":
        rng = np.random.default_rng(cfg.seed)
        return rng.uniform(-cfg.box, cfg.box, size)
    return np.asarray(tonks, dtype=float).copy()


def _strictly_increasing_positive(x) -> bool:
    x = np.asarray(x)
    return bool(np.all(x > 0) and np.all(np.diff(x) > 0))


def _is_pd(H) -> bool:
    try:
        np.linalg.cholesky(H)
    except np.linalg.LinAlgError:
        return False
    return True


def _coincident(x, tol=1e-12) -> bool:
    a = np.sort(np.abs(np.asarray(x)))
    if a.size < 2:
        return False
    return bool(np.any(np.diff(a) <= tol * max(1.0, float(a[-1]))))


def _minor_chain_ok(H) -> bool:
    from .analysis import NotPositiveDefinite, dominant_minors
    try:
        chain = dominant_minors(H)
    except NotPositiveDefinite:
        return False
    return chain.all_positive


# -- zero boundary conditions ---------------------------------------------------------

def _solve_unknowns(spec, I, cfg, initial, pinned: bool):
    I = np.asarray(I, dtype=float)
    if pinned:
        fun = lambda x: eq.potential_B_reduced(x, I, spec)
        grad = lambda x: eq.residual_reduced(x, I, spec)
        hess = lambda x: eq.hessian_B_reduced(x, spec)
    else:
        fun = lambda x: eq.potential_B(x, I, spec)
        grad = lambda x: eq.residual_transformed(x, I, spec)
        hess = lambda x: eq.hessian_B(x, spec)
    x0 = _initial_point(I.size, math.pi * I / spec.length, cfg, initial)
    x, iters, gnorm, history = newton_minimize(fun, grad, hess, x0, spec, cfg)
    H = hess(x)
    return x, iters, gnorm, history, fun(x), H


def _report_zero_bc(spec, n_raw, canon: CanonicalForm, cfg, initial, with_minors):
    pinned = canon.zero_reduced
    if pinned:
        I = reduced_labels(canon.canonical_n).labels
    else:
        I = momentum_labels(canon.canonical_n).labels
    if len(I):
        x, iters, gnorm, history, b, H = _solve_unknowns(spec, I, cfg, initial, pinned)
    else:
        # a single particle with n = 0: nothing left to solve
        x, iters, gnorm, history, b, H = np.zeros(0), 0, 0.0, [0.0], 0.0, np.zeros((0, 0))
    ordering_ok = _strictly_increasing_positive(x)
    unknowns = np.sort(x)
    roots = np.concatenate([[0.0], unknowns]) if pinned else unknowns
    signed = canon.restore(x)
    try:
        raw = float(np.max(np.abs(eq.residual_raw(signed, n_raw, spec))))
    except eq.DegenerateConfiguration:
        raw = None
    return SolveReport(
        roots=roots,
        signed_roots=signed,
        b_value=float(b),
        iterations=iters,
        final_grad_norm=gnorm,
        grad_threshold=_grad_threshold(x, spec, cfg),
        raw_residual_norm=raw,
        hessian_pd=_is_pd(H) if H.size else True,
        ordering_ok=ordering_ok,
        equivalence_class_size=canon.equivalence_class_size,
        system="reduced" if pinned else "full",
        canonical=canon,
        excluded_by_physics=canon.excluded_by_physics,
        coincident_magnitudes=_coincident(roots),
        minor_chain_ok=(_minor_chain_ok(H) if H.size else True) if with_minors else None,
        b_history=history,
    )


def solve(spec: SystemSpec, n: Sequence[int], cfg: Optional[SolverConfig] = None,
          initial=None, with_minors: bool = False) -> SolveReport:
    """Solve the zero-BC equations for quantum numbers ``n`` (any signs/order).

    A zero entry pins one root at the origin and the reduced system is
    solved for the rest. ``initial`` (if given) is a start point for the
    canonical unknowns.
    """
    cfg = cfg or SolverConfig()
    n = as_int_tuple(n)
    validate_spec(spec, n)
    return _report_zero_bc(spec, n, canonicalize(n), cfg, initial, with_minors)


def solve_reduced(spec: SystemSpec, n: Sequence[int], cfg: Optional[SolverConfig] = None,
                  initial=None, with_minors: bool = False) -> SolveReport:
    """Solve the system left after pinning one root at zero.

    ``spec.n_particles`` counts all N particles; ``n`` carries the N-1
    quantum numbers of the remaining unknowns.
    """
    cfg = cfg or SolverConfig()
    n = as_int_tuple(n)
    validate_spec(spec, (0,) + n)
    # pinned slot first, so the canonical form keeps it at input index 0
    return _report_zero_bc(spec, (0,) + n, canonicalize((0,) + n), cfg, initial, with_minors)


# -- periodic boundary conditions -------------------------------------------------

def solve_periodic(spec: SystemSpec, n: Sequence[int], cfg: Optional[SolverConfig] = None,
                   initial=None) -> SolveReport:
    """Minimize the Yang-Yang potential of the periodic system.

    ``n`` must be distinct integers of any sign. ``signed_roots`` follow the
    input order; ``roots`` are sorted ascending.
    """
    cfg = cfg or SolverConfig()
    n = as_int_tuple(n)
    validate_spec(spec, n)
    if len(set(n)) != len(n):
        raise InvalidSpec(f"periodic quantum numbers must be distinct: {n}")
    order = sorted(range(len(n)), key=lambda i: n[i])
    J = eq.periodic_labels([n[i] for i in order])
    fun = lambda x: eq.potential_periodic(x, J, spec)
    grad = lambda x: eq.residual_periodic_smooth(x, J, spec)
    hess = lambda x: eq.hessian_periodic(x, spec)
    x0 = _initial_point(len(n), 2.0 * math.pi * J / spec.length, cfg, initial)
    x, iters, gnorm, history = newton_minimize(fun, grad, hess, x0, spec, cfg)
    signed = np.zeros(len(n))
    signed[order] = x
    try:
        raw = float(np.max(np.abs(eq.residual_periodic(signed, n, spec))))
    except eq.DegenerateConfiguration:
        raw = None
    H = hess(x)
    return SolveReport(
        roots=np.sort(x),
        signed_roots=signed,
        b_value=fun(x),
        iterations=iters,
        final_grad_norm=gnorm,
        grad_threshold=_grad_threshold(x, spec, cfg),
        raw_residual_norm=raw,
        hessian_pd=_is_pd(H),
        ordering_ok=bool(np.all(np.diff(x) > 0)),
        system="periodic",
        b_history=history,
    )


# -- independent oracle --------------------------------------------------------------

ORACLE_MAX_SWEEPS = 10 ** 6
# relaxed sweeps only need to land in the basin; bisection finishes the job
RELAX_TARGET = 1e-6
RELAX_MAX_SWEEPS = 20000


def _coord_residual(x, i, k, I_i, L, c, pinned):
    s = 0.0
    for j, kj in enumerate(k):
        if j != i:
            s += math.atan((x - kj) / c) + math.atan((x + kj) / c)
    if pinned:
        s += 2.0 * math.atan(x / c)
    return L * x - math.pi * I_i + s


def _bisect_coordinate(i, k, I_i, L, c, pinned, width):
    # residual is strictly increasing in k_i (slope >= L), |arctan sums| < width
    lo = (math.pi * I_i - width) / L
    hi = (math.pi * I_i + width) / L
    for _ in range(2000):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if _coord_residual(mid, i, k, I_i, L, c, pinned) > 0:
            hi = mid
        else:
            lo = mid
    rlo = abs(_coord_residual(lo, i, k, I_i, L, c, pinned))
    rhi = abs(_coord_residual(hi, i, k, I_i, L, c, pinned))
    return lo if rlo <= rhi else hi


def oracle_roots(spec: SystemSpec, I, pinned: bool = False, tol: float = 1e-10) -> np.ndarray:
    """Roots of the smooth system for labels ``I`` without any Newton step."""
    L, c = spec.length, spec.coupling
    I = [float(v) for v in I]
    N = len(I)
    if N == 0:
        return np.zeros(0)
    k = [math.pi * v / L for v in I]
    omega = min(1.0, c * L / (4.0 * N))

    def max_residual():
        return max(abs(_coord_residual(k[i], i, k, I[i], L, c, pinned)) for i in range(N))

    sweeps = 0
    while sweeps < RELAX_MAX_SWEEPS and max_residual() > RELAX_TARGET:
        for i in range(N):
            r = _coord_residual(k[i], i, k, I[i], L, c, pinned)
            # fixed-point map k_i <- (pi I_i - sums)/L is k_i - r/L
            k[i] -= omega * r / L
        sweeps += 1
    width = math.pi * (N + 1)
    while max_residual() > tol:
        if sweeps >= ORACLE_MAX_SWEEPS:
            raise OracleStall(f"oracle did not reach {tol:g} in {sweeps} sweeps")
        for i in range(N):
            k[i] = _bisect_coordinate(i, k, I[i], L, c, pinned, width)
        sweeps += 1
    return np.array(k)


def oracle_solve(spec: SystemSpec, n: Sequence[int]) -> np.ndarray:
    """Canonical sorted roots of the zero-BC system via relaxation and bisection."""
    n = as_int_tuple(n)
    validate_spec(spec, n)
    if spec.n_particles > 6:
        raise InvalidSpec("oracle_solve is limited to N <= 6")
    canon = canonicalize(n)
    if canon.zero_reduced:
        k = oracle_roots(spec, reduced_labels(canon.canonical_n).labels, pinned=True)
        return np.concatenate([[0.0], np.sort(k)])
    return np.sort(oracle_roots(spec, momentum_labels(canon.canonical_n).labels))


# -- uniqueness probe ------------------------------------------------------------------

@dataclass
class MultistartReport:
    clusters: list
    n_converged: int
    failures: list
    starts: int
    equivalence_class_size: int = 1
    # every converged report, in start order
    solutions: list = field(default_factory=list)

    @property
    def n_clusters(self) -> int:
        return len(self.clusters)


def multistart_probe(spec: SystemSpec, n: Sequence[int], starts: int = 20, box: float = 50.0,
                     seed: int = 0, cfg: Optional[SolverConfig] = None,
                     tol: float = 1e-8) -> MultistartReport:
    """Solve from ``starts`` uniform random points and count distinct solutions."""
    if starts < 2:
        raise InvalidSpec(f"starts must be >= 2, got {starts}")
    cfg = cfg or SolverConfig()
    n = as_int_tuple(n)
    validate_spec(spec, n)
    canon = canonicalize(n)
    rng = np.random.default_rng(seed)
    points = rng.uniform(-box, box, size=(starts, canon.n_unknowns))
    reps: list[np.ndarray] = []
    failures = []
    solutions = []
    for idx, x0 in enumerate(points):
        try:
            rep = solve(spec, n, cfg, initial=x0)
        except (NoConvergence, FactorizationError) as exc:
            failures.append((idx, str(exc)))
            continue
        solutions.append(rep)
        if not any(same_physical_solution(r, rep.roots, tol) for r in reps):
            reps.append(rep.roots)
    reps.sort(key=lambda r: tuple(r))
    return MultistartReport(
        clusters=reps,
        n_converged=len(solutions),
        failures=failures,
        starts=starts,
        equivalence_class_size=canon.equivalence_class_size,
        solutions=solutions,
    )
