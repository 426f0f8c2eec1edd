"""Diagnostics for solved states and for the Hessian of the potential.

Everything here measures a property rather than computing roots: leading
principal minors (in log space), ordering of roots, distance to the free
and impenetrable limits, and the comparison between a mirror-symmetric
periodic state and the zero-BC equations.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import equations as eq
from .model import SystemSpec, as_int_tuple, canonicalize, momentum_labels
from .solver import SolverConfig, solve, solve_periodic


class NotPositiveDefinite(ValueError):
    def __init__(self, message, chain: "MinorChain"):
        super().__init__(message)
        self.chain = chain


class RegimeWarning(UserWarning):
    pass


@dataclass(frozen=True)
class MinorChain:
    log_minors: tuple
    all_positive: bool
    strictly_increasing: bool

    @property
    def order(self) -> int:
        return len(self.log_minors)


def _chain(log_minors, complete: bool) -> MinorChain:
    logs = tuple(float(v) for v in log_minors)
    increasing = complete and all(b > a for a, b in zip(logs, logs[1:]))
    return MinorChain(logs, complete, increasing)


def dominant_minors(m) -> MinorChain:
    """Leading principal minors G_1..G_N of a symmetric matrix, as logarithms.

    One right-looking elimination yields pivots d_j = G_j / G_{j-1}, so
    log G_j is a running sum of log pivots and never overflows.
    """
    A = np.array(m, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if not np.allclose(A, A.T, rtol=1e-12, atol=0.0):
        raise ValueError("matrix is not symmetric")
    n = A.shape[0]
    logs = np.empty(n)
    acc = 0.0
    for j in range(n):
        d = A[j, j]
        if not d > 0:
            chain = _chain(logs[:j], complete=False)
            raise NotPositiveDefinite(f"pivot {j + 1} is {d!r} <= 0", chain)
        acc += math.log(d)
        logs[j] = acc
        if j + 1 < n:
            col = A[j + 1:, j]
            A[j + 1:, j + 1:] -= np.outer(col, col) / d
    return _chain(logs, complete=True)


# -- minor-chain scan -------------------------------------------------------------

@dataclass
class MinorScan:
    n_particles: int
    sampler: str
    samples: int
    chain_ok: int
    all_positive: int
    min_log_pivot: float
    records: list = field(default_factory=list)
    elapsed: float = field(default=0.0, compare=False)

    @property
    def chain_ok_fraction(self) -> float:
        return self.chain_ok / self.samples if self.samples else 1.0


def sample_configurations(N: int, samples: int, sampler: str, spec: SystemSpec,
                          step_scale: float = 0.1, seed: int = 0):
    """Yield root configurations for the minor scan.

    ``homogeneous``: k_i = i·Δ with Δ = (π/L)(1 + s·step_scale) for sample s.
    ``perturbed``: a walk starting at k_i = iπ/L where every sample adds
    independent uniform increments in [0, step_scale·π/L] to each k_i.
    """
    base = math.pi / spec.length
    idx = np.arange(1, N + 1, dtype=float)
    if sampler == "homogeneous":
        for s in range(samples):
            yield idx * base * (1.0 + s * step_scale)
    elif sampler == "perturbed":
        rng = np.random.default_rng(seed)
        k = idx * base
        for _ in range(samples):
            yield k.copy()
            k = k + rng.uniform(0.0, step_scale * base, N)
    else:
        raise ValueError(f"unknown sampler {sampler!r}")


def scan_minor_chains(spec: SystemSpec, sampler: str = "perturbed", N: Optional[int] = None,
                      samples: int = 100, step_scale: float = 0.1, seed: int = 0) -> MinorScan:
    N = spec.n_particles if N is None else N
    if N < 1:
        raise ValueError("N must be >= 1")
    t0 = time.perf_counter()
    ok = positive = 0
    min_pivot = math.inf
    records = []
    configs = sample_configurations(N, samples, sampler, spec, step_scale, seed)
    for s, k in enumerate(configs):
        try:
            chain = dominant_minors(eq.hessian_B(k, spec))
        except NotPositiveDefinite as exc:
            chain = exc.chain
        pivots = np.diff((0.0,) + chain.log_minors)
        low = float(pivots.min()) if pivots.size else float("nan")
        records.append({"sample": s, "all_positive": chain.all_positive,
                        "strictly_increasing": chain.strictly_increasing,
                        "log_det": chain.log_minors[-1] if chain.all_positive else float("nan"),
                        "min_log_pivot": low})
        if not chain.all_positive:
            continue
        positive += 1
        ok += chain.strictly_increasing
        min_pivot = min(min_pivot, low)
    return MinorScan(N, sampler, samples, ok, positive, min_pivot, records,
                     elapsed=time.perf_counter() - t0)


# -- ordering -------------------------------------------------------------------------

@dataclass
class OrderingReport:
    roots_strictly_increasing_positive: bool
    n_nondecreasing: bool
    difference_residuals: list
    four_sums_nonpositive: list

    @property
    def ok(self) -> bool:
        return (self.roots_strictly_increasing_positive and self.n_nondecreasing
                and all(self.four_sums_nonpositive))

    def max_difference_residual(self) -> float:
        vals = [abs(v) for v in self.difference_residuals]
        return max(vals) if vals else 0.0


def _four_sums(k, i, c):
    # sums over j < i and j > i+1 of atan(c/(k_{i+1} ∓ k_j)) - atan(c/(k_i ∓ k_j))
    lo = k[:i]
    hi = k[i + 2:]
    kp, km = k[i + 1], k[i]
    return (
        float(np.sum(np.arctan(c / (kp - lo)) - np.arctan(c / (km - lo)))),
        float(np.sum(np.arctan(c / (kp + lo)) - np.arctan(c / (km + lo)))),
        float(np.sum(np.arctan(c / (kp - hi)) - np.arctan(c / (km - hi)))),
        float(np.sum(np.arctan(c / (kp + hi)) - np.arctan(c / (km + hi)))),
    )


def check_ordering(k, n, spec: SystemSpec, pinned: bool = False) -> OrderingReport:
    """Check 0 < k_1 < ... < k_N and the consecutive-difference equations.

    Row i of the difference equation is
    L(k_{i+1}-k_i) - π(n_{i+1}-n_i) - 2 atan(c/(k_{i+1}-k_i)) - (four sums),
    which vanishes at a solution. Never raises: degenerate rows give NaN.
    With ``pinned``, ``k`` and ``n`` are the unknowns of the reduced system
    and the zero root (with n = 0) is put back in front for the row checks.
    """
    k = np.asarray(k, dtype=float)
    n = np.asarray(as_int_tuple(n), dtype=float)
    c, L = spec.coupling, spec.length
    increasing = bool(k.size and np.all(k > 0) and np.all(np.diff(k) > 0))
    nondecreasing = bool(np.all(np.diff(n) >= 0))
    if pinned:
        k = np.concatenate([[0.0], k])
        n = np.concatenate([[0.0], n])
    residuals, signs = [], []
    with np.errstate(divide="ignore", invalid="ignore"):
        for i in range(k.size - 1):
            gap = k[i + 1] - k[i]
            sums = _four_sums(k, i, c)
            if gap == 0 or not all(math.isfinite(s) for s in sums):
                residuals.append(float("nan"))
                signs.append(False)
                continue
            rhs = math.pi * (n[i + 1] - n[i]) + 2.0 * math.atan(c / gap) + sum(sums)
            residuals.append(float(L * gap - rhs))
            signs.append(all(s <= 0 for s in sums))
    return OrderingReport(increasing, nondecreasing, residuals, signs)


# -- limits ----------------------------------------------------------------------------

def limit_reference(spec: SystemSpec, n, regime: str) -> np.ndarray:
    canon = canonicalize(n)
    if canon.zero_reduced:
        raise ValueError("limit checks need nonzero quantum numbers")
    if regime == "free":
        return math.pi * np.asarray(canon.canonical_n, dtype=float) / spec.length
    if regime == "tonks":
        return math.pi * momentum_labels(canon.canonical_n).as_array() / spec.length
    raise ValueError(f"unknown regime {regime!r}")


def in_regime(spec: SystemSpec, n, regime: str) -> bool:
    ref = limit_reference(spec, n, regime)
    if regime == "free":
        # arctan(c/Δk) <= c/Δk must be small for every pair difference and sum
        gaps = np.diff(np.concatenate([[0.0], ref]))
        smallest = float(gaps.min()) if gaps.size else math.inf
        if ref.size == 1:
            return True
        return smallest > 0 and spec.coupling * ref.size <= 1e-3 * smallest
    return spec.coupling >= 1e3 * ref.size * float(ref.max())


def limit_deviation(spec: SystemSpec, n, regime: str,
                    cfg: Optional[SolverConfig] = None) -> float:
    """Max-norm distance between solved roots and π·n/L (free) or π·I/L (tonks)."""
    ref = limit_reference(spec, n, regime)
    if not in_regime(spec, n, regime):
        warnings.warn(f"c = {spec.coupling:g} is outside the {regime} regime",
                      RegimeWarning, stacklevel=2)
    roots = solve(spec, n, cfg).roots
    return float(np.max(np.abs(roots - ref)))


# -- periodic halving ---------------------------------------------------------------------

@dataclass
class HalvingReport:
    full_n: tuple
    full_roots: list
    half_roots: list
    half_residual: float
    mirror_error: float
    zero_bc_residual: float
    obstruction: float
    periodic_raw_residual: Optional[float]

    @property
    def obstruction_ok(self) -> bool:
        return self.zero_bc_residual >= 0.9 * self.obstruction


def periodic_halving_check(spec_half: SystemSpec, n_half: Sequence[int],
                           cfg: Optional[SolverConfig] = None) -> HalvingReport:
    """Solve a mirror-antisymmetric periodic state and test its positive half.

    The full system has 2·N_half particles on a ring of length 2·L_half with
    n = (-n_M, ..., -n_1, n_1, ..., n_M). Its positive roots satisfy the
    zero-BC equations plus an extra atan(c/(2k_i)) per row, which is
    reported as ``obstruction`` (the smallest such term).
    """
    n_half = as_int_tuple(n_half)
    if any(v <= 0 for v in n_half) or len(set(n_half)) != len(n_half):
        raise ValueError(f"n_half must be distinct positive integers: {n_half}")
    n_sorted = tuple(sorted(n_half))
    full_n = tuple(-v for v in reversed(n_sorted)) + n_sorted
    M = len(n_sorted)
    full_spec = SystemSpec(2 * M, 2.0 * spec_half.length, spec_half.coupling)
    rep = solve_periodic(full_spec, full_n, cfg)
    k = rep.signed_roots
    half = k[M:]
    mirror = float(np.max(np.abs(k + k[::-1])))
    half_spec = SystemSpec(M, spec_half.length, spec_half.coupling)
    half_res = float(np.max(np.abs(eq.half_system_residual(half, n_sorted, half_spec))))
    zero_bc = float(np.max(np.abs(eq.residual_raw(half, n_sorted, half_spec))))
    obstruction = float(np.min(np.arctan(spec_half.coupling / (2.0 * half))))
    return HalvingReport(full_n, k.tolist(), half.tolist(), half_res, mirror, zero_bc,
                         obstruction, rep.raw_residual_norm)


def energy(k) -> float:
    """Sum of k_j² (units with ħ²/2m = 1)."""
    k = np.asarray(k, dtype=float)
    return float(np.sum(k * k))
