"""Domain types and quantum-number normalization for the zero-BC boson gas.

A state of N point bosons on a segment of length L with contact repulsion c
is labelled by N integers n_i. Negative labels are mirror images of positive
ones (the corresponding root changes sign) and a zero label pins one root at
k = 0, leaving an (N-1)-unknown reduced problem. ``canonicalize`` makes both
reductions explicit so that results can be mapped back to the raw input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


class InvalidSpec(ValueError):
    """Raised when physical parameters or quantum numbers are out of range."""


class NotCanonical(ValueError):
    """Raised when a labelling routine receives non-canonical quantum numbers."""


class LengthMismatch(ValueError):
    pass


@dataclass(frozen=True)
class SystemSpec:
    n_particles: int
    length: float
    coupling: float

    @property
    def N(self) -> int:
        return self.n_particles

    @property
    def L(self) -> float:
        return self.length

    @property
    def c(self) -> float:
        return self.coupling


@dataclass(frozen=True)
class CanonicalForm:
    """Normalized quantum numbers plus the bookkeeping needed to undo it.

    ``canonical_n`` holds the unknowns' quantum numbers in nondecreasing
    order. ``permutation[m]`` is the input index that landed at sorted
    position ``m`` (for the reduced problem, positions refer to the unknowns
    only). ``pinned_index`` is the input index whose root is fixed at zero.
    """

    canonical_n: tuple[int, ...]
    sign_map: tuple[int, ...]
    zero_reduced: bool
    permutation: tuple[int, ...]
    pinned_index: int | None = None
    zero_count: int = 0

    @property
    def excluded_by_physics(self) -> bool:
        # any vanishing root is not an admissible state of the wave function
        return self.zero_reduced

    @property
    def n_unknowns(self) -> int:
        return len(self.canonical_n)

    @property
    def equivalence_class_size(self) -> int:
        """Number of physically equivalent permuted solutions (product of p!)."""
        size = 1
        values, counts = np.unique(np.asarray(self.canonical_n, dtype=np.int64), return_counts=True)
        for cnt in counts:
            size *= math.factorial(int(cnt))
        return size

    def restore(self, sorted_roots: Sequence[float]) -> np.ndarray:
        """Map roots of the canonical problem back to the raw input ordering/signs."""
        sorted_roots = np.asarray(sorted_roots, dtype=float)
        if len(sorted_roots) != self.n_unknowns:
            raise LengthMismatch(
                f"expected {self.n_unknowns} roots, got {len(sorted_roots)}")
        total = len(self.sign_map)
        out = np.zeros(total)
        for pos, idx in enumerate(self.permutation):
            out[idx] = self.sign_map[idx] * sorted_roots[pos]
        # the pinned entry stays exactly 0.0
        return out


@dataclass(frozen=True)
class MomentumLabels:
    labels: tuple[int, ...]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.labels, dtype=float)


@dataclass(frozen=True)
class RootSet:
    k: tuple[float, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if not all(math.isfinite(x) for x in self.k):
            raise ValueError("roots must be finite")

    def as_array(self) -> np.ndarray:
        return np.asarray(self.k, dtype=float)


def as_int_tuple(n) -> tuple[int, ...]:
    out = []
    for v in n:
        iv = int(v)
        if iv != v:
            raise InvalidSpec(f"quantum number {v!r} is not an integer")
        out.append(iv)
    return tuple(out)


def validate_spec(spec: SystemSpec, n: Sequence[int]) -> None:
    """Check bounds on (N, L, c) and the length of ``n``.

    All violations are collected into a single :class:`InvalidSpec` message.
    """
    problems = []
    if not isinstance(spec.n_particles, (int, np.integer)) or spec.n_particles < 1:
        problems.append(f"n_particles must be an integer >= 1 (got {spec.n_particles!r})")
    if not (math.isfinite(spec.length) and spec.length > 0):
        problems.append(f"length must be > 0 (got {spec.length!r})")
    if not (math.isfinite(spec.coupling) and spec.coupling > 0):
        problems.append(f"coupling must be > 0 (got {spec.coupling!r})")
    if len(n) != spec.n_particles:
        problems.append(
            f"n has length {len(n)} but n_particles is {spec.n_particles}")
    if problems:
        raise InvalidSpec("; ".join(problems))


def canonicalize(n: Sequence[int]) -> CanonicalForm:
    n = as_int_tuple(n)
    sign_map = tuple(-1 if v < 0 else 1 for v in n)
    zero_idx = [i for i, v in enumerate(n) if v == 0]
    pinned = zero_idx[0] if zero_idx else None
    # only one root can sit at the origin; further zero labels stay as unknowns
    free = [i for i in range(len(n)) if i != pinned]
    # stable sort keeps the permutation deterministic for repeated labels
    order = sorted(free, key=lambda i: (abs(n[i]), i))
    return CanonicalForm(
        canonical_n=tuple(abs(n[i]) for i in order),
        sign_map=sign_map,
        zero_reduced=pinned is not None,
        permutation=tuple(order),
        pinned_index=pinned,
        zero_count=len(zero_idx),
    )


def momentum_labels(canonical_n: Sequence[int], offset: int = 0) -> MomentumLabels:
    """Return I_i = n_i + i - 1 (1-based i) for sorted canonical labels.

    ``offset`` shifts the position index; the reduced problem uses
    ``offset=1`` because its unknowns start at the second slot.
    """
    n = as_int_tuple(canonical_n)
    lowest = 0 if offset > 0 else 1
    if any(v < lowest for v in n):
        raise NotCanonical(f"quantum numbers must be >= {lowest}: {n}")
    if any(b < a for a, b in zip(n, n[1:])):
        raise NotCanonical(f"quantum numbers must be nondecreasing: {n}")
    return MomentumLabels(tuple(v + i + offset for i, v in enumerate(n)))


def reduced_labels(canonical_n: Sequence[int]) -> MomentumLabels:
    """Labels for the zero-pinned system: unknowns occupy slots 2..N."""
    return momentum_labels(canonical_n, offset=1)


def same_physical_solution(a: Sequence[float], b: Sequence[float], tol: float) -> bool:
    """True when ``a`` and ``b`` agree up to permutation and per-root sign flips."""
    if len(a) != len(b):
        raise LengthMismatch(f"root sets differ in length: {len(a)} vs {len(b)}")
    aa = np.sort(np.abs(np.asarray(a, dtype=float)))
    bb = np.sort(np.abs(np.asarray(b, dtype=float)))
    return bool(np.all(np.abs(aa - bb) <= tol))
