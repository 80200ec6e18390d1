"""Prox-functions for agent sets and the multiplier set.

A prox-function ``d`` of a set is continuous and strongly convex on it, with
convexity parameter ``sigma``, and vanishes at its minimizer (the prox
center).  ``upper_bound`` is a constant ``D >= max d`` over the set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InfeasiblePointError
from .problem import BALL_TOL, SIMPLEX_NEG_TOL, SIMPLEX_SUM_TOL, Ball, Simplex

ENTROPY_FLOOR = 1e-300


@dataclass(frozen=True)
class SquaredEuclidean:
    """``d(x) = 0.5 ||x - center||^2``; with a radius, restricted to that ball."""

    center: np.ndarray
    radius: float | None = None
    convexity_parameter: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "center", np.array(self.center, float).ravel())

    @property
    def upper_bound(self) -> float:
        return math.inf if self.radius is None else 0.5 * self.radius**2

    def norm(self, x) -> float:
        return float(np.linalg.norm(x))

    def _check(self, x):
        x = np.asarray(x, float)
        if self.radius is not None and np.linalg.norm(x - self.center) > self.radius + BALL_TOL:
            raise InfeasiblePointError("point lies outside the prox ball")
        return x

    def value(self, x) -> float:
        x = self._check(x)
        return 0.5 * float(np.sum((x - self.center) ** 2))

    def gradient(self, x):
        return np.asarray(x, float) - self.center


@dataclass(frozen=True)
class Entropy:
    """``d(x) = ln m + sum x_j ln x_j`` on the unit simplex.

    Strongly convex with parameter 1 with respect to the 1-norm, minimized
    by the uniform vector, and bounded by ``ln m`` on the simplex.
    """

    dim: int
    convexity_parameter: float = 1.0

    @property
    def center(self):
        return np.full(self.dim, 1.0 / self.dim)

    @property
    def upper_bound(self) -> float:
        return math.log(self.dim)

    def norm(self, x) -> float:
        return float(np.sum(np.abs(x)))

    def value(self, x) -> float:
        x = np.asarray(x, float)
        if x.size != self.dim or np.any(x < -SIMPLEX_NEG_TOL) or abs(x.sum() - 1) > SIMPLEX_SUM_TOL:
            raise InfeasiblePointError("point lies outside the simplex")
        xp = np.clip(x, 0.0, None)
        pos = xp > 0
        return math.log(self.dim) + float(np.sum(xp[pos] * np.log(xp[pos])))

    def gradient(self, x):
        return 1.0 + np.log(np.maximum(np.asarray(x, float), ENTROPY_FLOOR))


ProxFunction = SquaredEuclidean | Entropy


def prox_for_set(s) -> ProxFunction:
    """The natural prox-function of an agent set."""
    if isinstance(s, Ball):
        return SquaredEuclidean(s.center, s.radius)
    if isinstance(s, Simplex):
        return Entropy(s.dim)
    raise TypeError(f"no prox-function for {type(s).__name__}")


def prox_value(d: ProxFunction, x) -> float:
    return d.value(x)


@dataclass(frozen=True)
class MultiplierSpace:
    """Product set ``Q`` for the multipliers ``(lambda_eq, lambda_ineq)``.

    Equality multipliers are free (``eq_radius=None``) or confined to the
    ball ``||lambda_eq|| <= eq_radius``; inequality multipliers live in the
    nonnegative orthant.  The prox-function is always ``0.5 ||lambda||^2``
    centered at the origin, so ``sigma_Q = 1``.
    """

    n_eq: int
    n_ineq: int = 0
    eq_radius: float | None = None

    sigma = 1.0

    def __post_init__(self):
        if self.eq_radius is not None and not self.eq_radius > 0:
            raise ValueError("multiplier ball radius must be positive")

    @classmethod
    def for_problem(cls, p, eq_radius=None):
        return cls(p.n_eq, p.n_ineq, eq_radius)

    @property
    def dim(self) -> int:
        return self.n_eq + self.n_ineq

    @property
    def compact(self) -> bool:
        return self.eq_radius is not None and self.n_ineq == 0

    @property
    def upper_bound(self) -> float:
        """``D_Q``; finite only for a ball with no inequality block."""
        return 0.5 * self.eq_radius**2 if self.compact else math.inf

    def with_radius(self, radius):
        return MultiplierSpace(self.n_eq, self.n_ineq, radius)

    def prox(self, lam) -> float:
        return 0.5 * float(np.dot(lam, lam))

    def project(self, lam):
        lam = np.array(lam, dtype=float)
        eq = lam[: self.n_eq]
        if self.eq_radius is not None:
            r = np.linalg.norm(eq)
            if r > self.eq_radius:
                lam[: self.n_eq] = eq * (self.eq_radius / r)
        np.maximum(lam[self.n_eq:], 0.0, out=lam[self.n_eq:])
        return lam

    def contains(self, lam, tol=1e-12) -> bool:
        lam = np.asarray(lam, float)
        ok = bool(np.all(lam[self.n_eq:] >= -tol))
        if self.eq_radius is not None:
            ok = ok and np.linalg.norm(lam[: self.n_eq]) <= self.eq_radius * (1 + tol)
        return ok


def project_multiplier(q: MultiplierSpace, lam):
    return q.project(lam)
