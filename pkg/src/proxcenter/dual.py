"""Smoothed dual function, its gradient, and the smoothing-parameter rules.

For ``c > 0`` the smoothed dual

    f_c(lambda) = -<lambda, rhs> + sum_i min_{x in X_i} [psi_i(x) + <K_i'lambda, x> + c d_i(x)]

(``K_i = [C_i; D_i]``) is concave with gradient ``sum_i K_i x_i(lambda) - rhs``,
which is Lipschitz with constant ``L_c = sum_i ||K_i||^2 / (c sigma_i)``.
``c = 0`` gives the ordinary dual ``f_0``, and the two are sandwiched as
``f_c >= f_0 >= f_c - c sum_i D_i``.
"""

from __future__ import annotations

import math
import weakref
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DimensionError, ProxCenterError
from .problem import Ball, SeparableProblem, Simplex
from .prox import prox_for_set
from .subsolver import SubproblemSolution, solve_agent, solve_ball_batch

POWER_RTOL = 1e-10
POWER_MAXITER = 10_000
POWER_SEED = 20090401


def operator_norm(M, domain="l2", rtol=POWER_RTOL, max_iter=POWER_MAXITER, seed=POWER_SEED) -> float:
    """Induced norm of ``M`` into Euclidean space.

    ``domain="l2"`` gives the largest singular value via power iteration on
    ``M'M``; ``domain="l1"`` (simplex agents) gives the largest Euclidean
    column norm, which is the exact ``1 -> 2`` operator norm.
    """
    M = np.asarray(M, float)
    if M.size == 0:
        return 0.0
    if domain == "l1":
        return float(np.linalg.norm(M, axis=0).max())
    if domain != "l2":
        raise ValueError(f"unknown domain norm {domain!r}")
    G = M.T @ M if M.shape[0] >= M.shape[1] else M @ M.T
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(G.shape[0])
    v /= np.linalg.norm(v)
    rho = 0.0
    for _ in range(max_iter):
        w = G @ v
        rho_new = float(v @ w)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        v = w / nw
        if abs(rho_new - rho) <= rtol * abs(rho_new):
            return math.sqrt(max(float(v @ G @ v), rho_new))
        rho = rho_new
    raise ConvergenceError("power iteration hit the iteration cap", residual=abs(rho_new - rho))


@dataclass(frozen=True)
class ProblemConstants:
    """Per-problem constants independent of ``c``.

    ``op_norm_sq_over_sigma`` is ``sum_i ||K_i||^2 / sigma_i`` and
    ``prox_bound_sum`` is ``sum_i D_i``.
    """

    op_norms: tuple
    op_norm_sq_over_sigma: float
    prox_bound_sum: float
    stacked_norm: float


_constants_cache: "weakref.WeakKeyDictionary[SeparableProblem, ProblemConstants]" = weakref.WeakKeyDictionary()


def problem_constants(p: SeparableProblem) -> ProblemConstants:
    cached = _constants_cache.get(p)
    if cached is not None:
        return cached
    norms, total, bound = [], 0.0, 0.0
    for a in p.agents:
        d = prox_for_set(a.feasible_set)
        domain = "l1" if isinstance(a.feasible_set, Simplex) else "l2"
        nrm = operator_norm(a.coupling, domain)
        norms.append(nrm)
        total += nrm**2 / d.convexity_parameter
        bound += d.upper_bound
    stacked = operator_norm(np.hstack([a.coupling for a in p.agents]))
    out = ProblemConstants(tuple(norms), total, bound, stacked)
    _constants_cache[p] = out
    return out


@dataclass(frozen=True)
class SmoothingConfig:
    c: float
    lipschitz: float
    op_norm_sq_over_sigma: float
    prox_bound_sum: float

    @classmethod
    def for_problem(cls, p: SeparableProblem, c: float) -> "SmoothingConfig":
        if not c > 0:
            raise ValueError(f"smoothness parameter must be positive, got {c}")
        k = problem_constants(p)
        return cls(c, k.op_norm_sq_over_sigma / c, k.op_norm_sq_over_sigma, k.prox_bound_sum)


@dataclass
class DualEvaluation:
    value: float
    gradient: np.ndarray
    primal_points: list
    plain_dual_lower: float
    solutions: list


class _BallGroup:
    """Stacked data for ball agents of one dimension, solved in a single batch."""

    def __init__(self, p, idx):
        ag = [p.agents[i] for i in idx]
        self.idx = idx
        self.g = np.stack([a.objective_linear for a in ag])
        self.K = np.stack([a.coupling for a in ag])
        self.x0 = np.stack([a.feasible_set.center for a in ag])
        self.R = np.array([a.feasible_set.radius for a in ag])
        self.evals = np.stack([a.eigenvalues for a in ag])
        self.V = np.stack([a.eigenvectors for a in ag])
        self.Hx0 = np.stack([a.objective_hessian @ a.feasible_set.center for a in ag])


class _Plan:
    def __init__(self, p):
        by_dim = {}
        self.singles = []
        for i, a in enumerate(p.agents):
            if isinstance(a.feasible_set, Ball):
                by_dim.setdefault(a.dim, []).append(i)
            else:
                self.singles.append(i)
        self.groups = [_BallGroup(p, idx) for idx in by_dim.values()]
        self.rhs = p.rhs


_plan_cache: "weakref.WeakKeyDictionary[SeparableProblem, _Plan]" = weakref.WeakKeyDictionary()


def _plan(p):
    plan = _plan_cache.get(p)
    if plan is None:
        plan = _plan_cache[p] = _Plan(p)
    return plan


def _tag(exc, i):
    if getattr(exc, "agent", None) is None:
        exc.agent = i
        exc.args = (f"agent {i}: {exc.args[0]}",) + exc.args[1:]
    return exc


def evaluate(p: SeparableProblem, lam, c: float) -> DualEvaluation:
    """Solve every agent subproblem at ``lam`` and assemble ``f_c`` and its gradient.

    Ball agents of equal dimension are solved together in one vectorized
    batch.  The reduction order is fixed by the problem, so repeated calls
    are bit-identical.  With ``c = 0`` this is the
    exact ordinary dual ``f_0`` and ``plain_dual_lower`` equals ``value``.
    """
    lam = np.asarray(lam, float)
    if lam.shape != (p.n_mult,):
        raise DimensionError(f"multiplier has length {lam.size}, expected {p.n_mult}")
    if c < 0:
        raise ValueError(f"smoothness parameter must be nonnegative, got {c}")
    plan = _plan(p)
    sols = [None] * p.n_agents
    value = -float(lam @ plan.rhs)
    grad = -plan.rhs
    for grp in plan.groups:
        g_eff = grp.g + lam @ grp.K
        try:
            x, val, mu, it, hard = solve_ball_batch(g_eff, grp.x0, grp.R, c, grp.evals, grp.V, grp.Hx0)
        except ConvergenceError:
            # rerun one by one to find the offending agent
            for j, i in enumerate(grp.idx):
                a = p.agents[i]
                try:
                    solve_agent(a, g_eff[j], c)
                except ProxCenterError as exc:
                    raise _tag(exc, i)
            raise
        grad = grad + (grp.K @ x[:, :, None]).sum(axis=0)[:, 0]
        value += float(val.sum())
        for j, i in enumerate(grp.idx):
            sols[i] = SubproblemSolution(x[j], float(val[j]), float(mu[j]), int(it[j]), bool(hard[j]))
    for i in plan.singles:
        a = p.agents[i]
        try:
            sols[i] = solve_agent(a, a.objective_linear + a.coupling.T @ lam, c)
        except ProxCenterError as exc:
            raise _tag(exc, i)
        grad = grad + a.coupling @ sols[i].minimizer
        value += sols[i].objective_value
    xs = [s.minimizer for s in sols]
    bound = problem_constants(p).prox_bound_sum if c > 0 else 0.0
    return DualEvaluation(value, grad, xs, value - c * bound, sols)


def plain_dual(p: SeparableProblem, lam) -> float:
    """Exact ``f_0(lam)`` from unregularized subproblem solves."""
    return evaluate(p, lam, 0.0).value


def select_c_euclidean(eps, prox_bound_sum, op_norm_sq_over_sigma):
    """Smoothing parameter and iteration bound for an unbounded multiplier set.

    Returns ``(c, k_bound)`` with ``c = eps / sum D_i`` and
    ``k_bound + 1 = ceil(2 sqrt(S sum D_i) / eps)``, ``S = sum ||K_i||^2/sigma_i``.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    if not prox_bound_sum > 0 or not math.isfinite(prox_bound_sum):
        raise ProxCenterError("prox bounds must be finite and positive (degenerate singleton sets?)")
    c = eps / prox_bound_sum
    k_bound = max(0, math.ceil(2.0 * math.sqrt(op_norm_sq_over_sigma * prox_bound_sum) / eps) - 1)
    return c, int(k_bound)


def select_c_ball(k, D_Q, prox_bound_sum, op_norm_sq_over_sigma, sigma_Q=1.0) -> float:
    """Smoothing parameter balancing the two error terms after ``k`` iterations on a ball ``Q``."""
    return 2.0 / (k + 1) * math.sqrt(D_Q / prox_bound_sum * op_norm_sq_over_sigma / sigma_Q)


def ball_gap_bound(k, D_Q, prox_bound_sum, op_norm_sq_over_sigma, sigma_Q=1.0) -> float:
    """Duality-gap guarantee after ``k`` iterations with :func:`select_c_ball`."""
    return 4.0 / (k + 1) * math.sqrt(D_Q * prox_bound_sum * op_norm_sq_over_sigma / sigma_Q)


def ball_iterations_for(eps, D_Q, prox_bound_sum, op_norm_sq_over_sigma, sigma_Q=1.0) -> int:
    """Smallest ``k`` whose :func:`ball_gap_bound` is at most ``eps``."""
    return max(0, math.ceil(4.0 * math.sqrt(D_Q * prox_bound_sum * op_norm_sq_over_sigma / sigma_Q) / eps) - 1)
