"""Exact per-agent minimizers of the prox-regularized Lagrangian.

Each agent solves

    min_{x in X_i}  0.5 x'Hx + g_eff'x + c d_i(x)

where ``g_eff = g_i + C_i' lambda_eq + D_i' lambda_ineq`` folds in the
multipliers.  ``c = 0`` gives the plain Lagrangian minimizer used by the
dual subgradient method.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.special import lambertw

from ._trs import trs_batch
from .errors import ConvergenceError, NotConvexError
from .problem import PSD_TOL, AgentBlock, Ball, Simplex
from .prox import ENTROPY_FLOOR, Entropy, SquaredEuclidean, prox_for_set

SECULAR_MAXITER = 200
SECULAR_RTOL = 1e-10
GENERIC_MAXITER = 100_000


@dataclass
class SubproblemSolution:
    """Minimizer ``x_i(lambda)`` with its objective value.

    ``kkt_multiplier`` is the ball constraint multiplier (zero in the interior
    and for simplex agents).  ``hard_case`` is set when the minimizer is not
    unique (``c = 0`` with a singular Hessian) and the minimum-norm one was
    returned.
    """

    minimizer: np.ndarray
    objective_value: float
    kkt_multiplier: float = 0.0
    iterations: int = 0
    hard_case: bool = False


def _spectral(H, eig):
    if eig is not None:
        return eig
    evals, evecs = np.linalg.eigh(H)
    if evals.size and evals[0] < -PSD_TOL:
        raise NotConvexError(f"Hessian has eigenvalue {evals[0]:.3e}")
    return np.maximum(evals, 0.0), evecs


def solve_ball_quadratic(H, g_eff, x0, R, c, eig=None) -> SubproblemSolution:
    """Minimize ``0.5 x'Hx + g_eff'x + (c/2)||x - x0||^2`` over ``||x - x0|| <= R``.

    Works in the shifted variable ``y = x - x0`` and the eigenbasis of ``H``,
    where ``(H + (c + mu) I) y = -(g_eff + H x0)`` is diagonal.  If the
    ``mu = 0`` solution is inside the ball it is returned; otherwise the
    secular equation ``1/||y(mu)|| = 1/R`` is solved by safeguarded Newton
    iterations started left of the root, bracketed by ``[0, ||g_eff + H x0||/R]``.

    Parameters
    ----------
    H : (m, m) ndarray
        Symmetric positive semidefinite Hessian.
    g_eff : (m,) ndarray
        Linear term.
    x0, R : ndarray, float
        Ball center and radius.
    c : float
        Prox weight, ``c >= 0``.
    eig : tuple, optional
        Cached ``(eigenvalues, eigenvectors)`` of ``H``.

    Returns
    -------
    SubproblemSolution
    """
    if c < 0:
        raise ValueError(f"prox weight must be nonnegative, got {c}")
    H = np.asarray(H, float)
    evals, V = _spectral(H, eig)
    x0 = np.asarray(x0, float)
    x, val, mu, it, hard = solve_ball_batch(
        np.asarray(g_eff, float)[None], x0[None], np.array([float(R)]), c,
        evals[None], V[None], (H @ x0)[None])
    return SubproblemSolution(x[0], float(val[0]), float(mu[0]), int(it[0]), bool(hard[0]))


def solve_ball_batch(g_eff, x0, R, c, evals, V, Hx0):
    """Vectorized :func:`solve_ball_quadratic` over a stack of equal-size agents.

    All arguments carry a leading agent axis: the eigenvectors ``V`` of the
    Hessians are ``(G, m, m)``; ``g_eff``, ``x0``, the eigenvalues
    ``evals`` and ``Hx0 = H @ x0`` are ``(G, m)``; ``R`` is ``(G,)``.  Returns arrays
    ``(x, value, mu, iterations, hard_case)``.
    """
    x, value, mu, iters, hard, failed = trs_batch(
        np.ascontiguousarray(g_eff, float), np.ascontiguousarray(x0, float), np.ascontiguousarray(R, float),
        float(c), np.ascontiguousarray(evals, float), np.ascontiguousarray(V, float),
        np.ascontiguousarray(Hx0, float), SECULAR_RTOL, SECULAR_MAXITER)
    if failed >= 0:
        raise ConvergenceError("secular equation did not converge", residual=float(failed))
    return x, value, mu, iters, hard


def solve_simplex_linear(g_eff, c) -> SubproblemSolution:
    """Minimize ``<g_eff, x> + c (ln m + sum x ln x)`` over the unit simplex.

    The minimizer is the softmax of ``-g_eff / c``.
    """
    if not c > 0:
        raise ValueError(f"entropy smoothing needs c > 0, got {c}")
    g = np.asarray(g_eff, float)
    s = -g / c
    e = np.exp(s - s.max())
    x = e / e.sum()
    m = x.size
    pos = x > 0
    ent = math.log(m) + float(np.sum(x[pos] * np.log(x[pos])))
    return SubproblemSolution(x, float(g @ x) + c * ent)


def _simplex_vertex(H, g):
    # c = 0 with a linear objective: any minimizing vertex; take the first
    j = int(np.argmin(g))
    x = np.zeros(g.size)
    x[j] = 1.0
    return SubproblemSolution(x, float(g[j]), hard_case=bool(np.sum(g == g[j]) > 1))


def _entropy_prox(v, t, c):
    """argmin over the simplex of ``c sum z ln z + ||z - v||^2 / (2t)``."""
    ct = c * t
    # z_j(nu) = ct W(exp((v_j + t nu)/ct - 1)/ct), increasing in nu
    def z_of(nu):
        a = (v + t * nu) / ct - 1.0 - math.log(ct)
        out = np.empty_like(a)
        small = a < 500
        out[small] = lambertw(np.exp(a[small])).real
        big = ~small
        if big.any():
            la = a[big]
            # asymptotic W(e^a) = a - ln a + ln a / a
            wv = la - np.log(la)
            for _ in range(4):
                wv = wv - (wv + np.log(wv) - la) / (1 + 1 / wv)
            out[big] = wv
        return ct * out

    def f(nu):
        return z_of(nu).sum() - 1.0

    lo, hi = -1.0, 1.0
    while f(lo) > 0:
        lo *= 2
    while f(hi) < 0:
        hi *= 2
    nu = brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    z = np.maximum(z_of(nu), ENTROPY_FLOOR)
    return z / z.sum()


def _accelerated_prox_grad(H, g, prox_step, L, mu, x, tol, max_iter=GENERIC_MAXITER):
    """Accelerated proximal gradient with gradient-based restart.

    ``prox_step(v, t)`` handles the prox term plus the set constraint.
    Stops when the gradient-mapping norm ``||x - T(x)|| / t <= tol``.
    """
    t = 1.0 / max(L, mu, 1e-12)
    q = mu * t
    beta = (1 - math.sqrt(q)) / (1 + math.sqrt(q)) if q > 0 else None
    y = x.copy()
    theta = 1.0
    res = math.inf
    for it in range(1, max_iter + 1):
        x_new = prox_step(y - t * (H @ y + g), t)
        res = float(np.linalg.norm(x_new - y)) / t
        if res <= tol:
            return x_new, it, res
        if beta is None:
            theta_new = 0.5 * (1 + math.sqrt(1 + 4 * theta * theta))
            mom = (theta - 1) / theta_new
            theta = theta_new
        else:
            mom = beta
        if np.dot(y - x_new, x_new - x) > 0:
            # restart: momentum points uphill
            y = x_new.copy()
            theta = 1.0
        else:
            y = x_new + mom * (x_new - x)
        x = x_new
    raise ConvergenceError("accelerated projected gradient hit the iteration cap", residual=res)


def solve_generic(H, g_eff, feasible_set, prox, c, tol=1e-10, x_init=None) -> SubproblemSolution:
    """Minimize ``0.5 x'Hx + g_eff'x + c d(x)`` over ``feasible_set`` numerically.

    Fallback for combinations without a closed form, such as a quadratic
    objective on the simplex.  The objective is ``c``-strongly convex, so the
    accelerated scheme converges linearly.
    """
    if not c > 0:
        raise ValueError(f"generic solver needs c > 0, got {c}")
    return _generic(H, g_eff, feasible_set, prox, c, tol, x_init)


def _generic(H, g_eff, feasible_set, prox, c, tol, x_init):
    H = np.asarray(H, float)
    g = np.asarray(g_eff, float)
    L = float(np.linalg.eigvalsh(H)[-1]) if H.size else 0.0
    if isinstance(feasible_set, Ball):
        s = feasible_set
        xc = prox.center

        def prox_step(v, t):
            return s.project((c * xc + v / t) / (c + 1.0 / t))

        mu_sc = c * prox.convexity_parameter
    elif isinstance(feasible_set, Simplex):
        s = feasible_set
        if isinstance(prox, Entropy) and c > 0:
            def prox_step(v, t):
                return _entropy_prox(v, t, c)
        elif isinstance(prox, SquaredEuclidean):
            xc = prox.center

            def prox_step(v, t):
                return s.project((c * xc + v / t) / (c + 1.0 / t))
        else:
            def prox_step(v, t):
                return s.project(v)
        mu_sc = c * prox.convexity_parameter
    else:
        raise TypeError(f"unsupported set {type(feasible_set).__name__}")
    x = feasible_set.center.copy() if x_init is None else feasible_set.project(np.asarray(x_init, float))
    x, iters, _ = _accelerated_prox_grad(H, g, prox_step, L, mu_sc, x, tol)
    value = 0.5 * float(x @ H @ x) + float(g @ x) + (c * prox.value(x) if c > 0 else 0.0)
    return SubproblemSolution(x, value, 0.0, iters)


def solve_agent(agent: AgentBlock, g_eff, c, tol=1e-10) -> SubproblemSolution:
    """Dispatch an agent subproblem to the cheapest exact solver."""
    s = agent.feasible_set
    H = agent.objective_hessian
    if isinstance(s, Ball):
        return solve_ball_quadratic(H, g_eff, s.center, s.radius, c,
                                    eig=(agent.eigenvalues, agent.eigenvectors))
    linear = not np.any(H)
    if c > 0:
        if linear:
            return solve_simplex_linear(g_eff, c)
        return solve_generic(H, g_eff, s, prox_for_set(s), c, tol)
    if linear:
        return _simplex_vertex(H, np.asarray(g_eff, float))
    return _generic(H, g_eff, s, prox_for_set(s), 0.0, tol, None)
