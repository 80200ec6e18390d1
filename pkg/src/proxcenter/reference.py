"""Independent high-accuracy solver for small coupled programs.

Used as a test oracle only.  It never decomposes: the coupled problem is
solved jointly by accelerated projected gradient on the product of the
agent sets, with the coupling handled by an augmented Lagrangian whose
penalty grows tenfold per stage.  The multiplier updates make each stage
exact at a finite penalty, so the continuation mainly buys robustness.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ConvergenceError, ProxCenterError
from .problem import SeparableProblem, coupling_residual, total_objective

MAX_TOTAL_DIM = 20
STAGES = 8
PENALTY_GROWTH = 10.0
INNER_TOL = 1e-12
INNER_MAXITER = 200_000
FEAS_TOL = 1e-11


def _stack(p):
    H = np.zeros((sum(p.dims),) * 2)
    K = np.hstack([a.coupling for a in p.agents])
    g = np.concatenate([a.objective_linear for a in p.agents])
    off = np.cumsum([0] + p.dims)
    for i, a in enumerate(p.agents):
        H[off[i]:off[i + 1], off[i]:off[i + 1]] = a.objective_hessian
    return H, g, K, off


def reference_solve(p: SeparableProblem, x_init=None):
    """Return ``(f_ref, x_ref)`` for a program with at most 20 variables in total.

    Raises
    ------
    ProxCenterError
        If the program is too large.
    ConvergenceError
        If the final iterate is not feasible to ``1e-11``.
    """
    n = sum(p.dims)
    if n > MAX_TOTAL_DIM:
        raise ProxCenterError(f"reference solver handles at most {MAX_TOTAL_DIM} variables, got {n}")
    H, g, K, off = _stack(p)
    n1 = p.n_eq
    rhs = p.rhs
    sets = [a.feasible_set for a in p.agents]

    def project(x):
        return np.concatenate([s.project(x[off[i]:off[i + 1]]) for i, s in enumerate(sets)])

    # shifted multiplier of the augmented Lagrangian: eq part free, ineq part clipped
    def shifted(x, lam, rho):
        s = lam + rho * (K @ x - rhs)
        s[n1:] = np.maximum(s[n1:], 0.0)
        return s

    x = project(np.zeros(n) if x_init is None else np.concatenate(x_init))
    lam = np.zeros(rhs.size)
    h_norm = float(np.linalg.eigvalsh(H)[-1]) if n else 0.0
    k_norm = float(np.linalg.norm(K, 2)) ** 2
    rho = 1.0 / max(k_norm, 1e-12)
    res = math.inf
    for _stage in range(STAGES):
        L = h_norm + rho * k_norm
        for _ in range(50):
            def grad(z):
                return H @ z + g + K.T @ shifted(z, lam, rho)
            x = _apg(grad, project, L, x)
            lam_new = shifted(x, lam, rho)
            eq, ineq = coupling_residual(p, np.split(x, off[1:-1]))
            res = math.hypot(float(np.linalg.norm(eq)), float(np.linalg.norm(np.maximum(ineq, 0.0))))
            # complementarity: positive multipliers need active rows
            comp = float(np.max(np.abs(np.minimum(lam_new[n1:], -ineq)), initial=0.0))
            step = float(np.linalg.norm(lam_new - lam))
            lam = lam_new
            if res <= FEAS_TOL and comp <= FEAS_TOL and step <= 1e-9 * max(1.0, float(np.linalg.norm(lam))):
                break
        if res <= FEAS_TOL:
            break
        rho *= PENALTY_GROWTH
    if res > 1e3 * FEAS_TOL:
        raise ConvergenceError("reference solve did not reach a feasible point", residual=res)
    xs = np.split(x, off[1:-1])
    return total_objective(p, xs), xs


def _apg(grad, project, L, x):
    """FISTA with gradient restart on a smooth convex function over a product set."""
    t = 1.0 / L
    y = x.copy()
    theta = 1.0
    for _ in range(INNER_MAXITER):
        x_new = project(y - t * grad(y))
        if np.linalg.norm(x_new - y) <= INNER_TOL * max(1.0, float(np.linalg.norm(x_new))):
            return x_new
        theta_new = 0.5 * (1 + math.sqrt(1 + 4 * theta * theta))
        if np.dot(y - x_new, x_new - x) > 0:
            y, theta = x_new.copy(), 1.0
        else:
            y = x_new + (theta - 1) / theta_new * (x_new - x)
            theta = theta_new
        x = x_new
    raise ConvergenceError("reference inner solve hit the iteration cap",
                           residual=float(np.linalg.norm(x_new - y)))
