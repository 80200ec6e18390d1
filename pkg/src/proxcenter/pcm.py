"""Proximal center decomposition.

Nesterov's accelerated scheme applied to the smoothed dual ``f_c`` over the
multiplier set ``Q``.  Each iteration solves the agent subproblems at the
query point ``u^k`` (in parallel in a distributed setting), takes a
projected gradient step, forms a dual-averaging point ``v^k`` from the
weighted gradient history, and mixes the two into ``u^{k+1}``.  The primal
estimate is the weighted average of the subproblem solutions with weights
``2(l+1)/((k+1)(k+2))``.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .dual import (
    SmoothingConfig,
    evaluate,
    plain_dual,
    problem_constants,
    select_c_ball,
    select_c_euclidean,
    ball_iterations_for,
)
from .errors import ProxCenterError
from .problem import SeparableProblem, membership, total_objective, violation
from .prox import MultiplierSpace
from .runs import Certificate, SolverRun

ADAPT_FRACTION = 0.9
ADAPT_FACTOR = 2.0


def gradient_step(u, grad, L, q: MultiplierSpace):
    """Maximizer over ``Q`` of the quadratic model ``<grad, lam - u> - (L/2)||lam - u||^2``."""
    if not L > 0:
        raise ValueError("Lipschitz constant must be positive")
    return q.project(np.asarray(u, float) + np.asarray(grad, float) / L)


def dual_averaging_step(grad_history_sum, L, q: MultiplierSpace):
    """Maximizer over ``Q`` of ``-(L/sigma_Q) d_Q(lam) + <sum of weighted gradients, lam>``.

    Constant terms of the linearizations drop out, leaving a projection of
    ``grad_history_sum / L`` since ``d_Q = 0.5||lam||^2`` and ``sigma_Q = 1``.
    """
    return q.project(np.asarray(grad_history_sum, float) / L)


@dataclass
class PcmState:
    u: np.ndarray
    lambda_best: np.ndarray | None = None
    v: np.ndarray | None = None
    grad_history_sum: np.ndarray = None
    # running sum of weighted linearization constants f_c(u^l) - <grad_l, u^l>
    linearization_const: float = 0.0
    primal_average: list = None
    best_fc: float = -math.inf
    k: int = 0
    weight_sum: float = 0.0
    history: list = field(default_factory=list)

    def estimate_sequence_rhs(self, L, q: MultiplierSpace) -> float:
        """``max_Q {-(L/sigma_Q) d_Q + sum_l (l+1)/2 [f_c(u^l) + <grad_l, lam - u^l>]}`` in closed form."""
        v = q.project(self.grad_history_sum / L)
        return self.linearization_const + float(self.grad_history_sum @ v) - L / q.sigma * q.prox(v)


def _reference_norm(lambda_ref, lam):
    if lambda_ref is not None:
        return float(np.linalg.norm(lambda_ref)), False
    return float(np.linalg.norm(lam)), True


def certify(p, x_hat, lam_hat, fc_hat, cfg: SmoothingConfig, q: MultiplierSpace, k, eps,
            lambda_ref=None, exact_dual=False) -> Certificate:
    """Certificate for the primal average after ``k + 1`` iterations.

    The dual lower bound is ``f_c(lam_hat) - c sum D_i`` (or the exact
    ``f_0(lam_hat)`` with ``exact_dual``).
    """
    phi = total_objective(p, x_hat)
    lower = plain_dual(p, lam_hat) if exact_dual else fc_hat - cfg.c * cfg.prox_bound_sum
    eq_v, in_v = violation(p, x_hat)
    rho, est = _reference_norm(lambda_ref, lam_hat)
    L = cfg.lipschitz
    if q.compact:
        R = q.eq_radius
        gap_bound = cfg.c * cfg.prox_bound_sum + 4 * L * q.upper_bound / (q.sigma * (k + 1) ** 2)
        viol_bound = gap_bound / (R - rho) if R > rho else math.inf
        # no constraint guarantee once rho reaches the ball, so nothing certifies
        target = eps / (R - rho) if R > rho else 0.0
    else:
        gap_bound = cfg.c * cfg.prox_bound_sum
        s = (k + 1) ** 2
        # the bound tends to zero with L (decoupled instances have zero residual)
        viol_bound = (rho + math.sqrt(rho**2 + gap_bound * s / (2 * L))) * 4 * L / s if L > 0 else 0.0
        target = eps * (rho + math.sqrt(rho**2 + 2))
    return Certificate(phi, lower, phi - lower, eq_v, in_v, gap_bound, viol_bound, target, rho, est)


def _is_certified(cert: Certificate, eps) -> bool:
    return cert.gap_surrogate <= eps and cert.violation <= cert.violation_target


def run_pcm(p: SeparableProblem, q: MultiplierSpace | None = None, eps=1e-2, max_iter=None,
            mode="certified_stop", variant="argmax", lambda_ref=None, adaptive_radius=False,
            check_every=10, exact_dual=False, record_invariants=False, trace=True) -> SolverRun:
    """Run the proximal center method.

    Parameters
    ----------
    p : SeparableProblem
    q : MultiplierSpace, optional
        Multiplier set; defaults to free equality and nonnegative inequality
        multipliers.  A ball ``Q`` (no inequality block) switches to the
        compact-set parameter rule.
    eps : float
        Target duality gap.  Fixes the smoothness parameter.
    max_iter : int, optional
        Iteration cap.  In ``fixed_k`` mode this is the number of iterations.
        Default: the complexity bound plus one, renewed after each adaptive
        radius restart.
    mode : {"certified_stop", "fixed_k"}
    variant : {"argmax", "xbar"}
        ``argmax`` picks ``lambda^k`` as the best of the gradient point, the
        previous ``lambda^{k-1}`` and ``u^k`` (monotone ``f_c``, two oracle
        calls per iteration); ``xbar`` takes the gradient point directly.
    lambda_ref : ndarray, optional
        Known optimal multiplier, used in the constraint-violation target in
        place of the running estimate.
    adaptive_radius : bool
        For a ball ``Q``, double the radius and restart whenever
        ``||lambda^k||`` reaches 90% of it.
    check_every : int
        Certificate frequency in ``certified_stop`` mode.
    exact_dual : bool
        Certify with exact ``f_0(lambda^k)`` rather than the sandwich bound.
    record_invariants : bool
        Store ``f_c(lambda^k)`` and the estimate-sequence right-hand side in
        the trace at every iteration.
    """
    if mode not in ("certified_stop", "fixed_k"):
        raise ValueError(f"unknown mode {mode!r}")
    if variant not in ("argmax", "xbar"):
        raise ValueError(f"unknown variant {variant!r}")
    if not eps > 0:
        raise ValueError("eps must be positive")
    q = MultiplierSpace.for_problem(p) if q is None else q
    if q.dim != p.n_mult:
        raise ProxCenterError(f"multiplier space has dimension {q.dim}, problem has {p.n_mult}")
    consts = problem_constants(p)
    if not math.isfinite(consts.prox_bound_sum):
        raise ProxCenterError("every agent set needs a finite prox bound")

    def choose(qq):
        if qq.compact:
            kp = ball_iterations_for(eps, qq.upper_bound, consts.prox_bound_sum, consts.op_norm_sq_over_sigma)
            c_ = select_c_ball(kp, qq.upper_bound, consts.prox_bound_sum, consts.op_norm_sq_over_sigma)
            return c_, kp
        return select_c_euclidean(eps, consts.prox_bound_sum, consts.op_norm_sq_over_sigma)

    c, k_bound = choose(q)
    cfg = SmoothingConfig.for_problem(p, c)
    L = _step_constant(cfg)
    renew_budget = max_iter is None
    if renew_budget:
        max_iter = k_bound + 1
    lambda_ref = None if lambda_ref is None else np.asarray(lambda_ref, float)

    t0 = time.perf_counter()
    st = _fresh_state(p, q.project(np.zeros(p.n_mult)))
    records = []
    restarts = 0
    status = "cap" if mode == "certified_stop" else "fixed"
    cert = None
    cert_at = -1
    last_x = None
    done = 0

    while done < max_iter:
        it = done
        k = st.k
        ev_u = evaluate(p, st.u, c)
        last_x = ev_u.primal_points
        # primal average: x_hat_k = k/(k+2) x_hat_{k-1} + 2/(k+2) x^{k+1}
        a = 2.0 / (k + 2)
        st.primal_average = [(1 - a) * xh + a * xi for xh, xi in zip(st.primal_average, ev_u.primal_points)]
        st.weight_sum = (1 - a) * st.weight_sum + a

        lam_bar = gradient_step(st.u, ev_u.gradient, L, q)
        if variant == "argmax":
            f_bar = evaluate(p, lam_bar, c).value
            lam_k, f_k = lam_bar, f_bar
            if st.lambda_best is not None and st.best_fc > f_k:
                lam_k, f_k = st.lambda_best, st.best_fc
            if ev_u.value > f_k:
                lam_k, f_k = st.u, ev_u.value
        else:
            lam_k, f_k = lam_bar, None

        w = 0.5 * (k + 1)
        st.grad_history_sum = st.grad_history_sum + w * ev_u.gradient
        st.linearization_const += w * (ev_u.value - float(ev_u.gradient @ st.u))
        st.v = dual_averaging_step(st.grad_history_sum, L, q)
        st.lambda_best, st.best_fc = lam_k, (f_k if f_k is not None else math.nan)
        done = it + 1

        need_cert = (mode == "certified_stop" and (done % check_every == 0 or done == max_iter)) \
            or (mode == "fixed_k" and done == max_iter)
        rec = None
        if record_invariants or need_cert:
            if f_k is None:
                f_k = evaluate(p, lam_k, c).value
            rec = {"k": it, "fc": f_k}
        if record_invariants:
            rec["es_lhs"] = 0.25 * (k + 1) * (k + 2) * f_k
            rec["es_rhs"] = st.estimate_sequence_rhs(L, q)
            rec["weight_sum"] = st.weight_sum
            rec["in_Q"] = q.contains(lam_k)
        if need_cert:
            cert = certify(p, st.primal_average, lam_k, f_k, cfg, q, k, eps, lambda_ref, exact_dual)
            cert_at = done
            rec.update(gap_surrogate=cert.gap_surrogate, eq_violation=cert.eq_violation,
                       ineq_violation=cert.ineq_violation)
        if rec is not None:
            rec["wall_time"] = time.perf_counter() - t0
            if trace or record_invariants:
                records.append(rec)
        if need_cert and mode == "certified_stop" and _is_certified(cert, eps):
            status = "certified"
            break

        if adaptive_radius and done < max_iter and q.compact and np.linalg.norm(lam_k[: q.n_eq]) >= ADAPT_FRACTION * q.eq_radius:
            q = q.with_radius(ADAPT_FACTOR * q.eq_radius)
            c, k_bound = choose(q)
            cfg = SmoothingConfig.for_problem(p, c)
            L = _step_constant(cfg)
            st = _fresh_state(p, q.project(lam_k))
            restarts += 1
            if renew_budget:
                max_iter = done + k_bound + 1
            continue

        st.u = (k + 1) / (k + 3) * lam_k + 2.0 / (k + 3) * st.v
        st.k += 1

    if cert_at != done:
        f_k = st.best_fc if variant == "argmax" else evaluate(p, st.lambda_best, c).value
        cert = certify(p, st.primal_average, st.lambda_best, f_k, cfg, q, st.k - 1, eps,
                       lambda_ref, exact_dual)
    if not all(membership(p, st.primal_average)):
        raise ProxCenterError("primal average left the feasible sets")
    return SolverRun("pcm", st.primal_average, last_x, st.lambda_best, done, status, cert,
                     smoothing=c, lipschitz=L, k_bound=k_bound, trace=records, restarts=restarts,
                     wall_time=time.perf_counter() - t0)


def _step_constant(cfg):
    # zero coupling makes the gradient constant, so any positive step constant is exact
    return cfg.lipschitz if cfg.lipschitz > 0 else 1.0


def _fresh_state(p, u0):
    return PcmState(u=u0, grad_history_sum=np.zeros(p.n_mult),
                    primal_average=[np.zeros(d) for d in p.dims])
