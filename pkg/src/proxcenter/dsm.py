"""Dual subgradient method, the classical decomposition baseline.

Each iteration minimizes the plain Lagrangian agent by agent at the current
multiplier and moves the multiplier along the coupling residual,
projecting inequality multipliers back onto the nonnegative orthant.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .dual import evaluate, problem_constants
from .problem import SeparableProblem, total_objective, violation
from .prox import MultiplierSpace
from .runs import Certificate, SolverRun


@dataclass(frozen=True)
class StepRule:
    """``constant``: ``c_k = s``; ``diminishing``: ``c_k = s / sqrt(k + 1)``."""

    kind: str = "constant"
    s: float | None = None

    def __post_init__(self):
        if self.kind not in ("constant", "diminishing"):
            raise ValueError(f"unknown step rule {self.kind!r}")
        if self.s is not None and not self.s > 0:
            raise ValueError("step size must be positive")

    def resolve(self, p: SeparableProblem) -> "StepRule":
        """Fill in the default ``s = 1 / ||[K_1 ... K_M]||^2``."""
        if self.s is not None:
            return self
        nrm = problem_constants(p).stacked_norm
        return StepRule(self.kind, 1.0 / nrm**2 if nrm > 0 else 1.0)

    def step(self, k) -> float:
        return self.s if self.kind == "constant" else self.s / math.sqrt(k + 1)


def run_dsm(p: SeparableProblem, q: MultiplierSpace | None = None, rule: StepRule | None = None,
            max_iter=5000, lam0=None, lambda_ref=None, eps=None, trace_every=10) -> SolverRun:
    """Run ``max_iter`` dual subgradient iterations.

    Tracks the best exact dual value seen, the last Lagrangian minimizer and
    the step-weighted running average of minimizers.  The certificate is
    built from the running average against the best dual value; with ``eps``
    the run stops early once both ``|gap|`` and the violation fall below it.
    """
    q = MultiplierSpace.for_problem(p) if q is None else q
    rule = (rule or StepRule()).resolve(p)
    lam = q.project(np.zeros(p.n_mult) if lam0 is None else np.asarray(lam0, float))
    x_avg = [np.zeros(d) for d in p.dims]
    wsum = 0.0
    best, best_lam = -math.inf, lam
    records = []
    t0 = time.perf_counter()
    status = "cap"
    x_last = None
    done = 0
    cert = None
    for k in range(max_iter):
        ev = evaluate(p, lam, 0.0)
        x_last = ev.primal_points
        if ev.value > best:
            best, best_lam = ev.value, lam
        s = rule.step(k)
        wsum += s
        a = s / wsum
        x_avg = [(1 - a) * xa + a * xi for xa, xi in zip(x_avg, x_last)]
        lam = q.project(lam + s * ev.gradient)
        done = k + 1
        if done % trace_every == 0 or done == max_iter:
            cert = _certificate(p, x_avg, best, best_lam, lambda_ref)
            records.append({"k": k, "fc": best, "gap_surrogate": cert.gap_surrogate,
                            "eq_violation": cert.eq_violation, "ineq_violation": cert.ineq_violation,
                            "wall_time": time.perf_counter() - t0})
            if eps is not None and abs(cert.gap_surrogate) <= eps and cert.violation <= eps:
                status = "certified"
                break
    if cert is None or records[-1]["k"] != done - 1:
        cert = _certificate(p, x_avg, best, best_lam, lambda_ref)
    return SolverRun("dsm", x_avg, x_last, best_lam, done, status, cert, trace=records,
                     wall_time=time.perf_counter() - t0)


def _certificate(p, x_avg, best, best_lam, lambda_ref):
    phi = total_objective(p, x_avg)
    eq_v, in_v = violation(p, x_avg)
    rho = float(np.linalg.norm(best_lam if lambda_ref is None else lambda_ref))
    return Certificate(phi, best, phi - best, eq_v, in_v, multiplier_norm=rho,
                       multiplier_norm_is_estimate=lambda_ref is None)
