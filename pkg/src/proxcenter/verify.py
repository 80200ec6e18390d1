"""Numerical invariant suite for an instance.

Each check samples multipliers, evaluates the dual oracle or a short solver
run, and reports the worst slack it saw.  A check passes when that slack
is nonnegative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dual import evaluate, problem_constants, select_c_euclidean
from .pcm import run_pcm
from .problem import SeparableProblem, membership, stacked_residual
from .prox import MultiplierSpace


@dataclass
class CheckResult:
    name: str
    passed: bool
    worst_slack: float
    detail: str = ""

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag} {self.name}: worst slack {self.worst_slack:.3e}{'  ' + self.detail if self.detail else ''}"


def _sample(rng, q: MultiplierSpace, scale=1.0):
    return q.project(scale * rng.standard_normal(q.dim))


def _check(name, slacks, detail=""):
    worst = float(min(slacks)) if len(slacks) else math.inf
    return CheckResult(name, worst >= 0, worst, detail)


def verify_problem(p: SeparableProblem, seed=0, eps=0.1, lambda_star=None, pcm_iterations=200) -> list[CheckResult]:
    """Run every invariant check on ``p`` and return one result per check."""
    rng = np.random.default_rng(seed)
    q = MultiplierSpace.for_problem(p)
    k = problem_constants(p)
    c, _ = select_c_euclidean(eps, k.prox_bound_sum, k.op_norm_sq_over_sigma)
    L = k.op_norm_sq_over_sigma / c
    out = []

    lip, conc, fd, sand, sg = [], [], [], [], []
    for _ in range(10):
        lam, eta = _sample(rng, q), _sample(rng, q)
        ea, eb = evaluate(p, lam, c), evaluate(p, eta, c)
        lip.append(L * np.linalg.norm(lam - eta) + 1e-7 - np.linalg.norm(ea.gradient - eb.gradient))
        t = rng.uniform()
        mid = evaluate(p, t * lam + (1 - t) * eta, c).value
        conc.append(mid - (t * ea.value + (1 - t) * eb.value) + 1e-9)
        f0 = evaluate(p, lam, 0.0)
        sand.append(min(ea.value - f0.value, f0.value - ea.plain_dual_lower) + 1e-8)
        f0_eta = evaluate(p, eta, 0.0).value
        sg.append(f0.value + float(f0.gradient @ (eta - lam)) - f0_eta + 1e-8)
    out.append(_check("gradient Lipschitz bound", lip))
    out.append(_check("smoothed dual concavity", conc))
    out.append(_check("sandwich f_c >= f_0 >= f_c - c*sum(D)", sand))
    out.append(_check("subgradient inequality for f_0", sg))

    h = 1e-5
    # keep the probe inside Q: only perturb equality coordinates and positive inequality ones
    for _ in range(3):
        lam = _sample(rng, q) + np.concatenate([np.zeros(p.n_eq), np.full(p.n_ineq, 2 * h)])
        g = evaluate(p, lam, c).gradient
        for j in range(q.dim):
            e = np.zeros(q.dim)
            e[j] = h
            num = (evaluate(p, lam + e, c).value - evaluate(p, lam - e, c).value) / (2 * h)
            fd.append(1e-4 - abs(num - g[j]))
    out.append(_check("central-difference gradient", fd))

    lam = _sample(rng, q)
    ev = evaluate(p, lam, c)
    parts = -float(lam @ p.rhs) + sum(s.objective_value for s in ev.solutions)
    out.append(_check("separability of f_c", [1e-10 * max(1.0, abs(ev.value)) - abs(parts - ev.value)]))
    out.append(_check("gradient equals stacked residual",
                      [1e-10 - float(np.max(np.abs(ev.gradient - stacked_residual(p, ev.primal_points))))]))

    run = run_pcm(p, q, eps=eps, max_iter=pcm_iterations, mode="fixed_k", record_invariants=True,
                  lambda_ref=lambda_star)
    es = [r["es_lhs"] - r["es_rhs"] + 1e-6 * (1 + abs(r["fc"])) for r in run.trace]
    mono = [b["fc"] - a["fc"] + 1e-10 for a, b in zip(run.trace, run.trace[1:])]
    wsum = [1e-12 - abs(r["weight_sum"] - 1.0) for r in run.trace]
    inq = [0.0 if r["in_Q"] else -1.0 for r in run.trace]
    out.append(_check("estimate-sequence inequality", es))
    out.append(_check("monotone best f_c", mono))
    out.append(_check("primal weights sum to one", wsum))
    out.append(_check("multipliers stay in Q", inq))
    out.append(_check("primal average feasible", [0.0 if all(membership(p, run.x_hat)) else -1.0]))
    cert = run.certificate
    rho = float(np.linalg.norm(lambda_star)) if lambda_star is not None else cert.multiplier_norm
    out.append(_check("gap surrogate lower bound", [cert.gap_surrogate + rho * cert.violation + 1e-8],
                      "rho is an estimate" if lambda_star is None else ""))
    return out
