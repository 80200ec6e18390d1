"""Solve a coupled quadratic program with known optimum by both decomposition methods.

Run with ``python3 demos/quickstart.py``.
"""

import numpy as np

from proxcenter import KktConstructed, StepRule, reference_solve, run_dsm, run_pcm

inst = KktConstructed(m=8, M=2, n1=3, seed=0).generate()
p, opt = inst.problem, inst.known_optimum
print(f"{p.n_agents} agents of dimension {p.dims}, {p.n_eq} coupling rows, f* = {opt.value:.6f}")

f_ref, _ = reference_solve(p)
print(f"joint reference solve: {f_ref:.6f}")

for eps in (1e-2, 1e-3):
    run = run_pcm(p, eps=eps, lambda_ref=opt.multiplier)
    c = run.certificate
    print(f"PCM eps={eps:g}: {run.status} after {run.iterations} of at most {run.k_bound + 1} iterations, "
          f"phi = {c.objective:.6f}, gap surrogate {c.gap_surrogate:.2e}, violation {c.violation:.2e}")

dsm = run_dsm(p, rule=StepRule("diminishing"), max_iter=5000)
c = dsm.certificate
print(f"DSM 5000 iterations: phi = {c.objective:.6f}, best dual {c.dual_lower:.6f}, violation {c.violation:.2e}")
print(f"multiplier error: PCM {np.linalg.norm(run.multiplier - opt.multiplier):.2e}, "
      f"DSM {np.linalg.norm(dsm.multiplier - opt.multiplier):.2e}")
