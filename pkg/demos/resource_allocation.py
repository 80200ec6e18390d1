"""Allocation with shared capacity limits: inequality coupling and nonnegative prices.

Run with ``python3 demos/resource_allocation.py``.
"""

import numpy as np

from proxcenter import NetworkAlloc, StepRule, run_dsm, run_pcm
from proxcenter.problem import coupling_residual

inst = NetworkAlloc(m=6, M=5, n1=2, n2=4, seed=0).generate()
p = inst.problem
print(f"{p.n_agents} agents, {p.n_eq} balance rows, {p.n_ineq} capacity rows")

run = run_pcm(p, eps=1e-2)
_, slack = coupling_residual(p, run.x_hat)
prices = run.multiplier[p.n_eq:]
print(f"PCM: {run.status} after {run.iterations} iterations, cost {run.certificate.objective:.4f}")
print("capacity use minus limit:", np.array2string(slack, precision=3))
print("capacity prices:         ", np.array2string(prices, precision=3))

dsm = run_dsm(p, rule=StepRule("diminishing"), max_iter=run.iterations * 2)
print(f"DSM with twice the iterations: cost {dsm.certificate.objective:.4f}, "
      f"violation {dsm.certificate.violation:.2e} (PCM {run.certificate.violation:.2e})")
