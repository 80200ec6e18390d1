"""Run records shared by the solvers, and the line-delimited trace format."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


@dataclass
class Certificate:
    """Accuracy report for a primal average ``x_hat`` and multiplier ``lambda_hat``.

    ``gap_surrogate`` is ``phi(x_hat) - dual_lower`` where ``dual_lower`` is a
    valid lower bound on the optimal value. ``violation_bound`` uses the
    reference multiplier norm ``multiplier_norm``; when that norm is a proxy
    (no known optimal multiplier) ``multiplier_norm_is_estimate`` is set.
    """

    objective: float
    dual_lower: float
    gap_surrogate: float
    eq_violation: float
    ineq_violation: float
    theorem_gap_bound: float = math.nan
    theorem_violation_bound: float = math.nan
    violation_target: float = math.nan
    multiplier_norm: float = math.nan
    multiplier_norm_is_estimate: bool = True

    @property
    def violation(self) -> float:
        return math.hypot(self.eq_violation, self.ineq_violation)

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["violation"] = self.violation
        return d


@dataclass
class SolverRun:
    """Outcome of a solver run.

    ``status`` is ``"certified"`` (stopping test passed), ``"cap"`` (iteration
    limit reached without a certificate) or ``"fixed"`` (fixed iteration count
    requested).  ``iterations`` counts completed outer iterations.
    """

    method: str
    x_hat: list
    x_last: list
    multiplier: np.ndarray
    iterations: int
    status: str
    certificate: Certificate
    smoothing: float = 0.0
    lipschitz: float = math.nan
    k_bound: int | None = None
    trace: list = field(default_factory=list)
    restarts: int = 0
    wall_time: float = 0.0

    @property
    def certified(self) -> bool:
        return self.status == "certified"


def write_trace(records, path) -> None:
    """One JSON object per line: ``k, fc, gap_surrogate, eq_violation, ineq_violation, wall_time``."""
    with Path(path).open("w") as fh:
        for r in records:
            fh.write(json.dumps(r, sort_keys=True) + "\n")


def read_trace(path) -> list[dict]:
    return [json.loads(line) for line in Path(path).read_text().splitlines() if line.strip()]
