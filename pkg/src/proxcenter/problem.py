"""Separable convex programs with linear coupling.

A program is a list of agent blocks.  Agent ``i`` owns a decision vector
``x_i`` in a compact set ``X_i`` and a quadratic objective
``psi_i(x) = 0.5 x'H_i x + g_i'x``.  The agents interact only through

    sum_i C_i x_i - gamma  = 0     (equality coupling, n1 rows)
    sum_i D_i x_i - beta  <= 0     (inequality coupling, n2 rows)

The two-agent program ``min phi_1(x) + phi_2(z) s.t. Ax + Bz = b`` is the
case ``M = 2`` with ``C_1 = A``, ``C_2 = B`` and ``gamma = b``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DimensionError, NotConvexError

SYMMETRY_TOL = 1e-12
PSD_TOL = 1e-10
BALL_TOL = 1e-9
SIMPLEX_NEG_TOL = 1e-12
SIMPLEX_SUM_TOL = 1e-9


@dataclass(frozen=True)
class Ball:
    """Euclidean ball ``{x : ||x - center||_2 <= radius}``."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        center = np.array(self.center, dtype=float).ravel()
        center.setflags(write=False)
        object.__setattr__(self, "center", center)
        radius = float(self.radius)
        if not radius > 0:
            raise ValueError(f"ball radius must be positive, got {radius}")
        object.__setattr__(self, "radius", radius)

    @property
    def dim(self) -> int:
        return self.center.size

    def contains(self, x) -> bool:
        return bool(np.linalg.norm(np.asarray(x, float) - self.center) <= self.radius + BALL_TOL)

    def project(self, x):
        y = np.asarray(x, float) - self.center
        r = np.linalg.norm(y)
        if r > self.radius:
            y = y * (self.radius / r)
        return self.center + y


@dataclass(frozen=True)
class Simplex:
    """Standard unit simplex ``{x >= 0 : sum(x) = 1}`` in ``dim`` coordinates."""

    dim: int

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"simplex dimension must be a positive integer, got {self.dim}")
        object.__setattr__(self, "dim", int(self.dim))

    @property
    def center(self):
        return np.full(self.dim, 1.0 / self.dim)

    def contains(self, x) -> bool:
        x = np.asarray(x, float)
        return bool(np.all(x >= -SIMPLEX_NEG_TOL) and abs(x.sum() - 1.0) <= SIMPLEX_SUM_TOL)

    def project(self, x):
        # sort-based Euclidean projection (Held, Wolfe & Crowder)
        x = np.asarray(x, float)
        u = np.sort(x)[::-1]
        css = np.cumsum(u) - 1.0
        idx = np.arange(1, x.size + 1)
        rho = np.nonzero(u - css / idx > 0)[0][-1]
        theta = css[rho] / (rho + 1.0)
        return np.maximum(x - theta, 0.0)


FeasibleSet = Ball | Simplex


def _as_matrix(a, rows_hint, cols, name):
    a = np.array(a, dtype=float)
    if a.size == 0:
        return np.zeros((rows_hint if rows_hint is not None else 0, cols))
    if a.ndim == 1:
        # flat row-major storage
        if a.size % cols:
            raise DimensionError(f"{name} has {a.size} entries, not a multiple of {cols} columns")
        a = a.reshape(-1, cols)
    return a


@dataclass(frozen=True, eq=False)
class AgentBlock:
    """One agent: objective ``0.5 x'Hx + g'x`` over ``feasible_set``.

    ``eq_coupling`` is ``C_i`` (n1 x m_i) and ``ineq_coupling`` is ``D_i``
    (n2 x m_i); either may have zero rows.  The Hessian is checked for
    symmetry and positive semidefiniteness on construction; strict convexity
    is not required.  Its eigendecomposition is cached for the subproblem
    solver.
    """

    objective_hessian: np.ndarray
    objective_linear: np.ndarray
    feasible_set: Ball | Simplex
    eq_coupling: np.ndarray = None
    ineq_coupling: np.ndarray = None
    eigenvalues: np.ndarray = field(init=False, repr=False)
    eigenvectors: np.ndarray = field(init=False, repr=False)
    coupling: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        m = self.feasible_set.dim
        H = np.array(self.objective_hessian, dtype=float)
        if H.ndim == 1 and H.size == m * m:
            H = H.reshape(m, m)
        g = np.array(self.objective_linear, dtype=float).ravel()
        if H.shape != (m, m):
            raise DimensionError(f"Hessian shape {H.shape} does not match set dimension {m}")
        if g.shape != (m,):
            raise DimensionError(f"linear term has length {g.size}, expected {m}")
        if np.max(np.abs(H - H.T), initial=0.0) > SYMMETRY_TOL * max(1.0, np.abs(H).max(initial=0.0)):
            raise NotConvexError("Hessian is not symmetric")
        H = 0.5 * (H + H.T)
        C = _as_matrix(self.eq_coupling if self.eq_coupling is not None else [], None, m, "C")
        D = _as_matrix(self.ineq_coupling if self.ineq_coupling is not None else [], None, m, "D")
        for name, mat in (("C", C), ("D", D)):
            if mat.shape[1] != m:
                raise DimensionError(f"{name} has {mat.shape[1]} columns, expected {m}")
        evals, evecs = np.linalg.eigh(H)
        if evals.size and evals[0] < -PSD_TOL:
            raise NotConvexError(f"Hessian has eigenvalue {evals[0]:.3e} < -{PSD_TOL}")
        evals = np.maximum(evals, 0.0)
        # stacked map [C_i; D_i] into the multiplier space
        K = np.vstack([C, D])
        for name, arr in (("objective_hessian", H), ("objective_linear", g), ("eq_coupling", C),
                          ("ineq_coupling", D), ("eigenvalues", evals), ("eigenvectors", evecs),
                          ("coupling", K)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def dim(self) -> int:
        return self.feasible_set.dim

    def objective(self, x):
        x = np.asarray(x, float)
        return 0.5 * x @ self.objective_hessian @ x + self.objective_linear @ x


@dataclass(frozen=True, eq=False)
class SeparableProblem:
    """Agents plus coupling right-hand sides ``eq_rhs`` (gamma) and ``ineq_rhs`` (beta)."""

    agents: tuple
    eq_rhs: np.ndarray = None
    ineq_rhs: np.ndarray = None

    def __post_init__(self):
        agents = tuple(self.agents)
        if not agents:
            raise DimensionError("a problem needs at least one agent")
        n1 = agents[0].eq_coupling.shape[0]
        n2 = agents[0].ineq_coupling.shape[0]
        for i, a in enumerate(agents):
            if a.eq_coupling.shape[0] != n1:
                raise DimensionError(f"C has {a.eq_coupling.shape[0]} rows, expected {n1}", agent=i)
            if a.ineq_coupling.shape[0] != n2:
                raise DimensionError(f"D has {a.ineq_coupling.shape[0]} rows, expected {n2}", agent=i)
        if n1 + n2 < 1:
            raise DimensionError("problem has no coupling constraints")
        gamma = np.zeros(n1) if self.eq_rhs is None else np.array(self.eq_rhs, float).ravel()
        beta = np.zeros(n2) if self.ineq_rhs is None else np.array(self.ineq_rhs, float).ravel()
        if gamma.shape != (n1,):
            raise DimensionError(f"gamma has length {gamma.size}, expected {n1}")
        if beta.shape != (n2,):
            raise DimensionError(f"beta has length {beta.size}, expected {n2}")
        gamma.setflags(write=False)
        beta.setflags(write=False)
        object.__setattr__(self, "agents", agents)
        object.__setattr__(self, "eq_rhs", gamma)
        object.__setattr__(self, "ineq_rhs", beta)

    @property
    def n_agents(self) -> int:
        return len(self.agents)

    @property
    def n_eq(self) -> int:
        return self.eq_rhs.size

    @property
    def n_ineq(self) -> int:
        return self.ineq_rhs.size

    @property
    def n_mult(self) -> int:
        return self.n_eq + self.n_ineq

    @property
    def rhs(self):
        return np.concatenate([self.eq_rhs, self.ineq_rhs])

    @property
    def dims(self):
        return [a.dim for a in self.agents]

    def check_point(self, x):
        """Return ``x`` as a list of float arrays, raising on any shape mismatch."""
        x = list(x)
        if len(x) != self.n_agents:
            raise DimensionError(f"got {len(x)} agent vectors for {self.n_agents} agents")
        out = []
        for i, (a, xi) in enumerate(zip(self.agents, x)):
            xi = np.asarray(xi, float).ravel()
            if xi.size != a.dim:
                raise DimensionError(f"vector has length {xi.size}, expected {a.dim}", agent=i)
            out.append(xi)
        return out

    # -- serialization -------------------------------------------------------

    def to_dict(self) -> dict:
        agents = []
        for a in self.agents:
            s = a.feasible_set
            if isinstance(s, Ball):
                set_doc = {"ball": {"center": s.center.tolist(), "radius": s.radius}}
            else:
                set_doc = {"simplex": {"dim": s.dim}}
            agents.append({
                "H": a.objective_hessian.tolist(),
                "g": a.objective_linear.tolist(),
                "set": set_doc,
                "C": a.eq_coupling.tolist(),
                "D": a.ineq_coupling.tolist(),
            })
        return {"agents": agents, "gamma": self.eq_rhs.tolist(), "beta": self.ineq_rhs.tolist()}

    @classmethod
    def from_dict(cls, doc: dict) -> "SeparableProblem":
        agents = []
        for i, a in enumerate(doc["agents"]):
            set_doc = a["set"]
            if "ball" in set_doc:
                fs = Ball(set_doc["ball"]["center"], set_doc["ball"]["radius"])
            elif "simplex" in set_doc:
                fs = Simplex(set_doc["simplex"]["dim"])
            else:
                raise DimensionError(f"unknown set type {sorted(set_doc)}", agent=i)
            agents.append(AgentBlock(a["H"], a["g"], fs, a.get("C", []), a.get("D", [])))
        n1 = agents[0].eq_coupling.shape[0] if agents else 0
        gamma = doc.get("gamma", [])
        beta = doc.get("beta", [])
        return cls(tuple(agents), gamma if len(gamma) else np.zeros(n1), beta)


def save_problem(p: SeparableProblem, path, extra: dict | None = None) -> None:
    doc = p.to_dict()
    if extra:
        doc.update(extra)
    Path(path).write_text(json.dumps(doc, indent=1))


def load_problem(path) -> tuple[SeparableProblem, dict]:
    """Read an instance file; returns the problem and the raw document."""
    doc = json.loads(Path(path).read_text())
    return SeparableProblem.from_dict(doc), doc


def total_objective(p: SeparableProblem, x) -> float:
    """Sum of agent objectives ``sum_i 0.5 x_i'H_i x_i + g_i'x_i``."""
    x = p.check_point(x)
    return float(sum(a.objective(xi) for a, xi in zip(p.agents, x)))


def coupling_residual(p: SeparableProblem, x):
    """Raw residuals ``(sum C_i x_i - gamma, sum D_i x_i - beta)``, unprojected."""
    x = p.check_point(x)
    eq = -p.eq_rhs.copy()
    ineq = -p.ineq_rhs.copy()
    for a, xi in zip(p.agents, x):
        eq += a.eq_coupling @ xi
        ineq += a.ineq_coupling @ xi
    return eq, ineq


def stacked_residual(p: SeparableProblem, x):
    eq, ineq = coupling_residual(p, x)
    return np.concatenate([eq, ineq])


def membership(p: SeparableProblem, x) -> list[bool]:
    x = p.check_point(x)
    return [a.feasible_set.contains(xi) for a, xi in zip(p.agents, x)]


def violation(p: SeparableProblem, x) -> tuple[float, float]:
    """Norms of the equality residual and of the positive part of the inequality residual."""
    eq, ineq = coupling_residual(p, x)
    return float(np.linalg.norm(eq)), float(np.linalg.norm(np.maximum(ineq, 0.0)))
