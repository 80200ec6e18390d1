"""Seeded instance families.

Every family builds a problem with a strictly feasible point, so an optimal
multiplier exists.  Generation is deterministic per seed.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import ProxCenterError
from .problem import AgentBlock, Ball, SeparableProblem, coupling_residual, total_objective


@dataclass(frozen=True)
class KnownOptimum:
    value: float
    x: list
    multiplier: np.ndarray


@dataclass
class Instance:
    problem: SeparableProblem
    spec: object
    known_optimum: KnownOptimum | None = None
    meta: dict = field(default_factory=dict)


def _check_dims(**dims):
    for name, v in dims.items():
        if int(v) != v or v < 1:
            raise ProxCenterError(f"{name} must be a positive integer, got {v}")


def _low_rank_psd(rng, m):
    # rank round(m/2), at least 1: convex but never strictly convex for m >= 2
    r = max(1, int(round(m / 2)))
    G = rng.standard_normal((r, m))
    return G.T @ G


def _interior_point(rng, center, radius, frac):
    m = center.size
    u = rng.standard_normal(m)
    u /= np.linalg.norm(u)
    return center + u * radius * frac * rng.uniform() ** (1.0 / m)


@dataclass(frozen=True)
class RandomBallQP:
    """Non-strictly convex quadratics on unit-radius balls, equality coupled."""

    m: int
    M: int
    n1: int
    seed: int = 0
    radius: float = 1.0

    family = "random"

    def generate(self) -> Instance:
        _check_dims(m=self.m, M=self.M, n1=self.n1)
        rng = np.random.default_rng([self.seed, self.m, self.M, self.n1])
        R = float(self.radius)
        agents, gamma = [], np.zeros(self.n1)
        for _ in range(self.M):
            H = _low_rank_psd(rng, self.m)
            g = rng.standard_normal(self.m)
            C = rng.standard_normal((self.n1, self.m))
            x_feas = _interior_point(rng, np.zeros(self.m), R, 0.9)
            gamma += C @ x_feas
            agents.append(AgentBlock(H, g, Ball(np.zeros(self.m), R), C))
        return Instance(SeparableProblem(tuple(agents), gamma), self)


@dataclass(frozen=True)
class KktConstructed:
    """Instances built backwards from a chosen primal-dual pair.

    ``x*`` sits well inside each ball (at most half the radius from the center)
    so the ball multipliers vanish, and ``g_i = -H_i x*_i - C_i' lambda*`` makes
    ``(x*, lambda*)`` a KKT pair with ``f* = phi(x*)``.
    """

    m: int
    M: int
    n1: int
    seed: int = 0
    radius: float = 1.0

    family = "kkt"

    def generate(self) -> Instance:
        _check_dims(m=self.m, M=self.M, n1=self.n1)
        rng = np.random.default_rng([self.seed, self.m, self.M, self.n1, 1])
        R = float(self.radius)
        lam = rng.standard_normal(self.n1)
        agents, xs, gamma = [], [], np.zeros(self.n1)
        for _ in range(self.M):
            H = _low_rank_psd(rng, self.m)
            C = rng.standard_normal((self.n1, self.m))
            x_star = _interior_point(rng, np.zeros(self.m), R, 0.5)
            g = -H @ x_star - C.T @ lam
            gamma += C @ x_star
            xs.append(x_star)
            agents.append(AgentBlock(H, g, Ball(np.zeros(self.m), R), C))
        p = SeparableProblem(tuple(agents), gamma)
        opt = KnownOptimum(total_objective(p, xs), xs, lam)
        return Instance(p, self, opt)


@dataclass(frozen=True)
class NetworkAlloc:
    """Equality and inequality coupled allocation with a slack-feasible point."""

    m: int
    M: int
    n1: int
    n2: int
    seed: int = 0
    radius: float = 1.0

    family = "network"

    def generate(self) -> Instance:
        _check_dims(m=self.m, M=self.M, n2=self.n2)
        if int(self.n1) != self.n1 or self.n1 < 0:
            raise ProxCenterError("n1 must be a nonnegative integer")
        rng = np.random.default_rng([self.seed, self.m, self.M, self.n1, self.n2, 2])
        R = float(self.radius)
        agents = []
        gamma, beta = np.zeros(self.n1), np.zeros(self.n2)
        for _ in range(self.M):
            H = _low_rank_psd(rng, self.m)
            g = rng.standard_normal(self.m)
            C = rng.standard_normal((self.n1, self.m))
            D = rng.standard_normal((self.n2, self.m))
            x_feas = _interior_point(rng, np.zeros(self.m), R, 0.9)
            gamma += C @ x_feas
            beta += D @ x_feas
            agents.append(AgentBlock(H, g, Ball(np.zeros(self.m), R), C, D))
        beta += rng.uniform(0.1, 1.0, self.n2)
        return Instance(SeparableProblem(tuple(agents), gamma, beta), self)


@dataclass(frozen=True)
class MpcRecast:
    """Distributed MPC over a ring of coupled linear subsystems.

    Subsystem ``i`` follows ``x^i_{l+1} = sum_{j in N(i)} A_ij x^j_l + B_ij u^j_l``
    with ``N(i) = {i-1, i, i+1}`` (mod M).  Agent ``i`` stacks
    ``(x^i_0, ..., x^i_N, u^i_0, ..., u^i_{N-1})``; the initial condition and
    the dynamics become equality coupling rows.  The stage cost
    ``x'Qx + u'Ru`` uses a singular ``Q``, and the state/input boxes are
    replaced by their enclosing balls.
    """

    subsystems: int
    horizon: int
    seed: int = 0
    nx: int = 2
    nu: int = 1
    x_max: float = 5.0
    u_max: float = 2.0

    family = "mpc"

    def generate(self) -> Instance:
        M, N, nx, nu = self.subsystems, self.horizon, self.nx, self.nu
        _check_dims(subsystems=M, horizon=N, nx=nx, nu=nu)
        rng = np.random.default_rng([self.seed, M, N, nx, nu, 3])
        nbrs = [sorted({(i - 1) % M, i, (i + 1) % M}) for i in range(M)]
        A, B = {}, {}
        for i in range(M):
            for j in nbrs[i]:
                if i == j:
                    Aii = rng.standard_normal((nx, nx))
                    A[i, j] = 0.8 * Aii / max(abs(np.linalg.eigvals(Aii)))
                    B[i, j] = rng.standard_normal((nx, nu))
                else:
                    A[i, j] = 0.05 * rng.standard_normal((nx, nx))
                    B[i, j] = 0.05 * rng.standard_normal((nx, nu))
        x_init = [rng.uniform(-1, 1, nx) * 0.3 * self.x_max for _ in range(M)]

        n_state = (N + 1) * nx
        dim = n_state + N * nu
        rows_per = (N + 1) * nx
        n1 = M * rows_per
        C = [np.zeros((n1, dim)) for _ in range(M)]
        gamma = np.zeros(n1)

        def xs(l):
            return slice(l * nx, (l + 1) * nx)

        def us(l):
            return slice(n_state + l * nu, n_state + (l + 1) * nu)

        for i in range(M):
            base = i * rows_per
            C[i][base:base + nx, xs(0)] = np.eye(nx)
            gamma[base:base + nx] = x_init[i]
            for l in range(N):
                r = slice(base + (l + 1) * nx, base + (l + 2) * nx)
                C[i][r, xs(l + 1)] += np.eye(nx)
                for j in nbrs[i]:
                    C[j][r, xs(l)] -= A[i, j]
                    C[j][r, us(l)] -= B[i, j]

        Q = np.diag([1.0] + [0.0] * (nx - 1))
        Rc = 0.1 * np.eye(nu)
        H = np.zeros((dim, dim))
        for l in range(N):
            H[xs(l), xs(l)] = 2 * Q
            H[us(l), us(l)] = 2 * Rc
        radius = math.sqrt((N + 1) * nx * self.x_max**2 + N * nu * self.u_max**2)
        agents = tuple(AgentBlock(H, np.zeros(dim), Ball(np.zeros(dim), radius), C[i]) for i in range(M))
        p = SeparableProblem(agents, gamma)

        # zero-input rollout must fit in the balls for the instance to be feasible
        traj = simulate(A, B, nbrs, x_init, [np.zeros((N, nu))] * M)
        if not all(np.linalg.norm(t) < radius for t in traj):
            raise ProxCenterError("zero-input rollout leaves the state ball; cannot place a feasible point")
        if np.linalg.norm(np.concatenate(coupling_residual(p, traj))) > 1e-9:
            raise ProxCenterError("rollout does not satisfy the recast dynamics")
        meta = {"A": A, "B": B, "neighbors": nbrs, "x_init": x_init, "nx": nx, "nu": nu}
        return Instance(p, self, meta=meta)


def simulate(A, B, nbrs, x_init, inputs):
    """Roll the coupled dynamics forward and stack each agent's decision vector."""
    M = len(x_init)
    N = inputs[0].shape[0]
    x = [[np.asarray(x_init[i], float)] for i in range(M)]
    for l in range(N):
        for i in range(M):
            nxt = sum(A[i, j] @ x[j][l] + B[i, j] @ inputs[j][l] for j in nbrs[i])
            x[i].append(nxt)
    return [np.concatenate(x[i] + [inputs[i].ravel()]) for i in range(M)]


FAMILIES = {cls.family: cls for cls in (RandomBallQP, KktConstructed, NetworkAlloc, MpcRecast)}


def generate(spec) -> Instance:
    return spec.generate()


def spec_to_dict(spec) -> dict:
    return {"family": spec.family, **asdict(spec)}


def spec_from_dict(doc: dict):
    doc = dict(doc)
    return FAMILIES[doc.pop("family")](**doc)
