import numpy as np
import pytest
from hypothesis import given, strategies as st

from proxcenter import (
    AgentBlock, KktConstructed, MpcRecast, NetworkAlloc, ProxCenterError, RandomBallQP, SeparableProblem, generate,
    reference_solve,
)
from proxcenter.instances import FAMILIES, simulate, spec_from_dict, spec_to_dict
from proxcenter.problem import coupling_residual, membership, total_objective


def same_problem(a, b):
    return a.to_dict() == b.to_dict()


def test_random_instance_is_deterministic():
    a = RandomBallQP(4, 2, 2, seed=7).generate().problem
    b = RandomBallQP(4, 2, 2, seed=7).generate().problem
    assert same_problem(a, b)
    assert not same_problem(a, RandomBallQP(4, 2, 2, seed=8).generate().problem)


@pytest.mark.parametrize("m", [1, 4, 5, 10])
def test_random_hessians_have_rank_half_m(m):
    p = RandomBallQP(m, 2, 3, seed=0).generate().problem
    for a in p.agents:
        rank = np.linalg.matrix_rank(a.objective_hessian, tol=1e-9)
        assert rank == max(1, round(m / 2))
        assert np.allclose(a.feasible_set.center, 0) and a.feasible_set.radius == 1.0


def test_random_instance_radius_parameter():
    p = RandomBallQP(3, 2, 1, seed=0, radius=2.5).generate().problem
    assert all(a.feasible_set.radius == 2.5 for a in p.agents)


@given(st.integers(0, 10_000), st.integers(1, 6), st.integers(1, 4), st.integers(1, 4))
def test_kkt_instance_is_a_kkt_pair(seed, m, M, n1):
    inst = KktConstructed(m, M, n1, seed=seed).generate()
    p, opt = inst.problem, inst.known_optimum
    eq, _ = coupling_residual(p, opt.x)
    assert np.max(np.abs(eq)) <= 1e-10
    for a, x in zip(p.agents, opt.x):
        stat = a.objective_hessian @ x + a.objective_linear + a.eq_coupling.T @ opt.multiplier
        assert np.linalg.norm(stat) <= 1e-10
        # strictly inside: margin at least 0.1 R
        assert np.linalg.norm(x - a.feasible_set.center) <= 0.9 * a.feasible_set.radius
    assert opt.value == pytest.approx(total_objective(p, opt.x), abs=1e-12)


@given(st.integers(0, 10_000), st.integers(1, 6), st.integers(1, 4), st.integers(0, 3), st.integers(1, 3))
def test_network_instance_shapes(seed, m, M, n1, n2):
    p = NetworkAlloc(m, M, n1, n2, seed=seed).generate().problem
    assert (p.n_eq, p.n_ineq, p.n_agents) == (n1, n2, M)
    assert all(a.ineq_coupling.shape == (n2, m) for a in p.agents)


@pytest.mark.parametrize("seed", range(3))
def test_network_instance_has_a_slater_point(seed):
    # a point meeting the equality rows with every inequality row 0.05 below beta exists
    p = NetworkAlloc(3, 2, 1, 2, seed=seed).generate().problem
    agents = tuple(AgentBlock(np.zeros((a.dim, a.dim)), np.zeros(a.dim), a.feasible_set, a.eq_coupling,
                              a.ineq_coupling) for a in p.agents)
    _, x = reference_solve(SeparableProblem(agents, p.eq_rhs, p.ineq_rhs - 0.05))
    eq, ineq = coupling_residual(p, x)
    assert np.max(np.abs(eq)) <= 1e-8
    assert np.all(ineq <= -0.05 + 1e-8)


def test_mpc_zero_input_rollout_is_feasible():
    inst = MpcRecast(3, 4, seed=1).generate()
    p, meta = inst.problem, inst.meta
    N, nu = 4, meta["nu"]
    traj = simulate(meta["A"], meta["B"], meta["neighbors"], meta["x_init"], [np.zeros((N, nu))] * 3)
    assert all(membership(p, traj))
    assert np.max(np.abs(coupling_residual(p, traj)[0])) <= 1e-12


@pytest.mark.parametrize("seed", range(3))
def test_mpc_forward_simulation_with_random_inputs(seed):
    inst = MpcRecast(4, 3, seed=seed).generate()
    meta = inst.meta
    rng = np.random.default_rng(seed)
    inputs = [rng.uniform(-1, 1, (3, meta["nu"])) for _ in range(4)]
    traj = simulate(meta["A"], meta["B"], meta["neighbors"], meta["x_init"], inputs)
    eq, _ = coupling_residual(inst.problem, traj)
    assert np.max(np.abs(eq)) <= 1e-12
    # perturbing one state breaks the recast dynamics
    bumped = [t.copy() for t in traj]
    bumped[0][meta["nx"]] += 1.0
    assert np.max(np.abs(coupling_residual(inst.problem, bumped)[0])) > 0.5


def test_mpc_objective_is_not_strictly_convex():
    p = MpcRecast(2, 3, seed=0).generate().problem
    assert min(np.linalg.eigvalsh(p.agents[0].objective_hessian)) == 0.0


@pytest.mark.parametrize("spec", [RandomBallQP(3, 2, 1, seed=2), KktConstructed(3, 2, 1, seed=2, radius=2.0),
                                  NetworkAlloc(3, 2, 1, 1, seed=2), MpcRecast(2, 2, seed=2)])
def test_spec_round_trip(spec):
    doc = spec_to_dict(spec)
    assert doc["family"] in FAMILIES
    back = spec_from_dict(doc)
    assert back == spec
    assert same_problem(generate(back).problem, generate(spec).problem)


@pytest.mark.parametrize("bad", [lambda: RandomBallQP(0, 2, 1), lambda: KktConstructed(3, 0, 1),
                                 lambda: NetworkAlloc(3, 2, -1, 1), lambda: MpcRecast(2, 0)])
def test_rejects_bad_dimensions(bad):
    with pytest.raises(ProxCenterError):
        bad().generate()
