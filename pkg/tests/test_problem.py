import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from proxcenter import (
    AgentBlock, Ball, DimensionError, NotConvexError, SeparableProblem, Simplex,
    coupling_residual, load_problem, membership, save_problem, total_objective,
)
from proxcenter.problem import violation

from conftest import ball_point, random_problem


def _single(H, g, C, gamma, radius=10.0):
    m = len(g)
    return SeparableProblem((AgentBlock(H, g, Ball(np.zeros(m), radius), C),), gamma)


def test_total_objective_zero_objective():
    agents = tuple(AgentBlock(np.zeros((2, 2)), np.zeros(2), Ball(np.zeros(2), 1.0), np.ones((1, 2)))
                   for _ in range(3))
    p = SeparableProblem(agents, [0.0])
    assert total_objective(p, [np.array([0.3, -0.1])] * 3) == 0.0


def test_total_objective_hand_value():
    p = _single(2 * np.eye(2), [1.0, -1.0], np.eye(2), [0.0, 0.0])
    assert total_objective(p, [np.array([1.0, 1.0])]) == pytest.approx(2.0, abs=1e-15)


def test_total_objective_matches_scalar_loops(rng):
    p = random_problem(rng, dims=(3, 5, 2))
    xs = [ball_point(rng, a.feasible_set) for a in p.agents]
    want = 0.0
    for a, x in zip(p.agents, xs):
        H, g = a.objective_hessian, a.objective_linear
        for i in range(a.dim):
            want += g[i] * x[i]
            for j in range(a.dim):
                want += 0.5 * H[i, j] * x[i] * x[j]
    assert total_objective(p, xs) == pytest.approx(want, abs=1e-12)


def test_dimension_mismatch_names_agent(rng):
    p = random_problem(rng, dims=(3, 4))
    with pytest.raises(DimensionError, match="agent 1") as err:
        total_objective(p, [np.zeros(3), np.zeros(3)])
    assert err.value.agent == 1
    with pytest.raises(DimensionError):
        coupling_residual(p, [np.zeros(3)])


def test_coupling_residual_by_construction(rng):
    p0 = random_problem(rng)
    xs = [ball_point(rng, a.feasible_set) for a in p0.agents]
    gamma = sum(a.eq_coupling @ x for a, x in zip(p0.agents, xs))
    p = SeparableProblem(p0.agents, gamma)
    eq, ineq = coupling_residual(p, xs)
    assert np.allclose(eq, 0.0, atol=1e-13) and ineq.size == 0


def test_coupling_residual_hand_value():
    p = _single(np.zeros((2, 2)), [0.0, 0.0], np.eye(2), [0.0, 0.0])
    eq, _ = coupling_residual(p, [np.array([1.0, 2.0])])
    assert np.array_equal(eq, [1.0, 2.0])


def test_coupling_residual_matches_dense_matvec(rng):
    p = random_problem(rng, dims=(3, 4, 2), n1=3, n2=2)
    xs = [ball_point(rng, a.feasible_set) for a in p.agents]
    big = np.block([[a.eq_coupling for a in p.agents], [a.ineq_coupling for a in p.agents]])
    dense = big @ np.concatenate(xs) - np.concatenate([p.eq_rhs, p.ineq_rhs])
    eq, ineq = coupling_residual(p, xs)
    assert np.allclose(np.concatenate([eq, ineq]), dense, atol=1e-12, rtol=0)


def test_membership_examples():
    ball = AgentBlock(np.eye(2), np.zeros(2), Ball(np.zeros(2), 1.0), np.ones((1, 2)))
    simp = AgentBlock(np.zeros((3, 3)), np.zeros(3), Simplex(3), np.ones((1, 3)))
    p = SeparableProblem((ball, simp), [0.0])
    assert membership(p, [np.zeros(2), np.full(3, 1 / 3)]) == [True, True]
    assert membership(p, [np.array([1.1, 0.0]), np.full(3, 1 / 3)]) == [False, True]


def test_membership_tolerances():
    b = Ball(np.zeros(3), 1.0)
    assert b.contains([1.0 + 5e-10, 0, 0]) and not b.contains([1.0 + 2e-9, 0, 0])
    s = Simplex(2)
    assert s.contains([1.0 + 5e-10, -5e-13]) and not s.contains([1.0 + 1e-12, -1e-11])
    assert not s.contains([0.5, 0.5 + 2e-9])


def test_violation_projects_inequality_part():
    a = AgentBlock(np.zeros((1, 1)), [0.0], Ball([0.0], 5.0), [[1.0]], [[1.0], [-1.0]])
    p = SeparableProblem((a,), [1.0], [0.0, 0.0])
    eq_v, in_v = violation(p, [np.array([3.0])])
    assert eq_v == pytest.approx(2.0) and in_v == pytest.approx(3.0)


@pytest.mark.parametrize("H, exc", [
    ([[1.0, 0.5], [0.0, 1.0]], NotConvexError),
    ([[1.0, 0.0], [0.0, -1e-6]], NotConvexError),
])
def test_bad_hessians_rejected(H, exc):
    with pytest.raises(exc):
        AgentBlock(H, [0.0, 0.0], Ball([0.0, 0.0], 1.0), [[1.0, 1.0]])


def test_tiny_negative_eigenvalue_is_clipped():
    a = AgentBlock([[1.0, 0.0], [0.0, -1e-11]], [0.0, 0.0], Ball([0.0, 0.0], 1.0), [[1.0, 1.0]])
    assert a.eigenvalues.min() >= 0.0


def test_shape_checks():
    with pytest.raises(DimensionError):
        AgentBlock(np.eye(2), [0.0, 0.0], Ball([0.0, 0.0], 1.0), [[1.0, 1.0, 1.0]])
    with pytest.raises(DimensionError):
        AgentBlock(np.eye(3), [0.0, 0.0], Ball([0.0, 0.0], 1.0))
    a = AgentBlock(np.eye(2), [0.0, 0.0], Ball([0.0, 0.0], 1.0), [[1.0, 1.0]])
    b = AgentBlock(np.eye(2), [0.0, 0.0], Ball([0.0, 0.0], 1.0), [[1.0, 1.0], [0.0, 1.0]])
    with pytest.raises(DimensionError, match="agent 1"):
        SeparableProblem((a, b), [0.0])
    with pytest.raises(DimensionError):
        SeparableProblem((AgentBlock(np.eye(2), [0.0, 0.0], Ball([0.0, 0.0], 1.0)),))
    with pytest.raises(ValueError):
        Ball([0.0], 0.0)
    with pytest.raises(ValueError):
        Simplex(0)


def test_flat_row_major_storage():
    H = np.array([[2.0, 1.0], [1.0, 3.0]])
    C = np.array([[1.0, 2.0], [3.0, 4.0]])
    a = AgentBlock(H.ravel(), [0.0, 0.0], Ball([0.0, 0.0], 1.0), C.ravel())
    assert np.array_equal(a.objective_hessian, H) and np.array_equal(a.eq_coupling, C)


def test_problem_is_immutable(rng):
    p = random_problem(rng)
    with pytest.raises(ValueError):
        p.agents[0].objective_hessian[0, 0] = 5.0
    with pytest.raises(ValueError):
        p.eq_rhs[0] = 1.0


def test_instance_file_roundtrip(tmp_path, rng):
    p = random_problem(rng, n2=2)
    simp = AgentBlock(np.zeros((3, 3)), [1.0, 2.0, 3.0], Simplex(3), np.ones((2, 3)), np.ones((2, 3)))
    p = SeparableProblem(p.agents + (simp,), p.eq_rhs, p.ineq_rhs)
    path = tmp_path / "inst.json"
    save_problem(p, path, {"note": "x"})
    doc = json.loads(path.read_text())
    assert set(doc) == {"agents", "gamma", "beta", "note"}
    assert set(doc["agents"][0]) == {"H", "g", "set", "C", "D"}
    assert set(doc["agents"][0]["set"]["ball"]) == {"center", "radius"}
    assert doc["agents"][-1]["set"] == {"simplex": {"dim": 3}}
    q, raw = load_problem(path)
    assert raw["note"] == "x"
    for a, b in zip(p.agents, q.agents):
        assert np.array_equal(a.objective_hessian, b.objective_hessian)
        assert np.array_equal(a.coupling, b.coupling)
        assert type(a.feasible_set) is type(b.feasible_set)
    assert np.array_equal(p.rhs, q.rhs)


def test_instance_file_accepts_flat_matrices():
    doc = {"agents": [{"H": [1, 0, 0, 1], "g": [0, 0], "set": {"ball": {"center": [0, 0], "radius": 1}},
                       "C": [1, 1], "D": []}], "gamma": [0.5], "beta": []}
    p = SeparableProblem.from_dict(doc)
    assert p.n_eq == 1 and p.n_ineq == 0 and p.dims == [2]


@given(st.integers(0, 2**32 - 1), st.floats(0, 1))
def test_objective_convex_along_segments(seed, t):
    rng = np.random.default_rng(seed)
    p = random_problem(rng)
    x = [ball_point(rng, a.feasible_set) for a in p.agents]
    y = [ball_point(rng, a.feasible_set) for a in p.agents]
    mid = [t * a + (1 - t) * b for a, b in zip(x, y)]
    assert total_objective(p, mid) <= t * total_objective(p, x) + (1 - t) * total_objective(p, y) + 1e-9


@given(st.integers(0, 2**32 - 1), st.floats(0, 1))
def test_residual_affine(seed, t):
    rng = np.random.default_rng(seed)
    p = random_problem(rng, n2=2)
    x = [ball_point(rng, a.feasible_set) for a in p.agents]
    y = [ball_point(rng, a.feasible_set) for a in p.agents]
    mid = [t * a + (1 - t) * b for a, b in zip(x, y)]
    rm = np.concatenate(coupling_residual(p, mid))
    rx, ry = np.concatenate(coupling_residual(p, x)), np.concatenate(coupling_residual(p, y))
    assert np.allclose(rm, t * rx + (1 - t) * ry, atol=1e-10, rtol=0)
