import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from proxcenter import Entropy, InfeasiblePointError, MultiplierSpace, SquaredEuclidean, project_multiplier, prox_value
from proxcenter.prox import prox_for_set
from proxcenter.problem import Ball, Simplex


def _simplex_point(rng, m):
    return rng.dirichlet(np.full(m, 0.7))


def test_squared_euclidean_center_is_zero():
    assert prox_value(SquaredEuclidean(np.zeros(3), 1.0), np.zeros(3)) == 0.0


def test_entropy_vertex():
    assert prox_value(Entropy(2), [1.0, 0.0]) == pytest.approx(math.log(2), abs=1e-15)


def test_entropy_matches_scalar_loop():
    x = [0.4, 0.3, 0.2, 0.1]
    want = math.log(4)
    for xi in x:
        want += xi * math.log(xi)
    assert prox_value(Entropy(4), x) == pytest.approx(want, abs=1e-15)


def test_prox_bounds_and_centers():
    d = prox_for_set(Ball([1.0, -1.0], 3.0))
    assert d.upper_bound == 4.5 and d.convexity_parameter == 1.0
    assert d.value([1.0, -1.0]) == 0.0
    e = prox_for_set(Simplex(5))
    assert e.upper_bound == pytest.approx(math.log(5))
    assert e.value(e.center) == pytest.approx(0.0, abs=1e-15)


def test_infeasible_points_rejected():
    with pytest.raises(InfeasiblePointError):
        prox_value(SquaredEuclidean(np.zeros(2), 1.0), [1.0, 1.0])
    with pytest.raises(InfeasiblePointError):
        prox_value(Entropy(2), [0.7, 0.7])
    with pytest.raises(InfeasiblePointError):
        prox_value(Entropy(2), [1.1, -0.1])


def test_entropy_gradient_floors_zeros():
    g = Entropy(3).gradient([1.0, 0.0, 0.0])
    assert np.all(np.isfinite(g)) and g[1] == pytest.approx(1 + math.log(1e-300))


def test_project_multiplier_examples():
    q = MultiplierSpace(0, 2)
    assert np.array_equal(project_multiplier(q, [-1.0, 2.0]), [0.0, 2.0])
    qb = MultiplierSpace(2, 0, eq_radius=1.0)
    assert np.allclose(project_multiplier(qb, [3.0, 4.0]), [0.6, 0.8], atol=1e-15)
    lam = np.array([0.1, 0.2])
    assert np.array_equal(project_multiplier(qb, lam), lam)


def test_multiplier_space_geometry():
    assert MultiplierSpace(3, 0, eq_radius=2.0).upper_bound == 2.0
    assert MultiplierSpace(3, 0, eq_radius=2.0).compact
    assert not MultiplierSpace(3, 1, eq_radius=2.0).compact
    assert math.isinf(MultiplierSpace(3).upper_bound)
    with pytest.raises(ValueError):
        MultiplierSpace(2, 0, eq_radius=0.0)


@given(st.integers(0, 2**32 - 1), st.sampled_from([None, 0.5, 2.0]))
def test_projection_idempotent_and_nonexpansive(seed, radius):
    rng = np.random.default_rng(seed)
    q = MultiplierSpace(3, 2, radius)
    a, b = 3 * rng.standard_normal(5), 3 * rng.standard_normal(5)
    pa, pb = q.project(a), q.project(b)
    assert q.contains(pa)
    assert np.allclose(q.project(pa), pa, atol=1e-15)
    assert np.linalg.norm(pa - pb) <= np.linalg.norm(a - b) + 1e-12


@given(st.integers(0, 2**32 - 1))
def test_squared_euclidean_strong_convexity(seed):
    rng = np.random.default_rng(seed)
    c = rng.standard_normal(4)
    d = SquaredEuclidean(c, 2.0)
    x, y = c + rng.uniform(-0.9, 0.9, 4), c + rng.uniform(-0.9, 0.9, 4)
    assert d.value(y) >= d.value(x) + d.gradient(x) @ (y - x) + 0.5 * d.norm(y - x) ** 2 - 1e-9
    assert d.value(x) >= 0.5 * d.norm(x - c) ** 2 - 1e-12


@given(st.integers(0, 2**32 - 1), st.integers(2, 8))
def test_entropy_strong_convexity_in_one_norm(seed, m):
    rng = np.random.default_rng(seed)
    d = Entropy(m)
    x, y = _simplex_point(rng, m), _simplex_point(rng, m)
    x = np.maximum(x, 1e-12)
    x /= x.sum()
    assert d.value(y) >= d.value(x) + d.gradient(x) @ (y - x) + 0.5 * d.norm(y - x) ** 2 - 1e-9
    assert d.value(x) >= 0.5 * d.norm(x - d.center) ** 2 - 1e-9
    assert 0.0 <= d.value(x) <= d.upper_bound + 1e-12
