import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from proxcenter import AgentBlock, Ball, SeparableProblem

settings.register_profile("default", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def random_problem(rng, dims=(3, 4, 2), n1=2, n2=0, radius=1.0):
    """Small ball-constrained problem with random PSD blocks."""
    agents = []
    for m in dims:
        G = rng.standard_normal((max(1, m // 2), m))
        agents.append(AgentBlock(G.T @ G, rng.standard_normal(m), Ball(rng.standard_normal(m) * 0.1, radius),
                                 rng.standard_normal((n1, m)), rng.standard_normal((n2, m))))
    return SeparableProblem(tuple(agents), rng.standard_normal(n1), rng.uniform(0, 1, n2))


def ball_point(rng, ball):
    u = rng.standard_normal(ball.dim)
    return ball.center + u / np.linalg.norm(u) * ball.radius * rng.uniform() ** (1 / ball.dim)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def report(tag, name, passed, detail=""):
    """Record one acceptance line; the terminal summary prints them all."""
    line = f"{'PASS' if passed else 'FAIL'} {tag} {name}{': ' + detail if detail else ''}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
