import itertools

import numpy as np
import pytest

from daisac.sca.inner import ConvexSubproblem, inner_convex_solve, kkt_residual


def box_qp_oracle(Q, c, lo, hi):
    """Enumerate active sets of a small box-constrained convex QP."""
    n = len(c)
    best, best_x = np.inf, None
    for pattern in itertools.product((0, 1, 2), repeat=n):
        x = np.zeros(n)
        free = [i for i, s in enumerate(pattern) if s == 0]
        fixed = [i for i, s in enumerate(pattern) if s != 0]
        for i in fixed:
            x[i] = lo[i] if pattern[i] == 1 else hi[i]
        if free:
            F, X = np.ix_(free, free), np.ix_(free, fixed)
            rhs = -c[free] - (Q[X] @ x[fixed] if fixed else 0.0)
            try:
                x[free] = np.linalg.solve(Q[F], rhs)
            except np.linalg.LinAlgError:
                continue
        if np.any(x < lo - 1e-12) or np.any(x > hi + 1e-12):
            continue
        val = 0.5 * x @ Q @ x + c @ x
        if val < best:
            best, best_x = val, x
    return best_x, best


def test_matches_active_set_oracle(rng):
    for _ in range(30):
        n = int(rng.integers(2, 5))
        A = rng.normal(size=(n, n))
        Q = A @ A.T + 0.1 * np.eye(n)
        c = rng.normal(size=n) * 3
        lo, hi = -np.ones(n), np.ones(n)
        prob = ConvexSubproblem(lambda x: 0.5 * x @ Q @ x + c @ x, lambda x: Q @ x + c, np.zeros(n), lo, hi)
        res = inner_convex_solve(prob)
        x_star, f_star = box_qp_oracle(Q, c, lo, hi)
        assert not res.failed
        assert res.objective == pytest.approx(f_star, abs=1e-8)
        assert np.allclose(res.x, x_star, atol=1e-5)


def test_linear_constraint_and_certificate():
    # min (x-2)^2 + (y-2)^2 s.t. x + y <= 1  ->  (0.5, 0.5)
    prob = ConvexSubproblem(lambda z: np.sum((z - 2) ** 2), lambda z: 2 * (z - 2), np.zeros(2),
                            np.full(2, -5.0), np.full(2, 5.0),
                            lambda z: np.array([1 - z.sum()]), lambda z: -np.ones((1, 2)))
    res = inner_convex_solve(prob)
    assert np.allclose(res.x, [0.5, 0.5], atol=1e-7)
    assert res.kkt_residual < 1e-6
    # an interior non-stationary point has a large residual
    assert kkt_residual(prob, np.array([0.0, 0.0])) > 0.5


def test_infeasible_point_residual():
    prob = ConvexSubproblem(lambda z: z @ z, lambda z: 2 * z, np.zeros(1), np.zeros(1), np.ones(1))
    assert kkt_residual(prob, np.array([-0.5])) >= 0.5
