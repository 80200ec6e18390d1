"""Compiled kernel for the batched ball subproblem.

Every agent is solved independently in its eigenbasis; the loops are
explicit so the work per call is O(m^2) per agent with no per-operation
interpreter overhead.  Summation order is fixed, so results are
bit-reproducible.
"""

import math

import numpy as np
from numba import njit

NULL_RTOL = 1e-12


@njit(cache=True)
def trs_batch(g_eff, x0, R, c, evals, V, Hx0, rtol, maxiter):
    """Return ``(x, value, mu, iterations, hard, failed_residual)``.

    ``failed_residual`` is negative when every agent converged, else the
    largest secular residual among agents that hit ``maxiter``.
    """
    G, m = g_eff.shape
    x = np.empty((G, m))
    value = np.empty(G)
    mu = np.zeros(G)
    iters = np.zeros(G, dtype=np.int64)
    hard = np.zeros(G, dtype=np.bool_)
    failed = -1.0
    w = np.empty(m)
    d = np.empty(m)
    z = np.empty(m)
    for a in range(G):
        # w = V' (g_eff + H x0), row-major traversal of V
        for j in range(m):
            w[j] = 0.0
            d[j] = evals[a, j] + c
        for i in range(m):
            b = g_eff[a, i] + Hx0[a, i]
            for j in range(m):
                w[j] += V[a, i, j] * b
        dmax = max(d[m - 1], 1.0) if m > 0 else 1.0
        wnorm2 = 0.0
        wnull2 = 0.0
        any_null = False
        for j in range(m):
            wnorm2 += w[j] * w[j]
            if d[j] <= NULL_RTOL * dmax:
                any_null = True
                wnull2 += w[j] * w[j]
        wnorm = math.sqrt(wnorm2)
        wnull = math.sqrt(wnull2)
        negligible = wnull <= NULL_RTOL * max(wnorm, 1.0)
        Ra = R[a]
        interior = False
        if negligible:
            # flat directions with no pull are dropped: minimum-norm minimizer
            zz = 0.0
            for j in range(m):
                if d[j] <= NULL_RTOL * dmax:
                    w[j] = 0.0
                    d[j] = 1.0
                z[j] = -w[j] / d[j]
                zz += z[j] * z[j]
            interior = zz <= Ra * Ra
            hard[a] = interior and any_null
        if not interior:
            hi = wnorm / Ra
            mu_a = 0.0 if negligible else wnull / Ra
            tol = rtol * Ra
            err = math.inf
            k = 0
            while k < maxiter:
                k += 1
                s1 = 0.0
                s2 = 0.0
                for j in range(m):
                    inv = 1.0 / (d[j] + mu_a)
                    t2 = w[j] * w[j] * inv * inv
                    s1 += t2
                    s2 += t2 * inv
                yn = math.sqrt(s1)
                err = yn - Ra
                if abs(err) <= tol:
                    break
                mu_a = min(max(mu_a + (yn / Ra - 1.0) * yn * yn / s2, 0.0), hi)
            if abs(err) > tol:
                failed = max(failed, abs(err))
            zz = 0.0
            for j in range(m):
                z[j] = -w[j] / (d[j] + mu_a)
                zz += z[j] * z[j]
            scale = Ra / math.sqrt(zz)
            for j in range(m):
                z[j] *= scale
            mu[a] = mu_a
            iters[a] = k
        # x = x0 + V z; value = psi(x) + g_eff'x + (c/2)||z||^2, quadratic part in the eigenbasis
        quad = 0.0
        lin = 0.0
        for i in range(m):
            y = 0.0
            for j in range(m):
                y += V[a, i, j] * z[j]
            x[a, i] = x0[a, i] + y
            quad += x0[a, i] * 0.5 * Hx0[a, i] + y * Hx0[a, i]
            lin += g_eff[a, i] * x[a, i]
        ez = 0.0
        zz = 0.0
        for j in range(m):
            ez += evals[a, j] * z[j] * z[j]
            zz += z[j] * z[j]
        value[a] = quad + 0.5 * ez + lin + 0.5 * c * zz
    return x, value, mu, iters, hard, failed
