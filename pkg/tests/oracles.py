"""Independent reference implementations used by the tests.

Nothing here imports the library's transform or solver internals.
"""

import math

import numpy as np


def sigma_seconds(k, n, fs, coeffs, freq_mode):
    """Window width for voice k, written out from the window definition."""
    a, b, c = coeffs
    if freq_mode == "hz":
        f = k * fs / n
        return (a * f * f + b * f + c) / f
    nu = k / n
    return (a * nu * nu + b * nu + c) / nu / fs


def brute_force_st(x, fs, coeffs, freq_mode="hz", voices=None, span=12.0):
    """Riemann sum of the windowed-exponential integral on the periodic extension.

    S[k, j] = sum_m x[m] w_k(t_j - t_m) exp(-i 2 pi f_k t_m) dt, with the
    Gaussian window summed over +-``span`` standard deviations of
    time-domain periods, then rescaled so that sum_m w_k dt = 1. ``voices``
    restricts the evaluation to some rows (others are left as NaN).
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    dt = 1.0 / fs
    period = n * dt
    t = np.arange(n) * dt
    out = np.full((n // 2 + 1, n), np.nan, dtype=complex)
    out[0, :] = x.mean()
    lag = np.arange(n) * dt
    for k in voices if voices is not None else range(1, n // 2 + 1):
        s = sigma_seconds(k, n, fs, coeffs, freq_mode)
        q_max = int(math.ceil(span * s / period)) + 2
        w = np.zeros(n)
        for q0 in range(-q_max, q_max + 1, 20000):
            q = np.arange(q0, min(q0 + 20000, q_max + 1))
            d = lag[:, None] + q[None, :] * period
            w += np.exp(-d * d / (2.0 * s * s)).sum(axis=1)
        w /= w.sum() * dt
        f = k * fs / n
        phased = x * np.exp(-2j * np.pi * f * t)
        for j in range(n):
            out[k, j] = np.sum(phased * w[(j - np.arange(n)) % n]) * dt
    return out


def qp_dual(K, y, c):
    """Soft-margin SVM dual solved by an interior-point QP (cvxopt).

    Returns ``(alpha, bias, objective)`` with the objective written as
    sum(alpha) - 1/2 (alpha y)^T K (alpha y).
    """
    from cvxopt import matrix, solvers

    n = y.size
    P = matrix(np.outer(y, y) * K)
    q = matrix(-np.ones(n))
    G = matrix(np.vstack([-np.eye(n), np.eye(n)]))
    h = matrix(np.concatenate([np.zeros(n), np.full(n, c)]))
    A = matrix(y.reshape(1, -1).astype(float))
    b = matrix(0.0)
    opts = {"show_progress": False, "abstol": 1e-12, "reltol": 1e-12, "feastol": 1e-12,
            "maxiters": 200}
    sol = solvers.qp(P, q, G, h, A, b, options=opts)
    alpha = np.clip(np.array(sol["x"]).ravel(), 0.0, c)
    ay = alpha * y
    obj = float(alpha.sum() - 0.5 * ay @ K @ ay)
    grad = K @ ay
    free = (alpha > 1e-6 * c) & (alpha < c * (1 - 1e-6))
    if free.any():
        bias = float(np.mean(y[free] - grad[free]))
    else:
        # any b between the bounds implied by the bounded vectors is optimal
        r = y - grad
        up = ((alpha <= 1e-6 * c) & (y > 0)) | ((alpha >= c * (1 - 1e-6)) & (y < 0))
        lo_b = r[up].max() if up.any() else r.min()
        hi_b = r[~up].min() if (~up).any() else r.max()
        bias = 0.5 * (lo_b + hi_b)
    return alpha, bias, obj
