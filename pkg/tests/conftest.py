"""Shared builders for the test suite."""

import numpy as np
import pytest

from hrlab.model import RadialProfile, log_knots


def random_profile(seed=0, r_min=0.5, r_max=8.0, n_spans=16, degree=4):
    """Spline with random interior coefficients and clamped-zero edges."""
    rng = np.random.default_rng(seed)
    knots = log_knots(r_min, r_max, n_spans, degree)
    n = len(knots) - degree - 1
    coef = np.zeros(n)
    coef[degree : n - degree] = rng.uniform(-1.0, 1.0, n - 2 * degree)
    return RadialProfile(knots, degree, coef)


def fd_gradient(u, x, h):
    """4th-order central gradient of a scalar callable at point x."""
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    for i in range(len(x)):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (-u(x + 2 * e) + 8 * u(x + e) - 8 * u(x - e) + u(x - 2 * e)) / (12 * h)
    return g


def fd_hessian(u, x, h):
    """Central-difference Hessian (4th order on the diagonal)."""
    x = np.asarray(x, dtype=float)
    n = len(x)
    H = np.zeros((n, n))
    u0 = u(x)
    for i in range(n):
        ei = np.zeros(n)
        ei[i] = h
        H[i, i] = (
            -u(x + 2 * ei) + 16 * u(x + ei) - 30 * u0 + 16 * u(x - ei) - u(x - 2 * ei)
        ) / (12 * h**2)
        for j in range(i):
            ej = np.zeros(n)
            ej[j] = h
            H[i, j] = H[j, i] = (
                u(x + ei + ej) - u(x + ei - ej) - u(x - ei + ej) + u(x - ei - ej)
            ) / (4 * h**2)
    return H


@pytest.fixture
def profile():
    return random_profile(seed=42)
