"""Shared fixtures, independent oracles and the acceptance summary hook."""

from __future__ import annotations

import numpy as np
import pytest
from scipy.integrate import solve_ivp
from scipy.optimize import root

from streamharvest import Model

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def oracle_rhs(r, c, A, h, u):
    """Plain-python right-hand side, written out term by term."""
    n = len(u)
    out = np.zeros(n)
    for i in range(n):
        move = 0.0
        for j in range(n):
            if j != i:
                move += A[i][j] * u[j] - A[j][i] * u[i]
        out[i] = u[i] * (r[i] - c[i] * u[i]) - h[i] * u[i] + move
    return out


def oracle_equilibrium(model: Model, h, t_end=400.0):
    """Long scipy integration from a large start, polished by scipy's root finder."""
    r, c, A = model.r, model.c, model.A
    h = np.asarray(h, dtype=float)
    u0 = np.maximum(r, 1.0) / c
    sol = solve_ivp(lambda t, u: oracle_rhs(r, c, A, h, u), (0.0, t_end), u0,
                    method="LSODA", rtol=1e-10, atol=1e-12)
    guess = sol.y[:, -1]
    if guess.max() < 1e-6:
        return np.zeros_like(guess)
    res = root(lambda u: oracle_rhs(r, c, A, h, u), guess, method="hybr", tol=1e-14)
    return res.x


def random_irreducible(rng, n, *, rate=(0.1, 3.0), density=0.5, r=(0.5, 5.0), c=(0.2, 3.0)) -> Model:
    """Random model whose movement graph contains a directed cycle through every patch."""
    A = np.where(rng.random((n, n)) < density, rng.uniform(*rate, (n, n)), 0.0)
    perm = rng.permutation(n)
    for k in range(n):
        i, j = perm[(k + 1) % n], perm[k]
        if i != j:
            A[i, j] = rng.uniform(*rate)
    np.fill_diagonal(A, 0.0)
    return Model(rng.uniform(*r, n), rng.uniform(*c, n), A)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)
