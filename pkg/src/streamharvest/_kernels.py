"""Numeric inner loops.

Every kernel here is written in the subset of numpy that numba can compile,
so the same source serves two backends:

* ``numba`` (default): each kernel is wrapped in ``@njit(cache=True)``.
* ``numpy``: the functions run as ordinary Python/numpy code.

Set ``STREAMHARVEST_DISABLE_NUMBA=1`` before import to force the numpy path
(useful for debugging, coverage, and platforms without numba). ``BACKEND``
reports which one is active.

Arrays passed in must be contiguous float64; the public wrappers in
:mod:`streamharvest.model` take care of that.
"""

from __future__ import annotations

import os

import numpy as np

_DISABLE = os.environ.get("STREAMHARVEST_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

try:
    if _DISABLE:
        raise ImportError("disabled by STREAMHARVEST_DISABLE_NUMBA")
    from numba import njit

    BACKEND = "numba"
except ImportError:  # pragma: no cover - exercised only without numba
    njit = None
    BACKEND = "numpy"

# Newton / integrator status codes
CONVERGED = 0
STAGNATED = 1
MAX_ITER = 2
SINGULAR = 3

REACHED_END = 0
STEADY = 1
STEP_COLLAPSE = 2
MAX_STEPS = 3

EPS = 2.220446049250313e-16


def rhs(r, c, A, out_rate, h, u):
    # u_i (r_i - h_i - c_i u_i) + sum_j a_ij u_j - (sum_j a_ji) u_i
    return u * (r - h - c * u - out_rate) + A @ u


def jacobian(r, c, A, out_rate, h, u):
    J = A.copy()
    for i in range(u.shape[0]):
        J[i, i] = r[i] - h[i] - 2.0 * c[i] * u[i] - out_rate[i]
    return J


def percapita(r, c, A, out_rate, h, u):
    """Equilibrium equations divided by u_i; no root at the zero state."""
    return r - h - out_rate - c * u + (A @ u) / u


def percapita_jacobian(r, c, A, out_rate, h, u):
    n = u.shape[0]
    inflow = A @ u
    B = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            B[i, j] = A[i, j] / u[i]
        B[i, i] = -c[i] - inflow[i] / (u[i] * u[i])
    return B


def term_scale(r, c, A, out_rate, h, u):
    """Largest magnitude of the individual terms summed in ``rhs``."""
    s = np.abs(r - h) * u + c * u * u + A @ u + out_rate * u
    return np.max(s)


def newton(r, c, A, out_rate, h, u0, tol_rel, max_iter, max_halvings, stall_limit):
    """Damped Newton for the positive equilibrium.

    Iterates on the per-capita form (u stays strictly positive, so the trivial
    root is never approached) and declares convergence on the raw residual
    max|rhs| <= max(tol_rel * (1 + max u), 16 eps * term scale) together with a
    relative per-capita residual below 1e-9.

    Returns (u, residual, status, iterations).
    """
    n = u0.shape[0]
    u = u0.copy()
    for i in range(n):
        if not u[i] > 0.0:
            u[i] = 1e-8
    g = percapita(r, c, A, out_rate, h, u)
    gnorm = np.max(np.abs(g))
    stalls = 0
    it = 0
    status = MAX_ITER
    while it < max_iter:
        f = rhs(r, c, A, out_rate, h, u)
        res = np.max(np.abs(f))
        tol_f = max(tol_rel * (1.0 + np.max(u)), 16.0 * EPS * term_scale(r, c, A, out_rate, h, u))
        gscale = np.abs(r - h) + out_rate + c * u + (A @ u) / u
        grel = np.max(np.abs(g) / (gscale + 1e-300))
        if res <= tol_f and grel <= 1e-9:
            status = CONVERGED
            break
        B = percapita_jacobian(r, c, A, out_rate, h, u)
        try:
            step = np.linalg.solve(B, -g)
        except Exception:
            status = SINGULAR
            break
        lam = 1.0
        accepted = False
        for _ in range(max_halvings + 1):
            trial = u + lam * step
            if np.min(trial) > 0.0:
                gt = percapita(r, c, A, out_rate, h, trial)
                gtn = np.max(np.abs(gt))
                if gtn < gnorm:
                    u = trial
                    g = gt
                    gnorm = gtn
                    accepted = True
                    break
            lam *= 0.5
        it += 1
        if accepted:
            stalls = 0
        else:
            stalls += 1
            if stalls >= stall_limit:
                status = STAGNATED
                break
    f = rhs(r, c, A, out_rate, h, u)
    return u, np.max(np.abs(f)), status, it


def newton_batch(r, c, A, out_rate, hs, u0, tol_rel, max_iter, max_halvings, stall_limit):
    """Run :func:`newton` from the same start for every row of ``hs``.

    Each row is solved independently of the others, so results do not depend
    on evaluation order.
    """
    m = hs.shape[0]
    n = u0.shape[0]
    us = np.zeros((m, n))
    status = np.empty(m, dtype=np.int64)
    for k in range(m):
        u, res, st, it = newton(r, c, A, out_rate, hs[k], u0, tol_rel, max_iter, max_halvings, stall_limit)
        us[k] = u
        status[k] = st
    return us, status


# Dormand-Prince 5(4) tableau
_C2, _C3, _C4, _C5 = 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0
_A21 = 1.0 / 5.0
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
_A61, _A62, _A63, _A64, _A65 = 9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0
_B1, _B3, _B4, _B5, _B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
# fifth-order weights minus embedded fourth-order weights
_E1 = 71.0 / 57600.0
_E3 = -71.0 / 16695.0
_E4 = 71.0 / 1920.0
_E5 = -17253.0 / 339200.0
_E6 = 22.0 / 525.0
_E7 = -1.0 / 40.0


def dopri54(r, c, A, out_rate, h, u0, t_end, dt0, rtol, atol, steady_tol, max_steps, record):
    """Adaptive Dormand-Prince integration of ``rhs`` from t=0 to ``t_end``.

    Stops early once max|rhs| < ``steady_tol``. Components a step pushes
    below -1e-12 are reset to zero. With ``record`` every accepted step is
    stored.

    Returns (times, states, count, status, t_final, u_final).
    """
    n = u0.shape[0]
    cap = 256 if record else 1
    ts = np.empty(cap)
    ys = np.empty((cap, n))
    ts[0] = 0.0
    ys[0] = u0
    count = 1
    t = 0.0
    y = u0.copy()
    k1 = rhs(r, c, A, out_rate, h, y)
    if np.max(np.abs(k1)) < steady_tol:
        return ts[:count], ys[:count], count, STEADY, t, y
    dt = min(dt0, t_end)
    status = MAX_STEPS
    steps = 0
    while steps < max_steps:
        if t >= t_end:
            status = REACHED_END
            break
        if dt < 1e-14 * max(1.0, abs(t)):
            status = STEP_COLLAPSE
            break
        if t + dt > t_end:
            dt = t_end - t
        k2 = rhs(r, c, A, out_rate, h, y + dt * (_A21 * k1))
        k3 = rhs(r, c, A, out_rate, h, y + dt * (_A31 * k1 + _A32 * k2))
        k4 = rhs(r, c, A, out_rate, h, y + dt * (_A41 * k1 + _A42 * k2 + _A43 * k3))
        k5 = rhs(r, c, A, out_rate, h, y + dt * (_A51 * k1 + _A52 * k2 + _A53 * k3 + _A54 * k4))
        k6 = rhs(r, c, A, out_rate, h, y + dt * (_A61 * k1 + _A62 * k2 + _A63 * k3 + _A64 * k4 + _A65 * k5))
        y_new = y + dt * (_B1 * k1 + _B3 * k3 + _B4 * k4 + _B5 * k5 + _B6 * k6)
        k7 = rhs(r, c, A, out_rate, h, y_new)
        err = dt * (_E1 * k1 + _E3 * k3 + _E4 * k4 + _E5 * k5 + _E6 * k6 + _E7 * k7)
        sc = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        enorm = np.sqrt(np.mean((err / sc) ** 2))
        steps += 1
        if enorm <= 1.0:
            t = t + dt
            if np.min(y_new) < -1e-12:
                for i in range(n):
                    if y_new[i] < -1e-12:
                        y_new[i] = 0.0
                k7 = rhs(r, c, A, out_rate, h, y_new)
            y = y_new
            k1 = k7
            if record:
                if count == cap:
                    cap *= 2
                    ts2 = np.empty(cap)
                    ys2 = np.empty((cap, n))
                    ts2[:count] = ts[:count]
                    ys2[:count] = ys[:count]
                    ts = ts2
                    ys = ys2
                ts[count] = t
                ys[count] = y
                count += 1
            if np.max(np.abs(k1)) < steady_tol:
                status = STEADY
                break
            fac = 5.0 if enorm == 0.0 else min(5.0, max(0.2, 0.9 * enorm ** -0.2))
        else:
            fac = max(0.2, 0.9 * enorm ** -0.2)
        dt = dt * fac
    if t >= t_end and status == MAX_STEPS:
        status = REACHED_END
    if not record:
        ts[0] = t
        ys[0] = y
    return ts[:count], ys[:count], count, status, t, y


if njit is not None:
    rhs = njit(cache=True)(rhs)
    jacobian = njit(cache=True)(jacobian)
    percapita = njit(cache=True)(percapita)
    percapita_jacobian = njit(cache=True)(percapita_jacobian)
    term_scale = njit(cache=True)(term_scale)
    newton = njit(cache=True)(newton)
    newton_batch = njit(cache=True)(newton_batch)
    dopri54 = njit(cache=True)(dopri54)
