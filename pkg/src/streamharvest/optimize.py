"""Numerical maximization of equilibrium biomass or yield on the budget simplex."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import ArgumentError, NumericalError
from .model import HarvestAllocation, Model, equilibrium_batch
from .twopatch import TwoPatchScenario

__all__ = [
    "Method",
    "OptimizationProblem",
    "OptimizationResult",
    "objective_values",
    "project_simplex",
    "sweep_theta",
    "simplex_grid_search",
    "projected_gradient",
    "optimize",
    "two_patch_scenario",
]

OBJECTIVES = ("biomass", "yield")
GOLDEN_TOL = 1e-6
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


class Method(str, Enum):
    THETA_SWEEP = "ThetaSweep"
    SIMPLEX_GRID = "SimplexGrid"
    PROJECTED_GRADIENT = "ProjectedGradient"
    AUTO = "Auto"


@dataclass(frozen=True)
class OptimizationProblem:
    model: Model
    H: float
    objective: str = "biomass"
    method: Method = Method.AUTO

    def __post_init__(self):
        if self.objective not in OBJECTIVES:
            raise ArgumentError(f"objective must be one of {OBJECTIVES}, got {self.objective!r}")
        if not (math.isfinite(self.H) and self.H > 0):
            raise ArgumentError("budget H must be positive and finite")
        object.__setattr__(self, "method", Method(self.method))
        if self.method is Method.THETA_SWEEP and two_patch_scenario(self.model, self.H) is None:
            raise ArgumentError("ThetaSweep needs two patches with downstream-biased movement")


@dataclass(frozen=True, eq=False)
class OptimizationResult:
    h_star: HarvestAllocation
    value: float
    evaluations: int
    method: str
    # grid spacing (sweeps, grids) or projected-gradient norm at termination
    certificate: float
    landscape: np.ndarray | None = None
    theta_star: float | None = None
    flat: bool = False
    extra: dict = field(default_factory=dict)


def two_patch_scenario(model: Model, H: float) -> TwoPatchScenario | None:
    """Read a two-patch model as an upstream/downstream pair, if it is one."""
    if model.n != 2:
        return None
    d, down = model.A[0, 1], model.A[1, 0]
    if not (d > 0 and down > d):
        return None
    return TwoPatchScenario(model.r[0], model.r[1], model.c[0], model.c[1], d, down - d, H)


def objective_values(model: Model, hs, objective: str) -> np.ndarray:
    """Objective at equilibrium for each row of ``hs``; extinct rows score 0.

    Rows may carry negative entries (stocking); no feasibility check is made.
    """
    hs = np.atleast_2d(np.asarray(hs, dtype=float))
    us = equilibrium_batch(model, hs)
    if objective == "biomass":
        vals = us.sum(axis=1)
    elif objective == "yield":
        vals = np.einsum("ij,ij->i", hs, us)
    else:
        raise ArgumentError(f"unknown objective {objective!r}")
    return vals


def project_simplex(y, H: float) -> np.ndarray:
    """Euclidean projection of ``y`` onto {x >= 0, sum x = H} (sort-based)."""
    y = np.asarray(y, dtype=float)
    u = np.sort(y)[::-1]
    css = np.cumsum(u) - H
    idx = np.arange(1, y.shape[0] + 1)
    rho = np.nonzero(u - css / idx > 0)[0][-1]
    tau = css[rho] / (rho + 1.0)
    x = np.maximum(y - tau, 0.0)
    # exact budget despite rounding
    x *= H / x.sum()
    return x


def _feasible(h, H) -> HarvestAllocation:
    h = np.maximum(np.asarray(h, dtype=float), 0.0)
    h = h * (H / h.sum())
    return HarvestAllocation(h, H)


def sweep_theta(s: TwoPatchScenario, objective: str, resolution: float = 1e-3) -> OptimizationResult:
    """Uniform theta grid followed by golden-section refinement around the best point."""
    if not 1e-4 <= resolution <= 1e-1:
        raise ArgumentError(f"resolution {resolution!r} outside [1e-4, 1e-1]")
    model = s.model
    steps = int(round(1.0 / resolution))
    thetas = np.linspace(0.0, 1.0, steps + 1)
    efforts = np.column_stack([thetas * s.H, (1.0 - thetas) * s.H])
    vals = objective_values(model, efforts, objective)
    bad = ~np.isfinite(vals)
    if bad.any():
        raise NumericalError(f"objective is not finite at theta={thetas[bad][0]!r}")
    evaluations = thetas.shape[0]
    k = int(np.argmax(vals))
    best_theta, best_val = float(thetas[k]), float(vals[k])

    def value(theta):
        return float(objective_values(model, s.efforts(theta)[None, :], objective)[0])

    lo, hi = max(0.0, best_theta - 1.0 / steps), min(1.0, best_theta + 1.0 / steps)
    a, b = lo, hi
    x1, x2 = b - _INVPHI * (b - a), a + _INVPHI * (b - a)
    f1, f2 = value(x1), value(x2)
    evaluations += 2
    while b - a > GOLDEN_TOL:
        if f1 >= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _INVPHI * (b - a)
            f1 = value(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INVPHI * (b - a)
            f2 = value(x2)
        evaluations += 1
    for theta, val in ((x1, f1), (x2, f2)):
        if not math.isfinite(val):
            raise NumericalError(f"objective is not finite at theta={theta!r}")
        if val > best_val:
            best_theta, best_val = float(theta), val
    landscape = np.column_stack([thetas, vals])
    return OptimizationResult(
        h_star=s.allocation(best_theta),
        value=best_val,
        evaluations=evaluations,
        method=Method.THETA_SWEEP.value,
        certificate=1.0 / steps,
        landscape=landscape,
        theta_star=best_theta,
        flat=bool(np.all(vals == vals[0])),
    )


def _compositions(n: int, k: int) -> np.ndarray:
    """All (m_1..m_n) >= 0 with sum k, in lexicographic order."""
    if n == 1:
        return np.array([[k]], dtype=np.int64)
    bars = np.array(list(itertools.combinations(range(k + n - 1), n - 1)), dtype=np.int64)
    edges = np.column_stack([np.full(bars.shape[0], -1), bars, np.full(bars.shape[0], k + n - 1)])
    return np.diff(edges, axis=1) - 1


def simplex_grid_search(p: OptimizationProblem, k: int = 100) -> OptimizationResult:
    """Brute force over the lattice h = H m / k, sum m = k."""
    n = p.model.n
    if k < 1:
        raise ArgumentError("k must be at least 1")
    size = math.comb(n + k - 1, n - 1)
    if n > 5 or size > 10**6:
        raise ArgumentError(f"simplex grid with n={n}, k={k} has {size} points; use ProjectedGradient")
    grid = _compositions(n, k)
    hs = grid * (p.H / k)
    vals = objective_values(p.model, hs, p.objective)
    bad = ~np.isfinite(vals)
    if bad.any():
        raise NumericalError(f"objective is not finite at h={hs[bad][0].tolist()}")
    best = int(np.argmax(vals))
    return OptimizationResult(
        h_star=HarvestAllocation(hs[best], p.H),
        value=float(vals[best]),
        evaluations=size,
        method=Method.SIMPLEX_GRID.value,
        certificate=p.H / k,
        landscape=np.column_stack([hs, vals]) if size <= 20_000 else None,
        flat=bool(np.all(vals == vals[0])),
    )


def _gradient(model, x, objective, step):
    n = x.shape[0]
    pts = np.empty((2 * n, n))
    for j in range(n):
        pts[2 * j] = x
        pts[2 * j, j] += step
        pts[2 * j + 1] = x
        pts[2 * j + 1, j] -= step
    vals = objective_values(model, pts, objective)
    return (vals[0::2] - vals[1::2]) / (2.0 * step)


def _ascend(p, x, max_iter=500):
    model, H, objective = p.model, p.H, p.objective
    step = 1e-5 * H
    tol = 1e-8 * H
    fx = float(objective_values(model, x[None, :], objective)[0])
    f0 = fx
    evals = 1
    alpha = None
    pg = math.inf
    for _ in range(max_iter):
        g = _gradient(model, x, objective, step)
        evals += 2 * x.shape[0]
        pg = float(np.linalg.norm(project_simplex(x + g, H) - x))
        if pg < tol:
            break
        if alpha is None:
            alpha = H / max(float(np.max(np.abs(g))), 1e-300)
        accepted = False
        for _ in range(41):
            x_new = project_simplex(x + alpha * g, H)
            move = x_new - x
            if np.any(move != 0):
                f_new = float(objective_values(model, x_new[None, :], objective)[0])
                evals += 1
                if f_new >= fx + 1e-4 * float(g @ move) and f_new > fx:
                    x, fx = x_new, f_new
                    accepted = True
                    break
            alpha *= 0.5
        if not accepted:
            break
        alpha *= 2.0
    return x, fx, f0, pg, evals


def _starts(n, H, count, seed):
    pts = [np.eye(n)[i] * H for i in range(min(n, max(count - 1, 1)))]
    pts.append(np.full(n, H / n))
    rng = np.random.default_rng(seed)
    while len(pts) < count:
        pts.append(rng.dirichlet(np.ones(n)) * H)
    return pts[:max(count, 1)]


def projected_gradient(p: OptimizationProblem, starts: int = 8, *, seed: int = 42, x0=None) -> OptimizationResult:
    """Multi-start projected ascent with central-difference gradients and Armijo backtracking.

    ``x0`` replaces the default starts with user-supplied allocations.
    """
    n, H = p.model.n, p.H
    if n < 2:
        raise ArgumentError("projected gradient needs at least two patches")
    points = [np.asarray(x, dtype=float) for x in x0] if x0 is not None else _starts(n, H, starts, seed)
    best = None
    evals = 0
    runs = []
    for x in points:
        x = project_simplex(x, H)
        xs, fx, f0, pg, e = _ascend(p, x)
        evals += e
        runs.append((fx, f0, pg))
        if best is None or fx > best[1]:
            best = (xs, fx, pg)
    values = np.array([r[0] for r in runs])
    flat = bool(np.all(values == 0.0) and all(r[2] == 0.0 for r in runs))
    improved = any(r[0] > r[1] for r in runs)
    stalled = all(r[2] >= 1e-8 * H for r in runs)
    if not improved and stalled and not flat:
        diag = ", ".join(f"(value={r[0]:.6g}, pg={r[2]:.3e})" for r in runs)
        raise NumericalError(f"no start improved on its initial point: {diag}", best=best[0])
    xs, fx, pg = best
    return OptimizationResult(
        h_star=_feasible(xs, H),
        value=fx,
        evaluations=evals,
        method=Method.PROJECTED_GRADIENT.value,
        certificate=pg,
        flat=flat,
        extra={"start_values": values},
    )


def optimize(p: OptimizationProblem, resolution: float = 1e-3, *, seed: int = 42) -> OptimizationResult:
    method = p.method
    s = two_patch_scenario(p.model, p.H)
    if method is Method.AUTO:
        if s is not None:
            method = Method.THETA_SWEEP
        elif p.model.n <= 4:
            grid = simplex_grid_search(p, 100)
            if p.model.n == 1:
                return grid
            polish = projected_gradient(p, seed=seed, x0=[grid.h_star.h])
            if polish.value > grid.value:
                return OptimizationResult(
                    polish.h_star, polish.value, grid.evaluations + polish.evaluations,
                    f"{Method.SIMPLEX_GRID.value}+{Method.PROJECTED_GRADIENT.value}",
                    polish.certificate, flat=grid.flat,
                )
            return grid
        else:
            method = Method.PROJECTED_GRADIENT
    if method is Method.THETA_SWEEP:
        if s is None:
            raise ArgumentError("ThetaSweep needs two patches with downstream-biased movement")
        return sweep_theta(s, p.objective, resolution)
    if method is Method.SIMPLEX_GRID:
        return simplex_grid_search(p, 100)
    return projected_gradient(p, seed=seed)
