"""Regime maps over the (q/H, r) plane for a homogeneous two-patch stream."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .twopatch import (
    Regime,
    TwoPatchScenario,
    classify_biomass,
    classify_yield,
    persistence_sufficient,
    persistent_for_all_theta,
)

EXTINCTION_RISK = 0
UPSTREAM = 1
DOWNSTREAM = 2
BOUNDARY_OR_INTERIOR = 3

_CODES = {
    Regime.UPSTREAM_ONLY: UPSTREAM,
    Regime.DOWNSTREAM_ONLY: DOWNSTREAM,
    Regime.BOUNDARY_EITHER: BOUNDARY_OR_INTERIOR,
    Regime.INTERIOR_OR_UNKNOWN: BOUNDARY_OR_INTERIOR,
}


@dataclass(frozen=True, eq=False)
class RegimeMapOutput:
    q_over_H: np.ndarray
    r: np.ndarray
    verdict: np.ndarray  # shape (len(q_over_H), len(r))
    theta_star: np.ndarray

    def rows(self):
        for i, qh in enumerate(self.q_over_H):
            for j, r in enumerate(self.r):
                yield qh, r, int(self.verdict[i, j]), self.theta_star[i, j]


def classify_cell(s: TwoPatchScenario, objective: str, *, exact: bool = False, resolution: float = 1e-2):
    """(verdict code, theta*) for one homogeneous scenario.

    Cells failing the sufficient persistence bound are flagged as extinction
    risk; with ``exact`` the spectral bound is checked on a theta grid instead.
    """
    safe = persistent_for_all_theta(s) if exact else persistence_sufficient(s)
    if not safe:
        return EXTINCTION_RISK, float("nan")
    if objective == "biomass":
        v = classify_biomass(s, check_persistence=False)
    else:
        v = classify_yield(s, resolution=resolution)
    return _CODES[v.regime], float(v.theta_star)


def _row(args):
    qh, rs, d, c, H, objective, exact, resolution = args
    out = []
    for r in rs:
        s = TwoPatchScenario.homogeneous(r, c, d, qh * H, H)
        out.append(classify_cell(s, objective, exact=exact, resolution=resolution))
    return out


def worker_count() -> int:
    cap = os.environ.get("STREAMHARVEST_THREADS")
    n = os.cpu_count() or 1
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            pass
    return n


def regime_map(q_over_H, r_values, d: float, c: float, H: float, objective: str = "biomass",
               *, exact: bool = False, resolution: float = 1e-2, workers: int | None = None) -> RegimeMapOutput:
    """Classify every (q/H, r) cell; rows run in parallel, output order is fixed."""
    q_over_H = np.asarray(q_over_H, dtype=float)
    r_values = np.asarray(r_values, dtype=float)
    tasks = [(qh, r_values, d, c, H, objective, exact, resolution) for qh in q_over_H]
    workers = worker_count() if workers is None else workers
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_row, tasks))
    else:
        rows = [_row(t) for t in tasks]
    verdict = np.array([[code for code, _ in row] for row in rows], dtype=np.int64).reshape(len(q_over_H), len(r_values))
    theta = np.array([[t for _, t in row] for row in rows], dtype=float).reshape(len(q_over_H), len(r_values))
    return RegimeMapOutput(q_over_H, r_values, verdict, theta)
