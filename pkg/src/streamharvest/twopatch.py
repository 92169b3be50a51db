"""Closed-form results for an upstream/downstream pair of patches.

Patch 1 sits upstream, patch 2 downstream. Individuals move 1 -> 2 at rate
``d + q`` and 2 -> 1 at rate ``d``. A budget ``H`` is split as
``h1 = theta * H`` and ``h2 = (1 - theta) * H``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ArgumentError, DomainError, NumericalError, UnsupportedCaseError
from .model import HarvestAllocation, Model, origin_spectral_bound, solve_equilibrium, total_biomass

__all__ = [
    "TwoPatchScenario",
    "ThresholdSet",
    "Regime",
    "RegimeVerdict",
    "thresholds",
    "persistence_sufficient",
    "persistent_for_all_theta",
    "biomass_derivative",
    "yield_derivative",
    "classify_biomass",
    "classify_yield",
    "boundary_biomass",
    "tie_biomass",
]

_REL = 1e-12


def _close(a, b, rel=_REL):
    return abs(a - b) <= rel * max(abs(a), abs(b), 1e-300)


@dataclass(frozen=True)
class TwoPatchScenario:
    r1: float
    r2: float
    c1: float
    c2: float
    d: float
    q: float
    H: float

    def __post_init__(self):
        for name in ("r1", "r2", "c1", "c2", "d", "q", "H"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ArgumentError(f"{name} must be finite")
            object.__setattr__(self, name, v)
        for name in ("c1", "c2", "d", "q", "H"):
            if getattr(self, name) <= 0:
                raise ArgumentError(f"{name} must be strictly positive")

    @classmethod
    def homogeneous(cls, r, c, d, q, H) -> "TwoPatchScenario":
        return cls(r, r, c, c, d, q, H)

    @property
    def is_homogeneous(self) -> bool:
        return _close(self.r1, self.r2) and _close(self.c1, self.c2)

    @property
    def model(self) -> Model:
        return Model.two_patch(self.r1, self.r2, self.c1, self.c2, self.d, self.q)

    def allocation(self, theta: float) -> HarvestAllocation:
        if not 0.0 <= theta <= 1.0:
            raise ArgumentError(f"theta={theta!r} outside [0, 1]")
        return HarvestAllocation([theta * self.H, (1.0 - theta) * self.H], self.H)

    def efforts(self, theta: float) -> np.ndarray:
        """Effort vector for any real theta (no feasibility check)."""
        return np.array([theta * self.H, (1.0 - theta) * self.H])


@dataclass(frozen=True)
class ThresholdSet:
    """Critical growth rates of the two-patch problem.

    ``r_crit``: sufficient persistence bound for every split.
    ``r_m`` / ``r_M``: below / above these the biomass is monotone in theta.
    ``r_tie``: homogeneous growth at which both all-in-one-patch strategies
    leave the same biomass.
    ``w``: competition-free weighted growth difference compared against them.
    """

    r_crit: float
    r_m: float
    r_M: float
    r_tie: float
    w: float


class Regime(str, Enum):
    DOWNSTREAM_ONLY = "DownstreamOnly"
    UPSTREAM_ONLY = "UpstreamOnly"
    BOUNDARY_EITHER = "BoundaryEither"
    INTERIOR_OR_UNKNOWN = "InteriorOrUnknown"


@dataclass(frozen=True)
class RegimeVerdict:
    objective: str
    regime: Regime
    theta_star: float | None
    basis: str
    # every split that attains the optimum (two entries on an exact tie)
    co_optimal: tuple = ()
    # certified constraint on the optimum, e.g. ("<", 0.5)
    theta_bound: tuple | None = None


def thresholds(s: TwoPatchScenario) -> ThresholdSet:
    d, q, H = s.d, s.q, s.H
    sd, sdq = math.sqrt(d), math.sqrt(d + q)
    gap = sdq - sd
    return ThresholdSet(
        r_crit=H * (d + q) / (2 * d + q),
        r_m=2 * d + q - H * sd / gap,
        r_M=2 * d + q + H * sdq / gap,
        r_tie=2 * d + q + H / 2,
        w=(s.r1 * sdq - s.r2 * sd) / gap,
    )


def persistence_sufficient(s: TwoPatchScenario) -> bool:
    """Flow-weighted mean growth above ``r_crit``: persistence for every split."""
    d, q = s.d, s.q
    mean = (d * s.r1 + (d + q) * s.r2) / (2 * d + q)
    return mean > thresholds(s).r_crit


def persistent_for_all_theta(s: TwoPatchScenario, points: int = 101) -> bool:
    model = s.model
    return all(origin_spectral_bound(model, s.efforts(t)) > 0 for t in np.linspace(0.0, 1.0, points))


def _det_A(s, u1, u2):
    d, q = s.d, s.q
    a11 = -(s.c1 * u1 * u1 + d * u2)
    a22 = -(s.c2 * u2 * u2 + (d + q) * u1)
    return a11 * a22 - (d * u1) * ((d + q) * u2)


def _equilibrium(s, theta):
    eq = solve_equilibrium(s.model, s.efforts(theta))
    if not eq.persistent:
        raise DomainError(f"no positive equilibrium at theta={theta!r}")
    u1, u2 = eq.u
    det = _det_A(s, u1, u2)
    if not det > 0:
        raise NumericalError(f"sensitivity determinant {det!r} is not positive at theta={theta!r}")
    return u1, u2, det


def biomass_derivative(s: TwoPatchScenario, theta: float) -> float:
    """dM/dtheta at the positive equilibrium, M = u1 + u2."""
    u1, u2, det = _equilibrium(s, theta)
    d, q, H = s.d, s.q, s.H
    num = H * (u1 + u2) * ((d + q) * u1**2 - d * u2**2) + H * u1**2 * u2**2 * (s.c2 - s.c1)
    return -num / det


def yield_derivative(s: TwoPatchScenario, theta: float) -> float:
    """dY/dtheta, Y = theta H u1 + (1 - theta) H u2; equal r and c only."""
    if not s.is_homogeneous:
        raise UnsupportedCaseError("closed-form yield derivative needs r1 == r2 and c1 == c2")
    u1, u2, det = _equilibrium(s, theta)
    d, q, H, c = s.d, s.q, s.H, s.c1
    split = H * (1 - 2 * theta)
    flux = (d + q) * u1**2 - d * u2**2
    first = (split - q) / c + split * c * u1**2 * u2**2 / det
    second = flux * (1.0 / (c * u1 * u2) + H * (theta * u1 + (1 - theta) * u2) / det)
    return H * (first - second)


def _g(s: TwoPatchScenario, theta: float) -> float:
    """Threshold that ``w`` is compared against at a given split."""
    sd, sdq = math.sqrt(s.d), math.sqrt(s.d + s.q)
    return 2 * s.d + s.q + (theta * sdq - (1 - theta) * sd) * s.H / (sdq - sd)


def _f(s: TwoPatchScenario, t: float, theta: float) -> float:
    """Vanishes at the equilibrium ratio t = u1/u2 (equal competition rates)."""
    d, q, H = s.d, s.q, s.H
    return t * (s.r2 - (1 - theta) * H - d + (d + q) * t) - (s.r1 - theta * H - (d + q) + d / t)


def boundary_biomass(s: TwoPatchScenario) -> tuple[float, float]:
    """Total biomass with all effort downstream (theta=0) and upstream (theta=1)."""
    model = s.model
    return (
        total_biomass(solve_equilibrium(model, s.efforts(0.0))),
        total_biomass(solve_equilibrium(model, s.efforts(1.0))),
    )


def tie_biomass(s: TwoPatchScenario) -> tuple[float, float]:
    """(M(0), M(1)) for a homogeneous scenario sitting exactly at ``r_tie``."""
    if not s.is_homogeneous:
        raise UnsupportedCaseError("tie biomass is defined for equal r and c")
    r_tie = thresholds(s).r_tie
    if not _close(s.r1, r_tie, 1e-12):
        raise DomainError(f"r={s.r1!r} differs from r_tie={r_tie!r}")
    m0, m1 = boundary_biomass(s)
    if not abs(m0 - m1) < 1e-8 * m0:
        raise NumericalError(f"boundary biomasses differ at r_tie: {m0!r} vs {m1!r}")
    return m0, m1


def _verdict(objective, regime, theta, basis, **kw):
    co = kw.pop("co_optimal", None)
    if co is None:
        co = () if theta is None else (theta,)
    return RegimeVerdict(objective, regime, theta, basis, co_optimal=tuple(co), **kw)


def classify_biomass(s: TwoPatchScenario, *, check_persistence: bool = True) -> RegimeVerdict:
    """Which split maximizes equilibrium biomass, for equal competition rates.

    Persistence at every split is checked on a 101-point theta grid; callers
    that already know it holds may skip the check.
    """
    if not _close(s.c1, s.c2):
        raise UnsupportedCaseError("biomass classification needs c1 == c2; use the numeric optimizer")
    if check_persistence and not persistent_for_all_theta(s):
        raise DomainError("scenario is not persistent for every split theta in [0, 1]")
    th = thresholds(s)
    if th.w > th.r_M:
        return _verdict("biomass", Regime.DOWNSTREAM_ONLY, 0.0, "weighted growth above r_M: biomass decreasing in theta")
    if th.w < th.r_m:
        return _verdict("biomass", Regime.UPSTREAM_ONLY, 1.0, "weighted growth below r_m: biomass increasing in theta")
    # single interior minimum: the best split is one of the two boundaries
    if s.is_homogeneous:
        r = s.r1
        basis = "r_m <= r <= r_M, resolved by comparing r with r_tie"
        if _close(r, th.r_tie, 1e-12):
            return _verdict("biomass", Regime.BOUNDARY_EITHER, 0.0, basis, co_optimal=(0.0, 1.0))
        theta = 0.0 if r > th.r_tie else 1.0
        return _verdict("biomass", Regime.BOUNDARY_EITHER, theta, basis)
    m0, m1 = boundary_biomass(s)
    basis = "r_m <= w <= r_M, resolved by comparing M(0) with M(1)"
    if abs(m0 - m1) < 1e-10 * max(m0, m1):
        return _verdict("biomass", Regime.BOUNDARY_EITHER, 0.0, basis, co_optimal=(0.0, 1.0))
    return _verdict("biomass", Regime.BOUNDARY_EITHER, 0.0 if m0 > m1 else 1.0, basis)


def classify_yield(s: TwoPatchScenario, resolution: float = 1e-3) -> RegimeVerdict:
    """Yield-maximizing split for homogeneous patches.

    Only one region is settled analytically (large growth with strong
    advection, ``q >= 2H``); elsewhere a certified bound is attached when one
    is known and the optimum comes from a theta sweep.
    """
    from .optimize import sweep_theta

    if not s.is_homogeneous:
        raise UnsupportedCaseError("yield classification needs r1 == r2 and c1 == c2")
    th = thresholds(s)
    r = s.r1
    if r > th.r_M and s.q >= 2 * s.H:
        return _verdict("yield", Regime.DOWNSTREAM_ONLY, 0.0, "r > r_M and q >= 2H: yield decreasing in theta")
    if r > th.r_M:
        bound, basis = ("<", 0.5), "r > r_M: yield decreasing for theta >= 1/2; numeric sweep"
    elif r < th.r_m:
        bound, basis = (">", 0.5 - s.q / (2 * s.H)), "r < r_m: yield increasing for theta <= 1/2 - q/(2H); numeric sweep"
    else:
        bound, basis = None, "numeric sweep"
    res = sweep_theta(s, "yield", resolution)
    return _verdict("yield", Regime.INTERIOR_OR_UNKNOWN, res.theta_star, basis, theta_bound=bound)
