"""The n-patch logistic metapopulation with harvesting and directed movement.

Patch ``i`` evolves as::

    u_i' = u_i (r_i - c_i u_i) - h_i u_i + sum_j (a_ij u_j - a_ji u_i)

where ``a_ij`` is the movement rate from patch ``j`` to patch ``i``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .errors import ArgumentError, DomainError, NumericalError

__all__ = [
    "Model",
    "HarvestAllocation",
    "EquilibriumResult",
    "Trajectory",
    "MsySolution",
    "rhs",
    "jacobian",
    "spectral_bound",
    "origin_spectral_bound",
    "integrate",
    "solve_equilibrium",
    "equilibrium_batch",
    "total_biomass",
    "total_yield",
    "msy_unconstrained",
    "is_strongly_connected",
]

NEWTON_TOL = 1e-12
NEWTON_MAX_ITER = 200
NEWTON_MAX_HALVINGS = 60
NEWTON_STALL_LIMIT = 50
RTOL = 1e-8
ATOL = 1e-10
STEADY_TOL = 1e-10
DENSE_EIG_MAX_N = 64


def _as_vector(x, n, name):
    v = np.ascontiguousarray(np.asarray(x, dtype=float).reshape(-1))
    if v.shape[0] != n:
        raise ArgumentError(f"{name} has length {v.shape[0]}, expected {n}")
    if not np.all(np.isfinite(v)):
        raise ArgumentError(f"{name} contains non-finite values")
    return v


def is_strongly_connected(adjacency) -> bool:
    """True when the directed graph of positive entries is strongly connected.

    Entry ``(i, j) > 0`` is read as an edge ``j -> i``; reachability is checked
    forwards and backwards from node 0.
    """
    M = np.asarray(adjacency) > 0
    n = M.shape[0]
    if n <= 1:
        return True

    def reaches_all(adj):
        seen = np.zeros(n, dtype=bool)
        seen[0] = True
        queue = deque([0])
        while queue:
            k = queue.popleft()
            for nxt in np.flatnonzero(adj[k]):
                if not seen[nxt]:
                    seen[nxt] = True
                    queue.append(nxt)
        return bool(seen.all())

    # row k of M.T lists the targets of edges leaving k
    return reaches_all(M.T) and reaches_all(M)


@dataclass(frozen=True, eq=False)
class Model:
    """Growth rates ``r``, competition rates ``c`` and movement matrix ``A``.

    ``A[i, j]`` is the per-capita rate at which individuals move from patch
    ``j`` into patch ``i``. The diagonal must be zero and, for n >= 2, the
    movement graph must be strongly connected.
    """

    r: np.ndarray
    c: np.ndarray
    A: np.ndarray
    out_rate: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        r = np.ascontiguousarray(np.asarray(self.r, dtype=float).reshape(-1))
        n = r.shape[0]
        if n < 1:
            raise ArgumentError("model needs at least one patch")
        c = _as_vector(self.c, n, "c")
        A = np.asarray(self.A, dtype=float)
        if A.shape != (n, n):
            raise ArgumentError(f"movement matrix has shape {A.shape}, expected {(n, n)}")
        A = np.ascontiguousarray(A.copy())
        if not np.all(np.isfinite(r)) or not np.all(np.isfinite(A)):
            raise ArgumentError("model parameters must be finite")
        if np.any(c <= 0):
            raise ArgumentError("competition rates c must be strictly positive")
        if np.any(np.diag(A) != 0):
            raise ArgumentError("movement matrix must have a zero diagonal")
        if np.any(A < 0):
            raise ArgumentError("movement rates must be nonnegative")
        if n >= 2 and not is_strongly_connected(A):
            raise ArgumentError("movement matrix is not irreducible (graph not strongly connected)")
        for name, arr in (("r", r), ("c", c), ("A", A)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        out = np.ascontiguousarray(A.sum(axis=0))
        out.setflags(write=False)
        object.__setattr__(self, "out_rate", out)

    @property
    def n(self) -> int:
        return self.r.shape[0]

    def with_growth(self, r) -> "Model":
        """Copy of the model with new growth rates (scalar broadcasts)."""
        return Model(np.broadcast_to(np.asarray(r, dtype=float), (self.n,)).copy(), self.c, self.A)

    @classmethod
    def two_patch(cls, r1, r2, c1, c2, d, q) -> "Model":
        """Upstream patch 1, downstream patch 2: rate 1->2 is d+q, 2->1 is d."""
        return cls([r1, r2], [c1, c2], [[0.0, d], [d + q, 0.0]])


class HarvestAllocation:
    """Per-patch harvesting efforts ``h`` with total budget ``H``.

    The default constructor enforces ``h >= 0`` and ``sum(h) == H`` to
    ``1e-12 * max(1, H)``. :meth:`signed` builds an unconstrained allocation
    (negative entries mean stocking) for the MSY computation.
    """

    __slots__ = ("h", "H", "is_signed")

    def __init__(self, h, H=None, *, _signed=False):
        hv = np.ascontiguousarray(np.asarray(h, dtype=float).reshape(-1))
        if not np.all(np.isfinite(hv)):
            raise ArgumentError("harvest efforts must be finite")
        total = float(hv.sum())
        H = total if H is None else float(H)
        if not _signed:
            if np.any(hv < 0):
                raise ArgumentError("harvest efforts must be nonnegative (use HarvestAllocation.signed for stocking)")
            if abs(total - H) > 1e-12 * max(1.0, abs(H)):
                raise ArgumentError(f"efforts sum to {total!r}, budget is {H!r}")
        hv.setflags(write=False)
        self.h = hv
        self.H = H
        self.is_signed = _signed

    @classmethod
    def signed(cls, h) -> "HarvestAllocation":
        return cls(h, None, _signed=True)

    @classmethod
    def from_fractions(cls, fractions, H) -> "HarvestAllocation":
        f = np.asarray(fractions, dtype=float)
        if np.any(f < 0) or abs(f.sum() - 1.0) > 1e-12:
            raise ArgumentError("fractions must be nonnegative and sum to 1")
        return cls(f * H, H)

    @property
    def stocking(self) -> np.ndarray:
        return self.h < 0

    def __len__(self):
        return self.h.shape[0]

    def __repr__(self):
        kind = "signed " if self.is_signed else ""
        return f"HarvestAllocation({kind}h={self.h.tolist()}, H={self.H})"


def _effort(h, n) -> np.ndarray:
    if isinstance(h, HarvestAllocation):
        h = h.h
    return _as_vector(h, n, "h")


@dataclass(frozen=True, eq=False)
class EquilibriumResult:
    u: np.ndarray
    residual: float
    persistent: bool
    s_origin: float
    s_equilibrium: float
    h: np.ndarray

    @property
    def biomass(self) -> float:
        return total_biomass(self)

    @property
    def yield_(self) -> float:
        return total_yield(self, self.h)


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    steady: bool = False

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]


@dataclass(frozen=True, eq=False)
class MsySolution:
    """Unconstrained maximum sustainable yield and the rates achieving it."""

    h: HarvestAllocation
    u: np.ndarray
    total_yield: float

    @property
    def stocking(self) -> np.ndarray:
        return self.h.stocking


def rhs(model: Model, h, u) -> np.ndarray:
    n = model.n
    return K.rhs(model.r, model.c, model.A, model.out_rate, _effort(h, n), _as_vector(u, n, "u"))


def jacobian(model: Model, h, u) -> np.ndarray:
    n = model.n
    return K.jacobian(model.r, model.c, model.A, model.out_rate, _effort(h, n), _as_vector(u, n, "u"))


def spectral_bound(M, *, tol=1e-10, max_iter=100_000) -> float:
    """Largest real part of the eigenvalues of a Metzler matrix.

    Dense eigensolve up to n = 64; beyond that, power iteration on
    ``M + sigma I`` with ``sigma = max|M_ii| + 1``, which makes the matrix
    nonnegative with its Perron root on top.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ArgumentError("spectral_bound needs a square matrix")
    n = M.shape[0]
    off = M[~np.eye(n, dtype=bool)]
    if np.any(off < 0):
        raise ArgumentError("matrix is not Metzler (negative off-diagonal entry)")
    if n <= DENSE_EIG_MAX_N:
        return float(np.max(np.linalg.eigvals(M).real))
    sigma = float(np.max(np.abs(np.diag(M)))) + 1.0
    B = M + sigma * np.eye(n)
    x = np.full(n, 1.0 / n)
    lam = 0.0
    for _ in range(max_iter):
        y = B @ x
        lam_new = float(y.sum())  # x has unit 1-norm and stays nonnegative
        if lam_new <= 0.0:
            return -sigma
        x = y / lam_new
        if abs(lam_new - lam) <= tol * max(1.0, abs(lam_new)):
            return lam_new - sigma
        lam = lam_new
    raise NumericalError(f"power iteration did not converge in {max_iter} steps", best=lam - sigma)


def origin_spectral_bound(model: Model, h) -> float:
    """Spectral bound of the linearization at the zero state."""
    n = model.n
    return spectral_bound(jacobian(model, h, np.zeros(n)))


def integrate(model: Model, h, u0, t_end: float, dt_hint: float = 1e-3, *, record: bool = True) -> Trajectory:
    """Adaptive Dormand-Prince 5(4) integration (rtol 1e-8, atol 1e-10).

    Ends at ``t_end`` or as soon as max|rhs| < 1e-10.
    """
    n = model.n
    hv = _effort(h, n)
    u0 = _as_vector(u0, n, "u0")
    if np.any(u0 < 0):
        raise ArgumentError("initial state must be nonnegative")
    if not t_end > 0:
        raise ArgumentError("t_end must be positive")
    ts, ys, count, status, t_final, _ = K.dopri54(
        model.r, model.c, model.A, model.out_rate, hv, u0,
        float(t_end), float(dt_hint), RTOL, ATOL, STEADY_TOL, 10**6, record,
    )
    if status == K.STEP_COLLAPSE:
        raise NumericalError(f"step size collapsed at t={t_final!r}", best=ys[-1].copy(), time=t_final)
    if status == K.MAX_STEPS:
        raise NumericalError(f"step limit reached at t={t_final!r}", best=ys[-1].copy(), time=t_final)
    return Trajectory(ts.copy(), ys.copy(), steady=status == K.STEADY)


def _newton(model, hv, guess):
    return K.newton(
        model.r, model.c, model.A, model.out_rate, hv, np.ascontiguousarray(guess, dtype=float),
        NEWTON_TOL, NEWTON_MAX_ITER, NEWTON_MAX_HALVINGS, NEWTON_STALL_LIMIT,
    )


def _initial_state(model: Model) -> np.ndarray:
    return np.maximum(model.r, 1.0) / model.c


def solve_equilibrium(model: Model, h) -> EquilibriumResult:
    """Globally attracting equilibrium of the harvested system.

    Zero when the origin is linearly stable; otherwise integrate from
    ``max(r_i, 1)/c_i`` for ``min(50/s, 1e4)`` time units and polish with
    damped Newton.
    """
    n = model.n
    hv = _effort(h, n)
    s0 = origin_spectral_bound(model, hv)
    if s0 <= 0:
        return EquilibriumResult(np.zeros(n), 0.0, False, s0, s0, hv)
    t_end = min(50.0 / abs(s0), 1e4)
    _, _, _, status, t_final, guess = K.dopri54(
        model.r, model.c, model.A, model.out_rate, hv, _initial_state(model),
        t_end, 1e-3, RTOL, ATOL, STEADY_TOL, 10**6, False,
    )
    if status == K.STEP_COLLAPSE:
        raise NumericalError(f"step size collapsed at t={t_final!r}", best=guess.copy(), time=t_final)
    u, res, nstat, _ = _newton(model, hv, guess)
    if nstat != K.CONVERGED:
        raise NumericalError(
            f"Newton failed to converge (status {nstat}, residual {res:.3e})", best=u.copy()
        )
    s_eq = spectral_bound(K.jacobian(model.r, model.c, model.A, model.out_rate, hv, u))
    return EquilibriumResult(u, float(res), True, s0, s_eq, hv)


def equilibrium_batch(model: Model, hs) -> np.ndarray:
    """Equilibrium states for many effort vectors (one per row of ``hs``).

    Each row gets Newton from the fixed start ``max(r_i, 1)/c_i``; rows where
    that fails fall back to :func:`solve_equilibrium`, which also settles
    extinction. Results depend only on the row itself.
    """
    n = model.n
    hs = np.ascontiguousarray(np.asarray(hs, dtype=float).reshape(-1, n))
    us, status = K.newton_batch(
        model.r, model.c, model.A, model.out_rate, hs, _initial_state(model),
        NEWTON_TOL, NEWTON_MAX_ITER, NEWTON_MAX_HALVINGS, NEWTON_STALL_LIMIT,
    )
    for k in np.flatnonzero(status != K.CONVERGED):
        us[k] = solve_equilibrium(model, hs[k]).u
    return us


def total_biomass(eq: EquilibriumResult) -> float:
    return float(eq.u.sum()) if eq.persistent else 0.0


def total_yield(eq: EquilibriumResult, h) -> float:
    if not eq.persistent:
        return 0.0
    return float(_effort(h, eq.u.shape[0]) @ eq.u)


def msy_unconstrained(model: Model) -> MsySolution:
    """Signed harvest rates holding every patch at half its capacity ``r_i/c_i``."""
    r, c, A = model.r, model.c, model.A
    if np.any(r <= 0):
        raise DomainError("unconstrained MSY needs every growth rate r_i > 0")
    cap = r / c
    h = r / 2.0 + (A @ cap) / cap - model.out_rate
    u = r / (2.0 * c)
    value = float(np.sum(r * r / (4.0 * c)))
    resid = float(np.max(np.abs(K.rhs(r, c, A, model.out_rate, h, u))))
    if resid >= 1e-10 * max(1.0, float(np.max(r * r / c))):
        raise NumericalError(f"MSY rates do not balance the target state (residual {resid:.3e})")
    return MsySolution(HarvestAllocation.signed(h), u, value)
