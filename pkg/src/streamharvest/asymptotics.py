"""Large-growth allocation rules for n-patch networks.

As the common growth rate r grows, every equilibrium density behaves like
``r / c_i`` and the sensitivities of biomass and yield to how a fixed budget
is shared settle to simple limits. Those limits decide which patches to
harvest: the competition rates pick a candidate group, and the effective net
flow ``I_i = sum_j (a_ij / c_j - a_ji / c_i)`` picks the lead patch inside it.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ArgumentError
from .model import HarvestAllocation, Model

__all__ = [
    "NetFlowReport",
    "GroupedAllocation",
    "Certainty",
    "AsymptoticAdvice",
    "effective_net_flow",
    "asymptotic_biomass_strategy",
    "asymptotic_yield_strategy",
    "asymptotic_limits",
]

TIE_REL = 1e-12


@dataclass(frozen=True, eq=False)
class NetFlowReport:
    I: np.ndarray
    ranking: np.ndarray  # patch indices by decreasing I, ties to the lower index


def effective_net_flow(model: Model) -> NetFlowReport:
    A, c = model.A, model.c
    terms = A / c[None, :] - A.T / c[:, None]
    I = terms.sum(axis=1)
    scale = np.abs(terms).sum()
    if abs(I.sum()) > TIE_REL * max(scale, 1.0):
        raise ArgumentError(f"net flows do not cancel (sum {I.sum()!r})")
    ranking = np.argsort(-I, kind="stable")
    return NetFlowReport(I, ranking)


def _tied_max(values, idx):
    """Members of ``idx`` whose value ties the maximum at relative tolerance."""
    vals = values[idx]
    top = vals.max()
    tol = TIE_REL * max(np.abs(values).max(), 1e-300)
    return tuple(int(i) for i in idx[vals >= top - tol])


def _group(c, pick):
    target = c.max() if pick == "max" else c.min()
    return tuple(int(i) for i in np.flatnonzero(np.abs(c - target) <= TIE_REL * target))


class Certainty(str, Enum):
    CERTIFIED = "Certified"
    GAP_CONDITION_FAILED = "GapConditionFailed"
    LOWER_BOUND_ONLY = "LowerBoundOnly"


@dataclass(frozen=True)
class AsymptoticAdvice:
    objective: str
    candidate_group: tuple
    lead_patch: int
    certainty: Certainty
    notes: str
    co_leaders: tuple = ()
    # certified minimum effort on the lead patch, when only a bound is known
    lead_effort_lower_bound: float | None = None


def asymptotic_biomass_strategy(model: Model, H: float) -> AsymptoticAdvice:
    """Large-r biomass advice: strongest competition group, then highest net flow."""
    group = _group(model.c, "max")
    flow = effective_net_flow(model).I
    leaders = _tied_max(flow, np.array(group))
    lead = leaders[0]
    if len(leaders) == 1:
        notes = f"put all effort {H:g} on patch {lead + 1}"
        certainty = Certainty.CERTIFIED
    else:
        notes = "net-flow tie among " + ", ".join(str(i + 1) for i in leaders) + "; no strict ordering"
        certainty = Certainty.GAP_CONDITION_FAILED
    return AsymptoticAdvice("biomass", group, lead, certainty, notes, co_leaders=leaders)


def asymptotic_yield_strategy(model: Model, H: float) -> AsymptoticAdvice:
    """Large-r yield advice: weakest competition group, then highest net flow.

    Certified only when the lead's net flow beats every other group member by
    more than ``2H/c``; otherwise the lead patch is only known to need more
    than ``H/n`` of the budget.
    """
    group = _group(model.c, "min")
    c = float(model.c[group[0]])
    flow = effective_net_flow(model).I
    leaders = _tied_max(flow, np.array(group))
    lead = leaders[0]
    others = [i for i in group if i != lead]
    gap = flow[lead] - max(flow[i] for i in others) if others else np.inf
    if gap > 2.0 * H / c:
        return AsymptoticAdvice(
            "yield", group, lead, Certainty.CERTIFIED,
            f"net-flow gap {gap:g} > 2H/c = {2 * H / c:g}: put all effort on patch {lead + 1}",
            co_leaders=leaders,
        )
    bound = H / model.n
    return AsymptoticAdvice(
        "yield", group, lead, Certainty.GAP_CONDITION_FAILED,
        f"net-flow gap {gap:g} <= 2H/c = {2 * H / c:g}: effort on patch {lead + 1} must exceed H/n = {bound:g}",
        co_leaders=leaders, lead_effort_lower_bound=bound,
    )


def _weights(w, n, name):
    v = np.zeros(n) if w is None else np.asarray(w, dtype=float).reshape(-1)
    if v.shape[0] != n:
        raise ArgumentError(f"{name} must have one entry per patch ({n})")
    if np.any(v < 0):
        raise ArgumentError(f"{name} must be nonnegative")
    return v


@dataclass(frozen=True, eq=False)
class GroupedAllocation:
    """A budget split organised around a candidate group of patches.

    Two forms (all weight vectors have one entry per patch):

    * within-group: ``(1 - delta) H`` on ``lead``, ``gamma_i delta H`` on the
      other group members, nothing outside the group;
    * two-group: ``beta_i (1 - theta) H`` inside the group and
      ``alpha_i theta H`` outside it.
    """

    n: int
    group: tuple
    lead: int | None = None
    delta: float | None = None
    gamma: np.ndarray | None = None
    theta: float | None = None
    alpha: np.ndarray | None = None
    beta: np.ndarray | None = None

    @classmethod
    def within(cls, n, group, lead, delta, gamma) -> "GroupedAllocation":
        g = cls(n, tuple(int(i) for i in group), lead=int(lead), delta=float(delta), gamma=_weights(gamma, n, "gamma"))
        g._check()
        return g

    @classmethod
    def two_group(cls, n, group, theta, alpha, beta) -> "GroupedAllocation":
        g = cls(n, tuple(int(i) for i in group), theta=float(theta),
                alpha=_weights(alpha, n, "alpha"), beta=_weights(beta, n, "beta"))
        g._check()
        return g

    @property
    def kind(self) -> str:
        return "within" if self.lead is not None else "two_group"

    @property
    def parameter(self) -> float:
        return self.delta if self.kind == "within" else self.theta

    def _check(self):
        n, group = self.n, self.group
        if not group or len(set(group)) != len(group) or min(group) < 0 or max(group) >= n:
            raise ArgumentError(f"invalid group {group} for {n} patches")
        inside = np.zeros(n, dtype=bool)
        inside[list(group)] = True
        if not 0.0 <= self.parameter <= 1.0:
            raise ArgumentError("split parameter must lie in [0, 1]")
        if self.kind == "within":
            if self.lead not in group or len(group) < 2:
                raise ArgumentError("within-group form needs the lead plus at least one other group member")
            others = inside.copy()
            others[self.lead] = False
            if np.any(self.gamma[~others] != 0) or abs(self.gamma.sum() - 1.0) > 1e-12:
                raise ArgumentError("gamma must sum to 1 over the non-lead group members")
        else:
            if inside.all():
                raise ArgumentError("two-group form needs at least one patch outside the group")
            if np.any(self.beta[~inside] != 0) or abs(self.beta.sum() - 1.0) > 1e-12:
                raise ArgumentError("beta must sum to 1 over the group")
            if np.any(self.alpha[inside] != 0) or abs(self.alpha.sum() - 1.0) > 1e-12:
                raise ArgumentError("alpha must sum to 1 outside the group")

    def efforts(self, H: float, parameter: float | None = None) -> np.ndarray:
        """Effort vector; ``parameter`` overrides delta/theta (any real value)."""
        p = self.parameter if parameter is None else float(parameter)
        if self.kind == "within":
            h = self.gamma * p * H
            h[self.lead] = (1.0 - p) * H
            return h
        return self.beta * (1.0 - p) * H + self.alpha * p * H

    def allocation(self, H: float) -> HarvestAllocation:
        h = self.efforts(H)
        return HarvestAllocation(h * (H / h.sum()), H)


def _group_c(model, alloc):
    if alloc.n != model.n:
        raise ArgumentError("allocation and model disagree on the number of patches")
    cg = model.c[list(alloc.group)]
    if np.any(np.abs(cg - cg[0]) > TIE_REL * cg[0]):
        raise ArgumentError("group members must share one competition rate")
    return float(cg[0])


def asymptotic_limits(model: Model, alloc: GroupedAllocation, objective: str, H: float) -> float:
    """Large-r limit of the objective's sensitivity to the split parameter.

    ========== ========== =================================================
    objective  form       returned limit
    ========== ========== =================================================
    biomass    two_group  M'/H  -> 1/c - sum_off alpha_i / c_i
    biomass    within     r M'  -> H (-I_lead + sum gamma_i I_i)
    yield      two_group  Y'/(rH) -> -1/c + sum_off alpha_i / c_i
    yield      within     Y'/H  -> (2H/c)(1 - delta - delta sum gamma_i^2)
                                   - I_lead + sum gamma_i I_i
    ========== ========== =================================================

    Derivatives are with respect to theta (two_group) or delta (within);
    ``c`` is the common competition rate of the group.
    """
    c = _group_c(model, alloc)
    if objective not in ("biomass", "yield"):
        raise ArgumentError(f"unknown objective {objective!r}")
    if alloc.kind == "two_group":
        off = alloc.alpha @ (1.0 / model.c)
        return 1.0 / c - off if objective == "biomass" else -1.0 / c + off
    I = effective_net_flow(model).I
    spread = -I[alloc.lead] + alloc.gamma @ I
    if objective == "biomass":
        return H * spread
    delta = alloc.delta
    return (2.0 * H / c) * (1.0 - delta - delta * float(alloc.gamma @ alloc.gamma)) + spread
