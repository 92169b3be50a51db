"""``streamharvest`` command line: scenario file in, CSV out.

Exit codes: 0 success, 2 bad arguments or scenario, 3 numerical or domain
failure, 4 I/O failure. Diagnostics go to stderr as a single line.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .asymptotics import asymptotic_biomass_strategy, asymptotic_yield_strategy, effective_net_flow
from .csvout import emit_csv
from .errors import ArgumentError, DomainError, NumericalError, ScenarioError
from .model import HarvestAllocation, equilibrium_batch, origin_spectral_bound, solve_equilibrium
from .optimize import Method, OptimizationProblem, optimize, two_patch_scenario
from .regime import regime_map
from .scenario import ScenarioFile, parse_scenario

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4

# the large-growth advice is a limit statement; below this many multiples of
# the largest competing rate (budget or movement) it is flagged as unreliable
SMALL_R_FACTOR = 10.0


def _resolution(args, sc: ScenarioFile, default: float) -> float:
    if args.resolution is not None:
        return args.resolution
    return sc.resolution if sc.resolution is not None else default


def _efforts(args, sc: ScenarioFile) -> np.ndarray:
    theta = args.theta if args.theta is not None else (sc.theta if sc.h is None else None)
    if theta is not None:
        if sc.model.n != 2:
            raise ArgumentError("--theta needs a two-patch scenario")
        if not 0.0 <= theta <= 1.0:
            raise ArgumentError(f"theta={theta!r} outside [0, 1]")
        return np.array([theta * sc.H, (1.0 - theta) * sc.H])
    if sc.h is not None:
        return sc.h
    raise ArgumentError("equilibrium needs h or theta in the scenario, or --theta")


def cmd_equilibrium(sc: ScenarioFile, args):
    h = HarvestAllocation(_efforts(args, sc), sc.H).h
    eq = solve_equilibrium(sc.model, h)
    rows = [(i + 1, h[i], eq.u[i], eq.u[i], h[i] * eq.u[i]) for i in range(sc.model.n)]
    rows.append(("total", float(h.sum()), float(eq.u.sum()), eq.biomass, eq.yield_))
    comments = (f"s_origin={eq.s_origin:.17g}", f"s_equilibrium={eq.s_equilibrium:.17g}")
    return ["patch", "h", "u", "biomass", "yield"], rows, comments


def cmd_sweep(sc: ScenarioFile, args):
    s = two_patch_scenario(sc.model, sc.H)
    if s is None:
        raise ArgumentError("sweep needs a two-patch scenario with downstream-biased movement")
    res = _resolution(args, sc, 1e-2)
    if not 1e-4 <= res <= 1e-1:
        raise ArgumentError(f"resolution {res!r} outside [1e-4, 1e-1]")
    thetas = np.linspace(0.0, 1.0, int(round(1.0 / res)) + 1)
    hs = np.column_stack([thetas * sc.H, (1.0 - thetas) * sc.H])
    us = equilibrium_batch(sc.model, hs)
    M = us.sum(axis=1)
    Y = np.einsum("ij,ij->i", hs, us)
    rows = []
    for k, t in enumerate(thetas):
        persistent = origin_spectral_bound(sc.model, hs[k]) > 0
        rows.append((t, M[k], Y[k], persistent))
    return ["theta", "M", "Y", "persistent"], rows, ()


def cmd_optimize(sc: ScenarioFile, args):
    p = OptimizationProblem(sc.model, sc.H, sc.objective, Method(sc.method))
    seed = args.seed if args.seed is not None else sc.seed
    result = optimize(p, _resolution(args, sc, 1e-3), seed=seed)
    header = [f"h_{i + 1}" for i in range(sc.model.n)] + ["value", "method", "certificate"]
    row = [*result.h_star.h, result.value, result.method, result.certificate]
    return header, [row], ()


def cmd_netflow(sc: ScenarioFile, args):
    report = effective_net_flow(sc.model)
    rank = np.empty(sc.model.n, dtype=int)
    rank[report.ranking] = np.arange(1, sc.model.n + 1)
    rows = [(i + 1, report.I[i], rank[i]) for i in range(sc.model.n)]
    strategy = asymptotic_biomass_strategy if sc.objective == "biomass" else asymptotic_yield_strategy
    advice = strategy(sc.model, sc.H)
    scale = max(sc.H, float(sc.model.A.max()))
    if float(sc.model.r.min()) < SMALL_R_FACTOR * scale:
        print(f"warning: growth rate {sc.model.r.min():g} is small; large-r advice may not apply", file=sys.stderr)
    print(f"{advice.objective} advice ({advice.certainty.value}): {advice.notes}", file=sys.stderr)
    return ["patch", "I", "rank"], rows, ()


def cmd_regime_map(sc: ScenarioFile, args):
    if sc.regime_map is None:
        raise ArgumentError("scenario has no regime_map section")
    A, c = sc.model.A, sc.model.c
    if sc.model.n != 2 or two_patch_scenario(sc.model, sc.H) is None or c[0] != c[1]:
        raise ArgumentError("regime-map needs a two-patch stream with equal competition rates")
    q_axis, r_axis = sc.regime_map.axes()
    out = regime_map(q_axis, r_axis, float(A[0, 1]), float(c[0]), sc.H, sc.objective,
                     exact=args.exact, resolution=_resolution(args, sc, 1e-2))
    return ["q_over_H", "r", "verdict", "theta_star"], list(out.rows()), ()


COMMANDS = {
    "equilibrium": cmd_equilibrium,
    "sweep": cmd_sweep,
    "optimize": cmd_optimize,
    "netflow": cmd_netflow,
    "regime-map": cmd_regime_map,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="streamharvest", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--scenario", required=True, help="path to a JSON scenario file")
    parser.add_argument("--out", help="write CSV here instead of stdout")
    parser.add_argument("--resolution", type=float, help="theta grid spacing for sweeps")
    parser.add_argument("--theta", type=float, help="upstream share of the budget (two patches)")
    parser.add_argument("--seed", type=int, help="seed for randomized optimizer starts")
    parser.add_argument("--exact", action="store_true",
                        help="regime-map: test persistence numerically instead of the sufficient bound")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        sc = parse_scenario(args.scenario)
        header, rows, comments = COMMANDS[args.command](sc, args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (DomainError, NumericalError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ArgumentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        emit_csv(header, rows, args.out, comments)
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
