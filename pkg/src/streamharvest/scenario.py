"""Scenario files: a single JSON object describing a model, a budget and a task.

Patches are numbered from 1 in files and in CLI output. See
``scenarios/README.md`` for the full schema; in short::

    {
      "schema_version": 1,
      "model": {
        "n": 2, "r": 5, "c": 1,
        "generator": {"type": "straight_stream", "d": 1, "q": 7}
      },
      "H": 4,
      "objective": "biomass"
    }

Exactly one of ``matrix``, ``edges`` (``[from, to, rate]`` triples) or
``generator`` gives the movement rates.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ArgumentError, ScenarioError
from .model import Model
from .networks import straight_stream_matrix, three_one_one_matrix

SCHEMA_VERSION = 1

_TOP_KEYS = {"schema_version", "model", "H", "objective", "method", "h", "theta", "resolution", "seed", "regime_map"}
_MODEL_KEYS = {"n", "r", "c", "matrix", "edges", "generator"}
_GEN_KEYS = {"straight_stream": {"type", "n", "d", "q"}, "three_one_one": {"type", "d", "q"}}
_MAP_KEYS = {"q_over_H", "r", "steps"}
_METHODS = {"Auto", "ThetaSweep", "SimplexGrid", "ProjectedGradient"}


@dataclass(frozen=True)
class RegimeGrid:
    q_over_H: tuple[float, float]
    r: tuple[float, float]
    steps: tuple[int, int]

    def axes(self) -> tuple[np.ndarray, np.ndarray]:
        return (np.linspace(*self.q_over_H, self.steps[0]), np.linspace(*self.r, self.steps[1]))


@dataclass(frozen=True, eq=False)
class ScenarioFile:
    schema_version: int
    model: Model
    H: float
    objective: str = "biomass"
    method: str = "Auto"
    h: np.ndarray | None = None
    theta: float | None = None
    resolution: float | None = None
    seed: int = 42
    regime_map: RegimeGrid | None = None
    movement_source: str = "matrix"


class _Locator:
    """Maps keys back to the first line where they appear in the raw text."""

    def __init__(self, text):
        self.text = text

    def line(self, key):
        m = re.search(r'"' + re.escape(key) + r'"\s*:', self.text)
        return None if m is None else self.text.count("\n", 0, m.start()) + 1

    def error(self, message, key):
        return ScenarioError(message, key=key, line=self.line(key.split(".")[-1]))


def _number(loc, value, key, *, positive=False, nonneg=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise loc.error(f"expected a number, got {type(value).__name__}", key)
    v = float(value)
    if not math.isfinite(v):
        raise loc.error("value must be finite", key)
    if positive and v <= 0:
        raise loc.error("value must be positive", key)
    if nonneg and v < 0:
        raise loc.error("value must be nonnegative", key)
    return v


def _integer(loc, value, key, minimum=None):
    if isinstance(value, bool) or not isinstance(value, int):
        raise loc.error(f"expected an integer, got {type(value).__name__}", key)
    if minimum is not None and value < minimum:
        raise loc.error(f"value must be at least {minimum}", key)
    return value


def _vector(loc, value, key, n):
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return np.full(n, _number(loc, value, key))
    if not isinstance(value, list):
        raise loc.error("expected a number or a list of numbers", key)
    if len(value) != n:
        raise loc.error(f"expected {n} entries, got {len(value)}", key)
    return np.array([_number(loc, v, key) for v in value])


def _pair(loc, value, key):
    if not (isinstance(value, list) and len(value) == 2):
        raise loc.error("expected a [low, high] pair", key)
    lo, hi = (_number(loc, v, key) for v in value)
    if not lo <= hi:
        raise loc.error("low end exceeds high end", key)
    return lo, hi


def _reject_unknown(loc, obj, allowed, where):
    for k in obj:
        if k not in allowed:
            raise loc.error(f"unknown key in {where}", k)


def _movement(loc, spec, n):
    kinds = [k for k in ("matrix", "edges", "generator") if k in spec]
    if len(kinds) != 1:
        raise loc.error("model needs exactly one of matrix, edges, generator", "model")
    kind = kinds[0]
    raw = spec[kind]
    if kind == "matrix":
        if not (isinstance(raw, list) and len(raw) == n and all(isinstance(row, list) and len(row) == n for row in raw)):
            raise loc.error(f"matrix must be {n} rows of {n} numbers", "matrix")
        A = np.array([[_number(loc, v, "matrix", nonneg=True) for v in row] for row in raw])
    elif kind == "edges":
        if not isinstance(raw, list):
            raise loc.error("edges must be a list of [from, to, rate]", "edges")
        A = np.zeros((n, n))
        seen = set()
        for e in raw:
            if not (isinstance(e, list) and len(e) == 3):
                raise loc.error("each edge must be [from, to, rate]", "edges")
            src = _integer(loc, e[0], "edges", 1)
            dst = _integer(loc, e[1], "edges", 1)
            rate = _number(loc, e[2], "edges", nonneg=True)
            if src > n or dst > n or src == dst:
                raise loc.error(f"edge [{src}, {dst}] is not between two distinct patches 1..{n}", "edges")
            if (src, dst) in seen:
                raise loc.error(f"duplicate edge [{src}, {dst}]", "edges")
            seen.add((src, dst))
            A[dst - 1, src - 1] = rate
    else:
        if not isinstance(raw, dict) or "type" not in raw:
            raise loc.error("generator must be an object with a type", "generator")
        gtype = raw["type"]
        if gtype not in _GEN_KEYS:
            raise loc.error(f"unknown generator {gtype!r}", "type")
        _reject_unknown(loc, raw, _GEN_KEYS[gtype], "generator")
        for k in _GEN_KEYS[gtype] - {"type", "n"}:
            if k not in raw:
                raise loc.error("missing field", k)
        d = _number(loc, raw["d"], "d", nonneg=True)
        q = _number(loc, raw["q"], "q", nonneg=True)
        if gtype == "straight_stream":
            gn = _integer(loc, raw.get("n", n), "n", 1)
            if gn != n:
                raise loc.error(f"generator n={gn} disagrees with model n={n}", "n")
            A = straight_stream_matrix(n, d, q)
        else:
            if n != 5:
                raise loc.error("three_one_one needs n = 5", "n")
            A = three_one_one_matrix(d, q)
    return A, kind


def parse_text(text: str) -> ScenarioFile:
    loc = _Locator(text)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"malformed JSON: {exc.msg}", line=exc.lineno) from None
    if not isinstance(doc, dict):
        raise ScenarioError("scenario must be a single JSON object", line=1)
    _reject_unknown(loc, doc, _TOP_KEYS, "scenario")
    for k in ("schema_version", "model", "H"):
        if k not in doc:
            raise ScenarioError("missing field", key=k)
    version = _integer(loc, doc["schema_version"], "schema_version")
    if version != SCHEMA_VERSION:
        raise loc.error(f"unsupported schema_version {version}", "schema_version")

    spec = doc["model"]
    if not isinstance(spec, dict):
        raise loc.error("model must be an object", "model")
    _reject_unknown(loc, spec, _MODEL_KEYS, "model")
    for k in ("n", "r", "c"):
        if k not in spec:
            raise ScenarioError("missing field", key=f"model.{k}", line=loc.line("model"))
    n = _integer(loc, spec["n"], "n", 1)
    r = _vector(loc, spec["r"], "r", n)
    c = _vector(loc, spec["c"], "c", n)
    if np.any(c <= 0):
        raise loc.error("competition rates must be positive", "c")
    A, source = _movement(loc, spec, n)
    try:
        model = Model(r, c, A)
    except ArgumentError as exc:
        raise ScenarioError(str(exc), key="model", line=loc.line("model")) from None

    H = _number(loc, doc["H"], "H", positive=True)
    objective = doc.get("objective", "biomass")
    if objective not in ("biomass", "yield"):
        raise loc.error("objective must be 'biomass' or 'yield'", "objective")
    method = doc.get("method", "Auto")
    if method not in _METHODS:
        raise loc.error(f"method must be one of {sorted(_METHODS)}", "method")
    h = None
    if "h" in doc:
        h = _vector(loc, doc["h"], "h", n)
        if np.any(h < 0) or abs(h.sum() - H) > 1e-12 * max(1.0, H):
            raise loc.error("h must be nonnegative and sum to H", "h")
    theta = None
    if "theta" in doc:
        theta = _number(loc, doc["theta"], "theta")
        if not 0 <= theta <= 1:
            raise loc.error("theta must lie in [0, 1]", "theta")
    resolution = _number(loc, doc["resolution"], "resolution", positive=True) if "resolution" in doc else None
    seed = _integer(loc, doc.get("seed", 42), "seed")
    grid = None
    if "regime_map" in doc:
        g = doc["regime_map"]
        if not isinstance(g, dict):
            raise loc.error("regime_map must be an object", "regime_map")
        _reject_unknown(loc, g, _MAP_KEYS, "regime_map")
        for k in _MAP_KEYS:
            if k not in g:
                raise loc.error("missing field in regime_map", "regime_map")
        steps = g["steps"]
        if not (isinstance(steps, list) and len(steps) == 2):
            raise loc.error("steps must be [q_steps, r_steps]", "steps")
        grid = RegimeGrid(
            _pair(loc, g["q_over_H"], "q_over_H"),
            _pair(loc, g["r"], "r"),
            (_integer(loc, steps[0], "steps", 1), _integer(loc, steps[1], "steps", 1)),
        )
    return ScenarioFile(version, model, H, objective, method, h, theta, resolution, seed, grid, source)


def parse_scenario(path) -> ScenarioFile:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise ScenarioError(f"cannot read scenario: {exc}") from None
    return parse_text(text)
