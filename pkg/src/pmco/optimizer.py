"""Paracontracting multi-agent coordination optimizer.

Two update rules share one driver:

``algorithm1``
    The parallel pseudocode: per-agent coefficients drawn every iteration,
    ``v <- P v + eta P c_v + mu P c_x + kappa P (p - x)``, ``x <- x + v``,
    followed by a sequential personal-best / global-best sweep.

``theorem``
    The switched-system dynamics: one coefficient draw ``(mu, eta, kappa, h)``
    per iteration, validated against the convergence hypotheses, with
    ``x <- x + h v_new`` and the jump/blend rule for ``p``.

Here ``c_v = sum_{j in N_k} (v_j - v_k) = -(L V)_k`` and likewise for ``c_x``.

Every random draw comes from a generator keyed by ``(seed, stream, t, k)``
so the result does not depend on agent evaluation order or worker count.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .graphs import Digraph, GdsSchedule, gds_topology, laplacian
from .objectives import OBJECTIVES, get_objective
from .semistability import random_paracontracting
from .switched import McoCoefficients, SwitchedSystemMatrices, check_theorem_conditions

__all__ = [
    "ConfigError",
    "InfeasibleOmegaError",
    "NumericAbort",
    "MODES",
    "CONDITION_NAMES",
    "MAX_REJECTIONS",
    "OmegaSpec",
    "PMatrixSpec",
    "RunConfig",
    "SwarmState",
    "IterationTrace",
    "RunResult",
    "init_swarm",
    "step_velocity",
    "step_position",
    "update_global_best",
    "sample_coefficients",
    "draw_environment",
    "run",
    "convergence_metrics",
]

MODES = ("algorithm1", "theorem")
CONDITION_NAMES = ("h1", "h2", "h3", "h4", "h5")
COEFF_NAMES = ("mu", "eta", "kappa", "h")
MAX_REJECTIONS = 1000

# generator stream ids, combined with the run seed
_STREAM_INIT = 0
_STREAM_TOPOLOGY = 1
_STREAM_PMATRIX = 2
_STREAM_COEFF = 3


class ConfigError(ValueError):
    """Invalid run configuration."""


class InfeasibleOmegaError(RuntimeError):
    """Coefficient draws kept violating the enforced hypotheses.

    Attributes
    ----------
    diagnostic : dict
        Rejection counts per hypothesis and the details of the last failure.
    """

    def __init__(self, message, diagnostic):
        super().__init__(message)
        self.diagnostic = diagnostic


class NumericAbort(FloatingPointError):
    """The objective or the swarm state became non-finite."""

    def __init__(self, message, diagnostic):
        super().__init__(message)
        self.diagnostic = diagnostic


def _stream(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), *[int(k) for k in key]])


# ----------------------------------------------------------------------------
# configuration


def _require(cond, message):
    if not cond:
        raise ConfigError(message)


def _check_keys(obj, allowed, where):
    _require(isinstance(obj, dict), f"{where} must be a JSON object")
    unknown = sorted(set(obj) - set(allowed))
    _require(not unknown, f"unknown field(s) in {where}: {unknown}")


def _number(val, name, *, integer=False, minimum=None):
    if integer:
        _require(isinstance(val, int) and not isinstance(val, bool), f"{name} must be an integer")
    else:
        _require(
            isinstance(val, (int, float)) and not isinstance(val, bool) and math.isfinite(val),
            f"{name} must be a finite number",
        )
    if minimum is not None:
        _require(val >= minimum, f"{name} must be >= {minimum}")
    return val


@dataclass(frozen=True)
class OmegaSpec:
    """Admissible coefficient values.

    Each coefficient name maps to either ``("set", values)`` or
    ``("range", (lo, hi))``; a draw picks uniformly from the set or the
    interval.

    JSON forms accepted by :meth:`from_json`:

    * a list, one finite set shared by every coefficient;
    * ``{"ranges": {"mu": [lo, hi], ...}}``;
    * ``{"sets": {"mu": [...], ...}}``;
    * both keys together, each coefficient named at most once.

    Coefficients left unnamed in a JSON spec fall back to ``U(0, 1)`` for
    ``mu``, ``eta``, ``kappa`` and ``U(0.05, 1)`` for ``h``.  With no spec
    at all, :meth:`default` applies: the consensus gains ``mu`` and ``eta``
    are drawn from ``U(0, 0.2)`` because the neighbour sums grow with the
    in-degree and ``U(0, 1)`` gains make the swarm diverge on grouped
    topologies.
    """

    spec: tuple

    def __post_init__(self):
        entries = dict(self.spec)
        _require(set(entries) == set(COEFF_NAMES), "omega must cover mu, eta, kappa and h")
        for name, (kind, vals) in entries.items():
            if kind == "set":
                _require(len(vals) > 0, f"omega set for {name} is empty")
                for v in vals:
                    _number(v, f"omega value for {name}", minimum=0)
            elif kind == "range":
                lo, hi = vals
                _number(lo, f"omega lower bound for {name}", minimum=0)
                _number(hi, f"omega upper bound for {name}")
                _require(lo <= hi, f"omega range for {name} has lo > hi")
            else:
                raise ConfigError(f"bad omega kind {kind!r}")

    @classmethod
    def default(cls) -> "OmegaSpec":
        return cls((("mu", ("range", (0.0, 0.2))), ("eta", ("range", (0.0, 0.2))),
                    ("kappa", ("range", (0.0, 1.0))), ("h", ("range", (0.05, 1.0)))))

    @classmethod
    def unit(cls) -> "OmegaSpec":
        """``U(0, 1)`` for every gain, ``U(0.05, 1)`` for ``h``."""
        return cls((("mu", ("range", (0.0, 1.0))), ("eta", ("range", (0.0, 1.0))),
                    ("kappa", ("range", (0.0, 1.0))), ("h", ("range", (0.05, 1.0)))))

    @classmethod
    def from_json(cls, obj) -> "OmegaSpec":
        base = dict(cls.unit().spec)
        if isinstance(obj, list):
            vals = tuple(float(_number(v, "omega value", minimum=0)) for v in obj)
            _require(len(vals) > 0, "omega must be nonempty")
            return cls(tuple((name, ("set", vals)) for name in COEFF_NAMES))
        _check_keys(obj, ("ranges", "sets"), "omega")
        _require(obj, "omega must be nonempty")
        seen = set()
        for key, kind in (("ranges", "range"), ("sets", "set")):
            if key not in obj:
                continue
            _check_keys(obj[key], COEFF_NAMES, f"omega.{key}")
            for name, vals in obj[key].items():
                _require(name not in seen, f"omega coefficient {name} given twice")
                seen.add(name)
                _require(isinstance(vals, list), f"omega.{key}.{name} must be a list")
                if kind == "range":
                    _require(len(vals) == 2, f"omega.ranges.{name} must be [lo, hi]")
                    base[name] = ("range", (float(_number(vals[0], name)), float(_number(vals[1], name))))
                else:
                    base[name] = ("set", tuple(float(_number(v, name)) for v in vals))
        return cls(tuple((name, base[name]) for name in COEFF_NAMES))

    def to_json(self) -> dict:
        ranges, sets = {}, {}
        for name, (kind, vals) in self.spec:
            (ranges if kind == "range" else sets)[name] = list(vals)
        out = {}
        if ranges:
            out["ranges"] = ranges
        if sets:
            out["sets"] = sets
        return out

    def entry(self, name):
        return dict(self.spec)[name]

    def draw(self, name: str, rng: np.random.Generator) -> float:
        kind, vals = self.entry(name)
        if kind == "set":
            return float(vals[int(rng.integers(len(vals)))])
        return float(rng.uniform(vals[0], vals[1]))


@dataclass(frozen=True)
class PMatrixSpec:
    """Parameters of the random symmetric paracontracting ``P``.

    ``ones`` eigenvalues are exactly 1, the others uniform on
    ``[spectrum_min, spectrum_max]``.  The default keeps one direction
    undamped so the swarm does not freeze before reaching the optimum.
    """

    spectrum_min: float = 0.2
    spectrum_max: float = 0.9
    ones: int = 1

    def __post_init__(self):
        _number(self.spectrum_min, "p_matrix.spectrum_min")
        _number(self.spectrum_max, "p_matrix.spectrum_max")
        _number(self.ones, "p_matrix.ones", integer=True, minimum=0)
        _require(-1 < self.spectrum_min <= self.spectrum_max < 1,
                 "p_matrix spectrum must satisfy -1 < min <= max < 1")

    def draw(self, n: int, rng: np.random.Generator, full_rank: bool) -> np.ndarray:
        return random_paracontracting(
            n, rng, self.spectrum_min, self.spectrum_max, ones=self.ones, full_rank=full_rank
        )


_TOP_KEYS = (
    "mode", "n", "q", "objective", "bounds", "velocity_bounds", "omega", "topology",
    "p_matrix", "max_iters", "seed", "stop_tol", "stop_window", "conditions", "inertia",
)


def _vector(val, n, name):
    if isinstance(val, (int, float)) and not isinstance(val, bool):
        val = [val] * n
    _require(isinstance(val, list) and len(val) == n, f"{name} must be a number or a list of length n")
    return tuple(float(_number(v, name)) for v in val)


@dataclass(frozen=True)
class RunConfig:
    """Validated optimizer configuration.

    Parameters
    ----------
    mode : {"algorithm1", "theorem"}
    n, q : int
        Search dimension and number of agents (``q >= 2``).
    objective : str
        Key into :data:`pmco.objectives.OBJECTIVES`.
    lower, upper : tuple of float
        Initialization box; ``lower <= upper`` componentwise.
    v_lower, v_upper : tuple of float
        Initial velocity box.  Defaults to a tenth of the position box
        width on either side of zero.  Velocities are never clamped.
    omega : OmegaSpec
    p_matrix : PMatrixSpec
    topology : GdsSchedule
    max_iters : int
    seed : int
    stop_tol : float
        Stop once ``|f(p_new) - f(p)| < stop_tol`` for ``stop_window``
        consecutive iterations.
    stop_window : int
    conditions : tuple of str
        Hypotheses enforced on each theorem-mode draw.
    inertia : {"identity", "projected"}
        Theorem mode only.  ``identity`` carries ``v`` unchanged into the
        update, which is the stacked matrix form; ``projected`` applies
        ``P`` to it as in the scalar recursion.
    """

    mode: str
    n: int
    q: int
    objective: str
    lower: tuple
    upper: tuple
    v_lower: tuple
    v_upper: tuple
    omega: OmegaSpec = field(default_factory=OmegaSpec.default)
    p_matrix: PMatrixSpec = field(default_factory=PMatrixSpec)
    topology: Optional[GdsSchedule] = None
    max_iters: int = 2000
    seed: int = 0
    stop_tol: float = 1e-10
    stop_window: int = 100
    conditions: tuple = CONDITION_NAMES
    inertia: str = "identity"

    def __post_init__(self):
        _require(self.mode in MODES, f"mode must be one of {MODES}")
        _number(self.n, "n", integer=True, minimum=1)
        _number(self.q, "q", integer=True, minimum=2)
        _require(self.objective in OBJECTIVES, f"unknown objective {self.objective!r}; known: {sorted(OBJECTIVES)}")
        for name in ("lower", "upper", "v_lower", "v_upper"):
            _require(len(getattr(self, name)) == self.n, f"{name} must have length n")
        _require(all(a <= b for a, b in zip(self.lower, self.upper)), "bounds need lower <= upper")
        _require(all(a <= b for a, b in zip(self.v_lower, self.v_upper)), "velocity_bounds need lower <= upper")
        _number(self.max_iters, "max_iters", integer=True, minimum=0)
        _number(self.seed, "seed", integer=True, minimum=0)
        _require(self.seed < 2**64, "seed must fit in 64 bits")
        _number(self.stop_tol, "stop_tol", minimum=0)
        _number(self.stop_window, "stop_window", integer=True, minimum=1)
        _require(self.p_matrix.ones <= self.n, "p_matrix.ones must not exceed n")
        _require(all(c in CONDITION_NAMES for c in self.conditions), f"conditions must be drawn from {CONDITION_NAMES}")
        _require(self.inertia in ("identity", "projected"), "inertia must be 'identity' or 'projected'")
        if self.topology is None:
            object.__setattr__(self, "topology", GdsSchedule.default(self.q))
        _require(self.topology.q == self.q, "topology size must equal q")
        if self.mode == "theorem":
            kind, vals = self.omega.entry("h")
            positive = min(vals) > 0 if kind == "set" else vals[0] > 0
            _require(positive, "theorem mode needs h > 0 for every admissible draw")

    @property
    def step_size_fixed(self) -> bool:
        return self.mode == "algorithm1"

    @classmethod
    def from_json(cls, obj) -> "RunConfig":
        """Build from a parsed JSON object; unknown fields raise :class:`ConfigError`."""
        _check_keys(obj, _TOP_KEYS, "config")
        for key in ("mode", "n", "q", "objective"):
            _require(key in obj, f"missing required field {key!r}")
        n = _number(obj["n"], "n", integer=True, minimum=1)
        q = _number(obj["q"], "q", integer=True, minimum=2)
        _require(isinstance(obj["objective"], str), "objective must be a string")
        kw = {"mode": obj["mode"], "n": n, "q": q, "objective": obj["objective"]}

        bounds = obj.get("bounds", {})
        _check_keys(bounds, ("lower", "upper"), "bounds")
        kw["lower"] = _vector(bounds.get("lower", -5.0), n, "bounds.lower")
        kw["upper"] = _vector(bounds.get("upper", 5.0), n, "bounds.upper")
        width = [u - lo for lo, u in zip(kw["lower"], kw["upper"])]
        vb = obj.get("velocity_bounds", {})
        _check_keys(vb, ("lower", "upper"), "velocity_bounds")
        kw["v_lower"] = _vector(vb.get("lower", [-0.1 * w for w in width]), n, "velocity_bounds.lower")
        kw["v_upper"] = _vector(vb.get("upper", [0.1 * w for w in width]), n, "velocity_bounds.upper")

        if "omega" in obj:
            kw["omega"] = OmegaSpec.from_json(obj["omega"])
        if "p_matrix" in obj:
            pm = obj["p_matrix"]
            _check_keys(pm, ("spectrum_min", "spectrum_max", "ones"), "p_matrix")
            kw["p_matrix"] = PMatrixSpec(**pm)
        topo = obj.get("topology", {})
        _check_keys(topo, ("all_info", "regenerate_every"), "topology")
        every = _number(topo.get("regenerate_every", 1), "topology.regenerate_every", integer=True, minimum=1)
        if "all_info" in topo:
            _require(isinstance(topo["all_info"], list), "topology.all_info must be a list of agent ids")
            try:
                kw["topology"] = GdsSchedule(q, tuple(topo["all_info"]), every)
            except (ValueError, TypeError) as exc:
                raise ConfigError(f"topology: {exc}") from None
        else:
            kw["topology"] = GdsSchedule.default(q, every)
        for key in ("max_iters", "seed", "stop_window"):
            if key in obj:
                kw[key] = _number(obj[key], key, integer=True, minimum=0)
        if "stop_tol" in obj:
            kw["stop_tol"] = float(_number(obj["stop_tol"], "stop_tol", minimum=0))
        if "conditions" in obj:
            conds = obj["conditions"]
            _require(isinstance(conds, list), "conditions must be a list")
            kw["conditions"] = tuple(str(c).lower() for c in conds)
        if "inertia" in obj:
            kw["inertia"] = obj["inertia"]
        return cls(**kw)

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                obj = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        return cls.from_json(obj)

    def to_json(self) -> dict:
        return {
            "mode": self.mode,
            "n": self.n,
            "q": self.q,
            "objective": self.objective,
            "bounds": {"lower": list(self.lower), "upper": list(self.upper)},
            "velocity_bounds": {"lower": list(self.v_lower), "upper": list(self.v_upper)},
            "omega": self.omega.to_json(),
            "topology": {"all_info": list(self.topology.all_info_group),
                         "regenerate_every": self.topology.regenerate_every},
            "p_matrix": {"spectrum_min": self.p_matrix.spectrum_min,
                         "spectrum_max": self.p_matrix.spectrum_max, "ones": self.p_matrix.ones},
            "max_iters": self.max_iters,
            "seed": self.seed,
            "stop_tol": self.stop_tol,
            "stop_window": self.stop_window,
            "conditions": list(self.conditions),
            "inertia": self.inertia,
        }

    def with_seed(self, seed: int) -> "RunConfig":
        obj = self.to_json()
        obj["seed"] = seed
        return RunConfig.from_json(obj)


# ----------------------------------------------------------------------------
# state


@dataclass
class SwarmState:
    """Mutable swarm snapshot; arrays are ``(q, n)`` except ``p`` and values.

    ``p_best`` and ``f_best`` (personal bests) are tracked in both modes
    but only the pseudocode mode feeds them back into ``p``.
    """

    x: np.ndarray
    v: np.ndarray
    p_best: np.ndarray
    f_best: np.ndarray
    p: np.ndarray
    f_p: float
    f_x: np.ndarray
    t: int = 0

    def copy(self) -> "SwarmState":
        return SwarmState(self.x.copy(), self.v.copy(), self.p_best.copy(), self.f_best.copy(),
                          self.p.copy(), self.f_p, self.f_x.copy(), self.t)

    @property
    def q(self) -> int:
        return self.x.shape[0]

    @property
    def n(self) -> int:
        return self.x.shape[1]

    def stacked(self) -> np.ndarray:
        """``Z = [x_1; ...; x_q; v_1; ...; v_q; p]``."""
        return np.concatenate([self.x.reshape(-1), self.v.reshape(-1), self.p])

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.x)) and np.all(np.isfinite(self.v)) and np.all(np.isfinite(self.p)))


def _map(fn, items, executor):
    if executor is None:
        return [fn(i) for i in items]
    return list(executor.map(fn, items))


def _evaluate(objective, points, executor):
    vals = np.array(_map(lambda k: float(objective(points[k])), range(points.shape[0]), executor))
    if np.any(np.isnan(vals)):
        bad = [int(k) + 1 for k in np.flatnonzero(np.isnan(vals))]
        raise NumericAbort("objective returned NaN", {"agents": bad})
    return vals


def _argmin(values) -> int:
    # np.argmin returns the first minimiser, i.e. the lowest index on ties
    return int(np.argmin(values))


def init_swarm(config: RunConfig, rng: np.random.Generator, objective=None, executor=None) -> SwarmState:
    """Uniform positions and velocities inside their boxes.

    Personal bests start at the positions; ``p`` is the best of them with
    ties going to the lowest index.
    """
    objective = objective or get_objective(config.objective)
    q, n = config.q, config.n
    x = rng.uniform(np.array(config.lower), np.array(config.upper), size=(q, n))
    v = rng.uniform(np.array(config.v_lower), np.array(config.v_upper), size=(q, n))
    f_x = _evaluate(objective, x, executor)
    j = _argmin(f_x)
    return SwarmState(x, v, x.copy(), f_x.copy(), x[j].copy(), float(f_x[j]), f_x, 0)


def _as_laplacian(topology):
    if isinstance(topology, Digraph):
        return laplacian(topology).astype(float)
    return np.asarray(topology, dtype=float)


def _agent_velocity(k, x, v, p, lap, pm, c, mode, inertia):
    cons_v = -(lap[k] @ v)
    cons_x = -(lap[k] @ x)
    pull = p - x[k]
    drive = c.eta * (pm @ cons_v) + c.mu * (pm @ cons_x) + c.kappa * (pm @ pull)
    if mode == "algorithm1":
        return pm @ v[k] + drive
    base = v[k] if inertia == "identity" else pm @ v[k]
    return base + c.h * drive


def step_velocity(
    state: SwarmState,
    coeffs,
    p_matrix,
    topology,
    mode: str = "algorithm1",
    inertia: str = "identity",
    executor=None,
) -> np.ndarray:
    """New velocities for every agent from one read-only snapshot.

    Parameters
    ----------
    state : SwarmState
        Not modified.
    coeffs : McoCoefficients or sequence of McoCoefficients
        One set shared by all agents, or one per agent.
    p_matrix : ndarray of shape (n, n)
    topology : Digraph or ndarray
        Graph or its Laplacian.
    mode : {"algorithm1", "theorem"}
    inertia : {"identity", "projected"}
        Theorem mode only, see :class:`RunConfig`.
    executor : concurrent.futures.Executor, optional
        Agents are independent given the snapshot, so any executor gives
        bit-identical output.

    Returns
    -------
    ndarray of shape (q, n)
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    x, v, p = state.x, state.v, state.p
    lap = _as_laplacian(topology)
    pm = np.asarray(p_matrix, dtype=float)
    per_agent = coeffs if isinstance(coeffs, (list, tuple)) else [coeffs] * state.q
    if len(per_agent) != state.q:
        raise ValueError("need one coefficient set per agent")
    rows = _map(lambda k: _agent_velocity(k, x, v, p, lap, pm, per_agent[k], mode, inertia),
                range(state.q), executor)
    return np.array(rows, dtype=float).reshape(state.q, state.n)


def step_position(state: SwarmState, mode: str = "algorithm1", h: float = 1.0) -> np.ndarray:
    """``x + v`` (pseudocode) or ``x + h v`` (theorem); ``state.v`` is already advanced."""
    if mode == "algorithm1":
        return state.x + state.v
    if not h > 0:
        raise ValueError("theorem mode needs h > 0")
    return state.x + h * state.v


def update_global_best(
    state: SwarmState,
    coeffs,
    mode: str,
    objective: Callable,
    snapshot: Optional[SwarmState] = None,
    executor=None,
) -> dict:
    """Advance ``p`` (and the personal bests) after the moves.

    Pseudocode mode reads ``state.x``, the freshly moved positions, and
    sweeps agents in index order: an agent that improved its personal best
    blends ``p`` towards it with its own ``kappa`` and replaces ``p`` if
    strictly better.  A final pass moves ``p`` to the best personal best
    when that is still better, so ``f(p) <= min_k f(p_k)`` holds on exit.

    Theorem mode reads ``snapshot.x``, the positions at the start of the
    iteration: with ``j`` their lowest-index minimiser, ``p`` jumps to
    ``x_j`` when ``f(x_j) < f(p)`` and otherwise moves to
    ``p + h kappa (x_j - p)``.

    ``state`` is modified in place.  ``state.f_x`` must hold the values at
    ``state.x``.

    Returns
    -------
    dict
        ``{"j": best agent (1-based), "jump": bool}``; ``jump`` is always
        False in pseudocode mode.
    """
    if mode == "algorithm1":
        per_agent = coeffs if isinstance(coeffs, (list, tuple)) else [coeffs] * state.q
        for k in range(state.q):
            if state.f_x[k] < state.f_best[k]:
                state.p_best[k] = state.x[k]
                state.f_best[k] = state.f_x[k]
                state.p = state.p + per_agent[k].kappa * (state.p_best[k] - state.p)
                state.f_p = float(objective(state.p))
                if math.isnan(state.f_p):
                    raise NumericAbort("objective returned NaN at the global best", {"agent": k + 1})
                if state.f_best[k] < state.f_p:
                    state.p = state.p_best[k].copy()
                    state.f_p = float(state.f_best[k])
        j = _argmin(state.f_best)
        if state.f_best[j] < state.f_p:
            state.p = state.p_best[j].copy()
            state.f_p = float(state.f_best[j])
        return {"j": j + 1, "jump": False}
    if mode != "theorem":
        raise ValueError(f"mode must be one of {MODES}")
    if snapshot is None:
        raise ValueError("theorem mode needs the start-of-iteration snapshot")
    j = _argmin(snapshot.f_x)
    jump = bool(snapshot.f_x[j] < snapshot.f_p)
    if jump:
        state.p = snapshot.x[j].copy()
        state.f_p = float(snapshot.f_x[j])
    else:
        state.p = snapshot.p + coeffs.h * coeffs.kappa * (snapshot.x[j] - snapshot.p)
        state.f_p = float(objective(state.p))
        if math.isnan(state.f_p):
            raise NumericAbort("objective returned NaN at the global best", {"agent": j + 1})
    better = state.f_x < state.f_best
    state.p_best[better] = state.x[better]
    state.f_best[better] = state.f_x[better]
    return {"j": j + 1, "jump": jump}


def _check_draw(coeffs, lap, pm, conditions, q):
    """AND the hypothesis flags over every best-agent index ``j``."""
    flags = {c: True for c in CONDITION_NAMES}
    details = {}
    # H1-H3 do not depend on j; H4 and H5 do
    js = range(1, q + 1) if {"h4", "h5"} & set(conditions) else (1,)
    for j in js:
        rep = check_theorem_conditions(SwitchedSystemMatrices.build(j, coeffs, lap, pm))
        for c in CONDITION_NAMES:
            flags[c] = flags[c] and getattr(rep, c)
        if rep.violated_details:
            details.setdefault(j, rep.violated_details)
        if not all(flags[c] for c in conditions):
            break
    return flags, details


def sample_coefficients(
    config: RunConfig,
    rng: np.random.Generator,
    mode: Optional[str] = None,
    context=None,
) -> McoCoefficients:
    """Draw ``(mu, eta, kappa, h)`` from ``config.omega``.

    Pseudocode mode returns ``h = 1``.  Theorem mode with a nonempty
    ``config.conditions`` needs ``context = (laplacian, p_matrix)`` and
    redraws until every enforced hypothesis holds for every ``j``.

    Raises
    ------
    InfeasibleOmegaError
        After :data:`MAX_REJECTIONS` consecutive rejected draws.
    """
    mode = mode or config.mode

    def draw():
        vals = {name: config.omega.draw(name, rng) for name in ("mu", "eta", "kappa")}
        vals["h"] = 1.0 if mode == "algorithm1" else config.omega.draw("h", rng)
        return McoCoefficients(**vals)

    if mode == "algorithm1" or not config.conditions:
        return draw()
    if context is None:
        raise ValueError("theorem-mode validation needs (laplacian, p_matrix)")
    lap, pm = context
    counts = {c: 0 for c in CONDITION_NAMES}
    last = None
    for _ in range(MAX_REJECTIONS):
        coeffs = draw()
        if coeffs.h <= 0:
            continue
        flags, details = _check_draw(coeffs, lap, pm, config.conditions, config.q)
        if all(flags[c] for c in config.conditions):
            return coeffs
        for c in config.conditions:
            counts[c] += not flags[c]
        last = {"coeffs": coeffs.as_dict(), "violations": _jsonable(details)}
    diagnostic = {"rejections": MAX_REJECTIONS, "enforced": list(config.conditions),
                  "failures_by_condition": counts, "last_rejected": last}
    raise InfeasibleOmegaError(
        f"no admissible coefficients after {MAX_REJECTIONS} draws; failures {counts}", diagnostic
    )


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def draw_environment(config: RunConfig, t: int):
    """Topology and ``P`` in force at iteration ``t`` (0-based).

    Both are redrawn every ``topology.regenerate_every`` iterations.

    Returns
    -------
    epoch : int
    graph : Digraph
    p_matrix : ndarray
    """
    epoch = t // config.topology.regenerate_every
    graph = gds_topology(config.topology, _stream(config.seed, _STREAM_TOPOLOGY, epoch))
    pm = config.p_matrix.draw(config.n, _stream(config.seed, _STREAM_PMATRIX, epoch),
                              full_rank=config.mode == "theorem")
    return epoch, graph, pm


# ----------------------------------------------------------------------------
# trace


_CSV_COLUMNS = ("t", "f_best", "max_speed", "spread")


class IterationTrace:
    """Per-iteration records with strictly increasing ``t``."""

    def __init__(self):
        self.records: list[dict] = []

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __getitem__(self, i):
        return self.records[i]

    def append(self, record: dict):
        if self.records and record["t"] <= self.records[-1]["t"]:
            raise ValueError("trace records must have increasing t")
        self.records.append(record)

    def column(self, name) -> np.ndarray:
        return np.array([r[name] for r in self.records], dtype=float)

    def to_jsonl(self) -> str:
        return "".join(json.dumps(r, sort_keys=True) + "\n" for r in self.records)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(_CSV_COLUMNS)
        for r in self.records:
            writer.writerow([r["t"]] + [repr(float(r[c])) for c in _CSV_COLUMNS[1:]])
        return buf.getvalue()


@dataclass
class RunResult:
    """Outcome of :func:`run`.

    ``converged`` means the stopping rule on ``|delta f(p)|`` fired before
    ``max_iters``.
    """

    best_x: np.ndarray
    best_f: float
    iterations: int
    converged: bool
    trace: IterationTrace
    state: SwarmState
    config: RunConfig

    def summary(self) -> dict:
        return {
            "best_x": [float(v) for v in self.best_x],
            "best_f": float(self.best_f),
            "iterations": int(self.iterations),
            "converged": bool(self.converged),
        }


def _record(t, state, dp, coeffs, epoch, info, flags):
    speeds = np.linalg.norm(state.v, axis=1)
    spread = np.linalg.norm(state.x - state.p, axis=1)
    if isinstance(coeffs, (list, tuple)):
        drawn = [[c.mu, c.eta, c.kappa] for c in coeffs]
    else:
        drawn = coeffs.as_dict()
    return {
        "t": t,
        "f_best": float(state.f_p),
        "max_speed": float(np.max(speeds)),
        "spread": float(np.max(spread)),
        "dp": float(dp),
        "coeffs": drawn,
        "topology_id": int(epoch),
        "j": int(info["j"]),
        "jump": bool(info["jump"]),
        "conditions": flags,
    }


def _iterate(config, state, objective, executor, t):
    """One full iteration; returns the new state and its trace record."""
    epoch, graph, pm = draw_environment(config, t)
    lap = laplacian(graph).astype(float)
    snapshot = state.copy()
    if config.mode == "algorithm1":
        coeffs = [sample_coefficients(config, _stream(config.seed, _STREAM_COEFF, t, k)) for k in range(config.q)]
        flags = None
    else:
        coeffs = sample_coefficients(config, _stream(config.seed, _STREAM_COEFF, t), context=(lap, pm))
        flags = ({c: True for c in config.conditions} if config.conditions else None)
    new = snapshot.copy()
    new.v = step_velocity(snapshot, coeffs, pm, lap, config.mode, config.inertia, executor)
    h = 1.0 if config.mode == "algorithm1" else coeffs.h
    new.x = step_position(new, config.mode, h)
    if not new.is_finite():
        raise NumericAbort("swarm state became non-finite", {"t": t + 1})
    new.f_x = _evaluate(objective, new.x, executor)
    info = update_global_best(new, coeffs, config.mode, objective, snapshot=snapshot)
    new.t = t + 1
    if not new.is_finite() or not math.isfinite(new.f_p):
        raise NumericAbort("swarm state became non-finite", {"t": t + 1})
    dp = float(np.linalg.norm(new.p - snapshot.p))
    return new, _record(t + 1, new, dp, coeffs, epoch, info, flags)


def run(config: RunConfig, workers: int = 1, objective: Optional[Callable] = None) -> RunResult:
    """Run the optimizer to ``max_iters`` or until the stopping rule fires.

    Parameters
    ----------
    config : RunConfig
    workers : int
        Threads used for per-agent velocity updates and objective calls.
        The result is bit-identical for every value.
    objective : callable, optional
        Overrides ``config.objective``.

    Raises
    ------
    InfeasibleOmegaError
        Theorem mode could not find admissible coefficients.
    NumericAbort
        NaN objective value or non-finite state.
    """
    if workers < 1:
        raise ValueError("workers must be positive")
    objective = objective or get_objective(config.objective)
    executor = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        state = init_swarm(config, _stream(config.seed, _STREAM_INIT), objective, executor)
        trace = IterationTrace()
        quiet = 0
        converged = False
        for t in range(config.max_iters):
            prev_f = state.f_p
            state, rec = _iterate(config, state, objective, executor, t)
            trace.append(rec)
            quiet = quiet + 1 if abs(state.f_p - prev_f) < config.stop_tol else 0
            if quiet >= config.stop_window:
                converged = True
                break
    finally:
        if executor is not None:
            executor.shutdown()
    return RunResult(state.p.copy(), state.f_p, state.t, converged, trace, state, config)


def _trend(values, window):
    if values.size < 2:
        return {"status": "insufficient-data"}
    w = max(1, min(window, values.size // 2))
    head, tail = float(np.max(values[:w])), float(np.max(values[-w:]))
    return {"status": "ok", "head": head, "tail": tail, "decreasing": bool(tail < head), "final": float(values[-1])}


def convergence_metrics(trace: IterationTrace, window: int = 100, stop_tol: float = 1e-10) -> dict:
    """Tail statistics of a run.

    ``velocity_sup_trend`` and ``spread_trend`` compare the maximum of
    ``max_k ||v_k||`` (resp. ``max_k ||x_k - p||``) over the first and the
    last ``window`` records; ``p_settled`` is whether ``||delta p||`` stayed
    below ``stop_tol`` over the last window.  Fewer than two records give
    ``{"status": "insufficient-data"}`` trends.
    """
    if len(trace) == 0:
        raise ValueError("empty trace")
    speed = trace.column("max_speed")
    spread = trace.column("spread")
    dp = trace.column("dp")
    w = max(1, min(window, dp.size))
    return {
        "velocity_sup_trend": _trend(speed, window),
        "spread_trend": _trend(spread, window),
        "p_settled": bool(np.max(dp[-w:]) < stop_tol) if dp.size >= 2 else False,
        "max_dp_tail": float(np.max(dp[-w:])),
    }
