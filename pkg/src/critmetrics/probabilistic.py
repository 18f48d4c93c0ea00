"""Collision probability estimators: Monte-Carlo sampling of control
inputs, scored multiple hypotheses, stochastic reachable sets and collision
trees."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from statistics import NormalDist
from typing import Callable, Mapping, Optional, Sequence, Union

import numpy as np
import shapely
import yaml

from .core import ActorState, MetricResult, Scale, Scene, Unit
from .geometry import first_contact, footprint_corners
from .markov import MarkovChainModel
from .models import ConstantVelocityModel, constant_acceleration_motion
from .settings import DEFAULT, Settings
from .trajectory import Trajectory, TrajectorySet, interp


class ProbabilityError(ValueError):
    pass


def _prob(metric_id, value, subjects, flags=()) -> MetricResult:
    return MetricResult(
        metric_id, float(min(max(value, 0.0), 1.0)), Scale.RATIO, Unit.PROBABILITY, tuple(subjects), frozenset(flags)
    )


# --- Monte Carlo ------------------------------------------------------------------


def _accel_trajectory(actor: ActorState, a_long: float, a_lat: float, times) -> Trajectory:
    c, s = math.cos(actor.yaw), math.sin(actor.yaw)
    a = np.array([a_long * c - a_lat * s, a_long * s + a_lat * c])
    pos, vel, acc = constant_acceleration_motion(actor.p, actor.v, a, times)
    return Trajectory(times, pos, vel, np.full(len(times), actor.yaw), acc, actor.length, actor.width, actor.id)


@dataclass(frozen=True)
class DiscreteControlSampler:
    """Draws one of a finite set of constant (a_long, a_lat) inputs
    uniformly; ``goal`` gives each choice's desirability (default 1)."""

    choices: tuple[tuple[float, float], ...]
    goal: Optional[tuple[float, ...]] = None

    def __post_init__(self):
        if not self.choices:
            raise ProbabilityError("sampler needs at least one control choice")
        if self.goal is not None and len(self.goal) != len(self.choices):
            raise ProbabilityError("one goal value per control choice required")

    def draw(self, actor: ActorState, rng: np.random.Generator):
        """A control (a_long, a_lat) and its goal value."""
        k = int(rng.integers(len(self.choices)))
        g = 1.0 if self.goal is None else float(self.goal[k])
        return tuple(self.choices[k]), g

    def trajectory(self, actor: ActorState, control, times: np.ndarray) -> Trajectory:
        return _accel_trajectory(actor, *control, times)


@dataclass(frozen=True)
class UniformAccelerationSampler:
    """Constant accelerations drawn uniformly from the actor's capability
    box (clipped to the friction circle); ``goal`` maps (a_long, a_lat) to
    a desirability (default uniform)."""

    goal: Optional[Callable[[float, float], float]] = None

    def draw(self, actor: ActorState, rng: np.random.Generator):
        cap = actor.capabilities
        al = float(rng.uniform(cap.a_long_min, cap.a_long_max))
        at = float(rng.uniform(-cap.a_lat_max, cap.a_lat_max))
        g = 1.0 if self.goal is None else float(self.goal(al, at))
        return (al, at), g

    def trajectory(self, actor: ActorState, control, times: np.ndarray) -> Trajectory:
        return _accel_trajectory(actor, *control, times)


@dataclass(frozen=True)
class MCEstimate:
    result: MetricResult
    standard_error: float
    n: int

    @property
    def value(self) -> float:
        return self.result.value


def _left_drivable(tr: Trajectory, scene: Scene, settings: Settings) -> bool:
    if scene.drivable_area is None:
        return False
    if settings.distance_mode == "center":
        pts = tr.pos
    else:
        pts = footprint_corners(tr.pos, tr.yaw, tr.length, tr.width).reshape(-1, 2)
    return not bool(np.all(scene.drivable_area.drivable(pts)))


def p_mc(
    a1: ActorState,
    scene: Scene,
    horizon: float,
    samplers: Mapping[str, object],
    n: int = 1000,
    seed: int = 0,
    alphas: Optional[Mapping[str, float]] = None,
    step: float = 0.05,
    settings: Settings = DEFAULT,
) -> MCEstimate:
    """Self-normalized importance estimate of A1's collision probability.

    Each sample draws a control input per sampled actor (others keep
    constant velocity; samplers provide ``draw`` and ``trajectory``); its weight is the combined goal
    ``prod_j g_j(u_j) ** alpha_j``. A sample counts as a collision when A1
    touches another actor or leaves the drivable area. Sample ``i`` uses
    the generator keyed by ``(seed, i)``.
    """
    if n < 1:
        raise ProbabilityError("sample count must be at least 1")
    times = np.arange(0.0, horizon + step / 2, step)
    alphas = alphas or {}
    cv = ConstantVelocityModel(horizon, step)
    flags = set() if scene.drivable_area is not None else {"no_drivable_area"}
    fixed = {a.id: cv.predict(a, times) for a in scene.actors if a.id not in samplers}
    sampled = [a for a in scene.actors if a.id in samplers]
    outcomes: dict = {}  # joint control -> collision indicator

    def collides(controls) -> float:
        trs = dict(fixed)
        for actor, u in zip(sampled, controls):
            trs[actor.id] = samplers[actor.id].trajectory(actor, u, times)
        ego = trs[a1.id]
        hit = _left_drivable(ego, scene, settings) or any(
            first_contact(ego, tr, settings) < math.inf for aid, tr in trs.items() if aid != a1.id
        )
        return float(hit)

    hits = np.zeros(n)
    weights = np.zeros(n)
    for i in range(n):
        rng = np.random.default_rng([seed, i])
        controls, w = [], 1.0
        for actor in sampled:
            u, g = samplers[actor.id].draw(actor, rng)
            controls.append(u)
            w *= g ** alphas.get(actor.id, 1.0)
        key = tuple(controls)
        if key not in outcomes:
            outcomes[key] = collides(key)
        hits[i], weights[i] = outcomes[key], w
    W = weights.sum()
    if not W > 0:
        raise ProbabilityError("degenerate goal function: all sample weights are zero")
    p = float(weights @ hits / W)
    se = float(math.sqrt(np.sum(weights**2 * (hits - p) ** 2)) / W)
    return MCEstimate(_prob("P-MC", p, (a1.id,), flags), se, n)


# --- multiple hypotheses -----------------------------------------------------------


def _hypotheses(s: TrajectorySet) -> TrajectorySet:
    if s.weights is None:
        raise ProbabilityError("hypothesis sets need realization probabilities summing to 1")
    if len(s) == 0:
        raise ProbabilityError("empty hypothesis set")
    return s


def p_smh(
    ego: TrajectorySet,
    others: Union[TrajectorySet, Sequence[TrajectorySet]],
    settings: Settings = DEFAULT,
    subjects: Sequence[str] = (),
) -> MetricResult:
    """Sum of p_i p_j over colliding (ego hypothesis i, other hypothesis j)
    pairs. Several other actors are treated as independent; with one, this
    is the plain double sum."""
    ego = _hypotheses(ego)
    sets = [others] if isinstance(others, TrajectorySet) else list(others)
    sets = [_hypotheses(s) for s in sets]
    total = 0.0
    if len(sets) == 1:
        (s,) = sets
        for tr_i, p_i in zip(ego.trajectories, ego.weights):
            for tr_j, p_j in zip(s.trajectories, s.weights):
                if p_i > 0 and p_j > 0 and first_contact(tr_i, tr_j, settings) < math.inf:
                    total += p_i * p_j
        return _prob("P-SMH", total, subjects)
    for tr_i, p_i in zip(ego.trajectories, ego.weights):
        if p_i == 0:
            continue
        survive = 1.0
        for s in sets:
            hit = sum(p_j for tr_j, p_j in zip(s.trajectories, s.weights) if p_j > 0 and first_contact(tr_i, tr_j, settings) < math.inf)
            survive *= 1.0 - hit
        total += p_i * (1.0 - survive)
    return _prob("P-SMH", total, subjects)


# --- stochastic reachable sets ------------------------------------------------------------


def srs_collision_probability(
    chain: MarkovChainModel,
    p0: np.ndarray,
    steps: int,
    omega: Union[Sequence[set], Callable[[int], set]],
    p_dev: Sequence[float],
    remove_collided: bool = True,
) -> tuple[float, list[float]]:
    """Collision probability from a Markov chain over path cells and an
    independent lateral-deviation distribution.

    ``omega[k]`` holds the (path cell e, deviation cell f) pairs whose
    bodies intersect the ego during step interval k. Per interval the
    collision mass is ``sum p_e^path p_f^dev`` over omega; with
    ``remove_collided`` that mass is removed from the chain before the
    next step so each collision is counted once. Returns the clamped total
    and the per-interval masses.
    """
    p_dev = np.asarray(p_dev, dtype=float)
    if np.any(p_dev < 0) or abs(p_dev.sum() - 1) > 1e-9:
        raise ProbabilityError("deviation probabilities must form a distribution")
    A, B = chain.step_matrix(), chain.interval_matrix()
    p = np.asarray(p0, dtype=float)
    if abs(p.sum() - 1) > 1e-9:
        raise ProbabilityError("initial distribution must sum to 1")
    O = B if B is not None else A
    masses = []
    for k in range(steps):
        om = omega(k) if callable(omega) else omega[k]
        frac = np.zeros(chain.n_path_cells)
        for e, f in om:
            frac[e] += p_dev[f]
        frac = np.minimum(frac, 1.0)
        state_frac = np.zeros(chain.n_states)
        state_frac[:-1] = frac[chain.path_of_state]
        # collision share of each source state's occupancy over the interval;
        # summed against p this is sum_e p_e^path * frac_e
        c = state_frac @ O
        masses.append(float(c @ p))
        if remove_collided:
            # exactly the counted share leaves the chain, so each unit of
            # probability mass collides at most once
            p = p * (1.0 - c)
        p = A @ p
    total = float(sum(masses))
    return min(max(total, 0.0), 1.0), masses


def _path_point(path: np.ndarray, s: float):
    seg = np.linalg.norm(np.diff(path, axis=0), axis=1)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    s = min(max(s, 0.0), cum[-1])
    k = min(int(np.searchsorted(cum, s, side="right") - 1), len(seg) - 1)
    u = (s - cum[k]) / seg[k] if seg[k] > 0 else 0.0
    d = (path[k + 1] - path[k]) / seg[k]
    return path[k] + u * (path[k + 1] - path[k]), d


def body_region(path: np.ndarray, s_lo: float, s_hi: float, dev_lo: float, dev_hi: float, length: float, width: float):
    """Over-approximation of the area swept by a body whose reference point
    lies on the path between ``s_lo`` and ``s_hi`` with lateral deviation in
    ``[dev_lo, dev_hi]``."""
    pts = []
    for s in np.linspace(s_lo, s_hi, 5):
        p, d = _path_point(path, s)
        n = np.array([-d[1], d[0]])
        for dev in (dev_lo, dev_hi):
            yaw = math.atan2(d[1], d[0])
            pts.extend(footprint_corners(p + dev * n, yaw, length, width)[0])
    return shapely.MultiPoint(np.array(pts)).convex_hull


@dataclass(frozen=True, eq=False)
class SRSActor:
    """The other actor for P-SRS: a chain over (path position, ...) cells,
    its path polyline, lateral deviation partition edges and
    probabilities."""

    chain: MarkovChainModel
    path: np.ndarray
    dev_edges: np.ndarray
    p_dev: np.ndarray
    length: float = 4.5
    width: float = 1.8
    actor_id: str = "other"

    def __post_init__(self):
        object.__setattr__(self, "path", np.asarray(self.path, dtype=float))
        object.__setattr__(self, "dev_edges", np.asarray(self.dev_edges, dtype=float))
        object.__setattr__(self, "p_dev", np.asarray(self.p_dev, dtype=float))
        if len(self.dev_edges) != len(self.p_dev) + 1:
            raise ProbabilityError("need one deviation probability per deviation interval")
        if self.chain.grid is None:
            raise ProbabilityError("P-SRS needs a chain with a grid whose first axis is the path position")


def omega_sets(ego: Trajectory, other: SRSActor, steps: int, T: float) -> list[set]:
    """Pairs (path cell, deviation cell) whose bodies can intersect the
    ego's body during each interval [kT, (k+1)T]."""
    s_edges = other.chain.grid.edges[0]
    regions = []
    for e in range(len(s_edges) - 1):
        for f in range(len(other.p_dev)):
            regions.append(
                (e, f, body_region(other.path, s_edges[e], s_edges[e + 1], other.dev_edges[f], other.dev_edges[f + 1], other.length, other.width))
            )
    geoms = np.array([r[2] for r in regions], dtype=object)
    out = []
    for k in range(steps):
        t0, t1 = k * T, (k + 1) * T
        idx = (ego.t >= t0 - 1e-12) & (ego.t <= t1 + 1e-12)
        sub = interp(ego, np.union1d(ego.t[idx], [t0, t1]))
        corners = footprint_corners(sub.pos, sub.yaw, sub.length, sub.width).reshape(-1, 2)
        ego_region = shapely.MultiPoint(corners).convex_hull
        hit = shapely.intersects(geoms, ego_region)
        out.append({(regions[i][0], regions[i][1]) for i in np.nonzero(hit)[0]})
    return out


def p_srs(
    ego: Trajectory,
    other: SRSActor,
    initial_state: Sequence[float],
    steps: int,
    remove_collided: bool = True,
    subjects: Sequence[str] = (),
) -> MetricResult:
    """Collision probability of an ego with known motion against an actor
    abstracted by a Markov chain along its path."""
    omega = omega_sets(ego, other, steps, other.chain.T)
    p0 = other.chain.initial(np.asarray(initial_state, dtype=float))
    total, _ = srs_collision_probability(other.chain, p0, steps, omega, other.p_dev, remove_collided)
    flags = {"empty_omega"} if not any(omega) else set()
    return _prob("P-SRS", total, subjects or (ego.actor_id, other.actor_id), flags)


# --- collision trees ------------------------------------------------------------------------


@dataclass(frozen=True)
class Distribution:
    """Threshold distribution by name: normal(mu, sigma), lognormal(mu,
    sigma of the underlying normal), uniform(low, high) or constant(value)."""

    kind: str
    params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        p = dict(self.params)
        need = {"normal": ("mu", "sigma"), "lognormal": ("mu", "sigma"), "uniform": ("low", "high"), "constant": ("value",)}
        if self.kind not in need:
            raise ProbabilityError(f"unknown distribution {self.kind!r}")
        missing = [k for k in need[self.kind] if k not in p]
        if missing:
            raise ProbabilityError(f"{self.kind} distribution lacks {missing}")
        if self.kind in ("normal", "lognormal") and not p["sigma"] > 0:
            raise ProbabilityError("sigma must be positive")
        if self.kind == "uniform" and not p["high"] > p["low"]:
            raise ProbabilityError("uniform distribution needs high > low")
        object.__setattr__(self, "params", p)

    def cdf(self, x: float) -> float:
        p = self.params
        if self.kind == "normal":
            return NormalDist(p["mu"], p["sigma"]).cdf(x)
        if self.kind == "lognormal":
            return 0.0 if x <= 0 else NormalDist(p["mu"], p["sigma"]).cdf(math.log(x))
        if self.kind == "uniform":
            return min(max((x - p["low"]) / (p["high"] - p["low"]), 0.0), 1.0)
        return 1.0 if x >= p["value"] else 0.0


@dataclass(frozen=True)
class Leaf:
    outcome: int
    name: str = ""

    def __post_init__(self):
        if self.outcome not in (0, 1):
            raise ProbabilityError("leaf outcome must be 0 or 1")


@dataclass(frozen=True)
class Condition:
    """Branch on ``metric op X`` with random threshold ``X``; ``op`` is "<"
    or ">". With ``probability`` set the branch probability is fixed."""

    metric: str = ""
    op: str = "<"
    threshold: Optional[Distribution] = None
    if_true: Union["Condition", Leaf, None] = None
    if_false: Union["Condition", Leaf, None] = None
    probability: Optional[float] = None

    def p_true(self, values: Mapping[str, float]) -> float:
        if self.probability is not None:
            return float(self.probability)
        try:
            v = float(values[self.metric])
        except KeyError:
            raise ProbabilityError(f"collision tree needs metric {self.metric!r}") from None
        F = self.threshold.cdf(v)
        return 1.0 - F if self.op == "<" else F


@dataclass(frozen=True)
class CollisionTree:
    root: Union[Condition, Leaf]

    def leaves(self, values: Mapping[str, float]) -> list[tuple[float, Leaf]]:
        """(reach probability, leaf) for every leaf."""
        out = []

        def walk(node, p):
            if isinstance(node, Leaf):
                out.append((p, node))
                return
            q = node.p_true(values)
            walk(node.if_true, p * q)
            walk(node.if_false, p * (1.0 - q))

        walk(self.root, 1.0)
        return out


def aci_from_leaves(leaves: Sequence[tuple[float, int]]) -> float:
    total = sum(p for p, _ in leaves)
    if any(p < 0 for p, _ in leaves) or abs(total - 1.0) > 1e-9:
        raise ProbabilityError("leaf probabilities must be non-negative and sum to 1")
    return float(sum(p * c for p, c in leaves))


def aci(values: Mapping[str, float], tree: CollisionTree, subjects: Sequence[str] = ()) -> MetricResult:
    """Aggregated crash index: summed reach probability of the collision
    leaves given the scene's metric values."""
    value = aci_from_leaves([(p, leaf.outcome) for p, leaf in tree.leaves(values)])
    return _prob("ACI", value, subjects)


def _parse_node(d) -> Union[Condition, Leaf]:
    if not isinstance(d, Mapping):
        raise ProbabilityError(f"tree node must be a mapping, got {d!r}")
    if "outcome" in d:
        return Leaf(int(d["outcome"]), str(d.get("name", "")))
    for k in ("if_true", "if_false"):
        if k not in d:
            raise ProbabilityError(f"condition node lacks {k!r}")
    thr = None
    if "threshold" in d:
        t = dict(d["threshold"])
        thr = Distribution(t.pop("dist"), t)
    elif "probability" not in d:
        raise ProbabilityError("condition node needs a threshold distribution or a fixed probability")
    op = d.get("op", "<")
    if op not in ("<", ">"):
        raise ProbabilityError(f"unknown comparison {op!r}")
    return Condition(
        metric=str(d.get("metric", "")),
        op=op,
        threshold=thr,
        if_true=_parse_node(d["if_true"]),
        if_false=_parse_node(d["if_false"]),
        probability=d.get("probability"),
    )


def load_collision_tree(source: Union[str, Path, Mapping]) -> CollisionTree:
    """Parse a collision tree from YAML text, a YAML file, or a mapping with
    a ``tree`` (or root node) entry."""
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source and Path(source).exists()):
        data = yaml.safe_load(Path(source).read_text())
    elif isinstance(source, str):
        data = yaml.safe_load(source)
    else:
        data = source
    return CollisionTree(_parse_node(data.get("tree", data)))
