"""Trajectory criticality index: the cheapest piecewise-constant
(longitudinal, lateral) acceleration plan over the horizon, scored by
reference-tracking margins and normalized control effort.

Motion is a point mass in the actor's frame at scene time (x along the
heading, y to the left); the heading itself is held fixed. Plans that
collide with an obstacle or leave the drivable area are infeasible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import shapely

from .core import ActorState, MetricResult, Scale, Scene, Unit, longitudinal_lateral_decompose
from .geometry import footprint_corners
from .settings import DEFAULT, Settings

INF = math.inf


@dataclass(frozen=True)
class TCIWeights:
    w_long: float = 1.0
    w_y: float = 1.0
    w_ax: float = 1.0
    w_ay: float = 1.0

    def __post_init__(self):
        if min(self.w_long, self.w_y, self.w_ax, self.w_ay) < 0:
            raise ValueError("TCI weights must be non-negative")

    def scaled(self, k: float) -> "TCIWeights":
        return TCIWeights(k * self.w_long, k * self.w_y, k * self.w_ax, k * self.w_ay)


@dataclass(frozen=True)
class TCIParams:
    mu_max: float = 1.0
    g: float = 9.81
    v_max: float = 50.0
    t_s: float = 0.5
    # following-distance reference in seconds of travel
    headway: float = 2.0
    lateral_range: float = 10.0
    lateral_resolution: float = 0.05


@dataclass(frozen=True)
class _Problem:
    actor: ActorState
    n: int
    params: TCIParams
    weights: TCIWeights
    obstacle_geoms: np.ndarray  # flattened obstacle regions swept per step (world frame)
    obstacle_step: np.ndarray  # step index of each obstacle region
    drivable: Optional[object]
    r_lat: float
    d_lat: float
    d_long: float
    lead_x: np.ndarray  # per step: longitudinal position of the nearest obstacle ahead (inf if none)
    point_mode: bool


def _to_world(actor: ActorState, x, y):
    c, s = math.cos(actor.yaw), math.sin(actor.yaw)
    return np.stack([actor.position[0] + c * x - s * y, actor.position[1] + s * x + c * y], -1)


def _to_frame(actor: ActorState, pts):
    rel = np.asarray(pts, dtype=float) - actor.p
    c, s = math.cos(actor.yaw), math.sin(actor.yaw)
    return np.stack([c * rel[..., 0] + s * rel[..., 1], -s * rel[..., 0] + c * rel[..., 1]], -1)


def _obstacles(actor: ActorState, scene: Scene, times: np.ndarray) -> list[list]:
    static = [shapely.Polygon(o) for o in scene.static_objects]
    out = []
    for t in times:
        geoms = list(static)
        for o in scene.others(actor.id):
            p = o.p + o.v * t
            geoms.append(shapely.Polygon(footprint_corners(p, o.yaw, o.length, o.width)[0]))
        out.append(geoms)
    return out


def _free_lateral_interval(actor, scene, obstacles, params, reach) -> tuple[float, float]:
    """Centre and half width of the widest lateral interval at the actor's
    position that is drivable and not blocked by an obstacle within
    ``reach`` ahead."""
    half_w = 0.5 * actor.width
    blocks = []
    for g in obstacles:
        pts = _to_frame(actor, np.asarray(g.exterior.coords))
        if pts[:, 0].max() < 0 or pts[:, 0].min() > reach:
            continue
        blocks.append((pts[:, 1].min() - half_w, pts[:, 1].max() + half_w))

    def free(ys):
        ys = np.atleast_1d(ys)
        ok = np.ones(len(ys), dtype=bool)
        if scene.drivable_area is not None:
            ok &= scene.drivable_area.drivable(_to_world(actor, np.zeros_like(ys), ys))
        for lo, hi in blocks:
            ok &= ~((ys > lo) & (ys < hi))
        return ok

    def edge(inside, outside):
        for _ in range(40):
            m = 0.5 * (inside + outside)
            if free(m)[0]:
                inside = m
            else:
                outside = m
        return inside

    R, res = params.lateral_range, params.lateral_resolution
    ys = np.arange(-R, R + 1e-9, res)
    ok = free(ys)
    best = None
    i = 0
    while i < len(ys):
        if not ok[i]:
            i += 1
            continue
        j = i
        while j + 1 < len(ys) and ok[j + 1]:
            j += 1
        lo = edge(ys[i], ys[i - 1]) if i > 0 else ys[0]
        hi = edge(ys[j], ys[j + 1]) if j + 1 < len(ys) else ys[-1]
        if best is None or hi - lo > best[1] - best[0]:
            best = (lo, hi)
        i = j + 1
    if best is None:
        return 0.0, R
    lo, hi = best
    # bisection leaves ~1e-15 asymmetry; snap so a centred actor sits exactly on the reference
    return round(0.5 * (lo + hi), 9), max(0.5 * (hi - lo), res)


def _lead_positions(actor, obstacles_per_step) -> np.ndarray:
    half_w = 0.5 * actor.width
    out = []
    for geoms in obstacles_per_step:
        best = INF
        for g in geoms:
            pts = _to_frame(actor, np.asarray(g.exterior.coords))
            if pts[:, 0].max() <= 0:
                continue
            if pts[:, 1].min() < half_w and pts[:, 1].max() > -half_w:
                best = min(best, max(pts[:, 0].min(), 0.0))
        out.append(best)
    return np.array(out)


def _rollout(prob: _Problem, u: np.ndarray):
    """States after each step for controls u (n, 2)."""
    a = prob.actor
    ts = prob.params.t_s
    vx, vy = longitudinal_lateral_decompose(a.velocity, a.yaw)
    x = y = 0.0
    xs, ys, _speeds, prev_speeds, vxs = [], [], [], [], []
    for al, at in u:
        prev_speeds.append(math.hypot(vx, vy))
        if al < 0 and vx + al * ts < 0:
            x += vx * vx / (2 * -al)
            vx = 0.0
        else:
            x += vx * ts + 0.5 * al * ts * ts
            vx = vx + al * ts
        y += vy * ts + 0.5 * at * ts * ts
        vy += at * ts
        xs.append(x)
        ys.append(y)
        vxs.append(vx)
    return np.array(xs), np.array(ys), np.array(vxs), np.array(prev_speeds)


def objective(prob: _Problem, u: np.ndarray) -> float:
    """Discretized TCI objective for a control plan; +inf when infeasible."""
    p, w = prob.params, prob.weights
    lim = (p.mu_max * p.g) ** 2
    if np.any(np.sum(u**2, axis=1) > lim * (1 + 1e-12)):
        return INF
    x, y, vx, prev_speed = _rollout(prob, u)
    a = prob.actor
    world = _to_world(a, x, y)
    # regions swept during each step, so fast plans cannot tunnel through
    # an obstacle between two samples
    path = np.concatenate([a.p[None], world])
    if prob.point_mode:
        geoms = shapely.linestrings(np.stack([path[:-1], path[1:]], 1))
    else:
        corners = footprint_corners(path, np.full(len(path), a.yaw), a.length, a.width)
        geoms = shapely.convex_hull(shapely.multipoints(np.concatenate([corners[:-1], corners[1:]], 1)))
    if len(prob.obstacle_step):
        if np.any(shapely.intersects(geoms[prob.obstacle_step], prob.obstacle_geoms)):
            return INF
    if prob.drivable is not None:
        if prob.point_mode:
            pts = world
        else:
            pts = footprint_corners(world, np.full(len(x), a.yaw), a.length, a.width).reshape(-1, 2)
        if not np.all(prob.drivable.drivable(pts)):
            return INF
    r_long = prob.lead_x - 0.5 * a.length - p.headway * vx
    with np.errstate(invalid="ignore"):
        R_long = np.where(np.isfinite(r_long), np.maximum(0.0, x - r_long), 0.0) / prob.d_long
    R_lat2 = (y - prob.r_lat) ** 2 * prev_speed / (prob.d_lat**2 * p.v_max)
    effort = (w.w_ax * u[:, 0] ** 2 + w.w_ay * u[:, 1] ** 2) / lim
    return float(np.sum(w.w_long * R_long + w.w_y * R_lat2 + effort))


def _project(v: np.ndarray, radius: float) -> np.ndarray:
    n = math.hypot(*v)
    return v if n <= radius else v * (radius / n)


def _descend(prob: _Problem, u0: np.ndarray, step0: float, min_step: float):
    radius = prob.params.mu_max * prob.params.g
    u = u0.copy()
    f = objective(prob, u)
    step = step0
    while step >= min_step and f > 1e-12:
        improved = False
        for k in range(len(u)):
            for j in range(2):
                for sgn in (1.0, -1.0):
                    cand = u.copy()
                    cand[k, j] += sgn * step
                    cand[k] = _project(cand[k], radius)
                    fc = objective(prob, cand)
                    if fc < f:
                        u, f, improved = cand, fc, True
                        break
        if not improved:
            step *= 0.5
    return u, f


def build_problem(
    a1: ActorState,
    scene: Scene,
    horizon: float,
    weights: TCIWeights,
    params: TCIParams,
    settings: Settings = DEFAULT,
) -> _Problem:
    n = max(1, int(round(horizon / params.t_s)))
    times = params.t_s * np.arange(0, n + 1)
    snapshots = _obstacles(a1, scene, times)
    obstacles = snapshots[1:]
    swept = [
        [shapely.convex_hull(shapely.union(g0, g1)) for g0, g1 in zip(snapshots[k], snapshots[k + 1])] for k in range(n)
    ]
    v_long = max(a1.v_long, 0.0)
    reach = v_long * horizon + params.headway * v_long + a1.length
    all_now = _obstacles(a1, scene, np.array([0.0]))[0]
    r_lat, d_lat = _free_lateral_interval(a1, scene, all_now, params, reach)
    return _Problem(
        actor=a1,
        n=n,
        params=params,
        weights=weights,
        obstacle_geoms=np.array([g for geoms in swept for g in geoms], dtype=object),
        obstacle_step=np.array([k for k, geoms in enumerate(swept) for _ in geoms], dtype=int),
        drivable=scene.drivable_area,
        r_lat=r_lat,
        d_lat=d_lat,
        d_long=max(params.headway * v_long, 1.0),
        lead_x=_lead_positions(a1, obstacles),
        point_mode=settings.distance_mode == "center",
    )


def tci(
    a1: ActorState,
    scene: Scene,
    horizon: float = 3.0,
    weights: TCIWeights = TCIWeights(),
    params: TCIParams = TCIParams(),
    settings: Settings = DEFAULT,
    restarts: int = 8,
    seed: int = 0,
    min_step: float = 1e-3,
) -> MetricResult:
    """Minimum of the discretized objective over acceleration plans, by
    projected coordinate descent from zero controls plus random restarts."""
    prob = build_problem(a1, scene, horizon, weights, params, settings)
    start_pts = _to_world(a1, np.zeros(1), np.zeros(1))
    if scene.drivable_area is not None and not scene.drivable_area.drivable(start_pts)[0]:
        return MetricResult("TCI", INF, Scale.RATIO, Unit.DIMENSIONLESS, (a1.id,), frozenset({"off_drivable_area"}))
    radius = params.mu_max * params.g
    rng = np.random.default_rng(seed)
    starts = [np.zeros((prob.n, 2))]
    for _ in range(restarts):
        r = radius * np.sqrt(rng.uniform(size=prob.n))
        th = rng.uniform(0, 2 * math.pi, size=prob.n)
        starts.append(np.stack([r * np.cos(th), r * np.sin(th)], -1))
    best = INF
    for u0 in starts:
        _, f = _descend(prob, u0, radius / 4, min_step)
        best = min(best, f)
        if best <= 1e-12:
            break
    flags = {"no_feasible_plan"} if best == INF else set()
    return MetricResult("TCI", best, Scale.RATIO, Unit.DIMENSIONLESS, (a1.id,), frozenset(flags))
