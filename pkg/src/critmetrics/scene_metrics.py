"""Scene-level metrics: one value per scene, usually for an ordered actor
pair (A1, A2) and a prediction model.

All functions take :class:`ActorState` objects directly; the scene time is
carried on the states. Distances follow ``settings.distance_mode``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence, Union

import numpy as np
import shapely

from .core import (
    ActorState,
    ConflictArea,
    MetricResult,
    Scale,
    Scene,
    Unit,
    distance,
    longitudinal_lateral_decompose,
)
from .geometry import first_contact, first_polygon_reach, pair_clearance, path_coincidences, polygon_clearance
from .maneuvers import ManeuverModel, brake
from .models import ConstantVelocityModel, PredictionModel, constant_acceleration_motion
from .settings import DEFAULT, Settings
from .trajectory import Trajectory, TrajectorySet, interp

INF = math.inf


class MetricError(ValueError):
    pass


def _res(metric_id, value, unit, subjects, flags=(), scale=Scale.RATIO) -> MetricResult:
    return MetricResult(metric_id, float(value), scale, unit, tuple(subjects), frozenset(flags))


def _ids(*actors) -> tuple[str, ...]:
    return tuple(a.id for a in actors)


def _pair(a1, a2, model):
    times = model.times()
    return model.predict(a1, times), model.predict(a2, times)


def current_distance(a1: ActorState, a2: ActorState, settings: Settings = DEFAULT) -> float:
    if settings.distance_mode == "center":
        return distance(a1.position, a2.position)
    return distance(a1.position, a2.position, shapes=(a1, a2))


def _contact_time(a1, a2, model, settings) -> float:
    return first_contact(*_pair(a1, a2, model), settings)


# --- time-based ----------------------------------------------------------------


def ttc(a1: ActorState, a2: ActorState, model: PredictionModel, settings: Settings = DEFAULT) -> MetricResult:
    """Time to collision: first predicted contact within the horizon."""
    return _res("TTC", _contact_time(a1, a2, model, settings), Unit.TIME, _ids(a1, a2))


def pttc(a1: ActorState, a2: ActorState, settings: Settings = DEFAULT) -> MetricResult:
    """Predictive TTC for car following: A1 keeps its speed, the lead A2
    keeps its (longitudinal) acceleration and does not reverse after
    stopping. Speeds are measured along A1's heading."""
    d = current_distance(a1, a2, settings)
    subj = _ids(a1, a2)
    if d <= 0:
        return _res("PTTC", 0.0, Unit.TIME, subj)
    v1 = longitudinal_lateral_decompose(a1.velocity, a1.yaw)[0]
    v2 = longitudinal_lateral_decompose(a2.velocity, a1.yaw)[0]
    acc2 = longitudinal_lateral_decompose(a2.acceleration, a1.yaw)[0]
    ddot = v2 - v1  # negative while closing

    def cv(gap, closing):
        return gap / closing if closing > 0 else INF

    if abs(acc2) < 1e-12:
        return _res("PTTC", cv(d, -ddot), Unit.TIME, subj, {"constant_velocity_fallback"})
    if acc2 < 0 and v2 <= 0:
        # lead already at rest
        return _res("PTTC", cv(d, v1), Unit.TIME, subj)
    disc = ddot * ddot - 2 * acc2 * d
    roots = []
    if disc >= 0:
        sq = math.sqrt(disc)
        roots = sorted(r for r in ((-ddot - sq) / acc2, (-ddot + sq) / acc2) if r >= 0)
    t = roots[0] if roots else INF
    if acc2 < 0:
        t_stop = v2 / -acc2
        if t > t_stop:
            gap_stop = d + ddot * t_stop + 0.5 * acc2 * t_stop**2
            t = t_stop + cv(gap_stop, v1)
    return _res("PTTC", t, Unit.TIME, subj)


def tto(
    a1: ActorState,
    target: Union[ActorState, ConflictArea, Sequence],
    model: PredictionModel,
    settings: Settings = DEFAULT,
) -> MetricResult:
    """Time to object: first time A1 reaches a conflict area, a static
    polygon or (then identical to TTC) another actor."""
    if isinstance(target, ActorState):
        return _res("TTO", _contact_time(a1, target, model, settings), Unit.TIME, _ids(a1, target))
    if isinstance(target, ConflictArea):
        poly, tid = target.shape, target.id
    else:
        poly, tid = shapely.Polygon(target), "object"
    t = first_polygon_reach(model.predict(a1), poly, settings)
    return _res("TTO", t, Unit.TIME, (a1.id, tid))


def _golden_min(f, lo, hi, tol):
    g = (math.sqrt(5) - 1) / 2
    c, d = hi - g * (hi - lo), lo + g * (hi - lo)
    fc, fd = f(c), f(d)
    while hi - lo > tol:
        if fc <= fd:
            hi, d, fd = d, c, fc
            c = hi - g * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + g * (hi - lo)
            fd = f(d)
    x = 0.5 * (lo + hi)
    return x, f(x)


def dce_ttce(
    a1: ActorState, a2: ActorState, model: PredictionModel, settings: Settings = DEFAULT
) -> tuple[MetricResult, MetricResult]:
    """Distance of closest encounter and its (earliest) time."""
    tr1, tr2 = _pair(a1, a2, model)
    subj = _ids(a1, a2)
    t_c = first_contact(tr1, tr2, settings)
    if t_c < INF:
        return _res("DCE", 0.0, Unit.DISTANCE, subj), _res("TTCE", t_c, Unit.TIME, subj)
    t = tr1.t
    if settings.distance_mode == "center":
        from .geometry import segment_closest_approach

        rel = tr1.pos - tr2.pos
        if len(t) == 1:
            return _res("DCE", np.linalg.norm(rel[0]), Unit.DISTANCE, subj), _res("TTCE", t[0], Unit.TIME, subj)
        dmin, u = segment_closest_approach(rel[:-1], rel[1:])
        k = int(np.nonzero(dmin <= dmin.min() + 1e-9)[0][0])
        tt = t[k] + u[k] * (t[k + 1] - t[k])
        return _res("DCE", dmin[k], Unit.DISTANCE, subj), _res("TTCE", tt, Unit.TIME, subj)
    c = np.maximum(pair_clearance(tr1, tr2, settings), 0.0)
    k = int(np.nonzero(c <= c.min() + 1e-9)[0][0])
    best_t, best_d = t[k], c[k]
    if len(t) > 1:
        lo, hi = t[max(k - 1, 0)], t[min(k + 1, len(t) - 1)]

        def f(x):
            s1, s2 = interp(tr1, np.array([x])), interp(tr2, np.array([x]))
            return max(float(pair_clearance(s1, s2, settings)[0]), 0.0)

        x, fx = _golden_min(f, lo, hi, settings.time_tol)
        if fx < best_d - 1e-12:
            best_t, best_d = x, fx
    return _res("DCE", best_d, Unit.DISTANCE, subj), _res("TTCE", best_t, Unit.TIME, subj)


def wttc(
    a1: ActorState,
    a2: ActorState,
    model: Optional[PredictionModel] = None,
    settings: Settings = DEFAULT,
    sets: Optional[tuple[TrajectorySet, TrajectorySet]] = None,
) -> MetricResult:
    """Worst-case TTC: earliest contact over all pairs of predicted traces."""
    if sets is None:
        if model is None:
            raise MetricError("wttc needs a trace-set model or explicit trajectory sets")
        sets = (model.predict_set(a1), model.predict_set(a2))
    s1, s2 = sets
    if len(s1) == 0 or len(s2) == 0:
        raise MetricError("empty trajectory set")
    best = INF
    for tr1 in s1:
        for tr2 in s2:
            best = min(best, first_contact(tr1, tr2, settings))
    return _res("WTTC", best, Unit.TIME, _ids(a1, a2))


# --- maneuver-based ------------------------------------------------------------


def _avoids_after(a1, tr1, tr2, s, maneuver: ManeuverModel, settings) -> bool:
    """Whether A1 following its prediction until ``s`` and then the
    maneuver stays out of contact with A2's prediction until the horizon."""
    grid = tr1.t
    rel = np.concatenate([[0.0], grid[grid > s] - s])
    start = tr1.state_at(s, a1) if s > 0 else a1
    m_tr = maneuver.trajectory(start, rel)
    o_tr = interp(tr2, s + rel)
    return first_contact(m_tr, o_tr, settings) == INF


def ttm(
    a1: ActorState,
    a2: ActorState,
    model: PredictionModel,
    maneuver: ManeuverModel,
    settings: Settings = DEFAULT,
    metric_id: Optional[str] = None,
) -> MetricResult:
    """Time to maneuver: latest start time in [0, TTC] from which the
    maneuver avoids contact; -inf if even starting now collides."""
    mid = metric_id or {"brake": "TTB", "kickdown": "TTK"}.get(maneuver.maneuver_id, "TTS" if maneuver.maneuver_id.startswith("steer") else "TTM")
    tr1, tr2 = _pair(a1, a2, model)
    subj = _ids(a1, a2)
    t_c = first_contact(tr1, tr2, settings)
    if t_c == INF:
        return _res(mid, INF, Unit.TIME, subj, {"no_predicted_collision"}, Scale.INTERVAL)
    if not _avoids_after(a1, tr1, tr2, 0.0, maneuver, settings):
        return _res(mid, -INF, Unit.TIME, subj, {"unavoidable"}, Scale.INTERVAL)
    if _avoids_after(a1, tr1, tr2, t_c, maneuver, settings):
        return _res(mid, t_c, Unit.TIME, subj, (), Scale.INTERVAL)
    lo, hi = 0.0, t_c
    while hi - lo > 0.5 * settings.resolution:
        mid_t = 0.5 * (lo + hi)
        if _avoids_after(a1, tr1, tr2, mid_t, maneuver, settings):
            lo = mid_t
        else:
            hi = mid_t
    return _res(mid, lo, Unit.TIME, subj, (), Scale.INTERVAL)


def ttr(
    a1: ActorState,
    a2: ActorState,
    model: PredictionModel,
    maneuvers: Iterable[ManeuverModel],
    settings: Settings = DEFAULT,
) -> MetricResult:
    """Time to react: the maximum TTM over a set of maneuvers."""
    maneuvers = list(maneuvers)
    if not maneuvers:
        raise MetricError("ttr needs a non-empty maneuver set")
    results = [ttm(a1, a2, model, m, settings) for m in maneuvers]
    best = max(results, key=lambda r: r.value)
    return _res("TTR", best.value, Unit.TIME, _ids(a1, a2), best.flags, Scale.INTERVAL)


# --- headway ---------------------------------------------------------------------


def thw(a1: ActorState, a2: ActorState, model: PredictionModel, settings: Settings = DEFAULT) -> MetricResult:
    """Time headway: time until A1 reaches A2's current position."""
    times = model.times()
    t = first_contact(model.predict(a1, times), Trajectory.stationary(a2, times), settings)
    return _res("THW", t, Unit.TIME, _ids(a1, a2))


def hw(a1: ActorState, a2: ActorState, settings: Settings = DEFAULT) -> MetricResult:
    return _res("HW", current_distance(a1, a2, settings), Unit.DISTANCE, _ids(a1, a2))


# --- encroachment -------------------------------------------------------------------


def _pret_value(a1, a2, model, squared: bool) -> float:
    tr1, tr2 = _pair(a1, a2, model)
    pairs = path_coincidences(tr1, tr2)
    if not pairs:
        return INF
    arr = np.array(pairs, dtype=float)
    if squared:
        return float(np.min(np.abs(arr[:, 0] ** 2 - arr[:, 1] ** 2)))
    return float(np.min(np.abs(arr[:, 0] - arr[:, 1])))


def pret(a1: ActorState, a2: ActorState, model: PredictionModel) -> MetricResult:
    """Predicted encroachment time between the actors' reference-point
    paths."""
    return _res("PrET", _pret_value(a1, a2, model, False), Unit.TIME, _ids(a1, a2))


def spret(a1: ActorState, a2: ActorState, model: PredictionModel) -> MetricResult:
    return _res("SPrET", _pret_value(a1, a2, model, True), Unit.TIME2, _ids(a1, a2))


def ta(a1: ActorState, a2: ActorState, horizon: float = 20.0, step: float = 0.01) -> MetricResult:
    """Time advantage: PrET under constant velocity."""
    v = _pret_value(a1, a2, ConstantVelocityModel(horizon, step), False)
    return _res("TA", v, Unit.TIME, _ids(a1, a2))


# --- distances and stopping ----------------------------------------------------------


def msd(a1: ActorState) -> MetricResult:
    """Minimum stopping distance at the actor's maximum deceleration."""
    v = a1.v_long
    return _res("MSD", v * v / (2 * abs(a1.capabilities.a_long_min)), Unit.DISTANCE, (a1.id,))


def psd(a1: ActorState, area: Union[ConflictArea, Sequence], settings: Settings = DEFAULT) -> MetricResult:
    """Proportion of stopping distance: distance to the conflict area over
    the minimum stopping distance (inf for a stationary actor)."""
    poly = area.shape if isinstance(area, ConflictArea) else shapely.Polygon(area)
    tid = area.id if isinstance(area, ConflictArea) else "area"
    tr = Trajectory.stationary(a1, [0.0])
    d = float(polygon_clearance(tr, poly, settings)[0])
    m = msd(a1).value
    if m <= 0:
        return _res("PSD", INF, Unit.DIMENSIONLESS, (a1.id, tid), {"stationary"})
    return _res("PSD", d / m, Unit.DIMENSIONLESS, (a1.id, tid))


ActionModel = Callable[[ActorState, Optional[Scene], float], Union[bool, float]]


def ags(
    a1: ActorState,
    scene: Optional[Scene],
    action_model: ActionModel,
    s_max: float = 1000.0,
    settings: Settings = DEFAULT,
    n_check: int = 101,
) -> MetricResult:
    """Accepted gap size: least gap ``s`` the action model accepts.
    Probabilistic models (returning floats) accept at >= 0.5."""

    def accept(s):
        r = action_model(a1, scene, s)
        return bool(r >= 0.5) if not isinstance(r, (bool, np.bool_)) else bool(r)

    samples = [accept(s) for s in np.linspace(0.0, s_max, n_check)]
    if any(a and not b for a, b in zip(samples, samples[1:])):
        raise MetricError("invalid gap-acceptance model: acceptance is not monotone in the gap")
    if samples[0]:
        return _res("AGS", 0.0, Unit.DISTANCE, (a1.id,))
    if not samples[-1]:
        return _res("AGS", INF, Unit.DISTANCE, (a1.id,), {"never_accepted"})
    lo, hi = 0.0, s_max
    while hi - lo > 0.5 * settings.resolution:
        m = 0.5 * (lo + hi)
        if accept(m):
            hi = m
        else:
            lo = m
    return _res("AGS", hi, Unit.DISTANCE, (a1.id,))


# --- required accelerations ------------------------------------------------------------


def _long_accel_trajectory(a1: ActorState, a: float, times) -> Trajectory:
    e = np.array([math.cos(a1.yaw), math.sin(a1.yaw)])
    pos, vel, acc = constant_acceleration_motion(a1.p, a1.v, a * e, times, stop_at_zero=True)
    return Trajectory(times, pos, vel, np.full(len(times), a1.yaw), acc, a1.length, a1.width, a1.id)


def a_long_req(a1: ActorState, a2: ActorState, model: PredictionModel, settings: Settings = DEFAULT) -> MetricResult:
    """Least-magnitude constant longitudinal deceleration of A1 that avoids
    contact with A2's prediction (A1 stops rather than reverses)."""
    times = model.times()
    tr2 = model.predict(a2, times)
    subj = _ids(a1, a2)

    def avoids(a):
        return first_contact(_long_accel_trajectory(a1, a, times), tr2, settings) == INF

    if avoids(0.0):
        return _res("a_long_req", 0.0, Unit.ACCEL, subj, (), Scale.INTERVAL)
    if not avoids(settings.accel_floor):
        return _res("a_long_req", settings.accel_floor, Unit.ACCEL, subj, {"unavoidable"}, Scale.INTERVAL)
    lo, hi = settings.accel_floor, 0.0
    while hi - lo > 0.5 * settings.resolution:
        m = 0.5 * (lo + hi)
        if avoids(m):
            lo = m
        else:
            hi = m
    flags = {"exceeds_capability"} if lo < a1.capabilities.a_long_min else set()
    return _res("a_long_req", lo, Unit.ACCEL, subj, flags, Scale.INTERVAL)


def a_long_req_closed_form(v1: float, v2: float, a2: float, d: float) -> float:
    """Constant-acceleration car-following requirement
    ``min(a2 - (v1 - v2)^2 / (2 d), 0)``; exact only while the lead keeps
    moving."""
    if v1 <= v2:
        return min(a2, 0.0) if a2 < 0 else 0.0
    return min(a2 - (v1 - v2) ** 2 / (2 * d), 0.0)


def a_lat_req(a1: ActorState, a2: ActorState, model: PredictionModel, settings: Settings = DEFAULT) -> MetricResult:
    """Least constant lateral acceleration (left or right, whichever is
    smaller) added to A1's prediction that avoids contact."""
    times = model.times()
    tr1, tr2 = model.predict(a1, times), model.predict(a2, times)
    subj = _ids(a1, a2)
    if first_contact(tr1, tr2, settings) == INF:
        return _res("a_lat_req", 0.0, Unit.ACCEL, subj)
    n = np.array([-math.sin(a1.yaw), math.cos(a1.yaw)])
    half_t2 = 0.5 * times**2

    def avoids(b, sign):
        pos = tr1.pos + (sign * b * half_t2)[:, None] * n
        vel = tr1.vel + (sign * b * times)[:, None] * n
        shifted = Trajectory(times, pos, vel, tr1.yaw, tr1.acc, tr1.length, tr1.width, tr1.actor_id)
        return first_contact(shifted, tr2, settings) == INF

    best, flags = INF, set()
    for sign in (1.0, -1.0):
        if not avoids(settings.accel_ceiling, sign):
            continue
        lo, hi = 0.0, settings.accel_ceiling
        while hi - lo > 0.5 * settings.resolution:
            m = 0.5 * (lo + hi)
            if avoids(m, sign):
                hi = m
            else:
                lo = m
        best = min(best, hi)
    if best == INF:
        return _res("a_lat_req", settings.accel_ceiling, Unit.ACCEL, subj, {"unavoidable"})
    if best > a1.capabilities.a_lat_max:
        flags.add("exceeds_capability")
    return _res("a_lat_req", best, Unit.ACCEL, subj, flags)


def a_lat_req_closed_form(a1: ActorState, a2: ActorState, ttc_value: float) -> float:
    """Constant-acceleration fast path using the TTC and the actor widths;
    lateral quantities are measured in A1's frame."""
    if not ttc_value < INF:
        return 0.0
    if ttc_value <= 0:
        return INF
    _, p_rel = longitudinal_lateral_decompose(a2.p - a1.p, a1.yaw)
    _, v1 = longitudinal_lateral_decompose(a1.velocity, a1.yaw)
    _, v2 = longitudinal_lateral_decompose(a2.velocity, a1.yaw)
    _, acc2 = longitudinal_lateral_decompose(a2.acceleration, a1.yaw)
    half = 0.5 * (a1.width + a2.width)
    T = ttc_value
    vals = [acc2 + 2 * (v2 - v1) / T + 2 / T**2 * (sgn * half + p_rel) for sgn in (1.0, -1.0)]
    return min(abs(v) for v in vals)


def a_req(a1: ActorState, a2: ActorState, model: PredictionModel, settings: Settings = DEFAULT) -> MetricResult:
    """Norm of the longitudinal and lateral requirements."""
    lo = a_long_req(a1, a2, model, settings)
    la = a_lat_req(a1, a2, model, settings)
    return _res("a_req", math.hypot(lo.value, la.value), Unit.ACCEL, _ids(a1, a2), lo.flags | la.flags)


SPRET_THRESHOLD = 3.0


def a_req_cond(
    a1: ActorState,
    a2: ActorState,
    model: PredictionModel,
    settings: Settings = DEFAULT,
    threshold: float = SPRET_THRESHOLD,
) -> MetricResult:
    """``a_req`` when the squared encroachment time is below ``threshold``
    (s^2), else 0."""
    if spret(a1, a2, model).value < threshold:
        r = a_req(a1, a2, model, settings)
        return _res("a_req_cond", r.value, Unit.ACCEL, r.subjects, r.flags)
    return _res("a_req_cond", 0.0, Unit.ACCEL, _ids(a1, a2))


def dst(a1: ActorState, a2: ActorState, t_s: float = 0.0, settings: Settings = DEFAULT) -> MetricResult:
    """Deceleration to safety time: deceleration magnitude A1 needs to keep
    a safety time ``t_s`` behind a constant-velocity lead."""
    if t_s < 0:
        raise MetricError("safety time must be non-negative")
    d = current_distance(a1, a2, settings)
    v1 = longitudinal_lateral_decompose(a1.velocity, a1.yaw)[0]
    v2 = longitudinal_lateral_decompose(a2.velocity, a1.yaw)[0]
    subj = _ids(a1, a2)
    denom = 2 * (d - v2 * t_s)
    if denom <= 0:
        return _res("DST", INF, Unit.ACCEL, subj, {"safety_distance_violated"})
    if v1 <= v2:
        return _res("DST", 0.0, Unit.ACCEL, subj)
    return _res("DST", (v1 - v2) ** 2 / denom, Unit.ACCEL, subj)


def btn_value(a_long_required: float, a_long_min: float) -> float:
    if a_long_min >= 0:
        raise MetricError("invalid capability envelope: a_long_min must be negative")
    return a_long_required / a_long_min


def stn_value(a_lat_required: float, a_lat_max: float) -> float:
    if a_lat_max <= 0:
        raise MetricError("invalid capability envelope: a_lat_max must be positive")
    return a_lat_required / a_lat_max


def btn(a1: ActorState, a2: ActorState, model: PredictionModel, settings: Settings = DEFAULT) -> MetricResult:
    """Brake threat number; >= 1 means braking at capability cannot avoid
    the predicted collision."""
    r = a_long_req(a1, a2, model, settings)
    return _res("BTN", btn_value(r.value, a1.capabilities.a_long_min), Unit.DIMENSIONLESS, r.subjects, r.flags)


def stn(a1: ActorState, a2: ActorState, model: PredictionModel, settings: Settings = DEFAULT) -> MetricResult:
    """Steer threat number."""
    r = a_lat_req(a1, a2, model, settings)
    return _res("STN", stn_value(r.value, a1.capabilities.a_lat_max), Unit.DIMENSIONLESS, r.subjects, r.flags)


def jerk(a1: ActorState) -> tuple[MetricResult, MetricResult]:
    """(lateral, longitudinal) jerk in the actor's yaw frame."""
    if a1.jerk is None:
        raise MetricError(f"actor {a1.id!r} has no jerk; derive it by differencing a scenario")
    lo, la = longitudinal_lateral_decompose(a1.jerk, a1.yaw)
    return (
        _res("LatJ", la, Unit.JERK, (a1.id,), (), Scale.INTERVAL),
        _res("LongJ", lo, Unit.JERK, (a1.id,), (), Scale.INTERVAL),
    )


# --- potentials ---------------------------------------------------------------------


def safety_potential(t_stop1: float, t_stop2: float, t_int: float, k: float = 2.0) -> float:
    """k-norm of the stop-time excesses over the intersection time,
    each clamped at 0."""
    if not t_int < INF:
        return 0.0
    e = np.maximum([t_stop1 - t_int, t_stop2 - t_int], 0.0)
    return float(np.linalg.norm(e, ord=np.inf if k == INF else k))


def stop_time(state: ActorState, procedure: ManeuverModel, t_max: float = 120.0, step: float = 1e-3) -> float:
    """Time until the safety procedure brings the actor to rest."""
    if state.speed <= 1e-9:
        return 0.0
    times = np.arange(0.0, t_max + step / 2, step)
    sp = np.linalg.norm(procedure.trajectory(state, times).vel, axis=1)
    idx = np.nonzero(sp <= 1e-9)[0]
    if len(idx) == 0:
        raise MetricError(f"safety procedure {procedure.maneuver_id!r} does not stop the actor")
    k = idx[0]
    # speed is linear between samples under piecewise-constant deceleration
    v0, v1 = sp[k - 1], sp[k]
    return float(times[k - 1] + step * v0 / (v0 - v1)) if v0 > v1 else float(times[k])


def sp(
    a1: ActorState,
    a2: ActorState,
    model: PredictionModel,
    procedures: tuple[ManeuverModel, ManeuverModel] = (brake(), brake()),
    k: float = 2.0,
    settings: Settings = DEFAULT,
) -> MetricResult:
    """Safety potential between two actors: t_int is the predicted contact
    time under ``model``."""
    t_int = _contact_time(a1, a2, model, settings)
    t1 = stop_time(a1, procedures[0])
    t2 = stop_time(a2, procedures[1])
    return _res("SP", safety_potential(t1, t2, t_int, k), Unit.DIMENSIONLESS, _ids(a1, a2))


@dataclass(frozen=True)
class RSSParams:
    """Parameters of the default responsibility-sensitive safe distances."""

    response_time: float = 0.5
    a_long_accel_max: float = 3.0
    b_long_min: float = 4.0
    b_long_max: float = 8.0
    a_lat_accel_max: float = 0.2
    b_lat_min: float = 0.8
    mu: float = 0.1


def rss_long_safe_distance(v_rear: float, v_front: float, p: RSSParams = RSSParams()) -> float:
    rho = p.response_time
    v_r = max(v_rear, 0.0)
    v_f = max(v_front, 0.0)
    d = v_r * rho + 0.5 * p.a_long_accel_max * rho**2 + (v_r + rho * p.a_long_accel_max) ** 2 / (2 * p.b_long_min)
    return max(d - v_f**2 / (2 * p.b_long_max), 0.0)


def rss_lat_safe_distance(v_right: float, v_left: float, p: RSSParams = RSSParams()) -> float:
    """Lateral safe distance; velocities are lateral, positive to the left,
    for the actor on the right and on the left."""
    rho, a, b = p.response_time, p.a_lat_accel_max, p.b_lat_min
    v1r = v_right + rho * a
    v2r = v_left - rho * a
    term = (v_right + v1r) / 2 * rho + v1r * abs(v1r) / (2 * b) - ((v_left + v2r) / 2 * rho - v2r * abs(v2r) / (2 * b))
    return p.mu + max(term, 0.0)


def _frame_gaps(a1: ActorState, o: ActorState, settings: Settings):
    lo, la = longitudinal_lateral_decompose(o.p - a1.p, a1.yaw)
    if settings.distance_mode == "center":
        return lo, la, abs(lo), abs(la)
    dpsi = o.yaw - a1.yaw
    ext_lo = 0.5 * o.length * abs(math.cos(dpsi)) + 0.5 * o.width * abs(math.sin(dpsi))
    ext_la = 0.5 * o.length * abs(math.sin(dpsi)) + 0.5 * o.width * abs(math.cos(dpsi))
    return lo, la, max(abs(lo) - 0.5 * a1.length - ext_lo, 0.0), max(abs(la) - 0.5 * a1.width - ext_la, 0.0)


Thresholds = Union[tuple[float, float], Callable[[ActorState, ActorState], tuple[float, float]]]


def default_rss_thresholds(params: RSSParams = RSSParams()):
    """Threshold function returning (d_min_lat, d_min_long) for a pair."""

    def f(a1: ActorState, o: ActorState):
        lo, la = longitudinal_lateral_decompose(o.p - a1.p, a1.yaw)
        v1l, v1t = longitudinal_lateral_decompose(a1.velocity, a1.yaw)
        vol, vot = longitudinal_lateral_decompose(o.velocity, a1.yaw)
        d_long = rss_long_safe_distance(v1l, vol, params) if lo >= 0 else rss_long_safe_distance(vol, v1l, params)
        d_lat = rss_lat_safe_distance(v1t, vot, params) if la >= 0 else rss_lat_safe_distance(vot, v1t, params)
        return d_lat, d_long

    return f


def rss_ds(
    a1: ActorState,
    others: Iterable[ActorState],
    thresholds: Optional[Thresholds] = None,
    settings: Settings = DEFAULT,
) -> MetricResult:
    """1 iff some other actor is closer than both the lateral and the
    longitudinal safe distance, 0 otherwise."""
    thr = default_rss_thresholds() if thresholds is None else thresholds
    hit = 0
    for o in others:
        if o.id == a1.id:
            continue
        d_lat_min, d_long_min = thr(a1, o) if callable(thr) else thr
        _, _, g_long, g_lat = _frame_gaps(a1, o, settings)
        if g_lat < d_lat_min and g_long < d_long_min:
            hit = 1
            break
    return _res("RSS-DS", hit, Unit.COUNT, (a1.id,), (), Scale.NOMINAL)


@dataclass(frozen=True)
class GaussianPotential:
    """Repulsive potential ``amplitude * exp(-d^2 / (2 sigma^2))`` around a
    point."""

    center: tuple[float, float]
    sigma: float = 2.0
    amplitude: float = 1.0

    def __call__(self, actor: ActorState, scene: Optional[Scene] = None) -> float:
        d2 = float(np.sum((actor.p - np.asarray(self.center)) ** 2))
        return self.amplitude * math.exp(-d2 / (2 * self.sigma**2))


def pf_eval(a1: ActorState, scene: Optional[Scene], potentials: Sequence[Callable]) -> MetricResult:
    """Potential-field value: sum of the potentials at A1's state."""
    return _res("PF", sum(float(u(a1, scene)) for u in potentials), Unit.DIMENSIONLESS, (a1.id,), (), Scale.INTERVAL)
