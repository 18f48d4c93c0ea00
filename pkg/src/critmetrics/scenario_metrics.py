"""Scenario-level metrics and aggregation of scene metrics over time and
actors.

Series helpers (``*_from_series``) work on plain sampled values so they can
be fed by recordings or by any scene metric; the scenario-level functions
build those series from a :class:`Scenario` and a prediction model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np
import shapely

from .core import (
    AccidentEvent,
    ActorState,
    ConflictArea,
    MetricResult,
    Scale,
    Scenario,
    Scene,
    Unit,
    longitudinal_lateral_decompose,
)
from .geometry import footprint_corners, is_contact, pair_clearance, polygon_overlap
from .models import PredictionModel
from .scene_metrics import MetricError, a_long_req, tto, ttc
from .settings import DEFAULT, Settings
from .trajectory import Trajectory, interp

INF = math.inf


# --- time series ----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Samples (t, value) with strictly increasing t; values may be +-inf."""

    t: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float).reshape(-1)
        v = np.asarray(self.values, dtype=float).reshape(-1)
        if len(t) != len(v):
            raise ValueError("times and values differ in length")
        if len(t) > 1 and np.any(np.diff(t) <= 0):
            raise ValueError("time series needs strictly increasing times")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return len(self.t)

    @classmethod
    def from_pairs(cls, pairs: Sequence[tuple[float, float]]) -> "TimeSeries":
        pairs = list(pairs)
        return cls([p[0] for p in pairs], [p[1] for p in pairs])


def _trapezoid(t: np.ndarray, v: np.ndarray) -> tuple[float, float]:
    """(integral, covered duration) over segments with finite endpoints."""
    if len(t) < 2:
        return 0.0, 0.0
    dt = np.diff(t)
    ok = np.isfinite(v[:-1]) & np.isfinite(v[1:])
    return float(np.sum(0.5 * (v[:-1] + v[1:])[ok] * dt[ok])), float(np.sum(dt[ok]))


AGGREGATES = ("min", "max", "mean", "median", "quantile", "integral", "sum", "discrete_sum")


def aggregate_time(series: TimeSeries, agg: str, p: Optional[float] = None) -> float:
    """Aggregate a series over time.

    ``agg`` is one of min, max, mean, median, quantile (with ``p`` in
    [0, 1], or written ``p90`` style), integral/sum (trapezoid over time) or
    discrete_sum (plain sum of the samples). Mean and integral skip segments
    with an infinite endpoint.
    """
    if len(series) == 0:
        raise ValueError("cannot aggregate an empty series")
    v = series.values
    if agg.startswith("p") and agg[1:].replace(".", "", 1).isdigit():
        agg, p = "quantile", float(agg[1:]) / 100.0
    if agg == "min":
        return float(np.min(v))
    if agg == "max":
        return float(np.max(v))
    if agg == "median":
        return float(np.median(v))
    if agg == "quantile":
        if p is None or not 0.0 <= p <= 1.0:
            raise ValueError("quantile aggregation needs p in [0, 1]")
        return float(np.quantile(v, p))
    if agg in ("integral", "sum"):
        return _trapezoid(series.t, v)[0]
    if agg == "discrete_sum":
        return float(np.sum(v))
    if agg == "mean":
        if len(v) == 1:
            return float(v[0])
        total, covered = _trapezoid(series.t, v)
        if covered == 0:
            return float(np.mean(v))
        return total / covered
    raise ValueError(f"unknown aggregation {agg!r}; choose from {AGGREGATES}")


def aggregate_actors(
    source: Union[Scene, Scenario],
    metric: Callable,
    mode: str,
    subject: Optional[str] = None,
) -> float:
    """Aggregate a pairwise metric over actors.

    ``designated_max``: max over (subject, other); ``impartial_mean``: mean
    over all ordered distinct pairs. ``metric`` receives ActorStates for a
    scene and actor ids for a scenario and returns a number or
    MetricResult.
    """
    if isinstance(source, Scene):
        actors = {a.id: a for a in source.actors}
    else:
        actors = {i: i for i in source.actor_ids()}
    if len(actors) < 2:
        raise ValueError("actor aggregation needs at least two actors")

    def val(i, j):
        return float(metric(actors[i], actors[j]))

    if mode == "designated_max":
        if subject is None or str(subject) not in actors:
            raise ValueError("designated_max needs a subject actor present in the data")
        s = str(subject)
        return max(val(s, o) for o in actors if o != s)
    if mode == "impartial_mean":
        vals = [val(i, j) for i in actors for j in actors if i != j]
        return float(np.mean(vals))
    raise ValueError(f"unknown actor aggregation {mode!r}")


def pair_series(
    scenario: Scenario, a1: str, a2: str, fn: Callable[[ActorState, ActorState], Union[float, MetricResult]]
) -> TimeSeries:
    """Evaluate a pairwise scene metric at every scene containing both."""
    ts, vs = [], []
    for s in scenario.scenes:
        if s.has(a1) and s.has(a2):
            ts.append(s.t)
            vs.append(float(fn(s.actor(a1), s.actor(a2))))
    if not ts:
        raise MetricError(f"actors {a1!r} and {a2!r} never appear together")
    return TimeSeries(ts, vs)


def _res(metric_id, value, unit, subjects, flags=(), scale=Scale.RATIO):
    return MetricResult(metric_id, float(value), scale, unit, tuple(subjects), frozenset(flags))


# --- threshold integrals -------------------------------------------------------------


def _segment_pieces(t, v, tau):
    """Yield (length, integral of (tau - v)) of the parts of each segment
    where v <= tau. Linear between finite samples; a segment with an
    infinite endpoint takes each endpoint's value on its nearer half."""
    for k in range(len(t) - 1):
        t0, t1, v0, v1 = t[k], t[k + 1], v[k], v[k + 1]
        dt = t1 - t0
        if math.isfinite(v0) and math.isfinite(v1):
            if v0 <= tau and v1 <= tau:
                yield dt, dt * (tau - 0.5 * (v0 + v1))
            elif v0 <= tau or v1 <= tau:
                s = (tau - v0) / (v1 - v0)  # crossing fraction
                if v0 <= tau:
                    L = s * dt
                    yield L, 0.5 * L * (tau - v0)
                else:
                    L = (1 - s) * dt
                    yield L, 0.5 * L * (tau - v1)
        else:
            for vv in (v0, v1):
                if vv <= tau:
                    yield 0.5 * dt, 0.5 * dt * (tau - vv)


def tet_from_series(series: TimeSeries, tau: float) -> float:
    """Time with the value at or below ``tau``."""
    if not tau > 0:
        raise ValueError("target value tau must be positive")
    return float(sum(L for L, _ in _segment_pieces(series.t, series.values, tau)))


def tit_from_series(series: TimeSeries, tau: float) -> float:
    """Integral of (tau - value) where the value is at or below ``tau``."""
    if not tau > 0:
        raise ValueError("target value tau must be positive")
    return float(sum(I for _, I in _segment_pieces(series.t, series.values, tau)))


def ttc_series(scenario: Scenario, a1: str, a2: str, model: PredictionModel, settings: Settings = DEFAULT) -> TimeSeries:
    return pair_series(scenario, a1, a2, lambda x, y: ttc(x, y, model, settings).value)


def tet(scenario: Scenario, a1: str, a2: str, tau: float, model: PredictionModel, settings: Settings = DEFAULT) -> MetricResult:
    """Time exposed TTC."""
    v = tet_from_series(ttc_series(scenario, a1, a2, model, settings), tau)
    return _res("TET", v, Unit.TIME, (a1, a2))


def tit(scenario: Scenario, a1: str, a2: str, tau: float, model: PredictionModel, settings: Settings = DEFAULT) -> MetricResult:
    """Time integrated TTC."""
    v = tit_from_series(ttc_series(scenario, a1, a2, model, settings), tau)
    return _res("TIT", v, Unit.TIME2, (a1, a2))


# --- evasive maneuvers ---------------------------------------------------------------------


@dataclass(frozen=True)
class EvasiveDetector:
    """Flags the first sample with strong braking or an abrupt steering
    input (lateral jerk, from the state or by differencing)."""

    a_long_threshold: float = -4.0
    lat_jerk_threshold: float = 5.0

    def __call__(self, states: Sequence[ActorState]) -> Optional[float]:
        lat_jerk = _lateral_jerk(states)
        for s, j in zip(states, lat_jerk):
            if s.a_long <= self.a_long_threshold or abs(j) >= self.lat_jerk_threshold:
                return s.t
        return None


def _lateral_jerk(states: Sequence[ActorState]) -> np.ndarray:
    if all(s.jerk is not None for s in states):
        return np.array([longitudinal_lateral_decompose(s.jerk, s.yaw)[1] for s in states])
    if len(states) < 2:
        return np.zeros(len(states))
    t = np.array([s.t for s in states])
    acc = np.array([s.acceleration for s in states])
    jerk = np.gradient(acc, t, axis=0)
    return np.array([longitudinal_lateral_decompose(j, s.yaw)[1] for j, s in zip(jerk, states)])


def evasive_time(scenario: Scenario, a1: str, detector: Optional[Callable] = None) -> float:
    det = detector or EvasiveDetector()
    t = det(scenario.states(a1))
    if t is None:
        raise MetricError("no evasive event found for actor " + repr(a1))
    return float(t)


def _scene_at(scenario: Scenario, t: float) -> Scene:
    for s in scenario.scenes:
        if math.isclose(s.t, t, rel_tol=0, abs_tol=1e-9):
            return s
    raise MetricError(f"no scene at t={t}")


def tta(
    scenario: Scenario,
    a1: str,
    a2: str,
    model: PredictionModel,
    detector: Optional[Callable] = None,
    settings: Settings = DEFAULT,
) -> MetricResult:
    """Time to accident: the TTC at the first evasive action of A1."""
    t_ev = evasive_time(scenario, a1, detector)
    s = _scene_at(scenario, t_ev)
    r = ttc(s.actor(a1), s.actor(a2), model, settings)
    return _res("TTA", r.value, Unit.TIME, (a1, a2))


# --- conflict-area occupancy ----------------------------------------------------------------


def actor_trajectory(scenario: Scenario, actor_id: str) -> Trajectory:
    """The recorded motion of one actor (absolute times)."""
    states = scenario.states(actor_id)
    if not states:
        raise MetricError(f"actor {actor_id!r} not in scenario")
    a = states[0]
    return Trajectory(
        [s.t for s in states],
        [s.position for s in states],
        [s.velocity for s in states],
        [s.yaw for s in states],
        [s.acceleration for s in states],
        a.length,
        a.width,
        a.id,
    )


def _crossing(tr, poly, lo, hi, want_inside, settings):
    while hi - lo > settings.time_tol:
        m = 0.5 * (lo + hi)
        if bool(polygon_overlap(interp(tr, np.array([m])), poly, settings)[0]) == want_inside:
            hi = m
        else:
            lo = m
    return hi


def occupancy_interval(tr: Trajectory, area: ConflictArea, settings: Settings = DEFAULT) -> tuple[float, float]:
    """(entry, exit) of the first occupation of the area; exit is inf when
    the actor is still inside at the end, entry inf when it never enters."""
    poly = area.shape
    inside = polygon_overlap(tr, poly, settings)
    idx = np.nonzero(inside)[0]
    if len(idx) == 0:
        return INF, INF
    k = idx[0]
    entry = tr.t[0] if k == 0 else _crossing(tr, poly, tr.t[k - 1], tr.t[k], True, settings)
    out = np.nonzero(~inside[k:])[0]
    if len(out) == 0:
        return float(entry), INF
    j = k + out[0]
    return float(entry), float(_crossing(tr, poly, tr.t[j - 1], tr.t[j], False, settings))


def et(scenario: Scenario, a1: str, area: ConflictArea, settings: Settings = DEFAULT) -> MetricResult:
    """Encroachment time: how long A1 occupies the conflict area."""
    entry, exit_ = occupancy_interval(actor_trajectory(scenario, a1), area, settings)
    if not (entry < INF and exit_ < INF):
        raise MetricError("no encroachment: actor does not both enter and leave the conflict area")
    return _res("ET", exit_ - entry, Unit.TIME, (a1, area.id))


def pet_value(t_exit_1: float, t_entry_2: float) -> tuple[float, frozenset]:
    d = t_entry_2 - t_exit_1
    return (0.0, frozenset({"overlap"})) if d < 0 else (d, frozenset())


def pet(scenario: Scenario, a1: str, a2: str, area: ConflictArea, settings: Settings = DEFAULT) -> MetricResult:
    """Post encroachment time between A1 leaving and A2 entering the area."""
    _, exit1 = occupancy_interval(actor_trajectory(scenario, a1), area, settings)
    entry2, _ = occupancy_interval(actor_trajectory(scenario, a2), area, settings)
    if not (exit1 < INF and entry2 < INF):
        raise MetricError("no encroachment: A1 never leaves or A2 never enters the conflict area")
    v, flags = pet_value(exit1, entry2)
    return _res("PET", v, Unit.TIME, (a1, a2, area.id), flags)


# --- personal space ----------------------------------------------------------------------------


@dataclass(frozen=True)
class PersonalSpace:
    """Footprint inflated by longitudinal and lateral margins (each side)."""

    margin_long: float = 0.5
    margin_lat: float = 0.5

    def __call__(self, state: ActorState):
        c = footprint_corners(state.p, state.yaw, state.length + 2 * self.margin_long, state.width + 2 * self.margin_lat)
        return shapely.Polygon(c[0])


def soi(
    scenario: Scenario,
    a1: str,
    actors: Optional[Sequence[str]] = None,
    personal_space: Callable[[ActorState], object] = PersonalSpace(),
) -> MetricResult:
    """Space occupancy index: number of (sample, other actor) pairs whose
    personal spaces intersect A1's."""
    count = 0
    for s in scenario.scenes:
        if not s.has(a1):
            continue
        own = personal_space(s.actor(a1))
        for o in s.others(a1):
            if actors is not None and o.id not in actors:
                continue
            if shapely.intersects(own, personal_space(o)):
                count += 1
    return _res("SOI", count, Unit.COUNT, (a1,))


# --- pedestrian risk ----------------------------------------------------------------------------


def stopping_time(state: ActorState, reaction_time: Optional[float] = None) -> float:
    """Reaction time plus braking time at maximum deceleration."""
    t_r = state.reaction_time if reaction_time is None else reaction_time
    return (t_r or 0.0) + max(state.v_long, 0.0) / abs(state.capabilities.a_long_min)


def impact_speed(state: ActorState, d: float, reaction_time: Optional[float] = None) -> float:
    """Speed on reaching a point ``d`` ahead when braking at capability
    after the reaction time (0 if the actor stops first)."""
    t_r = (state.reaction_time if reaction_time is None else reaction_time) or 0.0
    v = state.speed
    brake_dist = max(d - v * t_r, 0.0)
    rad = v * v + 2 * state.capabilities.a_long_min * brake_dist
    return math.sqrt(max(rad, 0.0))


def _intervals_where(t, margins) -> list[tuple[float, float]]:
    """Maximal intervals where all margin series are positive (linear
    between finite samples, nearest-sample halves otherwise)."""
    out: list[list[float]] = []
    for k in range(len(t) - 1):
        lo, hi = t[k], t[k + 1]
        for m in margins:
            m0, m1 = m[k], m[k + 1]
            if math.isfinite(m0) and math.isfinite(m1):
                if m0 > 0 and m1 > 0:
                    continue
                if m0 <= 0 and m1 <= 0:
                    lo, hi = 1.0, 0.0
                    break
                x = t[k] + (t[k + 1] - t[k]) * m0 / (m0 - m1)
                if m0 > 0:
                    hi = min(hi, x)
                else:
                    lo = max(lo, x)
            else:
                mid = 0.5 * (t[k] + t[k + 1])
                if m0 > 0 and m1 > 0:
                    continue
                if m0 <= 0 and m1 <= 0:
                    lo, hi = 1.0, 0.0
                    break
                if m0 > 0:
                    hi = min(hi, mid)
                else:
                    lo = max(lo, mid)
        if hi > lo:
            if out and abs(out[-1][1] - lo) <= 1e-12:
                out[-1][1] = hi
            else:
                out.append([lo, hi])
    return [(a, b) for a, b in out]


def _integrate_linear(t, f, lo, hi) -> float:
    """Integral of the piecewise-linear interpolant of f over [lo, hi]."""
    knots = np.concatenate([[lo], t[(t > lo) & (t < hi)], [hi]])
    vals = np.interp(knots, t, f)
    return float(np.sum(0.5 * (vals[:-1] + vals[1:]) * np.diff(knots)))


def pri_from_series(t, ttz_ped, ttz_veh, t_stop, s_imp) -> tuple[float, frozenset]:
    """Integral of s_imp^2 (t_stop - TTZ_vehicle) over the conflict period
    where TTZ_ped < TTZ_vehicle < t_stop."""
    t = np.asarray(t, dtype=float)
    ttz_ped, ttz_veh, t_stop, s_imp = (np.asarray(x, dtype=float) for x in (ttz_ped, ttz_veh, t_stop, s_imp))
    with np.errstate(invalid="ignore"):
        m1 = ttz_veh - ttz_ped
        m2 = t_stop - ttz_veh
    m1 = np.where(np.isnan(m1), -INF, m1)
    m2 = np.where(np.isnan(m2), -INF, m2)
    if len(t) == 1:
        return 0.0, frozenset({"no_conflict_period"})
    periods = _intervals_where(t, [m1, m2])
    if not periods:
        return 0.0, frozenset({"no_conflict_period"})
    if len(periods) > 1:
        raise MetricError("incoherent conflict period: the conflict condition holds on disjoint intervals")
    lo, hi = periods[0]
    integrand = np.where(np.isfinite(m2), s_imp**2 * np.where(np.isfinite(m2), m2, 0.0), 0.0)
    return _integrate_linear(t, integrand, lo, hi), frozenset()


def pri(
    scenario: Scenario,
    a1: str,
    area: ConflictArea,
    pedestrian: str,
    model: PredictionModel,
    settings: Settings = DEFAULT,
) -> MetricResult:
    """Pedestrian risk index for vehicle A1 and a pedestrian approaching
    the same conflict area."""
    from .geometry import polygon_clearance

    ts, zp, zv, tsp, simp = [], [], [], [], []
    flags = set()
    for s in scenario.scenes:
        if not (s.has(a1) and s.has(pedestrian)):
            continue
        v, p = s.actor(a1), s.actor(pedestrian)
        if v.reaction_time is None:
            flags.add("reaction_time_assumed_zero")
        ts.append(s.t)
        zp.append(tto(p, area, model, settings).value)
        zv.append(tto(v, area, model, settings).value)
        tsp.append(stopping_time(v))
        d = float(polygon_clearance(Trajectory.stationary(v, [0.0]), area.shape, settings)[0])
        simp.append(impact_speed(v, d))
    if not ts:
        raise MetricError("vehicle and pedestrian never appear together")
    value, f = pri_from_series(ts, zp, zv, tsp, simp)
    return _res("PRI", value, Unit.RISK, (a1, pedestrian, area.id), flags | set(f))


# --- crash potential -------------------------------------------------------------------------


def normal_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def cpi_from_series(series: TimeSeries, mu: float, sigma: float) -> float:
    """Time average of P(a_req(t) < A) with A ~ Normal(mu, sigma)."""
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    t, v = series.t, series.values
    if len(t) < 2 or t[-1] <= t[0]:
        raise ValueError("crash potential needs a scenario of positive duration")
    p = np.array([normal_cdf((mu - a) / sigma) for a in v])
    return float(np.clip(_trapezoid(t, p)[0] / (t[-1] - t[0]), 0.0, 1.0))


def cpi(
    scenario: Scenario,
    a1: str,
    a2: str,
    mu: float,
    sigma: float,
    model: PredictionModel,
    settings: Settings = DEFAULT,
) -> MetricResult:
    """Crash potential index."""
    series = pair_series(scenario, a1, a2, lambda x, y: a_long_req(x, y, model, settings).value)
    return _res("CPI", cpi_from_series(series, mu, sigma), Unit.PROBABILITY, (a1, a2))


# --- severity ------------------------------------------------------------------------------


def kinetic_energy_loss(m1: float, v1, m2: float, v2) -> float:
    """Kinetic energy dissipated in a perfectly inelastic collision."""
    dv = np.asarray(v1, dtype=float) - np.asarray(v2, dtype=float)
    return 0.5 * m1 * m2 / (m1 + m2) * float(dv @ dv)


def ci_value(pet_s: float, delta_ke: float, alpha: float, beta: float) -> float:
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    if not beta > 0:
        raise ValueError("beta must be positive")
    return alpha * delta_ke / math.exp(beta * pet_s)


def ci(
    scenario: Scenario,
    a1: str,
    a2: str,
    area: ConflictArea,
    alpha: float,
    beta: float,
    settings: Settings = DEFAULT,
) -> MetricResult:
    """Conflict index from the PET and a hypothetical collision of A1 (at
    its exit) with A2 (at its entry)."""
    tr1, tr2 = actor_trajectory(scenario, a1), actor_trajectory(scenario, a2)
    p = pet(scenario, a1, a2, area, settings)
    _, exit1 = occupancy_interval(tr1, area, settings)
    entry2, _ = occupancy_interval(tr2, area, settings)
    m1, m2 = scenario.states(a1)[0].mass, scenario.states(a2)[0].mass
    if m1 is None or m2 is None:
        raise MetricError("conflict index needs both masses")
    v1 = interp(tr1, np.array([exit1])).vel[0]
    v2 = interp(tr2, np.array([entry2])).vel[0]
    value = ci_value(p.value, kinetic_energy_loss(m1, v1, m2, v2), alpha, beta)
    return _res("CI", value, Unit.ENERGY, (a1, a2, area.id), p.flags)


def am(scenario: Scenario, settings: Settings = DEFAULT) -> MetricResult:
    """Accident metric: 1 if an accident is recorded or two actors'
    footprints overlap in any scene."""
    if scenario.accident_events:
        return _res("AM", 1, Unit.COUNT, (), (), Scale.NOMINAL)
    for s in scenario.scenes:
        acts = s.actors
        for i in range(len(acts)):
            for j in range(i + 1, len(acts)):
                a, b = acts[i], acts[j]
                c = pair_clearance(Trajectory.stationary(a, [0.0]), Trajectory.stationary(b, [0.0]), settings)
                if is_contact(c[0], settings):
                    return _res("AM", 1, Unit.COUNT, (a.id, b.id), (), Scale.NOMINAL)
    return _res("AM", 0, Unit.COUNT, (), (), Scale.NOMINAL)


def delta_v_event(event: AccidentEvent, index: int = 0) -> float:
    """Speed change of one participant across a recorded collision."""
    if event.speeds_before is None or event.speeds_after is None:
        raise MetricError("accident event lacks speeds before/after the collision")
    return event.speeds_after[index] - event.speeds_before[index]


def delta_v_value(m1: float, m2: float, speed1: float, speed2: float) -> float:
    return m2 / (m1 + m2) * (speed2 - speed1)


def delta_v(a1: ActorState, a2: ActorState) -> MetricResult:
    """Mass-weighted speed difference of A1 against A2."""
    if a1.mass is None or a2.mass is None:
        raise MetricError("delta-v needs both masses")
    v = delta_v_value(a1.mass, a2.mass, a1.speed, a2.speed)
    return _res("Δv", v, Unit.SPEED, (a1.id, a2.id), (), Scale.INTERVAL)


JOKSCH_SPEED = 31.74


def joksch_fatality(dv: float) -> float:
    """Fatality probability of a two-vehicle collision, clamped to 1."""
    return min((abs(dv) / JOKSCH_SPEED) ** 4, 1.0)


def cs_value(dv: float, tta_s: float, accel_norm: float, m1: float, m2: float) -> float:
    return dv - tta_s * accel_norm * m2 / (m1 + m2)


def cs(
    scenario: Scenario,
    a1: str,
    a2: str,
    model: PredictionModel,
    detector: Optional[Callable] = None,
    settings: Settings = DEFAULT,
) -> MetricResult:
    """Conflict severity at A1's first evasive action."""
    t_ev = evasive_time(scenario, a1, detector)
    s = _scene_at(scenario, t_ev)
    x, y = s.actor(a1), s.actor(a2)
    dv = delta_v(x, y).value
    t_a = tta(scenario, a1, a2, model, detector, settings).value
    if not math.isfinite(t_a):
        raise MetricError("conflict severity needs a finite time to accident")
    value = cs_value(dv, t_a, float(np.linalg.norm(x.a)), x.mass, y.mass)
    return _res("CS", value, Unit.SPEED, (a1, a2), (), Scale.INTERVAL)
