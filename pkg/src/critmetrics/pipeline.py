"""Trajectory tables in, metric tables out: CSV ingestion, run
configuration, batch computation, criticality filtering and simulation."""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Iterable, Mapping, Optional, Sequence, Union

import numpy as np
import yaml

from . import scenario_metrics as scn
from . import scene_metrics as sm
from .core import ActorClass, ActorState, ConflictArea, MetricResult, Scenario, Scene, format_value
from .maneuvers import brake, kickdown, steer
from .models import MODEL_REGISTRY, ModelError, PredictionModel, make_model
from .settings import Settings
from .tci import tci


class DataError(ValueError):
    """Malformed input data or configuration."""


# --- CSV ingestion ----------------------------------------------------------------

MANDATORY_COLUMNS = (
    "t_s", "actor_id", "x_m", "y_m", "vx_mps", "vy_mps", "ax_mps2", "ay_mps2",
    "heading_rad", "width_m", "length_m", "class",
)  # fmt: skip
OPTIONAL_COLUMNS = ("recording_id", "mass_kg")
_NUMERIC = ("t_s", "x_m", "y_m", "vx_mps", "vy_mps", "ax_mps2", "ay_mps2", "heading_rad", "width_m", "length_m")

CLASS_ALIASES = {
    "car": ActorClass.HUMAN_VEHICLE,
    "truck": ActorClass.HUMAN_VEHICLE,
    "van": ActorClass.HUMAN_VEHICLE,
    "bus": ActorClass.HUMAN_VEHICLE,
    "vehicle": ActorClass.HUMAN_VEHICLE,
    "av": ActorClass.AUTOMATED_VEHICLE,
    "bicycle": ActorClass.BICYCLE,
    "bicyclist": ActorClass.BICYCLE,
    "cyclist": ActorClass.BICYCLE,
    "pedestrian": ActorClass.PEDESTRIAN,
}


def _actor_class(s: str, line: int) -> ActorClass:
    key = s.strip().lower()
    if key in CLASS_ALIASES:
        return CLASS_ALIASES[key]
    try:
        return ActorClass(key)
    except ValueError:
        raise DataError(f"line {line}: unknown actor class {s!r}") from None


def _recording_key(rid: str):
    try:
        return (0, float(rid), rid)
    except ValueError:
        return (1, 0.0, rid)


def derive_jerk(scenario: Scenario, window: int = 1) -> Scenario:
    """Fill missing jerks by central differencing of each actor's
    acceleration over ``window`` samples on either side (one-sided at the
    ends of its presence)."""
    if window < 1:
        raise DataError("jerk window must be at least 1")
    jerks: dict[tuple[str, float], tuple[float, float]] = {}
    for aid in scenario.actor_ids():
        states = scenario.states(aid)
        if len(states) < 2:
            continue
        t = np.array([s.t for s in states])
        a = np.array([s.acceleration for s in states])
        for k in range(len(states)):
            lo, hi = max(0, k - window), min(len(states) - 1, k + window)
            j = (a[hi] - a[lo]) / (t[hi] - t[lo])
            jerks[(aid, states[k].t)] = (float(j[0]), float(j[1]))
    scenes = []
    for s in scenario.scenes:
        actors = tuple(
            a if a.jerk is not None or (a.id, a.t) not in jerks else replace(a, jerk=jerks[(a.id, a.t)]) for a in s.actors
        )
        scenes.append(replace(s, actors=actors))
    return replace(scenario, scenes=tuple(scenes))


def parse_trajectories(
    source: Union[str, Path, io.TextIOBase],
    jerk_window: int = 1,
    conflict_areas: Sequence[ConflictArea] = (),
) -> list[Scenario]:
    """Read a trajectory table into one Scenario per recording (sorted by
    recording id; rows sorted by time, so row order is irrelevant)."""
    if isinstance(source, (str, Path)):
        try:
            text = Path(source).read_text()
        except OSError as e:
            raise DataError(f"cannot read {source}: {e.strerror}") from None
    else:
        text = source.read()
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None:
        raise DataError("line 1: missing header row")
    header = [h.strip() for h in reader.fieldnames]
    reader.fieldnames = header
    missing = [c for c in MANDATORY_COLUMNS if c not in header]
    if missing:
        raise DataError(f"line 1: missing mandatory column(s) {', '.join(missing)}")
    groups: dict[str, list] = {}
    for row in reader:
        line = reader.line_num
        if None in row or any(row.get(c) is None for c in MANDATORY_COLUMNS):
            raise DataError(f"line {line}: wrong number of fields")
        try:
            vals = {c: float(row[c]) for c in _NUMERIC}
        except ValueError as e:
            raise DataError(f"line {line}: {e}") from None
        mass = None
        if row.get("mass_kg") not in (None, ""):
            try:
                mass = float(row["mass_kg"])
            except ValueError as e:
                raise DataError(f"line {line}: {e}") from None
            if not math.isfinite(mass):
                raise DataError(f"line {line}: non-finite mass")
        bad = [c for c, v in vals.items() if not math.isfinite(v)]
        if bad:
            raise DataError(f"line {line}: non-finite value in {', '.join(bad)}")
        try:
            state = ActorState(
                id=row["actor_id"].strip(),
                t=vals["t_s"],
                position=(vals["x_m"], vals["y_m"]),
                velocity=(vals["vx_mps"], vals["vy_mps"]),
                acceleration=(vals["ax_mps2"], vals["ay_mps2"]),
                yaw=vals["heading_rad"],
                width=vals["width_m"],
                length=vals["length_m"],
                mass=mass,
                actor_class=_actor_class(row["class"], line),
            )
        except ValueError as e:
            raise DataError(f"line {line}: {e}") from None
        rid = (row.get("recording_id") or "0").strip()
        groups.setdefault(rid, []).append((line, state))
    out = []
    for rid in sorted(groups, key=_recording_key):
        rows = sorted(groups[rid], key=lambda r: (r[1].t, r[1].id))
        by_t: dict[float, list] = {}
        for line, st in rows:
            by_t.setdefault(st.t, []).append((line, st))
        scenes = []
        for t, items in by_t.items():
            ids = [st.id for _, st in items]
            if len(ids) != len(set(ids)):
                dup = next(line for line, st in items if ids.count(st.id) > 1)
                raise DataError(
                    f"line {dup}: timestamps of an actor must be strictly increasing within recording {rid!r} (repeated t={t})"
                )
            scenes.append(Scene(t, tuple(st for _, st in items), tuple(conflict_areas)))
        if len(scenes) < 2:
            raise DataError(f"recording {rid!r} needs at least two distinct timestamps")
        out.append(derive_jerk(Scenario(tuple(scenes), recording_id=rid), jerk_window))
    return out


def write_trajectories(scenarios: Iterable[Scenario], out: io.TextIOBase) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(("recording_id",) + MANDATORY_COLUMNS + ("mass_kg",))
    for sc in scenarios:
        for s in sc.scenes:
            for a in s.actors:
                w.writerow(
                    [sc.recording_id, repr(float(s.t)), a.id]
                    + [repr(float(x)) for x in (*a.position, *a.velocity, *a.acceleration, a.yaw, a.width, a.length)]
                    + [a.actor_class.value, "" if a.mass is None else repr(float(a.mass))]
                )


# --- configuration --------------------------------------------------------------------


@dataclass(frozen=True)
class MetricSpec:
    id: str
    params: Mapping[str, object] = field(default_factory=dict)
    aggregate: tuple[str, ...] = ()


@dataclass(frozen=True)
class FilterTarget:
    metric: str
    value: float
    direction: str = "below"  # values at or below the target are critical

    def __post_init__(self):
        if self.direction not in ("below", "above"):
            raise DataError(f"filter direction must be 'below' or 'above', got {self.direction!r}")
        if self.metric not in SCENE_METRICS:
            raise DataError(f"filtering needs a scene metric, got {self.metric!r}")

    def critical(self, v: float) -> bool:
        return v <= self.value if self.direction == "below" else v >= self.value


@dataclass(frozen=True)
class RunConfig:
    model: str = "constant_velocity"
    model_params: Mapping[str, object] = field(default_factory=dict)
    metrics: tuple[MetricSpec, ...] = ()
    distance_mode: str = "footprint"
    horizon: float = 10.0
    step: float = 0.01
    seed: int = 0
    jerk_window: int = 1
    conflict_areas: tuple[ConflictArea, ...] = ()
    targets: tuple[FilterTarget, ...] = ()
    margin_pre: float = 0.0
    margin_post: float = 0.0

    def __post_init__(self):
        if self.model not in MODEL_REGISTRY:
            raise DataError(f"unknown prediction model {self.model!r}")
        if not (self.horizon > 0 and 0 < self.step <= self.horizon):
            raise DataError("config needs 0 < step <= horizon")
        if self.margin_pre < 0 or self.margin_post < 0:
            raise DataError("filter margins must be non-negative")
        if self.jerk_window < 1:
            raise DataError("jerk_window must be at least 1")
        for m in self.metrics:
            if m.id not in SCENE_METRICS and m.id not in SCENARIO_METRICS:
                raise DataError(f"unknown metric {m.id!r}")
            for agg in m.aggregate:
                if m.id not in SCENE_METRICS:
                    raise DataError(f"{m.id}: only scene metrics can be aggregated over time")
                if agg not in TIME_AGGREGATES:
                    raise DataError(f"{m.id}: unknown aggregation {agg!r}")
            for k in ("tau", "t_s", "alpha", "beta", "k", "sigma"):
                if k in m.params and not float(m.params[k]) >= 0:
                    raise DataError(f"{m.id}: parameter {k} must be non-negative")
        try:
            Settings(distance_mode=self.distance_mode)
        except ValueError as e:
            raise DataError(str(e)) from None

    @property
    def settings(self) -> Settings:
        return Settings(distance_mode=self.distance_mode)

    def prediction_model(self) -> PredictionModel:
        try:
            return make_model(self.model, horizon=self.horizon, step=self.step, **dict(self.model_params))
        except (TypeError, ModelError) as e:
            raise DataError(f"model {self.model!r}: {e}") from None

    def with_seed(self, seed: Optional[int]) -> "RunConfig":
        return self if seed is None else replace(self, seed=int(seed))


def load_config(source: Union[str, Path, Mapping]) -> RunConfig:
    """RunConfig from a YAML file, YAML text or a mapping."""
    if isinstance(source, Mapping):
        data = source
    else:
        p = Path(source)
        try:
            text = p.read_text() if "\n" not in str(source) and p.is_file() else str(source)
            data = yaml.safe_load(text) or {}
        except (OSError, yaml.YAMLError) as e:
            raise DataError(f"cannot read config: {e}") from None
    if not isinstance(data, Mapping):
        raise DataError("config must be a mapping")
    model = data.get("model", {"kind": "constant_velocity"})
    model = dict(model) if isinstance(model, Mapping) else {"kind": model}
    kind = model.pop("kind", "constant_velocity")
    metrics = []
    for m in data.get("metrics", []) or []:
        m = {"id": m} if isinstance(m, str) else dict(m)
        agg = m.get("aggregate", ())
        metrics.append(MetricSpec(str(m["id"]), dict(m.get("params", {}) or {}), tuple([agg] if isinstance(agg, str) else agg)))
    flt = data.get("filter", {}) or {}
    try:
        return RunConfig(
            model=kind,
            model_params=model,
            metrics=tuple(metrics),
            distance_mode=data.get("distance_mode", "footprint"),
            horizon=float(data.get("horizon", model.get("horizon", 10.0))),
            step=float(data.get("step", 0.01)),
            seed=int(data.get("seed", 0)),
            jerk_window=int(data.get("jerk_window", 1)),
            conflict_areas=tuple(ConflictArea(str(c["id"]), tuple(map(tuple, c["polygon"]))) for c in data.get("conflict_areas", []) or []),
            targets=tuple(FilterTarget(str(t["metric"]), float(t["value"]), t.get("direction", "below")) for t in flt.get("targets", []) or []),
            margin_pre=float(flt.get("margin_pre", 0.0)),
            margin_post=float(flt.get("margin_post", 0.0)),
        )
    except (KeyError, TypeError, ValueError) as e:
        if isinstance(e, DataError):
            raise
        raise DataError(f"invalid config: {e}") from None


# --- metric registry -----------------------------------------------------------------------


@dataclass
class _Context:
    config: RunConfig
    model: PredictionModel
    settings: Settings


def _area(ctx: _Context, params, scene: Optional[Scene] = None) -> ConflictArea:
    aid = params.get("area")
    areas = ctx.config.conflict_areas if scene is None else scene.conflict_areas
    if not areas:
        raise sm.MetricError("metric needs a conflict area in the config")
    if aid is None:
        return areas[0]
    for a in areas:
        if a.id == str(aid):
            return a
    raise sm.MetricError(f"unknown conflict area {aid!r}")


_MANEUVERS = {"TTB": lambda: brake(), "TTK": lambda: kickdown(), "TTS": lambda: steer("left")}

# pair metrics: fn(a1, a2, scene, ctx, params) -> MetricResult
_PAIR: dict[str, Callable] = {
    "TTC": lambda a1, a2, s, c, p: sm.ttc(a1, a2, c.model, c.settings),
    "PTTC": lambda a1, a2, s, c, p: sm.pttc(a1, a2, c.settings),
    "THW": lambda a1, a2, s, c, p: sm.thw(a1, a2, c.model, c.settings),
    "HW": lambda a1, a2, s, c, p: sm.hw(a1, a2, c.settings),
    "DCE": lambda a1, a2, s, c, p: sm.dce_ttce(a1, a2, c.model, c.settings)[0],
    "TTCE": lambda a1, a2, s, c, p: sm.dce_ttce(a1, a2, c.model, c.settings)[1],
    "PrET": lambda a1, a2, s, c, p: sm.pret(a1, a2, c.model),
    "SPrET": lambda a1, a2, s, c, p: sm.spret(a1, a2, c.model),
    "TTB": lambda a1, a2, s, c, p: sm.ttm(a1, a2, c.model, _MANEUVERS["TTB"](), c.settings, "TTB"),
    "TTK": lambda a1, a2, s, c, p: sm.ttm(a1, a2, c.model, _MANEUVERS["TTK"](), c.settings, "TTK"),
    "TTS": lambda a1, a2, s, c, p: sm.ttm(a1, a2, c.model, _MANEUVERS["TTS"](), c.settings, "TTS"),
    "a_long_req": lambda a1, a2, s, c, p: sm.a_long_req(a1, a2, c.model, c.settings),
    "a_lat_req": lambda a1, a2, s, c, p: sm.a_lat_req(a1, a2, c.model, c.settings),
    "a_req": lambda a1, a2, s, c, p: sm.a_req(a1, a2, c.model, c.settings),
    "DST": lambda a1, a2, s, c, p: sm.dst(a1, a2, float(p.get("t_s", 0.0)), c.settings),
    "BTN": lambda a1, a2, s, c, p: sm.btn(a1, a2, c.model, c.settings),
    "STN": lambda a1, a2, s, c, p: sm.stn(a1, a2, c.model, c.settings),
    "SP": lambda a1, a2, s, c, p: sm.sp(a1, a2, c.model, k=float(p.get("k", 2.0)), settings=c.settings),
}

# single-actor metrics: fn(a1, scene, ctx, params) -> MetricResult
_SINGLE: dict[str, Callable] = {
    "LatJ": lambda a1, s, c, p: sm.jerk(a1)[0],
    "LongJ": lambda a1, s, c, p: sm.jerk(a1)[1],
    "MSD": lambda a1, s, c, p: sm.msd(a1),
    "PSD": lambda a1, s, c, p: sm.psd(a1, _area(c, p, s), c.settings),
    "RSS-DS": lambda a1, s, c, p: sm.rss_ds(a1, s.others(a1.id), settings=c.settings),
    "TCI": lambda a1, s, c, p: tci(a1, s, horizon=float(p.get("horizon", 3.0)), settings=c.settings, seed=c.config.seed),
}

SCENE_METRICS = frozenset(_PAIR) | frozenset(_SINGLE)

# scenario metrics: fn(scenario, ctx, params) -> list[MetricResult]


def _pairs_of(scenario: Scenario):
    ids = scenario.actor_ids()
    return [(i, j) for i in ids for j in ids if i != j]


def _per_pair(fn):
    def run(scenario, ctx, params):
        out = []
        for i, j in _pairs_of(scenario):
            out.append(((i, j), lambda i=i, j=j: fn(scenario, i, j, ctx, params)))
        return out

    return run


def _per_actor(fn):
    def run(scenario, ctx, params):
        return [((i,), lambda i=i: fn(scenario, i, ctx, params)) for i in scenario.actor_ids()]

    return run


_SCENARIO: dict[str, Callable] = {
    "TET": _per_pair(lambda sc, i, j, c, p: scn.tet(sc, i, j, float(p.get("tau", 3.0)), c.model, c.settings)),
    "TIT": _per_pair(lambda sc, i, j, c, p: scn.tit(sc, i, j, float(p.get("tau", 3.0)), c.model, c.settings)),
    "PET": _per_pair(lambda sc, i, j, c, p: scn.pet(sc, i, j, _area(c, p), c.settings)),
    "CPI": _per_pair(
        lambda sc, i, j, c, p: scn.cpi(sc, i, j, float(p.get("mu", -8.0)), float(p.get("sigma", 1.0)), c.model, c.settings)
    ),
    "ET": _per_actor(lambda sc, i, c, p: scn.et(sc, i, _area(c, p), c.settings)),
    "AM": lambda sc, c, p: [((), lambda: scn.am(sc, c.settings))],
}
SCENARIO_METRICS = frozenset(_SCENARIO)

TIME_AGGREGATES = ("min", "max", "mean", "median", "integral", "p90")


# --- compute ---------------------------------------------------------------------------------

RESULT_COLUMNS = ("recording", "t", "metric", "subjects", "value", "flags", "error")


@dataclass(frozen=True)
class ResultRow:
    recording: str
    t: Optional[float]  # None for scenario-level rows
    metric: str
    subjects: tuple[str, ...]
    value: Optional[float] = None
    flags: tuple[str, ...] = ()
    error: str = ""

    def cells(self) -> tuple[str, ...]:
        return (
            self.recording,
            "" if self.t is None else repr(float(self.t)),
            self.metric,
            "|".join(self.subjects),
            "" if self.value is None else format_value(self.value),
            "|".join(self.flags),
            self.error,
        )


def _row(rid, t, metric, subjects, fn) -> ResultRow:
    try:
        r: MetricResult = fn()
    except (ValueError, ArithmeticError, KeyError) as e:
        return ResultRow(rid, t, metric, tuple(subjects), None, (), f"{type(e).__name__}: {e}")
    return ResultRow(rid, t, metric, tuple(subjects), r.value, tuple(sorted(r.flags)), "")


def _scene_rows(scene: Scene, rid: str, spec: MetricSpec, ctx: _Context) -> list[ResultRow]:
    out = []
    if spec.id in _PAIR:
        fn = _PAIR[spec.id]
        for a1 in scene.actors:
            for a2 in scene.actors:
                if a1.id != a2.id:
                    out.append(_row(rid, scene.t, spec.id, (a1.id, a2.id), lambda: fn(a1, a2, scene, ctx, spec.params)))
    else:
        fn = _SINGLE[spec.id]
        for a1 in scene.actors:
            out.append(_row(rid, scene.t, spec.id, (a1.id,), lambda: fn(a1, scene, ctx, spec.params)))
    return out


def _aggregate_rows(rows: list[ResultRow], spec: MetricSpec, rid: str) -> list[ResultRow]:
    out = []
    by_subject: dict[tuple, list[ResultRow]] = {}
    for r in rows:
        by_subject.setdefault(r.subjects, []).append(r)
    for subj, rs in by_subject.items():
        ok = [r for r in rs if not r.error]
        for agg in spec.aggregate:
            name = f"{spec.id}:{agg}"
            if len(ok) < 1:
                out.append(ResultRow(rid, None, name, subj, None, (), "MetricError: no valid samples"))
                continue
            series = scn.TimeSeries([r.t for r in ok], [r.value for r in ok])
            p = 0.9 if agg == "p90" else None
            out.append(
                _row(rid, None, name, subj, lambda: _wrap(name, scn.aggregate_time(series, "quantile" if p else agg, p)))
            )
    return out


def _wrap(name, v) -> MetricResult:
    from .core import Scale, Unit

    return MetricResult(name, float(v), Scale.RATIO, Unit.DIMENSIONLESS)


def compute_scenario(config: RunConfig, scenario: Scenario) -> list[ResultRow]:
    """All result rows for one recording, sorted by (t, metric, subjects);
    scenario-level rows (no time) come last."""
    ctx = _Context(config, config.prediction_model(), config.settings)
    scenario = _with_areas(scenario, config)
    rid = scenario.recording_id
    scene_rows: list[ResultRow] = []
    scen_rows: list[ResultRow] = []
    for spec in config.metrics:
        if spec.id in SCENE_METRICS:
            rows = [r for s in scenario.scenes for r in _scene_rows(s, rid, spec, ctx)]
            scene_rows.extend(rows)
            scen_rows.extend(_aggregate_rows(rows, spec, rid))
        else:
            for subj, fn in _SCENARIO[spec.id](scenario, ctx, spec.params):
                scen_rows.append(_row(rid, None, spec.id, subj, fn))
    scene_rows.sort(key=lambda r: (r.t, r.metric, r.subjects))
    scen_rows.sort(key=lambda r: (r.metric, r.subjects))
    return scene_rows + scen_rows


def _with_areas(scenario: Scenario, config: RunConfig) -> Scenario:
    if not config.conflict_areas:
        return scenario
    return replace(scenario, scenes=tuple(replace(s, conflict_areas=config.conflict_areas) for s in scenario.scenes))


def _map(fn, config, scenarios, jobs: int):
    if jobs <= 1 or len(scenarios) <= 1:
        return [fn(config, s) for s in scenarios]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, [config] * len(scenarios), scenarios))


def compute(config: RunConfig, scenarios: Sequence[Scenario], jobs: int = 1) -> list[ResultRow]:
    """Long-format result table; recordings in input order. Metric errors
    become error rows and never abort the batch."""
    out: list[ResultRow] = []
    for rows in _map(compute_scenario, config, list(scenarios), jobs):
        out.extend(rows)
    return out


def write_results(rows: Iterable[ResultRow], out: io.TextIOBase) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(RESULT_COLUMNS)
    for r in rows:
        w.writerow(r.cells())


# --- filtering ---------------------------------------------------------------------------------


class _Series:
    """Streaming critical-interval tracker for one metric/subject series."""

    def __init__(self, target: FilterTarget):
        self.target = target
        self.prev: Optional[tuple[float, float]] = None
        self.start: Optional[float] = None
        self.intervals: list[tuple[float, float]] = []

    def _cross(self, t0, v0, t1, v1) -> float:
        if math.isfinite(v0) and math.isfinite(v1) and v0 != v1:
            u = (v0 - self.target.value) / (v0 - v1)
            return t0 + min(max(u, 0.0), 1.0) * (t1 - t0)
        # an infinite endpoint: the switch happens at the finite sample
        return t1 if math.isfinite(v1) else t0

    def feed(self, t: float, v: float):
        crit = self.target.critical(v)
        if self.prev is None:
            if crit:
                self.start = t
        else:
            t0, v0 = self.prev
            was = self.target.critical(v0)
            if crit and not was:
                self.start = self._cross(t0, v0, t, v)
            elif was and not crit:
                self.intervals.append((self.start, self._cross(t0, v0, t, v)))
                self.start = None
        self.prev = (t, v)

    def gap(self):
        """The series is absent at the current scene: close any open interval."""
        if self.prev is not None and self.start is not None:
            self.intervals.append((self.start, self.prev[0]))
        self.prev, self.start = None, None

    def close(self):
        self.gap()


def merge_intervals(intervals: Iterable[tuple[float, float]], lo: float, hi: float, pre=0.0, post=0.0):
    """Widen by the margins, clip to [lo, hi] and merge overlaps."""
    ivs = sorted((max(lo, a - pre), min(hi, b + post)) for a, b in intervals)
    out: list[list[float]] = []
    for a, b in ivs:
        if out and a <= out[-1][1]:
            out[-1][1] = max(out[-1][1], b)
        else:
            out.append([a, b])
    return [(a, b) for a, b in out]


class StreamingFilter:
    """Consumes the scenes of one recording in time order and reports the
    merged intervals where any target metric is critical."""

    def __init__(self, config: RunConfig):
        if not config.targets:
            raise DataError("filtering needs at least one target value in the config")
        self.config = config
        self.ctx = _Context(config, config.prediction_model(), config.settings)
        self.series: dict[tuple, _Series] = {}
        self.t0: Optional[float] = None
        self.t_last: Optional[float] = None

    def feed(self, scene: Scene):
        if self.t_last is not None and scene.t <= self.t_last:
            raise DataError("scenes must be fed in increasing time order")
        self.t0 = scene.t if self.t0 is None else self.t0
        self.t_last = scene.t
        seen = set()
        for k, target in enumerate(self.config.targets):
            spec = MetricSpec(target.metric)
            for r in _scene_rows(scene, "", spec, self.ctx):
                if r.error or r.value is None:
                    continue
                key = (k, r.subjects)
                seen.add(key)
                self.series.setdefault(key, _Series(target)).feed(scene.t, float(r.value))
        for key, s in self.series.items():
            if key not in seen:
                s.gap()

    def result(self) -> list[tuple[float, float]]:
        ivs = []
        for s in self.series.values():
            s.close()
            ivs.extend(s.intervals)
        if self.t0 is None:
            return []
        return merge_intervals(ivs, self.t0, self.t_last, self.config.margin_pre, self.config.margin_post)


def filter_scenario(config: RunConfig, scenario: Scenario) -> list[tuple[str, float, float]]:
    f = StreamingFilter(config)
    for s in _with_areas(scenario, config).scenes:
        f.feed(s)
    return [(scenario.recording_id, a, b) for a, b in f.result()]


def filter_scenarios(config: RunConfig, scenarios: Sequence[Scenario], jobs: int = 1) -> list[tuple[str, float, float]]:
    out = []
    for rows in _map(filter_scenario, config, list(scenarios), jobs):
        out.extend(rows)
    return out


def write_intervals(rows: Iterable[tuple[str, float, float]], out: io.TextIOBase) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(("recording", "t_start", "t_end"))
    for rid, a, b in rows:
        w.writerow((rid, repr(float(a)), repr(float(b))))


# --- simulation ---------------------------------------------------------------------------------


def simulate(source: Union[str, Path, Mapping], jerk_window: int = 1) -> list[Scenario]:
    """Roll every configured actor forward with the configured model.

    The document holds ``model`` (kind and parameters, including horizon
    and step), optional ``t0`` and ``recording_id``, and ``actors`` with
    ActorState fields (``position``, ``velocity``, ``acceleration``,
    ``yaw``, ``yaw_rate``, ``width``, ``length``, ``mass``, ``class``).
    """
    if isinstance(source, Mapping):
        data = source
    else:
        p = Path(source)
        try:
            data = yaml.safe_load(p.read_text() if "\n" not in str(source) and p.is_file() else str(source))
        except (OSError, yaml.YAMLError) as e:
            raise DataError(f"cannot read model config: {e}") from None
    if not isinstance(data, Mapping) or not data.get("actors"):
        raise DataError("model config needs a non-empty 'actors' list")
    m = dict(data.get("model", {"kind": "constant_velocity"}))
    try:
        model = make_model(m.pop("kind", "constant_velocity"), **m)
    except (TypeError, ModelError) as e:
        raise DataError(f"model: {e}") from None
    t0 = float(data.get("t0", 0.0))
    times = model.times()
    trajectories = []
    for a in data["actors"]:
        a = dict(a)
        cls = a.pop("class", "human_vehicle")
        try:
            state = ActorState(t=t0, actor_class=_actor_class(str(cls), 0), **a)
        except (TypeError, ValueError) as e:
            raise DataError(f"actor {a.get('id')!r}: {e}") from None
        trajectories.append((state, model.predict(state, times)))
    scenes = []
    for k, t in enumerate(times):
        actors = tuple(
            replace(
                st,
                t=t0 + float(t),
                position=tuple(tr.pos[k]),
                velocity=tuple(tr.vel[k]),
                acceleration=tuple(tr.acc[k]),
                yaw=float(tr.yaw[k]),
                jerk=None,
            )
            for st, tr in trajectories
        )
        scenes.append(Scene(t0 + float(t), actors))
    sc = Scenario(tuple(scenes), recording_id=str(data.get("recording_id", "0")))
    return [derive_jerk(sc, jerk_window)]
