"""Domain types shared across the package.

Every vector is a 2-tuple of floats in a fixed global frame (SI units). All
types are frozen dataclasses; use :func:`dataclasses.replace` to derive new
states.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Optional, Sequence

import numpy as np

Vec2 = tuple[float, float]


class ActorClass(str, Enum):
    HUMAN_VEHICLE = "human_vehicle"
    AUTOMATED_VEHICLE = "automated_vehicle"
    PEDESTRIAN = "pedestrian"
    BICYCLE = "bicycle"
    OTHER = "other"


class Scale(str, Enum):
    NOMINAL = "nominal"
    ORDINAL = "ordinal"
    INTERVAL = "interval"
    RATIO = "ratio"


class Unit(str, Enum):
    TIME = "time_s"
    TIME2 = "time2_s2"
    DISTANCE = "distance_m"
    ACCEL = "accel_mps2"
    JERK = "jerk_mps3"
    ENERGY = "energy_J"
    PROBABILITY = "probability"
    COUNT = "count"
    DIMENSIONLESS = "dimensionless"
    SPEED = "speed_mps"
    # PRI integrates speed^2 over time
    RISK = "s_m2ps2"


def _vec(v: Sequence[float] | np.ndarray, name: str) -> Vec2:
    if len(v) != 2:
        raise ValueError(f"{name} must be a 2-vector, got {v!r}")
    out = (float(v[0]), float(v[1]))
    if not all(math.isfinite(c) for c in out):
        raise ValueError(f"{name} must be finite, got {out!r}")
    return out


@dataclass(frozen=True)
class CapabilityEnvelope:
    """Acceleration and speed limits of one actor."""

    a_long_min: float = -8.0
    a_long_max: float = 3.0
    a_lat_max: float = 5.0
    v_max: float = 50.0
    mu_max: float = 1.0

    def __post_init__(self):
        if not self.a_long_min < 0 <= self.a_long_max:
            raise ValueError("capability envelope requires a_long_min < 0 <= a_long_max")
        if self.a_lat_max <= 0 or self.v_max <= 0 or self.mu_max <= 0:
            raise ValueError("a_lat_max, v_max and mu_max must be positive")


@dataclass(frozen=True)
class ActorState:
    id: str
    t: float
    position: Vec2
    velocity: Vec2 = (0.0, 0.0)
    acceleration: Vec2 = (0.0, 0.0)
    jerk: Optional[Vec2] = None
    yaw: float = 0.0
    yaw_rate: float = 0.0
    steering_angle: Optional[float] = None
    sideslip: Optional[float] = None
    width: float = 1.8
    length: float = 4.5
    mass: Optional[float] = None
    capabilities: CapabilityEnvelope = field(default_factory=CapabilityEnvelope)
    reaction_time: Optional[float] = None
    actor_class: ActorClass = ActorClass.HUMAN_VEHICLE

    def __post_init__(self):
        object.__setattr__(self, "id", str(self.id))
        object.__setattr__(self, "position", _vec(self.position, "position"))
        object.__setattr__(self, "velocity", _vec(self.velocity, "velocity"))
        object.__setattr__(self, "acceleration", _vec(self.acceleration, "acceleration"))
        if self.jerk is not None:
            object.__setattr__(self, "jerk", _vec(self.jerk, "jerk"))
        object.__setattr__(self, "actor_class", ActorClass(self.actor_class))
        if not (self.width > 0 and self.length > 0):
            raise ValueError("actor width and length must be positive")
        if self.mass is not None and not self.mass > 0:
            raise ValueError("actor mass must be positive")
        if self.reaction_time is not None and self.reaction_time < 0:
            raise ValueError("reaction time must be non-negative")

    @property
    def p(self) -> np.ndarray:
        return np.array(self.position)

    @property
    def v(self) -> np.ndarray:
        return np.array(self.velocity)

    @property
    def a(self) -> np.ndarray:
        return np.array(self.acceleration)

    @property
    def speed(self) -> float:
        return math.hypot(*self.velocity)

    @property
    def v_long(self) -> float:
        return longitudinal_lateral_decompose(self.velocity, self.yaw)[0]

    @property
    def v_lat(self) -> float:
        return longitudinal_lateral_decompose(self.velocity, self.yaw)[1]

    @property
    def a_long(self) -> float:
        return longitudinal_lateral_decompose(self.acceleration, self.yaw)[0]

    @property
    def a_lat(self) -> float:
        return longitudinal_lateral_decompose(self.acceleration, self.yaw)[1]

    @property
    def is_vru(self) -> bool:
        return self.actor_class in (ActorClass.PEDESTRIAN, ActorClass.BICYCLE)


@dataclass(frozen=True)
class ConflictArea:
    id: str
    polygon: tuple[Vec2, ...]

    def __post_init__(self):
        from shapely.geometry import Polygon

        pts = tuple(_vec(p, "polygon vertex") for p in self.polygon)
        object.__setattr__(self, "polygon", pts)
        poly = Polygon(pts)
        if len(pts) < 3 or not poly.is_valid or poly.area <= 0:
            raise ValueError(f"conflict area {self.id!r} must be a simple polygon with positive area")

    @property
    def shape(self):
        from shapely.geometry import Polygon

        return Polygon(self.polygon)


@dataclass(frozen=True)
class OccupancyRaster:
    """Boolean drivable-area grid; cell (i, j) covers
    ``[x0 + j*res, x0 + (j+1)*res) x [y0 + i*res, y0 + (i+1)*res)``."""

    origin: Vec2
    resolution: float
    mask: tuple[tuple[bool, ...], ...]

    @classmethod
    def from_array(cls, origin, resolution, mask) -> "OccupancyRaster":
        arr = np.asarray(mask, dtype=bool)
        return cls(tuple(origin), float(resolution), tuple(tuple(bool(x) for x in row) for row in arr))

    @cached_property
    def array(self) -> np.ndarray:
        return np.asarray(self.mask, dtype=bool)

    def drivable(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        arr = self.array
        j = np.floor((pts[:, 0] - self.origin[0]) / self.resolution).astype(int)
        i = np.floor((pts[:, 1] - self.origin[1]) / self.resolution).astype(int)
        inside = (i >= 0) & (i < arr.shape[0]) & (j >= 0) & (j < arr.shape[1])
        out = np.zeros(len(pts), dtype=bool)
        out[inside] = arr[i[inside], j[inside]]
        return out


@dataclass(frozen=True)
class Scene:
    t: float
    actors: tuple[ActorState, ...]
    conflict_areas: tuple[ConflictArea, ...] = ()
    static_objects: tuple[tuple[Vec2, ...], ...] = ()
    drivable_area: Optional[OccupancyRaster] = None

    def __post_init__(self):
        object.__setattr__(self, "actors", tuple(self.actors))
        object.__setattr__(self, "conflict_areas", tuple(self.conflict_areas))
        object.__setattr__(self, "static_objects", tuple(tuple(map(tuple, o)) for o in self.static_objects))
        ids = [a.id for a in self.actors]
        if len(ids) != len(set(ids)):
            raise ValueError("actor ids within a scene must be unique")
        for a in self.actors:
            if not math.isclose(a.t, self.t, rel_tol=0, abs_tol=1e-9):
                raise ValueError(f"actor {a.id!r} timestamp {a.t} differs from scene time {self.t}")

    def actor(self, actor_id) -> ActorState:
        for a in self.actors:
            if a.id == str(actor_id):
                return a
        raise KeyError(f"actor {actor_id!r} not in scene at t={self.t}")

    def has(self, actor_id) -> bool:
        return any(a.id == str(actor_id) for a in self.actors)

    def others(self, actor_id) -> list[ActorState]:
        return [a for a in self.actors if a.id != str(actor_id)]

    def conflict_area(self, ca_id) -> ConflictArea:
        for ca in self.conflict_areas:
            if ca.id == str(ca_id):
                return ca
        raise KeyError(f"conflict area {ca_id!r} not in scene")


@dataclass(frozen=True)
class AccidentEvent:
    t: float
    actors: tuple[str, str]
    speeds_before: Optional[tuple[float, float]] = None
    speeds_after: Optional[tuple[float, float]] = None
    masses: Optional[tuple[float, float]] = None


@dataclass(frozen=True)
class Scenario:
    scenes: tuple[Scene, ...]
    accident_events: tuple[AccidentEvent, ...] = ()
    recording_id: str = "0"

    def __post_init__(self):
        object.__setattr__(self, "scenes", tuple(self.scenes))
        object.__setattr__(self, "accident_events", tuple(self.accident_events))
        ts = [s.t for s in self.scenes]
        if len(ts) < 2:
            raise ValueError("a scenario needs at least two scenes (t_e > t_0)")
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError("scene timestamps must be strictly increasing")

    @property
    def t_0(self) -> float:
        return self.scenes[0].t

    @property
    def t_e(self) -> float:
        return self.scenes[-1].t

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.scenes])

    def actor_ids(self) -> list[str]:
        seen: dict[str, None] = {}
        for s in self.scenes:
            for a in s.actors:
                seen.setdefault(a.id, None)
        return list(seen)

    def states(self, actor_id) -> list[ActorState]:
        """All recorded states of one actor in time order (gaps skipped)."""
        return [s.actor(actor_id) for s in self.scenes if s.has(actor_id)]


@dataclass(frozen=True)
class MetricResult:
    """A metric value on a declared scale. ``value`` may be +/-inf, or a
    string label on the nominal scale."""

    metric_id: str
    value: float | str
    scale: Scale
    unit: Unit
    subjects: tuple[str, ...] = ()
    flags: frozenset[str] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "subjects", tuple(str(s) for s in self.subjects))
        object.__setattr__(self, "flags", frozenset(self.flags))
        if self.unit is Unit.PROBABILITY and not isinstance(self.value, str):
            if not 0.0 <= self.value <= 1.0:
                raise ValueError(f"probability {self.value} outside [0, 1]")

    def __float__(self) -> float:
        if isinstance(self.value, str):
            raise TypeError(f"{self.metric_id} is nominal-valued")
        return float(self.value)

    def __lt__(self, other):
        if self.scale is Scale.NOMINAL:
            raise TypeError("nominal-scale metric values have no order")
        return float(self) < float(other)

    def __gt__(self, other):
        if self.scale is Scale.NOMINAL:
            raise TypeError("nominal-scale metric values have no order")
        return float(self) > float(other)


def format_value(value) -> str:
    """Serialize an extended real; infinities become ``inf``/``-inf``."""
    if isinstance(value, str):
        return value
    v = float(value)
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    if math.isnan(v):
        return "nan"
    return repr(v)


def longitudinal_lateral_decompose(v, yaw: float) -> tuple[float, float]:
    c, s = math.cos(yaw), math.sin(yaw)
    return v[0] * c + v[1] * s, -v[0] * s + v[1] * c


def compose_from_frame(long: float, lat: float, yaw: float) -> Vec2:
    """Inverse of :func:`longitudinal_lateral_decompose`."""
    c, s = math.cos(yaw), math.sin(yaw)
    return long * c - lat * s, long * s + lat * c


def distance(p1, p2, shapes: Optional[tuple[ActorState, ActorState]] = None) -> float:
    """Euclidean point distance, or footprint-to-footprint distance when
    ``shapes`` gives the two actors (0 on overlap)."""
    if shapes is None:
        return math.dist(p1, p2)
    from .geometry import footprint_corners, rect_clearance

    a1, a2 = shapes
    c1 = footprint_corners(np.atleast_2d(p1), np.array([a1.yaw]), a1.length, a1.width)
    c2 = footprint_corners(np.atleast_2d(p2), np.array([a2.yaw]), a2.length, a2.width)
    return max(0.0, float(rect_clearance(c1, c2)[0]))
