"""Motion prediction models.

Every model predicts an actor's future motion on a time grid
``0, step, ..., horizon``. Single-trace models return one
:class:`~critmetrics.trajectory.Trajectory`; trace-set models return a
:class:`~critmetrics.trajectory.TrajectorySet`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .core import ActorState, longitudinal_lateral_decompose
from .trajectory import Trajectory, TrajectorySet

Signal = Union[float, Callable[[float], float]]

OMEGA_EPS = 1e-6


class ModelError(ValueError):
    pass


def _signal(u: Signal) -> Callable[[float], float]:
    if callable(u):
        return u
    val = float(u)
    return lambda t: val


def _check_finite(*vals):
    for v in vals:
        if not np.all(np.isfinite(v)):
            raise ModelError(f"non-finite model input: {v!r}")


# --- single point kinematics -------------------------------------------------


def _derivatives(state: ActorState, order: int, allow_zero_fill: bool) -> list[np.ndarray]:
    avail = [state.p, state.v, state.a]
    if state.jerk is not None:
        avail.append(np.array(state.jerk))
    if order >= len(avail):
        if not allow_zero_fill:
            raise ModelError(
                f"insufficient derivatives: order {order} needs {order} derivatives, "
                f"state has {len(avail) - 1}"
            )
        avail += [np.zeros(2)] * (order + 1 - len(avail))
    return avail[: order + 1]


def taylor_predict(state: ActorState, order: int, dt: float, allow_zero_fill: bool = False) -> ActorState:
    """Advance position, velocity and acceleration by a truncated Taylor
    series of the given order. Derivatives beyond the order pass through."""
    if order < 1:
        raise ModelError("Taylor order must be >= 1")
    d = _derivatives(state, order, allow_zero_fill)
    p = sum(d[k] * dt**k / math.factorial(k) for k in range(order + 1))
    v = sum(d[k] * dt ** (k - 1) / math.factorial(k - 1) for k in range(1, order + 1))
    a = state.a if order < 2 else sum(d[k] * dt ** (k - 2) / math.factorial(k - 2) for k in range(2, order + 1))
    return replace(state, t=state.t + dt, position=tuple(p), velocity=tuple(v), acceleration=tuple(a))


def _taylor_series(state, order, times, allow_zero_fill):
    d = _derivatives(state, order, allow_zero_fill)
    tt = np.asarray(times, dtype=float)[:, None]
    pos = sum(d[k] * tt**k / math.factorial(k) for k in range(order + 1))
    vel = sum(d[k] * tt ** (k - 1) / math.factorial(k - 1) for k in range(1, order + 1)) * np.ones_like(tt)
    if order >= 2:
        acc = sum(d[k] * tt ** (k - 2) / math.factorial(k - 2) for k in range(2, order + 1)) * np.ones_like(tt)
    else:
        acc = np.zeros((len(tt), 2))
    return pos, vel, acc


def constant_acceleration_motion(p, v, a, times, stop_at_zero: bool = True):
    """Positions/velocities under constant acceleration. With
    ``stop_at_zero`` an actor decelerating against its direction of travel
    halts once its velocity component along the initial direction vanishes
    and then stays put (no reversing)."""
    p, v, a = (np.asarray(x, dtype=float) for x in (p, v, a))
    tt = np.asarray(times, dtype=float)
    t_stop = math.inf
    if stop_at_zero:
        av = float(a @ v)
        if av < 0:
            t_stop = -float(v @ v) / av
    te = np.minimum(tt, t_stop)[:, None]
    pos = p + v * te + 0.5 * a * te**2
    vel = v + a * te
    acc = np.where((tt < t_stop)[:, None], a, 0.0) * np.ones((len(tt), 2))
    if math.isfinite(t_stop):
        stopped = tt >= t_stop
        vel[stopped] = 0.0
    return pos, vel, acc


# --- coordinated turn family -------------------------------------------------


def coordinated_turn_step(p, v, omega: float, T: float, omega_eps: float = OMEGA_EPS):
    """One exact coordinated-turn transition of (position, velocity).

    The turn rate is clockwise-positive: velocity is rotated by ``-omega*T``.
    Below ``omega_eps`` the straight-line limit is used.
    """
    p, v = np.asarray(p, dtype=float), np.asarray(v, dtype=float)
    if abs(omega) < omega_eps:
        return p + v * T, v.copy()
    s, c = math.sin(omega * T), math.cos(omega * T)
    F = np.array(
        [
            [1, 0, s / omega, (1 - c) / omega],
            [0, 1, (c - 1) / omega, s / omega],
            [0, 0, c, s],
            [0, 0, -s, c],
        ]
    )
    out = F @ np.concatenate([p, v])
    return out[:2], out[2:]


def augmented_ct_polar_step(p, v_long: float, phi: float, omega: float, T: float, omega_eps: float = OMEGA_EPS):
    """Closed-form augmented coordinated turn with polar velocity
    (counter-clockwise positive heading and turn rate).

    Returns ``(position, v_long, heading, omega)``.
    """
    p = np.asarray(p, dtype=float)
    if abs(omega) < omega_eps:
        step = v_long * T * np.array([math.cos(phi), math.sin(phi)])
        return p + step, v_long, phi, omega
    half = omega * T / 2
    chord = 2 * v_long / omega * math.sin(half)
    return p + chord * np.array([math.cos(phi + half), math.sin(phi + half)]), v_long, phi + omega * T, omega


# --- integrated car models ---------------------------------------------------


def _rk4(f, x0: np.ndarray, t_end: float, step: float):
    """Fixed-step RK4 on [0, t_end]; the last step is shortened to land on
    ``t_end``. Returns (times, states)."""
    n_full = int(math.floor(t_end / step + 1e-9))
    times = [0.0]
    xs = [np.asarray(x0, dtype=float)]
    t, x = 0.0, xs[0]
    steps = [step] * n_full
    rest = t_end - n_full * step
    if rest > 1e-12:
        steps.append(rest)
    for h in steps:
        k1 = f(t, x)
        k2 = f(t + h / 2, x + h / 2 * k1)
        k3 = f(t + h / 2, x + h / 2 * k2)
        k4 = f(t + h, x + h * k3)
        x = x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t = t + h
        times.append(t)
        xs.append(x)
    return np.array(times), np.array(xs)


def simple_car_integrate(state: ActorState, u_s: Signal, u_phi: Signal, dt: float, L: float, step: float = 0.01) -> Trajectory:
    """Integrate the simple car (speed and steering-angle inputs)."""
    if L <= 0:
        raise ModelError("axle distance must be positive")
    us, uphi = _signal(u_s), _signal(u_phi)
    _check_finite(us(0.0), uphi(0.0), dt, *state.position, state.yaw)

    def f(t, x):
        s = us(t)
        return np.array([s * math.cos(x[2]), s * math.sin(x[2]), s / L * math.tan(uphi(t))])

    times, xs = _rk4(f, np.array([*state.position, state.yaw]), dt, step)
    _check_finite(xs)
    speeds = np.array([us(t) for t in times])
    vel = speeds[:, None] * np.stack([np.cos(xs[:, 2]), np.sin(xs[:, 2])], -1)
    return Trajectory(times, xs[:, :2], vel, xs[:, 2], length=state.length, width=state.width, actor_id=state.id)


def continuous_steering_integrate(
    state: ActorState, u_s: Signal, u_theta: Signal, dt: float, L: float, step: float = 0.01
) -> Trajectory:
    """Integrate the continuous-steering car; steering angle is a state
    driven by the steering-rate input."""
    if L <= 0:
        raise ModelError("axle distance must be positive")
    us, uth = _signal(u_s), _signal(u_theta)
    phi0 = state.steering_angle or 0.0
    _check_finite(us(0.0), uth(0.0), dt, *state.position, state.yaw, phi0)

    def f(t, x):
        s = us(t)
        return np.array([s * math.cos(x[2]), s * math.sin(x[2]), s / L * math.tan(x[3]), uth(t)])

    times, xs = _rk4(f, np.array([*state.position, state.yaw, phi0]), dt, step)
    _check_finite(xs)
    speeds = np.array([us(t) for t in times])
    vel = speeds[:, None] * np.stack([np.cos(xs[:, 2]), np.sin(xs[:, 2])], -1)
    return Trajectory(times, xs[:, :2], vel, xs[:, 2], length=state.length, width=state.width, actor_id=state.id)


@dataclass(frozen=True)
class OneTrackParams:
    c_af: float = 80_000.0  # N/rad
    c_ar: float = 80_000.0
    l_f: float = 1.2
    l_r: float = 1.6
    m: float = 1500.0
    I_z: float = 2500.0

    def __post_init__(self):
        if min(self.c_af, self.c_ar, self.l_f, self.l_r, self.m, self.I_z) <= 0:
            raise ModelError("one-track parameters must be positive")


V_EPS = 1e-3


def _one_track_rhs(params: OneTrackParams, v: float, delta_f: float):
    p = params
    A = np.array(
        [
            [-(p.c_af + p.c_ar) / (p.m * v), (p.c_ar * p.l_r - p.c_af * p.l_f) / (p.m * v**2) - 1],
            [(p.c_ar * p.l_r - p.c_af * p.l_f) / p.I_z, -(p.c_af * p.l_f**2 + p.c_ar * p.l_r**2) / (p.I_z * v)],
        ]
    )
    B = np.array([p.c_af / (p.m * v), p.c_af * p.l_f / p.I_z])
    return lambda x: A @ x + B * delta_f


def one_track_step(beta: float, omega: float, v: float, params: OneTrackParams, delta_f: float, T: float):
    """One RK4 step of the linear single-track (bicycle) lateral dynamics.
    Returns ``(beta, omega)``."""
    if v <= V_EPS:
        raise ModelError("one-track model undefined at standstill")
    f = _one_track_rhs(params, v, delta_f)
    x = np.array([beta, omega], dtype=float)
    k1 = f(x)
    k2 = f(x + T / 2 * k1)
    k3 = f(x + T / 2 * k2)
    k4 = f(x + T * k3)
    x = x + T / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return float(x[0]), float(x[1])


# --- potential fields --------------------------------------------------------


def numerical_gradient(U: Callable[[np.ndarray], float], p: np.ndarray, h: float = 1e-5) -> np.ndarray:
    g = np.zeros(2)
    for i in range(2):
        e = np.zeros(2)
        e[i] = h
        g[i] = (U(p + e) - U(p - e)) / (2 * h)
    return g


def combined_potential(potentials: Sequence[Callable]) -> Callable[[np.ndarray], float]:
    return lambda p: float(sum(U(p) for U in potentials))


def potential_descent(
    start,
    potentials: Sequence[Callable[[np.ndarray], float]],
    step: float = 0.1,
    iterations: int = 200,
    h: float = 1e-5,
    max_halvings: int = 40,
    gtol: float = 1e-10,
) -> np.ndarray:
    """Gradient-descent path on the summed potential. The potential never
    increases along the returned path; a step that would increase it is
    halved, and too many halvings raise :class:`ModelError`."""
    U = combined_potential(potentials)
    p = np.asarray(start, dtype=float)
    path = [p]
    u = U(p)
    for _ in range(iterations):
        g = numerical_gradient(U, p, h)
        if np.linalg.norm(g) < gtol:
            break
        s = step
        for _ in range(max_halvings + 1):
            cand = p - s * g
            uc = U(cand)
            if uc <= u:
                break
            s /= 2
        else:
            raise ModelError("potential descent diverged: step halving exhausted")
        p, u = cand, uc
        path.append(p)
    return np.array(path)


# --- model interface ---------------------------------------------------------


@dataclass(frozen=True)
class PredictionModel:
    """Base class. ``kind`` is one of single_trace, trace_set or
    occupancy_distribution."""

    horizon: float = 20.0
    step: float = 0.01
    kind = "single_trace"

    def __post_init__(self):
        if not (self.horizon > 0 and self.step > 0 and self.step <= self.horizon):
            raise ModelError("prediction model requires 0 < step <= horizon")

    def times(self) -> np.ndarray:
        n = int(round(self.horizon / self.step))
        t = np.arange(n + 1) * self.step
        if t[-1] < self.horizon - 1e-12:
            t = np.append(t, self.horizon)
        return np.minimum(t, self.horizon)

    def predict(self, actor: ActorState, times=None) -> Trajectory:
        raise NotImplementedError

    def predict_set(self, actor: ActorState) -> TrajectorySet:
        return TrajectorySet.of([self.predict(actor)])

    def _traj(self, actor, times, pos, vel, yaw, acc=None) -> Trajectory:
        return Trajectory(times, pos, vel, yaw, acc, actor.length, actor.width, actor.id)


@dataclass(frozen=True)
class TaylorModel(PredictionModel):
    order: int = 2
    allow_zero_fill: bool = False

    def predict(self, actor, times=None):
        times = self.times() if times is None else np.asarray(times, dtype=float)
        pos, vel, acc = _taylor_series(actor, self.order, times, self.allow_zero_fill)
        return self._traj(actor, times, pos, vel, np.full(len(times), actor.yaw), acc)


@dataclass(frozen=True)
class ConstantVelocityModel(PredictionModel):
    def predict(self, actor, times=None):
        times = self.times() if times is None else np.asarray(times, dtype=float)
        pos, vel, acc = constant_acceleration_motion(actor.p, actor.v, np.zeros(2), times)
        return self._traj(actor, times, pos, vel, np.full(len(times), actor.yaw), acc)


@dataclass(frozen=True)
class ConstantAccelerationModel(PredictionModel):
    stop_at_zero: bool = True

    def predict(self, actor, times=None):
        times = self.times() if times is None else np.asarray(times, dtype=float)
        pos, vel, acc = constant_acceleration_motion(actor.p, actor.v, actor.a, times, self.stop_at_zero)
        return self._traj(actor, times, pos, vel, np.full(len(times), actor.yaw), acc)


@dataclass(frozen=True)
class CoordinatedTurnModel(PredictionModel):
    """Constant speed and turn rate; uses the actor's yaw rate
    (counter-clockwise positive)."""

    omega_eps: float = OMEGA_EPS

    def predict(self, actor, times=None):
        times = self.times() if times is None else np.asarray(times, dtype=float)
        pos = np.empty((len(times), 2))
        vel = np.empty((len(times), 2))
        for i, t in enumerate(times):
            pos[i], vel[i] = coordinated_turn_step(actor.p, actor.v, -actor.yaw_rate, t, self.omega_eps)
        yaw = actor.yaw + actor.yaw_rate * times
        return self._traj(actor, times, pos, vel, yaw)


@dataclass(frozen=True)
class AugmentedCoordinatedTurnModel(PredictionModel):
    omega_eps: float = OMEGA_EPS

    def predict(self, actor, times=None):
        times = self.times() if times is None else np.asarray(times, dtype=float)
        v_long = actor.v_long
        pos = np.empty((len(times), 2))
        for i, t in enumerate(times):
            pos[i] = augmented_ct_polar_step(actor.p, v_long, actor.yaw, actor.yaw_rate, t, self.omega_eps)[0]
        yaw = actor.yaw + actor.yaw_rate * times
        vel = v_long * np.stack([np.cos(yaw), np.sin(yaw)], -1)
        return self._traj(actor, times, pos, vel, yaw)


def _resample(tr: Trajectory, times) -> Trajectory:
    from .trajectory import interp

    if times is None:
        return tr
    return interp(tr, np.asarray(times, dtype=float))


@dataclass(frozen=True)
class SimpleCarModel(PredictionModel):
    """Simple car driven by speed and steering-angle signals. Without
    explicit signals the actor's current speed and steering angle are held."""

    wheelbase: float = 2.8
    speed: Optional[Signal] = None
    steering: Optional[Signal] = None

    def predict(self, actor, times=None):
        u_s = actor.v_long if self.speed is None else self.speed
        if self.steering is None and actor.steering_angle is None:
            raise ModelError("simple car model needs a steering angle on the state or a steering signal")
        u_phi = actor.steering_angle if self.steering is None else self.steering
        tr = simple_car_integrate(actor, u_s, u_phi, self.horizon, self.wheelbase, self.step)
        return _resample(tr, times)


@dataclass(frozen=True)
class ContinuousSteeringModel(PredictionModel):
    wheelbase: float = 2.8
    speed: Optional[Signal] = None
    steering_rate: Signal = 0.0

    def predict(self, actor, times=None):
        u_s = actor.v_long if self.speed is None else self.speed
        tr = continuous_steering_integrate(actor, u_s, self.steering_rate, self.horizon, self.wheelbase, self.step)
        return _resample(tr, times)


@dataclass(frozen=True)
class OneTrackModel(PredictionModel):
    """Constant-speed single-track model with front steering input;
    the heading follows the yaw rate and the course adds the sideslip."""

    params: OneTrackParams = field(default_factory=OneTrackParams)
    delta_f: Signal = 0.0

    def predict(self, actor, times=None):
        v = actor.speed
        if v <= V_EPS:
            raise ModelError("one-track model undefined at standstill")
        delta = _signal(self.delta_f)
        f_cache = {}

        def f(t, x):
            d = delta(t)
            rhs = f_cache.get(d)
            if rhs is None:
                rhs = f_cache.setdefault(d, _one_track_rhs(self.params, v, d))
            beta, omega, psi = x[2], x[3], x[4]
            db = rhs(np.array([beta, omega]))
            return np.array([v * math.cos(psi + beta), v * math.sin(psi + beta), db[0], db[1], omega])

        x0 = np.array([*actor.position, actor.sideslip or 0.0, actor.yaw_rate, actor.yaw])
        ts, xs = _rk4(f, x0, self.horizon, self.step)
        course = xs[:, 4] + xs[:, 2]
        vel = v * np.stack([np.cos(course), np.sin(course)], -1)
        tr = self._traj(actor, ts, xs[:, :2], vel, xs[:, 4])
        return _resample(tr, times)


@dataclass(frozen=True)
class PotentialFieldModel(PredictionModel):
    """Maneuver model following the gradient-descent path of summed
    potentials at the actor's current speed."""

    potentials: tuple = ()
    descent_step: float = 0.1
    iterations: int = 500

    def predict(self, actor, times=None):
        times = self.times() if times is None else np.asarray(times, dtype=float)
        path = potential_descent(actor.p, self.potentials, self.descent_step, self.iterations)
        seg = np.linalg.norm(np.diff(path, axis=0), axis=1)
        s = np.concatenate([[0.0], np.cumsum(seg)])
        travelled = np.minimum(actor.speed * times, s[-1])
        if len(path) == 1:
            pos = np.tile(path[0], (len(times), 1))
        else:
            pos = np.stack([np.interp(travelled, s, path[:, 0]), np.interp(travelled, s, path[:, 1])], -1)
        vel = np.gradient(pos, times, axis=0) if len(times) > 1 else np.zeros((1, 2))
        moving = np.linalg.norm(vel, axis=1) > 1e-9
        yaw = np.where(moving, np.arctan2(vel[:, 1], vel[:, 0]), actor.yaw)
        return self._traj(actor, times, pos, vel, yaw)


# --- trace sets ----------------------------------------------------------------


@dataclass(frozen=True)
class ControlSetModel(PredictionModel):
    """Over-approximating trace set: constant (longitudinal, lateral)
    accelerations on a grid spanning the actor's capability envelope,
    optionally plus the nominal trace of another model."""

    n_long: int = 5
    n_lat: int = 5
    nominal: Optional[PredictionModel] = None
    kind = "trace_set"

    def predict(self, actor, times=None):
        model = self.nominal or ConstantVelocityModel(self.horizon, self.step)
        return model.predict(actor, times)

    def predict_set(self, actor):
        times = self.times()
        cap = actor.capabilities
        trs = []
        if self.nominal is not None:
            trs.append(self.nominal.predict(actor, times))
        c, s = math.cos(actor.yaw), math.sin(actor.yaw)
        for al in np.linspace(cap.a_long_min, cap.a_long_max, self.n_long):
            for at in np.linspace(-cap.a_lat_max, cap.a_lat_max, self.n_lat):
                a = np.array([al * c - at * s, al * s + at * c])
                pos, vel, acc = constant_acceleration_motion(actor.p, actor.v, a, times)
                trs.append(self._traj(actor, times, pos, vel, np.full(len(times), actor.yaw), acc))
        return TrajectorySet.of(trs)


@dataclass(frozen=True)
class ExplicitTraceSetModel(PredictionModel):
    """Trace set formed by running several single-trace models."""

    models: tuple = ()
    weights: Optional[tuple] = None
    kind = "trace_set"

    def predict(self, actor, times=None):
        return self.models[0].predict(actor, times)

    def predict_set(self, actor):
        times = self.times()
        return TrajectorySet.of([m.predict(actor, times) for m in self.models], self.weights)


MODEL_REGISTRY = {
    "constant_velocity": ConstantVelocityModel,
    "constant_acceleration": ConstantAccelerationModel,
    "taylor": TaylorModel,
    "coordinated_turn": CoordinatedTurnModel,
    "augmented_coordinated_turn": AugmentedCoordinatedTurnModel,
    "simple_car": SimpleCarModel,
    "continuous_steering": ContinuousSteeringModel,
    "one_track": OneTrackModel,
    "control_set": ControlSetModel,
}


def make_model(kind: str, **params) -> PredictionModel:
    try:
        cls = MODEL_REGISTRY[kind]
    except KeyError:
        raise ModelError(f"unknown prediction model {kind!r}") from None
    if cls is OneTrackModel and isinstance(params.get("params"), dict):
        params["params"] = OneTrackParams(**params["params"])
    if cls is ControlSetModel and isinstance(params.get("nominal"), dict):
        nominal = dict(params["nominal"])
        params["nominal"] = make_model(nominal.pop("kind"), **nominal)
    return cls(**params)


def longitudinal_components(actor: ActorState) -> tuple[float, float]:
    """(v_long, a_long) in the actor's yaw frame."""
    return longitudinal_lateral_decompose(actor.velocity, actor.yaw)[0], actor.a_long
