"""Maneuver models: trajectories an actor follows when it starts a given
maneuver from a given state."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core import ActorState
from .models import PredictionModel, constant_acceleration_motion
from .trajectory import Trajectory

Generator = Callable[[ActorState, np.ndarray], Trajectory]


@dataclass(frozen=True)
class ManeuverModel:
    maneuver_id: str
    generator: Generator

    def trajectory(self, state: ActorState, times: np.ndarray) -> Trajectory:
        return self.generator(state, np.asarray(times, dtype=float))


def _heading(state: ActorState) -> np.ndarray:
    if state.speed > 1e-9:
        return state.v / state.speed
    return np.array([math.cos(state.yaw), math.sin(state.yaw)])


def _straight(state, times, accel_mag, v_cap=None):
    u = _heading(state)
    a = accel_mag * u
    pos, vel, acc = constant_acceleration_motion(state.p, state.v, a, times, stop_at_zero=True)
    if v_cap is not None and accel_mag > 0:
        t_cap = max(0.0, (v_cap - state.speed) / accel_mag)
        late = times > t_cap
        if np.any(late):
            p_cap, v_c, _ = constant_acceleration_motion(state.p, state.v, a, np.array([t_cap]))
            pos[late] = p_cap[0] + v_c[0] * (times[late] - t_cap)[:, None]
            vel[late] = v_c[0]
            acc[late] = 0.0
    return Trajectory(times, pos, vel, np.full(len(times), state.yaw), acc, state.length, state.width, state.id)


def brake(deceleration: Optional[float] = None) -> ManeuverModel:
    """Straight-line braking at ``deceleration`` (magnitude, default the
    actor's capability) until standstill."""

    def gen(state, times):
        b = abs(state.capabilities.a_long_min if deceleration is None else deceleration)
        return _straight(state, times, -b)

    return ManeuverModel("brake", gen)


def kickdown(acceleration: Optional[float] = None) -> ManeuverModel:
    """Straight-line acceleration up to the actor's maximum speed."""

    def gen(state, times):
        a = state.capabilities.a_long_max if acceleration is None else acceleration
        return _straight(state, times, a, v_cap=state.capabilities.v_max)

    return ManeuverModel("kickdown", gen)


def steer(side: str, lateral_acceleration: Optional[float] = None) -> ManeuverModel:
    """Constant-speed circular arc with the given lateral acceleration
    magnitude (default the actor's capability)."""
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    sign = 1.0 if side == "left" else -1.0

    def gen(state, times):
        v = state.speed
        a = state.capabilities.a_lat_max if lateral_acceleration is None else lateral_acceleration
        if v <= 1e-9:
            return Trajectory.stationary(state, times)
        omega = sign * a / v
        psi0 = math.atan2(state.velocity[1], state.velocity[0])
        psi = psi0 + omega * times
        pos = state.p + (v / omega) * np.stack(
            [np.sin(psi) - math.sin(psi0), -np.cos(psi) + math.cos(psi0)], -1
        )
        vel = v * np.stack([np.cos(psi), np.sin(psi)], -1)
        acc = a * sign * np.stack([-np.sin(psi), np.cos(psi)], -1)
        yaw = state.yaw + omega * times
        return Trajectory(times, pos, vel, yaw, acc, state.length, state.width, state.id)

    return ManeuverModel(f"steer_{side}", gen)


def custom(maneuver_id: str, generator: Generator) -> ManeuverModel:
    return ManeuverModel(maneuver_id, generator)


def from_model(maneuver_id: str, model: PredictionModel) -> ManeuverModel:
    """Use any single-trace prediction model as a maneuver."""
    return ManeuverModel(maneuver_id, lambda state, times: model.predict(state, times))


MANEUVERS = {
    "brake": brake,
    "kickdown": kickdown,
    "steer_left": lambda **kw: steer("left", **kw),
    "steer_right": lambda **kw: steer("right", **kw),
}
