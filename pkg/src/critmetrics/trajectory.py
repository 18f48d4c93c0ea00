from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .core import ActorState


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Sampled future motion of one actor. ``t`` is relative time from the
    prediction start (first sample at 0)."""

    t: np.ndarray
    pos: np.ndarray
    vel: np.ndarray
    yaw: np.ndarray
    acc: Optional[np.ndarray] = None
    length: float = 4.5
    width: float = 1.8
    actor_id: str = ""

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "pos", np.asarray(self.pos, dtype=float).reshape(len(t), 2))
        object.__setattr__(self, "vel", np.asarray(self.vel, dtype=float).reshape(len(t), 2))
        object.__setattr__(self, "yaw", np.asarray(self.yaw, dtype=float).reshape(len(t)))
        if self.acc is None:
            object.__setattr__(self, "acc", np.zeros((len(t), 2)))
        else:
            object.__setattr__(self, "acc", np.asarray(self.acc, dtype=float).reshape(len(t), 2))
        if len(t) > 1 and np.any(np.diff(t) <= 0):
            raise ValueError("trajectory times must be strictly increasing")

    def __len__(self) -> int:
        return len(self.t)

    @classmethod
    def stationary(cls, state: ActorState, times) -> "Trajectory":
        times = np.asarray(times, dtype=float)
        n = len(times)
        return cls(
            times,
            np.tile(state.p, (n, 1)),
            np.zeros((n, 2)),
            np.full(n, state.yaw),
            length=state.length,
            width=state.width,
            actor_id=state.id,
        )

    def state_at(self, t: float, base: ActorState) -> ActorState:
        """The actor state at relative time ``t`` (linearly interpolated)."""
        s = interp(self, np.array([t]))
        return replace(
            base,
            t=base.t + float(t),
            position=tuple(s.pos[0]),
            velocity=tuple(s.vel[0]),
            acceleration=tuple(s.acc[0]),
            yaw=float(s.yaw[0]),
        )

    def positions_at(self, times) -> np.ndarray:
        return interp(self, np.asarray(times, dtype=float)).pos


def interp(tr: Trajectory, times: np.ndarray) -> Trajectory:
    """Linear interpolation of a trajectory; times outside the sampled span
    are clamped to the end samples."""
    times = np.atleast_1d(np.asarray(times, dtype=float))
    t = tr.t
    if len(t) == 1:
        idx = np.zeros(len(times), dtype=int)
        return Trajectory(
            times, tr.pos[idx], tr.vel[idx], tr.yaw[idx], tr.acc[idx], tr.length, tr.width, tr.actor_id
        )
    yaw = np.unwrap(tr.yaw)

    def lin(col):
        return np.interp(times, t, col)

    pos = np.stack([lin(tr.pos[:, 0]), lin(tr.pos[:, 1])], -1)
    vel = np.stack([lin(tr.vel[:, 0]), lin(tr.vel[:, 1])], -1)
    acc = np.stack([lin(tr.acc[:, 0]), lin(tr.acc[:, 1])], -1)
    return Trajectory(times, pos, vel, lin(yaw), acc, tr.length, tr.width, tr.actor_id)


def interp_pair(tr1: Trajectory, tr2: Trajectory, times: np.ndarray) -> tuple[Trajectory, Trajectory]:
    return interp(tr1, times), interp(tr2, times)


def align(tr1: Trajectory, tr2: Trajectory) -> tuple[Trajectory, Trajectory]:
    """Resample both trajectories on the union of their sample times,
    restricted to the common span."""
    if len(tr1.t) == len(tr2.t) and np.array_equal(tr1.t, tr2.t):
        return tr1, tr2
    end = min(tr1.t[-1], tr2.t[-1])
    times = np.union1d(tr1.t, tr2.t)
    times = times[times <= end + 1e-12]
    return interp_pair(tr1, tr2, times)


@dataclass(frozen=True, eq=False)
class TrajectorySet:
    trajectories: tuple[Trajectory, ...]
    weights: Optional[tuple[float, ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "trajectories", tuple(self.trajectories))
        if self.weights is not None:
            w = tuple(float(x) for x in self.weights)
            if len(w) != len(self.trajectories):
                raise ValueError("one weight per trajectory required")
            if any(x < 0 for x in w) or not math.isclose(sum(w), 1.0, rel_tol=0, abs_tol=1e-9):
                raise ValueError("trajectory weights must be non-negative and sum to 1")
            object.__setattr__(self, "weights", w)

    def __len__(self) -> int:
        return len(self.trajectories)

    def __iter__(self):
        return iter(self.trajectories)

    @classmethod
    def of(cls, trajectories: Sequence[Trajectory], weights=None) -> "TrajectorySet":
        return cls(tuple(trajectories), None if weights is None else tuple(weights))
