"""Markov-chain abstraction of an actor's motion on a product grid of
state cells, with transition probabilities estimated as volume fractions
of sampled reachable sets.

The state vector's first axis is the position along a known path; further
axes (typically speed) are free. One extra absorbing state collects mass
that leaves the grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

Dynamics = Callable[[np.ndarray, float, np.ndarray], np.ndarray]


class MarkovError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class CellGrid:
    """Product grid: one array of strictly increasing edges per axis."""

    edges: tuple[np.ndarray, ...]

    def __post_init__(self):
        edges = tuple(np.asarray(e, dtype=float) for e in self.edges)
        for e in edges:
            if e.ndim != 1 or len(e) < 2 or np.any(np.diff(e) <= 0):
                raise MarkovError("grid edges must be strictly increasing with at least two entries")
        object.__setattr__(self, "edges", edges)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(e) - 1 for e in self.edges)

    @property
    def n_cells(self) -> int:
        return int(np.prod(self.shape))

    def cell_bounds(self, index: int) -> tuple[np.ndarray, np.ndarray]:
        idx = np.unravel_index(index, self.shape)
        lo = np.array([e[i] for e, i in zip(self.edges, idx)])
        hi = np.array([e[i + 1] for e, i in zip(self.edges, idx)])
        return lo, hi

    def locate(self, x: np.ndarray) -> np.ndarray:
        """Flat cell index per row of ``x``; ``n_cells`` when outside."""
        x = np.atleast_2d(x)
        out = np.full(len(x), self.n_cells, dtype=int)
        idx = []
        inside = np.ones(len(x), dtype=bool)
        for d, e in enumerate(self.edges):
            i = np.searchsorted(e, x[:, d], side="right") - 1
            inside &= (i >= 0) & (i < len(e) - 1)
            idx.append(np.clip(i, 0, len(e) - 2))
        out[inside] = np.ravel_multi_index(tuple(i[inside] for i in idx), self.shape)
        return out

    def path_index(self, index: int) -> int:
        """Index of the cell along the position (first) axis."""
        return int(np.unravel_index(index, self.shape)[0])


@dataclass(frozen=True)
class ShiftDynamics:
    """Every axis moves at the input speed: ``x' = x + u T``. In one
    dimension this is constant-velocity motion along the path with the
    speed as input."""

    def __call__(self, x: np.ndarray, u: float, T) -> np.ndarray:
        T = np.asarray(T, dtype=float).reshape(-1, 1)
        return x + u * T


@dataclass(frozen=True)
class PointMassDynamics:
    """Path position and speed under constant acceleration input; the
    speed stays within [v_min, v_max] (no reversing by default)."""

    v_min: float = 0.0
    v_max: float = math.inf

    def __call__(self, x: np.ndarray, u: float, T) -> np.ndarray:
        s, v = x[:, 0], x[:, 1]
        T = np.broadcast_to(np.asarray(T, dtype=float), s.shape)
        v_new = v + u * T
        # time at which the speed limit is hit, if any
        if u < 0:
            t_hit = np.where(v > self.v_min, (self.v_min - v) / u, 0.0)
        elif u > 0:
            t_hit = np.where(v < self.v_max, (self.v_max - v) / u, 0.0)
        else:
            t_hit = np.full_like(v, np.inf)
        tc = np.minimum(T, t_hit)
        v_c = v + u * tc
        s_new = s + v * tc + 0.5 * u * tc**2 + v_c * (T - tc)
        return np.stack([s_new, np.clip(v_new, self.v_min, self.v_max)], -1)


@dataclass(frozen=True, eq=False)
class MarkovChainModel:
    """Column-stochastic transitions ``Phi[alpha][j, i] = P(j | i, alpha)``
    over the grid cells plus the absorbing outside state (last index)."""

    grid: Optional[CellGrid]
    inputs: tuple
    transitions: np.ndarray  # (n_inputs, n + 1, n + 1) for one step T
    interval_transitions: Optional[np.ndarray] = None  # occupancy over [0, T]
    policy: Optional[np.ndarray] = None
    T: float = 1.0
    n_path_cells: Optional[int] = None
    path_of_state: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        P = np.asarray(self.transitions, dtype=float)
        if P.ndim == 2:
            P = P[None]
        object.__setattr__(self, "transitions", P)
        _check_stochastic(P)
        if self.interval_transitions is not None:
            Q = np.asarray(self.interval_transitions, dtype=float)
            if Q.ndim == 2:
                Q = Q[None]
            if Q.shape != P.shape:
                raise MarkovError("interval transitions must match the step transitions in shape")
            _check_stochastic(Q)
            object.__setattr__(self, "interval_transitions", Q)
        q = np.full(len(P), 1.0 / len(P)) if self.policy is None else np.asarray(self.policy, dtype=float)
        if len(q) != len(P) or np.any(q < 0) or abs(q.sum() - 1) > 1e-9:
            raise MarkovError("input policy must be a distribution over the inputs")
        object.__setattr__(self, "policy", q)
        if self.path_of_state is None:
            n = P.shape[1] - 1
            if self.grid is not None:
                pos = np.array([self.grid.path_index(i) for i in range(n)])
                object.__setattr__(self, "n_path_cells", self.grid.shape[0])
            else:
                pos = np.arange(n)
                object.__setattr__(self, "n_path_cells", n)
            object.__setattr__(self, "path_of_state", pos)
        elif self.n_path_cells is None:
            object.__setattr__(self, "n_path_cells", int(np.max(self.path_of_state)) + 1)

    @property
    def n_states(self) -> int:
        """Number of states including the absorbing outside state."""
        return self.transitions.shape[1]

    def step_matrix(self) -> np.ndarray:
        return np.tensordot(self.policy, self.transitions, axes=1)

    def interval_matrix(self) -> Optional[np.ndarray]:
        if self.interval_transitions is None:
            return None
        return np.tensordot(self.policy, self.interval_transitions, axes=1)

    def initial(self, x) -> np.ndarray:
        """Unit mass on the cell containing state ``x``."""
        if self.grid is None:
            raise MarkovError("model has no grid to locate states in")
        p = np.zeros(self.n_states)
        p[self.grid.locate(np.asarray(x, dtype=float))[0]] = 1.0
        return p

    def propagate(self, p0, steps: int) -> tuple[list[np.ndarray], list[np.ndarray]]:
        """Point distributions at steps 0..steps and interval occupancy
        distributions for each [t_k, t_k+1] (point distribution at t_k+1
        when no interval transitions are available)."""
        p = np.asarray(p0, dtype=float)
        if p.shape != (self.n_states,) or abs(p.sum() - 1) > 1e-9 or np.any(p < 0):
            raise MarkovError("initial distribution must be a distribution over the chain's states")
        A, B = self.step_matrix(), self.interval_matrix()
        points, intervals = [p], []
        for _ in range(steps):
            intervals.append(B @ p if B is not None else A @ p)
            p = A @ p
            points.append(p)
        return points, intervals

    def path_marginal(self, p: np.ndarray) -> np.ndarray:
        """Probability per path cell (outside state dropped)."""
        return np.bincount(self.path_of_state, weights=p[:-1], minlength=self.n_path_cells)


def _check_stochastic(P: np.ndarray):
    if P.ndim != 3 or P.shape[1] != P.shape[2]:
        raise MarkovError("transition matrices must be square")
    if np.any(P < -1e-12) or np.any(np.abs(P.sum(axis=1) - 1) > 1e-9):
        raise MarkovError("transition matrices must be column stochastic (non-negative, columns sum to 1)")


def _cell_samples(lo, hi, n, sampling, rng):
    d = len(lo)
    if sampling == "lattice":
        k = max(1, int(round(n ** (1.0 / d))))
        axes = [lo[i] + (np.arange(k) + 0.5) / k * (hi[i] - lo[i]) for i in range(d)]
        return np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, d)
    if sampling == "monte_carlo":
        return lo + rng.uniform(size=(n, d)) * (hi - lo)
    raise MarkovError(f"unknown sampling scheme {sampling!r}")


def build_markov_model(
    dynamics: Dynamics,
    grid: CellGrid,
    inputs: Sequence[float],
    T: float,
    samples: int = 10_000,
    sampling: str = "monte_carlo",
    seed: int = 0,
    interval_substeps: int = 10,
    policy: Optional[Sequence[float]] = None,
) -> MarkovChainModel:
    """Estimate ``Phi^alpha(T)`` (and the occupancy over ``[0, T]``) by
    sampling each source cell uniformly and propagating the samples."""
    if T <= 0:
        raise MarkovError("time step must be positive")
    n = grid.n_cells
    inputs = tuple(inputs)
    P = np.zeros((len(inputs), n + 1, n + 1))
    Q = np.zeros_like(P)
    P[:, n, n] = Q[:, n, n] = 1.0
    rng = np.random.default_rng(seed)
    taus = (np.arange(interval_substeps) + 0.5) / interval_substeps * T
    for i in range(n):
        lo, hi = grid.cell_bounds(i)
        if np.any(hi - lo <= 0):
            raise MarkovError(f"degenerate partition: cell {i} has zero volume")
        x = _cell_samples(lo, hi, samples, sampling, rng)
        if len(x) == 0:
            raise MarkovError(f"degenerate partition: no samples in cell {i}")
        for a, u in enumerate(inputs):
            y = dynamics(x, u, np.full(len(x), T))
            P[a, :, i] = np.bincount(grid.locate(y), minlength=n + 1) / len(x)
            xs = np.repeat(x, len(taus), axis=0)
            ts = np.tile(taus, len(x))
            Q[a, :, i] = np.bincount(grid.locate(dynamics(xs, u, ts)), minlength=n + 1) / len(xs)
    return MarkovChainModel(grid, inputs, P, Q, None if policy is None else np.asarray(policy), T)
