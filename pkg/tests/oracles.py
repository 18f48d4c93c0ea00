"""Brute-force reference implementations used as test oracles.

Nothing here imports the library's metric code: every oracle re-derives
its answer by dense time stepping, enumeration or plain linear algebra.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

DT = 1e-3


def clamped_motion_1d(x0, v0, a, t):
    """Position/speed along a line under constant acceleration, halting at
    zero speed (no reversing)."""
    t = np.asarray(t, dtype=float)
    if a < 0 and v0 > 0:
        ts = v0 / -a
        te = np.minimum(t, ts)
    elif a < 0 and v0 <= 0:
        te = np.zeros_like(t)
    else:
        te = t
    return x0 + v0 * te + 0.5 * a * te**2, np.maximum(v0 + a * te, 0.0) if a < 0 else v0 + a * te


def first_gap_closure_1d(x1, v1, a1, x2, v2, a2, half_lengths, horizon, dt=DT, strict=True):
    """First sampled time (step ``dt``) at which the bumper gap of two
    same-lane actors closes (< 0 when ``strict``, <= 0 otherwise); inf if
    it never does. Follower 1 behind leader 2."""
    t = np.arange(0.0, horizon + dt / 2, dt)
    p1, _ = clamped_motion_1d(x1, v1, a1, t)
    p2, _ = clamped_motion_1d(x2, v2, a2, t)
    gap = (p2 - p1) - half_lengths
    hit = np.nonzero(gap < 0 if strict else gap <= 0)[0]
    return float(t[hit[0]]) if len(hit) else math.inf


def closest_encounter_2d(p1, v1, p2, v2, horizon, dt=DT):
    """(min distance, earliest time attaining it) of two constant-velocity
    points sampled every ``dt``."""
    t = np.arange(0.0, horizon + dt / 2, dt)[:, None]
    d = np.linalg.norm((np.asarray(p1) + np.asarray(v1) * t) - (np.asarray(p2) + np.asarray(v2) * t), axis=1)
    k = int(np.argmin(d))
    return float(d[k]), float(t[k, 0])


def line_crossing_times(p1, v1, p2, v2):
    """Arrival times of two constant-velocity points at the intersection of
    their (ray) paths by solving p1 + v1 s = p2 + v2 u; inf if parallel or
    the crossing lies behind either actor."""
    A = np.array([[v1[0], -v2[0]], [v1[1], -v2[1]]], dtype=float)
    if abs(np.linalg.det(A)) < 1e-12:
        return math.inf, math.inf
    s, u = np.linalg.solve(A, np.asarray(p2, dtype=float) - np.asarray(p1, dtype=float))
    if s < 0 or u < 0:
        return math.inf, math.inf
    return float(s), float(u)


def stopping_brake_ttb(v, gap, decel, dt=DT):
    """Latest braking start (sampled) from which a vehicle at speed ``v``
    stops within ``gap`` of a stationary obstacle."""
    best = -math.inf
    for s in np.arange(0.0, gap / v + dt, dt):
        if v * s + v * v / (2 * decel) <= gap + 1e-12:
            best = float(s)
    return best


def enumerate_collision_probability(p_ego, p_other, chi):
    """Plain double sum over hypothesis pairs."""
    total = 0.0
    for i, pi in enumerate(p_ego):
        for j, pj in enumerate(p_other):
            if chi[i][j]:
                total += pi * pj
    return total


def srs_dense(A, B, p0, steps, frac_per_step, remove=True):
    """Collision mass of a Markov chain evaluated with explicit dense
    matrices: per step, occupancy B p is weighted with the per-state
    collision fraction f, and (optionally) each source state's colliding
    share B^T f leaves the chain before the step."""
    p = np.array(p0, dtype=float)
    total = 0.0
    for k in range(steps):
        f = np.asarray(frac_per_step[k], dtype=float)
        total += float(f @ (B @ p))
        if remove:
            p = np.diag(1.0 - B.T @ f) @ p
        p = A @ p
    return min(max(total, 0.0), 1.0)


def lattice_minimum(objective, n_steps, values_long, values_lat, radius):
    """Exhaustive minimum of ``objective(u)`` over piecewise-constant
    controls drawn from a per-step lattice inside the friction circle."""
    per_step = [(al, at) for al in values_long for at in values_lat if al * al + at * at <= radius * radius * (1 + 1e-12)]
    best = math.inf
    for combo in itertools.product(per_step, repeat=n_steps):
        f = objective(np.array(combo, dtype=float))
        best = min(best, f)
    return best


def trapezoid_threshold_integrals(t, ttc, tau):
    """(TET, TIT) by a fine Riemann sum of the threshold indicator."""
    t = np.asarray(t, dtype=float)
    ttc = np.asarray(ttc, dtype=float)
    dt = np.diff(t)
    mid = 0.5 * (ttc[:-1] + ttc[1:])
    below = (mid <= tau) & np.isfinite(mid)
    return float(np.sum(dt[below])), float(np.sum((tau - mid[below]) * dt[below]))
