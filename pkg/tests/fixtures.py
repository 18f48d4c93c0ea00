"""Scenario builders shared by the unit and acceptance tests."""

from __future__ import annotations

import math

import numpy as np

from critmetrics import ActorState, Scenario, Scene
from critmetrics.markov import CellGrid, MarkovChainModel, PointMassDynamics, build_markov_model
from critmetrics.models import ConstantVelocityModel, augmented_ct_polar_step, coordinated_turn_step, simple_car_integrate
from critmetrics.probabilistic import DiscreteControlSampler
from critmetrics.trajectory import TrajectorySet

L = 4.0


def scenario(times, make, **kw) -> Scenario:
    return Scenario(tuple(Scene(float(t), tuple(make(float(t)))) for t in times), **kw)


def linear_ttc_scenario(dt=0.1) -> Scenario:
    """Point follower at 10 m/s toward a stationary point 100 m ahead:
    TTC(t) = 10 - t on [0, 10]."""
    return scenario(
        np.round(np.arange(0, 10 + dt / 2, dt), 10),
        lambda t: [ActorState("1", t, (10 * t, 0), (10, 0)), ActorState("2", t, (100, 0))],
    )


# --- Monte Carlo -------------------------------------------------------------------


def two_choice_fixture():
    """Ego at 10 m/s, stationary obstacle 30 m ahead (bumper gap). The ego
    either keeps its speed (collides at 3 s) or brakes at 8 m/s^2 (stops
    after 6.25 m). Exact collision probability: 1/2."""
    ego = ActorState("ego", 0.0, (0, 0), (10, 0), width=2.0, length=L)
    obstacle = ActorState("obs", 0.0, (30 + L, 0), width=2.0, length=L)
    scene = Scene(0.0, (ego, obstacle))
    samplers = {"ego": DiscreteControlSampler(((0.0, 0.0), (-8.0, 0.0)))}
    return ego, scene, samplers


def enumerate_two_choice(ego, scene, samplers, horizon=5.0):
    """Exact probability by enumerating the sampler's choices with an
    independent 1-D gap check."""
    from oracles import first_gap_closure_1d

    obs = scene.actor("obs")
    choices = samplers["ego"].choices
    hits = [
        first_gap_closure_1d(ego.position[0], ego.speed, al, obs.position[0], 0.0, 0.0, L, horizon) < np.inf
        for al, _ in choices
    ]
    return sum(hits) / len(choices)


# --- multiple hypotheses --------------------------------------------------------------


def smh_fixture(rng, n, m, horizon=5.0, gap=20.0):
    """Same-lane hypotheses: ego speeds and lead speeds drawn from
    {5, 10, ..., 25} with Dirichlet realization probabilities. Closing
    speeds are multiples of 5 m/s, so contacts happen well inside the
    horizon or not at all. Returns (ego set, other set, chi)."""
    from oracles import first_gap_closure_1d

    speeds = np.arange(5.0, 26.0, 5.0)
    ve = rng.choice(speeds, n)
    vo = rng.choice(speeds, m)
    pe = rng.dirichlet(np.ones(n))
    po = rng.dirichlet(np.ones(m))
    cv = ConstantVelocityModel(horizon, 0.05)
    ego = TrajectorySet.of([cv.predict(ActorState("ego", 0.0, (0, 0), (v, 0), width=2.0, length=L)) for v in ve], pe)
    other = TrajectorySet.of([cv.predict(ActorState("o", 0.0, (gap + L, 0), (v, 0), width=2.0, length=L)) for v in vo], po)
    chi = [[first_gap_closure_1d(0, a, 0, gap + L, b, 0, L, horizon) < np.inf for b in vo] for a in ve]
    return ego, other, chi


# --- Markov chains ---------------------------------------------------------------------


def three_cell_chain(rng):
    """Random column-stochastic 3-cell chain plus outside state, with a
    separate random interval-occupancy matrix."""

    def stochastic():
        M = np.zeros((4, 4))
        M[:, :3] = rng.dirichlet(np.ones(4), size=3).T
        M[3, 3] = 1.0
        return M

    A, B = stochastic(), stochastic()
    return MarkovChainModel(None, (0,), A, B), A, B


# --- trajectory criticality index -------------------------------------------------------


def tci_free_road():
    ego = ActorState("ego", 0.0, (0, 0), (15, 0), width=2.0, length=L)
    return ego, Scene(0.0, (ego,))


def tci_obstacle():
    ego = ActorState("ego", 0.0, (0, 0), (15, 0), width=2.0, length=L)
    obstacle = ActorState("obs", 0.0, (30, 0), width=2.0, length=L)
    return ego, Scene(0.0, (ego, obstacle))


# --- trajectory tables -------------------------------------------------------------------


def car_following_csv(n_recordings, seed=0, duration=5.0, dt=0.1) -> str:
    """Trajectory table of ``n_recordings`` two-car recordings: a follower
    closing on a slower or braking leader, with randomized speeds, gaps and
    leader deceleration. Rows are emitted in shuffled order."""
    import csv
    import io

    rng = np.random.default_rng(seed)
    header = (
        "recording_id", "t_s", "actor_id", "x_m", "y_m", "vx_mps", "vy_mps", "ax_mps2", "ay_mps2",
        "heading_rad", "width_m", "length_m", "class", "mass_kg",
    )  # fmt: skip
    rows = []
    times = np.round(np.arange(0.0, duration + dt / 2, dt), 10)
    for r in range(n_recordings):
        v1, v2 = rng.uniform(10, 25), rng.uniform(0, 15)
        gap, a2 = rng.uniform(15, 60), -rng.uniform(0, 3)
        for t in times:
            for aid, x0, v0, a in (("1", 0.0, v1, 0.0), ("2", gap + L, v2, a2)):
                x, v = _clamped(x0, v0, a, t)
                rows.append((f"rec{r:03d}", repr(float(t)), aid, repr(x), "0.0", repr(v), "0.0",
                             repr(a if v > 0 else 0.0), "0.0", "0.0", "2.0", repr(L), "car", "1500"))  # fmt: skip
    order = rng.permutation(len(rows))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for k in order:
        w.writerow(rows[k])
    return buf.getvalue()


def _clamped(x0, v0, a, t):
    if a < 0 and v0 > 0 and t > v0 / -a:
        t = v0 / -a
    return float(x0 + v0 * t + 0.5 * a * t * t), float(max(v0 + a * t, 0.0))


def linear_ttc_csv(dt=0.1) -> str:
    """The linear TTC scenario as a trajectory table."""
    lines = ["recording_id,t_s,actor_id,x_m,y_m,vx_mps,vy_mps,ax_mps2,ay_mps2,heading_rad,width_m,length_m,class"]
    for t in map(float, np.round(np.arange(0, 10 + dt / 2, dt), 10)):
        lines.append(f"lin,{t!r},1,{10 * t!r},0,10,0,0,0,0,2,4,car")
        lines.append(f"lin,{t!r},2,100,0,0,0,0,0,0,2,4,car")
    return "\n".join(lines) + "\n"


# --- model checks -------------------------------------------------------------------------


def circle_end(v, L, phi, t):
    """Exact position of a simple car with fixed steering angle after ``t``."""
    R = L / math.tan(phi)
    psi = v * t / R
    return np.array([R * math.sin(psi), R * (1 - math.cos(psi))])


def rk4_observed_order(steps=(0.4, 0.2, 0.1)):
    L, phi, v, t = 2.8, 0.3, 10.0, 3.0
    exact = circle_end(v, L, phi, t)
    errs = [np.linalg.norm(simple_car_integrate(ActorState("a", 0.0, (0.0, 0.0)), v, phi, t, L, step=h).pos[-1] - exact) for h in steps]
    return min(math.log2(errs[i] / errs[i + 1]) for i in range(len(errs) - 1))


def ct_model_disagreement(n=200, seed=0):
    """Max distance between the Cartesian and polar turn models on random
    matched inputs (the Cartesian rate is clockwise-positive)."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n):
        p = rng.uniform(-50, 50, 2)
        speed, phi = rng.uniform(0.5, 40), rng.uniform(-math.pi, math.pi)
        w, T = rng.uniform(-1.5, 1.5), rng.uniform(0.0, 5.0)
        v = speed * np.array([math.cos(phi), math.sin(phi)])
        a, _ = coordinated_turn_step(p, v, -w, T)
        b = augmented_ct_polar_step(p, speed, phi, w, T)[0]
        worst = max(worst, float(np.linalg.norm(a - b)))
    return worst


def point_mass_chain(seed=0):
    grid = CellGrid((np.linspace(0, 60, 13), np.linspace(0, 20, 5)))
    return build_markov_model(PointMassDynamics(0.0, 20.0), grid, [-4.0, 0.0, 2.0], 0.5, samples=400, seed=seed)


def markov_checks(chain, steps=100):
    """(max column-sum error over all matrices, max mass drift over steps)."""
    col_err = max(
        float(np.max(np.abs(M.sum(axis=0) - 1)))
        for M in [*chain.transitions, *chain.interval_transitions, chain.step_matrix()]
    )
    p = chain.initial([1.0, 10.0])
    points, _ = chain.propagate(p, steps)
    drift = max(abs(float(q.sum()) - 1.0) for q in points)
    return col_err, drift
