import math

import numpy as np
import pytest

from critmetrics import ActorState, OccupancyRaster, Scene
from critmetrics.tci import TCIParams, TCIWeights, build_problem, objective, tci

from fixtures import tci_free_road, tci_obstacle
from oracles import lattice_minimum

R = TCIParams().mu_max * TCIParams().g


def test_free_road_is_exactly_zero():
    ego, scene = tci_free_road()
    r = tci(ego, scene, 3.0)
    assert r.value == 0.0
    assert not r.flags


def test_zero_controls_cost_nothing_on_free_road():
    ego, scene = tci_free_road()
    prob = build_problem(ego, scene, 3.0, TCIWeights(), TCIParams())
    assert objective(prob, np.zeros((prob.n, 2))) == 0.0


def test_obstacle_ahead_is_critical_and_close_to_lattice_optimum():
    ego, scene = tci_obstacle()
    prob = build_problem(ego, scene, 1.5, TCIWeights(), TCIParams())
    grid = np.linspace(-R, R, 5)
    lattice = lattice_minimum(lambda u: objective(prob, u), prob.n, grid, grid, R)
    value = tci(ego, scene, 1.5).value
    assert 0 < value < math.inf
    # continuous descent may beat a coarse lattice but must not lose to it
    assert value <= lattice * 1.05


def test_doubling_weights_doubles_the_lattice_optimum():
    ego, scene = tci_obstacle()
    grid = np.linspace(-R, R, 5)
    base = build_problem(ego, scene, 1.5, TCIWeights(), TCIParams())
    double = build_problem(ego, scene, 1.5, TCIWeights().scaled(2.0), TCIParams())
    lo = lattice_minimum(lambda u: objective(base, u), base.n, grid, grid, R)
    hi = lattice_minimum(lambda u: objective(double, u), double.n, grid, grid, R)
    assert hi == pytest.approx(2 * lo, rel=1e-12)


def test_infeasible_controls_and_collisions_are_infinite():
    ego, scene = tci_obstacle()
    prob = build_problem(ego, scene, 1.5, TCIWeights(), TCIParams())
    assert objective(prob, np.full((prob.n, 2), R)) == math.inf  # outside the friction circle
    ego_fast = ActorState("ego", 0.0, (0, 0), (40, 0), width=2.0, length=4.0)
    prob_fast = build_problem(ego_fast, Scene(0.0, (ego_fast, scene.actor("obs"))), 1.5, TCIWeights(), TCIParams())
    assert objective(prob_fast, np.zeros((prob_fast.n, 2))) == math.inf  # drives into the obstacle


def test_start_off_drivable_area():
    ego = ActorState("ego", 0.0, (50, 50), (10, 0))
    raster = OccupancyRaster.from_array((0, 0), 1.0, [[True] * 10] * 10)
    r = tci(ego, Scene(0.0, (ego,), drivable_area=raster))
    assert r.value == math.inf and "off_drivable_area" in r.flags


def test_weights_must_be_non_negative():
    with pytest.raises(ValueError):
        TCIWeights(w_long=-1.0)
