import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from critmetrics import CENTER, DEFAULT, ActorState, ConflictArea, Scale, Unit
from critmetrics.maneuvers import brake, kickdown, steer
from critmetrics.models import ConstantAccelerationModel, ConstantVelocityModel, ControlSetModel
from critmetrics.scene_metrics import (
    GaussianPotential,
    MetricError,
    a_lat_req,
    a_lat_req_closed_form,
    a_long_req,
    a_long_req_closed_form,
    a_req,
    a_req_cond,
    ags,
    btn,
    btn_value,
    dce_ttce,
    dst,
    hw,
    jerk,
    msd,
    pf_eval,
    pret,
    psd,
    pttc,
    rss_ds,
    safety_potential,
    sp,
    spret,
    stn_value,
    stop_time,
    ta,
    thw,
    tto,
    ttc,
    ttm,
    ttr,
    wttc,
)
from critmetrics.trajectory import TrajectorySet

from oracles import closest_encounter_2d, first_gap_closure_1d, line_crossing_times, stopping_brake_ttb

CV = ConstantVelocityModel(20.0, 0.01)
CA = ConstantAccelerationModel(20.0, 0.01)
L = 4.0


def car(i, x, v=0.0, a=0.0, y=0.0, width=2.0, length=L, **kw):
    return ActorState(i, 0.0, (x, y), (v, 0.0), (a, 0.0), width=width, length=length, **kw)


def crossing_pair():
    a1 = ActorState("1", 0.0, (0, -40), (0, 10), yaw=math.pi / 2)
    a2 = ActorState("2", 0.0, (-30, 0), (10, 0))
    return a1, a2


# --- TTC / PTTC / TTO ----------------------------------------------------------------


def test_ttc_point_actors_closing():
    assert ttc(car("1", 0, 20), car("2", 100, 10), CV, CENTER).value == pytest.approx(10, abs=1e-6)


def test_ttc_footprints_match_time_stepping_oracle():
    r = ttc(car("1", 0, 20), car("2", 100 + L, 10), CV)
    oracle = first_gap_closure_1d(0, 20, 0, 100 + L, 10, 0, L, 20.0)
    assert r.value == pytest.approx(oracle, abs=2e-3)
    assert (r.unit, r.scale, r.subjects) == (Unit.TIME, Scale.RATIO, ("1", "2"))


def test_ttc_diverging_is_infinite():
    assert ttc(car("1", 0, 10), car("2", 50, 20), CV).value == math.inf


def test_ttc_overlap_now_is_zero():
    assert ttc(car("1", 0, 10), car("2", 2, 0), CV).value == 0


@settings(max_examples=25, deadline=None)
@given(st.floats(1, 20), st.floats(0.5, 10), st.floats(0.5, 10))
def test_ttc_monotone_in_closing_speed(gap, dv, extra):
    m = ConstantVelocityModel(60.0, 0.05)
    slow = ttc(car("1", 0, dv), car("2", gap + L, 0), m).value
    fast = ttc(car("1", 0, dv + extra), car("2", gap + L, 0), m).value
    assert fast <= slow + 1e-9


def test_pttc_decelerating_lead():
    r = pttc(car("1", 0, 20), car("2", 20 + L, 10, -2))
    assert r.value == pytest.approx(-5 + math.sqrt(45), abs=1e-9)
    oracle = first_gap_closure_1d(0, 20, 0, 20 + L, 10, -2, L, 10.0, strict=False)
    assert r.value == pytest.approx(oracle, abs=2e-3)


def test_pttc_no_approach_and_zero_gap():
    assert pttc(car("1", 0, 10), car("2", 30, 20, 1.0)).value == math.inf
    assert pttc(car("1", 0, 10), car("2", L, 5, -1.0)).value == 0


def test_pttc_lead_stops_before_contact():
    # lead stops after 1 s having moved 1 m; follower closes the rest at 2 m/s
    r = pttc(car("1", 0, 2), car("2", 10 + L, 2, -2))
    oracle = first_gap_closure_1d(0, 2, 0, 10 + L, 2, -2, L, 10.0, strict=False)
    assert r.value == pytest.approx(oracle, abs=2e-3)


def test_pttc_zero_lead_acceleration_falls_back():
    r = pttc(car("1", 0, 20), car("2", 100 + L, 10))
    assert r.value == pytest.approx(10)
    assert "constant_velocity_fallback" in r.flags


def test_tto_conflict_area_and_actor_target():
    ca = ConflictArea("zebra", ((30, -5), (35, -5), (35, 5), (30, 5)))
    assert tto(car("1", 0, 10), ca, CV, CENTER).value == pytest.approx(3.0, abs=1e-6)
    assert tto(car("1", 32, 10), ca, CV, CENTER).value == 0
    a1, a2 = car("1", 0, 20), car("2", 60, 5)
    assert tto(a1, a2, CV).value == ttc(a1, a2, CV).value


# --- DCE / TTCE / WTTC ------------------------------------------------------------------


def test_dce_ttce_crossing_paths():
    a1, a2 = crossing_pair()
    d, t = dce_ttce(a1, a2, CV, CENTER)
    assert d.value == pytest.approx(math.sqrt(50), abs=1e-9)
    assert t.value == pytest.approx(3.5, abs=1e-9)
    od, ot = closest_encounter_2d(a1.p, a1.v, a2.p, a2.v, 20.0)
    assert d.value == pytest.approx(od, abs=1e-2)
    assert t.value == pytest.approx(ot, abs=2e-3)


def test_dce_zero_iff_ttce_is_ttc_on_collision():
    a1, a2 = car("1", 0, 20), car("2", 30 + L, 5)
    d, t = dce_ttce(a1, a2, CV)
    assert d.value == 0
    assert t.value == ttc(a1, a2, CV).value


def test_dce_parallel_constant_distance_earliest_tie():
    a1 = ActorState("1", 0.0, (0, 0), (10, 0))
    a2 = ActorState("2", 0.0, (0, 5), (10, 0))
    d, t = dce_ttce(a1, a2, CV, CENTER)
    assert d.value == pytest.approx(5)
    assert t.value == 0


def test_wttc_minimum_over_pairs():
    a1, a2 = car("1", 0, 20), car("2", 40 + L, 10)
    nominal = ttc(a1, a2, CV).value
    sets = (TrajectorySet.of([CV.predict(a1), CA.predict(car("1", 0, 20, 3))]), TrajectorySet.of([CV.predict(a2)]))
    w = wttc(a1, a2, settings=DEFAULT, sets=sets).value
    assert w < nominal


def test_wttc_no_colliding_pair_and_singletons():
    a1, a2 = car("1", 0, 10), car("2", 40 + L, 20)
    assert wttc(a1, a2, ControlSetModel(5.0, 0.1, n_long=2, n_lat=1)).value == math.inf
    b1, b2 = car("1", 0, 20), car("2", 40 + L, 10)
    single = (CV.predict_set(b1), CV.predict_set(b2))
    assert wttc(b1, b2, settings=DEFAULT, sets=single).value == ttc(b1, b2, CV).value


def test_wttc_rejects_empty_sets():
    a1, a2 = car("1", 0, 10), car("2", 40, 20)
    with pytest.raises(MetricError):
        wttc(a1, a2, sets=(TrajectorySet(()), CV.predict_set(a2)))


def test_wttc_bounded_by_ttc_when_nominal_included():
    m = ControlSetModel(10.0, 0.05, n_long=3, n_lat=3, nominal=ConstantVelocityModel(10.0, 0.05))
    a1, a2 = car("1", 0, 15), car("2", 50, 5)
    assert wttc(a1, a2, m).value <= ttc(a1, a2, ConstantVelocityModel(10.0, 0.05)).value


# --- TTM / TTR ------------------------------------------------------------------------------


def test_ttb_latest_braking_point():
    r = ttm(car("1", 0, 20), car("2", 50 + L), CV, brake(8))
    assert r.metric_id == "TTB"
    assert r.value == pytest.approx(1.25, abs=2e-3)
    assert r.value == pytest.approx(stopping_brake_ttb(20, 50, 8), abs=2e-3)


def test_ttb_immediate_braking_exactly_sufficient():
    assert ttm(car("1", 0, 20), car("2", 25 + L), CV, brake(8)).value == 0


def test_ttb_unavoidable():
    r = ttm(car("1", 0, 20), car("2", 20 + L), CV, brake(8))
    assert r.value == -math.inf
    assert "unavoidable" in r.flags


def test_ttm_without_predicted_collision():
    r = ttm(car("1", 0, 5), car("2", 50, 10), CV, brake())
    assert r.value == math.inf
    assert "no_predicted_collision" in r.flags


def test_ttm_lies_in_range():
    a1, a2 = car("1", 0, 20), car("2", 40 + L, 5)
    c = ttc(a1, a2, CV).value
    for m in (brake(), steer("left"), steer("right"), kickdown()):
        v = ttm(a1, a2, CV, m).value
        assert v == -math.inf or 0 <= v <= c


def test_ttr_is_max_and_singleton_equals_ttm():
    a1, a2 = car("1", 0, 20), car("2", 40 + L, 5)
    ms = [brake(), steer("left")]
    ttms = [ttm(a1, a2, CV, m).value for m in ms]
    assert ttr(a1, a2, CV, ms).value == max(ttms)
    assert ttr(a1, a2, CV, [brake()]).value == ttms[0]
    with pytest.raises(MetricError):
        ttr(a1, a2, CV, [])


# --- headway / encroachment ---------------------------------------------------------------


def test_thw_and_hw():
    a1, a2 = car("1", 0, 20), car("2", 50 + L, 10)
    assert thw(a1, a2, CV).value == pytest.approx(2.5, abs=2e-3)
    assert hw(a1, a2).value == pytest.approx(50)
    assert hw(a1, a2, CENTER).value == pytest.approx(54)


def test_thw_coincident_and_stationary():
    assert thw(car("1", 0, 20), car("2", 0, 0), CV, CENTER).value == 0
    assert hw(car("1", 0, 20), car("2", 0, 0), CENTER).value == 0
    assert thw(car("1", 0, 0), car("2", 50, 0), CV).value == math.inf


def test_pret_and_spret_crossing():
    a1, a2 = crossing_pair()
    t1, t2 = line_crossing_times(a1.p, a1.v, a2.p, a2.v)
    assert (t1, t2) == pytest.approx((4, 3))
    assert pret(a1, a2, CV).value == pytest.approx(abs(t1 - t2), abs=1e-9)
    assert spret(a1, a2, CV).value == pytest.approx(abs(t1**2 - t2**2), abs=1e-9)
    assert ta(a1, a2).value == pytest.approx(1.0)


def test_pret_simultaneous_and_parallel():
    a1 = ActorState("1", 0.0, (0, -30), (0, 10), yaw=math.pi / 2)
    a2 = ActorState("2", 0.0, (-30, 0), (10, 0))
    assert pret(a1, a2, CV).value == pytest.approx(0, abs=1e-12)
    b1 = ActorState("1", 0.0, (0, 0), (10, 0))
    b2 = ActorState("2", 0.0, (0, 5), (12, 0))
    assert pret(b1, b2, CV).value == math.inf


# --- stopping distances / gap acceptance -------------------------------------------------------


def test_msd_and_psd():
    area = ConflictArea("c", ((50, -5), (60, -5), (60, 5), (50, 5)))
    a = car("1", 0, 20)
    assert msd(a).value == pytest.approx(25)
    assert psd(a, area, CENTER).value == pytest.approx(2.0)
    assert psd(car("1", 25, 20), area, CENTER).value == pytest.approx(1.0)
    assert psd(car("1", 0, 0), area, CENTER).value == math.inf


def test_msd_quadruples_with_doubled_speed():
    assert msd(car("1", 0, 30)).value == pytest.approx(4 * msd(car("1", 0, 15)).value)


def test_ags_examples():
    a = car("1", 0, 10)
    assert ags(a, None, lambda s_, sc, s: s >= 15).value == pytest.approx(15, abs=1e-3)
    assert ags(a, None, lambda s_, sc, s: True).value == 0
    logistic = lambda s_, sc, s: 1 / (1 + math.exp(-(s - 12)))
    assert ags(a, None, logistic).value == pytest.approx(12, abs=1e-3)
    with pytest.raises(MetricError, match="invalid gap-acceptance model"):
        ags(a, None, lambda s_, sc, s: 100 < s < 200)
    assert ags(a, None, lambda s_, sc, s: False).value == math.inf


# --- required accelerations ------------------------------------------------------------------------


def test_a_long_req_car_following():
    r = a_long_req(car("1", 0, 20), car("2", 50 + L, 10), CV)
    assert r.value == pytest.approx(-1.0, abs=1e-3)
    assert a_long_req_closed_form(20, 10, 0, 50) == -1.0


def test_a_long_req_no_braking_needed():
    assert a_long_req(car("1", 0, 10), car("2", 50, 20), CV).value == 0


def brute_force_a_long_req(v1, x2, v2, a2, lo=-4.0, hi=0.0, da=1e-3):
    """Least-magnitude deceleration whose clamped 1-D motion never
    overlaps the clamped lead (scan on a 1e-3 grid)."""
    for a in np.arange(hi, lo - da / 2, -da):
        if first_gap_closure_1d(0, v1, a, x2, v2, a2, L, 20.0) == math.inf:
            return float(a)
    return -math.inf


def test_a_long_req_stopping_lead_matches_stepping_oracle():
    r = a_long_req(car("1", 0, 20), car("2", 10 + L, 20, -2), CA)
    oracle = brute_force_a_long_req(20, 10 + L, 20, -2, lo=-2.2, hi=-1.5)
    assert r.value == pytest.approx(oracle, abs=2e-3)
    assert r.value == pytest.approx(-400 / 220, abs=1e-3)


def test_a_lat_req_examples():
    assert a_lat_req(car("1", 0, 10), car("2", 50, 20), CV).value == 0
    a1, a2 = car("1", 0, 20), car("2", 50 + L)
    t = ttc(a1, a2, CV).value
    assert a_lat_req(a1, a2, CV).value == pytest.approx(a_lat_req_closed_form(a1, a2, t), abs=1e-3)


def test_a_lat_req_symmetric_head_on():
    a1 = car("1", 0, 10)
    m = ConstantVelocityModel(5.0, 0.01)

    def oncoming(y):
        return ActorState("2", 0.0, (40, y), (-10, 0), yaw=math.pi, width=2.0, length=L)

    centred = a_lat_req(a1, oncoming(0.0), m).value
    assert centred > 0
    # mirror images to the left and right need the same evasive effort
    left, right = a_lat_req(a1, oncoming(0.5), m).value, a_lat_req(a1, oncoming(-0.5), m).value
    assert left == pytest.approx(right, abs=1e-3)
    assert left < centred


def test_a_req_norm_and_bounds():
    a1, a2 = car("1", 0, 20), car("2", 50 + L)
    lo = a_long_req(a1, a2, CV).value
    la = a_lat_req(a1, a2, CV).value
    r = a_req(a1, a2, CV).value
    assert r == pytest.approx(math.hypot(lo, la))
    assert max(abs(lo), la) <= r <= abs(lo) + la
    assert a_req(car("1", 0, 5), car("2", 50, 10), CV).value == 0


def test_a_req_cond_threshold():
    a1, a2 = crossing_pair()
    assert spret(a1, a2, CV).value == pytest.approx(7)
    assert a_req_cond(a1, a2, CV, CENTER).value == 0


def test_dst_examples():
    a1, a2 = car("1", 0, 20), car("2", 50 + L, 10)
    assert dst(a1, a2).value == pytest.approx(1.0)
    assert dst(a1, a2, 2.0).value == pytest.approx(100 / 60)
    assert dst(car("1", 0, 10), car("2", 50, 10)).value == 0
    r = dst(a1, car("2", 10 + L, 10), 2.0)
    assert r.value == math.inf and "safety_distance_violated" in r.flags


def test_dst_matches_required_deceleration():
    a1, a2 = car("1", 0, 20), car("2", 50 + L, 10)
    assert dst(a1, a2).value == pytest.approx(abs(a_long_req(a1, a2, CV).value), abs=1e-3)


def test_btn_stn_arithmetic():
    assert btn_value(-1.0, -8.0) == 0.125
    assert stn_value(2.0, 5.0) == 0.4
    assert btn_value(0.0, -8.0) == 0
    with pytest.raises(MetricError, match="invalid capability envelope"):
        btn_value(-1.0, 0.0)
    with pytest.raises(MetricError):
        stn_value(1.0, 0.0)


def test_btn_from_metric_and_brake_consistency():
    a1, a2 = car("1", 0, 20), car("2", 50 + L, 10)
    assert btn(a1, a2, CV).value == pytest.approx(0.125, abs=1e-3)
    # BTN >= 1 exactly when braking at capability cannot help
    for gap in (10, 20, 30, 60):
        b = btn(a1, car("2", gap + L), CV).value
        t = ttm(a1, car("2", gap + L), CV, brake()).value
        assert (b >= 1) == (t == -math.inf)


# --- jerk / potentials / RSS -------------------------------------------------------------------------


def test_jerk_decomposition():
    lat, lon = jerk(ActorState("1", 0, (0, 0), jerk=(3, 0)))
    assert (lat.value, lon.value) == (0, 3)
    lat, lon = jerk(ActorState("1", 0, (0, 0), jerk=(0, 0)))
    assert (lat.value, lon.value) == (0, 0)
    lat, lon = jerk(ActorState("1", 0, (0, 0), jerk=(1, 1), yaw=math.pi / 4))
    assert lon.value == pytest.approx(math.sqrt(2))
    assert lat.value == pytest.approx(0, abs=1e-12)
    with pytest.raises(MetricError):
        jerk(ActorState("1", 0, (0, 0)))


def test_safety_potential_examples():
    assert safety_potential(6, 8, 5, 2) == pytest.approx(math.sqrt(10))
    assert safety_potential(3, 4, 5, 2) == 0
    assert safety_potential(6, 8, 5, math.inf) == 3
    assert safety_potential(6, 8, math.inf) == 0


def test_sp_uses_stop_times():
    a1, a2 = car("1", 0, 16), car("2", 40 + L, 0)
    assert stop_time(a1, brake(8)) == pytest.approx(2.0, abs=1e-6)
    t_int = ttc(a1, a2, CV).value
    r = sp(a1, a2, CV, (brake(8), brake(8)))
    assert r.value == pytest.approx(max(2.0 - t_int, 0.0), abs=1e-6)


def test_stop_time_rejects_non_stopping_procedure():
    with pytest.raises(MetricError):
        stop_time(car("1", 0, 10), kickdown(), t_max=5.0)


def test_rss_indicator_examples():
    a1 = ActorState("1", 0, (0, 0), (10, 0))
    near = ActorState("2", 0, (8, 1.5), (10, 0))
    far = ActorState("3", 0, (12, 1.5), (10, 0))
    assert rss_ds(a1, [near], (2.0, 10.0), CENTER).value == 1
    assert rss_ds(a1, [far], (2.0, 10.0), CENTER).value == 0
    assert rss_ds(a1, [], (2.0, 10.0)).value == 0
    assert rss_ds(a1, [near]).scale == Scale.NOMINAL


def test_potential_field_examples():
    a = car("1", 3, 0, y=4)
    assert pf_eval(a, None, []).value == 0
    assert pf_eval(a, None, [lambda s, sc: 1.5, lambda s, sc: 2.5]).value == 4.0
    g = GaussianPotential((0.0, 0.0), sigma=2.0, amplitude=3.0)
    assert pf_eval(a, None, [g]).value == pytest.approx(3 * math.exp(-25 / 8))
