import io
import math

import numpy as np
import pytest

from critmetrics import pipeline
from critmetrics.pipeline import DataError, FilterTarget, merge_intervals

from fixtures import car_following_csv, linear_ttc_csv

HEADER = "recording_id,t_s,actor_id,x_m,y_m,vx_mps,vy_mps,ax_mps2,ay_mps2,heading_rad,width_m,length_m,class"


def parse(text, **kw):
    return pipeline.parse_trajectories(io.StringIO(text), **kw)


def table(*rows):
    return HEADER + "\n" + "\n".join(rows) + "\n"


THREE = table(*[f"r,{t},{a},{x + 10 * t},0,10,0,0,0,0,2,4,car" for t in (0.0, 0.1, 0.2) for a, x in (("a", 0), ("b", 30))])

CENTER = {"distance_mode": "center", "horizon": 10.0, "step": 0.01}


# --- parsing ---------------------------------------------------------------------------


def test_two_actor_three_sample_file():
    (sc,) = parse(THREE)
    assert len(sc.scenes) == 3
    assert [s.t for s in sc.scenes] == [0.0, 0.1, 0.2]
    assert {a.id for a in sc.scenes[0].actors} == {"a", "b"}
    assert sc.recording_id == "r"


def test_header_only_gives_no_scenarios():
    assert parse(HEADER + "\n") == []


def test_row_order_is_irrelevant():
    text = car_following_csv(3, seed=4)
    head, *rows = text.strip().split("\n")
    sorted_text = "\n".join([head] + sorted(rows)) + "\n"
    assert parse(text) == parse(sorted_text)


def test_recordings_are_grouped_and_mass_is_optional():
    text = table(
        "x,0,a,0,0,1,0,0,0,0,2,4,car", "x,1,a,1,0,1,0,0,0,0,2,4,car",
        "y,0,b,0,0,1,0,0,0,0,2,4,pedestrian", "y,1,b,1,0,1,0,0,0,0,2,4,pedestrian",
    )  # fmt: skip
    scs = parse(text)
    assert [s.recording_id for s in scs] == ["x", "y"]
    assert scs[1].scenes[0].actors[0].actor_class.value == "pedestrian"
    assert scs[0].scenes[0].actors[0].mass is None


def test_gaps_in_presence_are_allowed():
    text = table(
        "r,0,a,0,0,1,0,0,0,0,2,4,car", "r,0,b,9,0,1,0,0,0,0,2,4,car",
        "r,1,a,1,0,1,0,0,0,0,2,4,car",
        "r,2,a,2,0,1,0,0,0,0,2,4,car", "r,2,b,11,0,1,0,0,0,0,2,4,car",
    )  # fmt: skip
    (sc,) = parse(text)
    assert [len(s.actors) for s in sc.scenes] == [2, 1, 2]


def test_missing_column_is_named():
    with pytest.raises(DataError, match="heading_rad"):
        parse(THREE.replace("heading_rad", "psi"))


def test_non_finite_value_names_the_line():
    bad = THREE.split("\n")
    bad[3] = bad[3].replace(",0,10,0", ",nan,10,0", 1)
    with pytest.raises(DataError, match="line 4"):
        parse("\n".join(bad))


def test_unparseable_number_names_the_line():
    bad = THREE.split("\n")
    bad[2] = bad[2].replace(",10,0,", ",ten,0,", 1)
    with pytest.raises(DataError, match="line 3"):
        parse("\n".join(bad))


def test_repeated_timestamp_of_an_actor_is_rejected():
    with pytest.raises(DataError, match="line"):
        parse(THREE + "r,0.1,a,5,0,10,0,0,0,0,2,4,car\n")


def test_jerk_is_derived_from_acceleration():
    rows = [f"r,{t},a,0,0,0,0,{2 * t},{-t},0,2,4,car" for t in (0.0, 0.5, 1.0, 1.5)]
    (sc,) = parse(table(*rows))
    for s in sc.scenes:
        assert s.actors[0].jerk == pytest.approx((2.0, -1.0))


# --- configuration ---------------------------------------------------------------------


@pytest.mark.parametrize(
    "doc",
    [
        {"metrics": ["NOPE"]},
        {"model": {"kind": "teleport"}},
        {"metrics": [{"id": "TET", "params": {"tau": -1}}]},
        {"metrics": [{"id": "TET", "aggregate": ["min"]}]},
        {"metrics": [{"id": "TTC", "aggregate": ["mode"]}]},
        {"distance_mode": "nearest"},
        {"step": 0.0},
        {"filter": {"targets": [{"metric": "TTC", "value": 3, "direction": "sideways"}]}},
    ],
)
def test_invalid_configs_are_rejected(doc):
    with pytest.raises(DataError):
        pipeline.load_config(doc)


def test_seed_override():
    cfg = pipeline.load_config({"seed": 3})
    assert cfg.with_seed(None).seed == 3 and cfg.with_seed(9).seed == 9


# --- compute -----------------------------------------------------------------------------


def test_linear_ttc_and_headway_at_every_sample():
    cfg = pipeline.load_config(dict(CENTER, metrics=["TTC", "THW"]))
    rows = pipeline.compute(cfg, parse(linear_ttc_csv()))
    fwd = [r for r in rows if r.subjects == ("1", "2")]
    assert len(fwd) == 2 * 101
    for r in fwd:
        assert not r.error
        assert r.value == pytest.approx(10 - r.t, abs=1e-3)
    back_ttc = [r.value for r in rows if r.subjects == ("2", "1") and r.metric == "TTC"]
    assert back_ttc == [r.value for r in fwd if r.metric == "TTC"]  # both actors are predicted
    back = [r for r in rows if r.subjects == ("2", "1") and r.metric == "THW"]
    # the stationary actor never reaches the follower, until they coincide at t = 10
    assert all(r.value == math.inf for r in back[:-1]) and back[-1].value == 0.0
    out = io.StringIO()
    pipeline.write_results(back[:1], out)
    assert out.getvalue().splitlines()[1].split(",")[4] == "inf"


def test_rows_are_sorted_by_time_then_metric():
    cfg = pipeline.load_config(dict(CENTER, metrics=["THW", "TTC"]))
    rows = pipeline.compute(cfg, parse(linear_ttc_csv(dt=1.0)))
    keys = [(r.t, r.metric, r.subjects) for r in rows]
    assert keys == sorted(keys)


def test_empty_scenario_list():
    cfg = pipeline.load_config({"metrics": ["TTC"]})
    assert pipeline.compute(cfg, []) == []


def test_erroring_metric_yields_error_rows_only_for_itself():
    cfg = pipeline.load_config(dict(CENTER, metrics=["PSD", "TTC"]))
    rows = pipeline.compute(cfg, parse(linear_ttc_csv(dt=1.0)))
    psd = [r for r in rows if r.metric == "PSD"]
    ttc = [r for r in rows if r.metric == "TTC"]
    assert psd and all(r.error and r.value is None for r in psd)
    assert ttc and not any(r.error for r in ttc)


def test_scenario_metrics_and_aggregates_are_one_row_per_subject():
    cfg = pipeline.load_config(
        dict(CENTER, metrics=[{"id": "TET", "params": {"tau": 3}}, {"id": "TTC", "aggregate": ["min", "integral"]}])
    )
    rows = [r for r in pipeline.compute(cfg, parse(linear_ttc_csv())) if r.t is None]
    by = {(r.metric, r.subjects): r for r in rows}
    assert by[("TET", ("1", "2"))].value == pytest.approx(3.0, abs=1e-2)
    assert by[("TTC:min", ("1", "2"))].value == pytest.approx(0.0, abs=1e-3)
    assert by[("TTC:integral", ("1", "2"))].value == pytest.approx(50.0, abs=1e-2)


# --- filter --------------------------------------------------------------------------------


def test_filter_linear_ttc():
    cfg = pipeline.load_config(dict(CENTER, filter={"targets": [{"metric": "TTC", "value": 3}]}))
    ((rid, a, b),) = pipeline.filter_scenarios(cfg, parse(linear_ttc_csv()))
    assert rid == "lin"
    assert a == pytest.approx(7.0, abs=0.1) and b == 10.0


def test_filter_never_critical():
    cfg = pipeline.load_config(dict(CENTER, filter={"targets": [{"metric": "TTC", "value": -1}]}))
    assert pipeline.filter_scenarios(cfg, parse(linear_ttc_csv(dt=1.0))) == []


def test_two_targets_are_merged():
    cfg = pipeline.load_config(
        dict(CENTER, filter={"targets": [{"metric": "TTC", "value": 3}, {"metric": "HW", "value": 60}]})
    )
    # HW = 100 - 10 t is at most 60 from t = 4 on
    ((_, a, b),) = pipeline.filter_scenarios(cfg, parse(linear_ttc_csv()))
    assert a == pytest.approx(4.0, abs=1e-9) and b == 10.0


def test_above_direction_and_margins():
    cfg = pipeline.load_config(
        dict(CENTER, filter={"targets": [{"metric": "HW", "value": 80, "direction": "above"}], "margin_post": 0.5})
    )
    ((_, a, b),) = pipeline.filter_scenarios(cfg, parse(linear_ttc_csv()))
    assert a == 0.0 and b == pytest.approx(2.5, abs=1e-9)


def test_merge_intervals():
    assert merge_intervals([(3, 6), (2, 4)], 0, 10) == [(2, 6)]
    assert merge_intervals([(0, 1), (5, 6)], 0, 10, pre=1, post=1) == [(0, 2), (4, 7)]
    assert merge_intervals([(0, 1), (2, 3)], 0, 10, post=1) == [(0, 4)]
    assert merge_intervals([(9, 10)], 0, 10, post=5) == [(9, 10)]


def test_filter_intervals_are_disjoint_sorted_and_in_range():
    cfg = pipeline.load_config(
        {"step": 0.05, "horizon": 6.0, "filter": {"targets": [{"metric": "TTC", "value": 3}], "margin_pre": 0.3}}
    )
    scs = parse(car_following_csv(6, seed=2, duration=3.0, dt=0.2))
    ivs = pipeline.filter_scenarios(cfg, scs)
    assert ivs
    for sc in scs:
        mine = [(a, b) for rid, a, b in ivs if rid == sc.recording_id]
        for a, b in mine:
            assert sc.scenes[0].t <= a <= b <= sc.scenes[-1].t
        for (_, b0), (a1, _) in zip(mine, mine[1:]):
            assert b0 < a1


def test_streaming_filter_requires_time_order():
    cfg = pipeline.load_config(dict(CENTER, filter={"targets": [{"metric": "TTC", "value": 3}]}))
    (sc,) = parse(linear_ttc_csv(dt=1.0))
    f = pipeline.StreamingFilter(cfg)
    f.feed(sc.scenes[1])
    with pytest.raises(DataError):
        f.feed(sc.scenes[0])


def test_filter_needs_targets_and_scene_metrics():
    with pytest.raises(DataError):
        pipeline.StreamingFilter(pipeline.load_config({}))
    with pytest.raises(DataError):
        FilterTarget("TET", 1.0)


# --- simulate ------------------------------------------------------------------------------


SIM = {
    "model": {"kind": "constant_acceleration", "horizon": 2.0, "step": 0.1},
    "recording_id": "sim",
    "actors": [
        {"id": "a", "position": [0, 0], "velocity": [10, 1], "acceleration": [-1, 0.5]},
        {"id": "b", "position": [40, 3], "velocity": [-5, 0], "class": "bicycle", "width": 0.6, "length": 1.8},
    ],
}


def test_simulate_round_trip():
    (sc,) = pipeline.simulate(SIM)
    buf = io.StringIO()
    pipeline.write_trajectories([sc], buf)
    (back,) = parse(buf.getvalue())
    assert back.recording_id == "sim" and len(back.scenes) == len(sc.scenes) == 21
    for s0, s1 in zip(sc.scenes, back.scenes):
        assert s1.t == pytest.approx(s0.t, abs=1e-9)
        for a0, a1 in zip(s0.actors, s1.actors):
            assert a0.id == a1.id and a0.actor_class == a1.actor_class
            np.testing.assert_allclose(a1.position, a0.position, atol=1e-9)
            np.testing.assert_allclose(a1.velocity, a0.velocity, atol=1e-9)
            np.testing.assert_allclose(a1.acceleration, a0.acceleration, atol=1e-9)
            assert a1.yaw == pytest.approx(a0.yaw, abs=1e-9)


def test_simulate_constant_acceleration_kinematics():
    (sc,) = pipeline.simulate(SIM)
    a = sc.scenes[-1].actor("a")
    np.testing.assert_allclose(a.position, (10 * 2 - 0.5 * 4, 2 + 0.5 * 0.5 * 4), atol=1e-9)


def test_simulate_rejects_bad_documents():
    with pytest.raises(DataError):
        pipeline.simulate({"actors": []})
    with pytest.raises(DataError):
        pipeline.simulate(dict(SIM, model={"kind": "warp"}))
