import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import filter_dataset, naive_filter
from urbanflow.geo import GeoPoint
from urbanflow.ingestion import Dataset, ObservationRecord
from urbanflow.linkage import (
    FilterConfig,
    StageCounts,
    TripLink,
    filter_min_distance,
    filter_min_duration,
    filter_same_day,
    filter_speed_band,
    link_by_user,
    local_day,
    read_links_csv,
    run_filter_pipeline,
    write_links_csv,
)

P = GeoPoint(-23.55, -46.63)
CFG = FilterConfig()


def link(distance=500.0, duration=60_000, speed=None, o_ts=1_000_000, uid="u"):
    if speed is None:
        speed = distance / 1000 / (duration / 3_600_000)
    return TripLink(uid, P, o_ts, P, o_ts + duration, distance, duration, speed)


def ds(*rows):
    return Dataset(tuple(ObservationRecord(u, GeoPoint(la, lo), t) for u, la, lo, t in rows), "<t>")


def test_filter_config_validation():
    with pytest.raises(ValueError):
        FilterConfig(min_speed=5, max_speed=5)
    with pytest.raises(ValueError):
        FilterConfig(min_distance=0)


def test_links_connect_adjacent_posts_only():
    d = ds(("a", 0, 0, 3000), ("a", 0, 0.01, 1000), ("b", 1, 1, 5), ("a", 0, 0.02, 2000))
    links = link_by_user(d)
    assert [(l.uid, l.origin_time, l.dest_time) for l in links] == [("a", 1000, 2000), ("a", 2000, 3000)]
    assert all(l.duration > 0 for l in links)


def test_single_post_user_has_no_links():
    assert link_by_user(ds(("a", 0, 0, 1))) == []


def test_simultaneous_posts():
    l = TripLink.between("u", P, 5, GeoPoint(-23.56, -46.63), 5)
    assert l.duration == 0 and l.speed == math.inf
    assert filter_min_duration([l], CFG) == []


def test_same_day_boundaries():
    day = 86_400_000
    assert filter_same_day([link(o_ts=day - 60_000, duration=59_999)], CFG)
    assert not filter_same_day([link(o_ts=day - 60_000, duration=60_000)], CFG)
    # three hours west of UTC moves midnight to 03:00Z
    west = FilterConfig(day_timezone_offset=-180)
    assert filter_same_day([link(o_ts=day + 3_600_000, duration=60_000)], CFG)
    assert not filter_same_day([link(o_ts=day + 3_600_000, duration=3 * 3_600_000)], west)
    assert local_day(day - 1, 0) == 0 and local_day(day, 0) == 1


def test_distance_boundary():
    assert filter_min_distance([link(distance=100.0)], CFG)
    assert not filter_min_distance([link(distance=99.999)], CFG)


def test_duration_boundary():
    assert filter_min_duration([link(duration=1000)], CFG)
    assert not filter_min_duration([link(duration=999)], CFG)


def test_speed_band_boundaries():
    assert filter_speed_band([link(speed=2.0)], CFG)
    assert not filter_speed_band([link(speed=1.99)], CFG)
    assert filter_speed_band([link(speed=100.0)], CFG)
    assert not filter_speed_band([link(speed=100.01)], CFG)


def test_empty_dataset():
    links, counts = run_filter_pipeline(Dataset((), "<empty>"))
    assert links == []
    assert counts == StageCounts()
    assert counts.is_monotone()


def _key(l):
    return (l.uid, l.origin_time, l.dest_time, l.origin_point, l.dest_point)


def test_pipeline_matches_oracle():
    d = filter_dataset(3, 4000)
    links, counts = run_filter_pipeline(d)
    assert [_key(l) for l in links] == naive_filter(d)
    assert counts.is_monotone()
    assert counts.initial_records == 4000
    assert counts.after_speed_band == len(links)


def test_pipeline_matches_oracle_with_offset():
    d = filter_dataset(4, 3000)
    cfg = FilterConfig(day_timezone_offset=-180, min_distance=250, max_speed=60)
    links, _ = run_filter_pipeline(d, cfg)
    assert [_key(l) for l in links] == naive_filter(d, 250, 1000, 2.0, 60, -180)


def test_filters_commute():
    # final output does not depend on the order the predicates run in
    d = filter_dataset(5, 2000)
    linked = link_by_user(d)
    fs = [filter_same_day, filter_min_distance, filter_min_duration, filter_speed_band]
    a = linked
    for f in fs:
        a = f(a, CFG)
    b = linked
    for f in reversed(fs):
        b = f(b, CFG)
    assert a == b


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.sampled_from("abc"), st.floats(-23.6, -23.5), st.floats(-46.7, -46.6),
                          st.integers(1, 3 * 86_400_000)), max_size=60))
def test_pipeline_properties(rows):
    d = ds(*rows)
    links, counts = run_filter_pipeline(d)
    assert counts.is_monotone()
    assert counts.linked <= counts.initial_records
    assert [_key(l) for l in links] == naive_filter(d)
    for l in links:
        assert l.distance >= 100 and l.duration >= 1000 and 2 <= l.speed <= 100


def test_links_csv_roundtrip(tmp_path):
    d = filter_dataset(6, 500)
    links, _ = run_filter_pipeline(d)
    p = tmp_path / "links.csv"
    write_links_csv(p, links)
    assert read_links_csv(p) == links
    assert p.read_text().splitlines()[0] == \
        "uid,o_lat,o_lon,o_ts,d_lat,d_lon,d_ts,distance_m,duration_ms,speed_kmh"
