import json
import math
import warnings
import xml.etree.ElementTree as ET

import pytest

from urbanflow.charts import PLOT_H, bar_chart_svg, emit_charts
from urbanflow.geo import GeoPoint
from urbanflow.metrics import (
    CSV_COLUMNS,
    LABELS,
    EmptyInput,
    FlowComparison,
    OptionMetrics,
    aggregate,
    compare_flow,
    compute_metrics,
    emit_report,
    money,
)
from urbanflow.providers import RouteStep, TransitItinerary, TravelMode
from urbanflow.router import NoMixedOptions, compute_route_options, label_options
from urbanflow.synthetic import HOTSPOT_NODES

SVG = "{http://www.w3.org/2000/svg}"
PAIRS = [(0, 2), (2, 0), (1, 2), (3, 4), (4, 1), (5, 0), (3, 2)]


def transit_itinerary(boardings):
    steps = [RouteStep(TravelMode.WALK, GeoPoint(0, 0), GeoPoint(0, 0.001), 80, 111)]
    for i in range(boardings):
        a, b = GeoPoint(0, 0.001 + 0.01 * i), GeoPoint(0, 0.001 + 0.01 * (i + 1))
        steps.append(RouteStep(TravelMode.TRANSIT, a, b, 200, 1100, 300))
    return TransitItinerary(tuple(steps), 300)


@pytest.mark.parametrize("b", [1, 2, 3])
def test_transit_price_per_boarding(b):
    m = compute_metrics(transit_itinerary(b))
    assert m.price == b * 4.30
    assert money(m.price) == f"{b * 4.30:.2f}"
    assert m.walk_distance == 111
    assert m.wait == 300 * b


def test_metrics_sum_steps():
    steps = (RouteStep(TravelMode.WALK, GeoPoint(0, 0), GeoPoint(0, 1), 60, 100),
             RouteStep(TravelMode.RIDE_HAIL, GeoPoint(0, 1), GeoPoint(0, 2), 300, 2000, 200, 17.5),
             RouteStep(TravelMode.TRANSIT, GeoPoint(0, 2), GeoPoint(0, 3), 400, 3000, 300))
    m = compute_metrics(TransitItinerary(steps, 0), fare=5.0)
    assert m == OptionMetrics(22.5, 760, 500, 5100, 100)


def test_money_rounds_half_up():
    assert money(2.675) == "2.68"
    assert money(12.899999999999999) == "12.90"
    assert money(0.005) == "0.01"


@pytest.fixture(scope="module")
def seven_flows(city):
    comps = []
    for i, (a, b) in enumerate(PAIRS):
        o, d = city.node_point(HOTSPOT_NODES[a]), city.node_point(HOTSPOT_NODES[b])
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", NoMixedOptions)
            opts = label_options(compute_route_options(o, d, city))
        comps.append((f"f{i}", opts))
    return comps


def test_pure_ride_never_walks(seven_flows):
    for _, opts in seven_flows:
        ride = [o for o in opts if o.label == "RideHail"]
        assert len(ride) == 1 and ride[0].metrics.walk_distance == 0


def test_aggregate_matches_recomputation(seven_flows):
    report = aggregate([compare_flow(fid, opts) for fid, opts in seven_flows])
    assert report.flow_count == 7
    for label in LABELS:
        rows = [next(o for o in opts if o.label == label) for _, opts in seven_flows
                if any(o.label == label for o in opts)]
        if not rows:
            assert report.means[label] is None
            continue
        assert report.label_counts[label] == len(rows)
        # recompute from the raw steps rather than the stored metrics
        for field, pick in (("price", None), ("duration", "duration"), ("wait", "wait"),
                            ("distance", "distance")):
            if pick is None:
                vals = [sum(4.30 if s.mode is TravelMode.TRANSIT else s.price for s in r.steps)
                        for r in rows]
            else:
                vals = [math.fsum(getattr(s, pick) for s in r.steps) for r in rows]
            assert getattr(report.means[label], field) == pytest.approx(
                math.fsum(vals) / len(vals), rel=1e-9)


def test_aggregate_empty():
    with pytest.raises(EmptyInput):
        aggregate([])


def test_emit_report(tmp_path, seven_flows):
    comps = [compare_flow(fid, opts) for fid, opts in seven_flows]
    report = aggregate(comps)
    emit_report(report, comps, tmp_path)
    lines = (tmp_path / "report.csv").read_text().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 1 + sum(len(c.present()) for c in comps)
    doc = json.loads((tmp_path / "report.json").read_text())
    assert doc["flow_count"] == 7
    assert set(doc["means"]) == set(LABELS)


def parse_bars(svg_text):
    root = ET.fromstring(svg_text)
    return {r.get("data-label"): (float(r.get("data-value")), float(r.get("height")), float(r.get("y")))
            for r in root.iter(SVG + "rect") if r.get("class") == "bar"}


def test_bar_heights_proportional():
    values = {"Transit": 8.6, "RideHail": 21.5, "Hybrid1": 12.0, "Hybrid2": 0.0}
    bars = parse_bars(bar_chart_svg("Price", "BRL", values))
    assert list(bars) == list(LABELS)
    top = max(values.values())
    for label, (v, h, y) in bars.items():
        assert v == values[label]
        assert h == pytest.approx(v / top * PLOT_H, abs=1e-3)
    bottoms = {round(y + h, 3) for _, h, y in bars.values()}
    assert len(bottoms) == 1


def test_bar_chart_missing_label_and_zeros():
    bars = parse_bars(bar_chart_svg("x", "u", {"Transit": 0.0, "RideHail": 0.0}))
    assert set(bars) == {"Transit", "RideHail"}
    assert all(h == 0 for _, h, _ in bars.values())


def test_emit_charts(tmp_path, seven_flows):
    report = aggregate([compare_flow(fid, opts) for fid, opts in seven_flows])
    paths = emit_charts(report, tmp_path)
    assert sorted(p.name for p in paths) == ["distance.svg", "duration.svg", "price.svg",
                                             "wait.svg", "walk_distance.svg"]
    bars = parse_bars((tmp_path / "duration.svg").read_text())
    assert bars["Transit"][0] == pytest.approx(report.means["Transit"].duration / 60)


def test_emit_charts_empty(tmp_path):
    empty = aggregate([FlowComparison("f", {l: None for l in LABELS})])
    with pytest.raises(EmptyInput):
        emit_charts(empty, tmp_path)


def test_header_only_report_and_byte_stability(tmp_path, seven_flows):
    empty = [FlowComparison("f", {l: None for l in LABELS})]
    emit_report(aggregate(empty), empty, tmp_path / "e")
    assert (tmp_path / "e" / "report.csv").read_text().splitlines() == [",".join(CSV_COLUMNS)]
    comps = [compare_flow(fid, opts) for fid, opts in seven_flows]
    for name in ("a", "b"):
        emit_report(aggregate(comps), comps, tmp_path / name)
        emit_charts(aggregate(comps), tmp_path / name)
    for f in ("report.csv", "report.json", "price.svg", "wait.svg"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
    bars = parse_bars((tmp_path / "a" / "price.svg").read_text())
    assert list(bars) == list(LABELS)
