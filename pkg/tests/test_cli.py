import json
from pathlib import Path

import pytest

from oracles import naive_filter
from urbanflow.cli import build_config, main
from urbanflow.ingestion import read_observations
from urbanflow.linkage import read_links_csv

STAGES = ["ingest", "link", "cluster", "flows", "route", "report", "map"]


def tree(root):
    root = Path(root)
    return {str(p.relative_to(root)): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


@pytest.fixture(scope="module")
def full_run(fixture_csv, tmp_path_factory):
    out = tmp_path_factory.mktemp("all")
    assert main(["all", "--input", str(fixture_csv), "--out", str(out), "--seed", "7"]) == 0
    return out


def test_link_matches_oracle(fixture_csv, tmp_path, capsys):
    assert main(["link", "--input", str(fixture_csv), "--out", str(tmp_path)]) == 0
    counts = json.loads((tmp_path / "stage_counts.json").read_text())
    assert json.loads(capsys.readouterr().out) == counts
    want = naive_filter(read_observations(fixture_csv))
    got = read_links_csv(tmp_path / "links.csv")
    assert counts["after_speed_band"] == len(want) == len(got)
    assert [(l.uid, l.origin_time, l.dest_time) for l in got] == [w[:3] for w in want]
    assert list(counts) == ["initial_records", "linked", "after_same_day", "after_min_distance",
                            "after_min_duration", "after_speed_band"]


def test_all_produces_expected_artifacts(full_run):
    names = set(tree(full_run))
    for f in ["observations.csv", "stage_counts.json", "links.csv", "zones.json",
              "assignment.csv", "flows.json", "top_flows.json", "report/report.csv",
              "report/report.json", "report/charts/price.svg", "maps/flows.html"]:
        assert f in names
    top = json.loads((full_run / "top_flows.json").read_text())
    assert len(top) == 7
    for flow in top:
        fid = f"z{flow['origin_zone']}-z{flow['dest_zone']}"
        assert f"routes/{fid}.json" in names
        assert f"maps/{fid}_Transit.html" in names


def test_all_equals_individual_stages(fixture_csv, full_run, tmp_path):
    for stage in STAGES:
        assert main([stage, "--input", str(fixture_csv), "--out", str(tmp_path), "--seed", "7"]) == 0
    assert tree(tmp_path) == tree(full_run)


def test_jobs_do_not_change_output(full_run, tmp_path):
    for name in ["links.csv", "zones.json", "assignment.csv", "flows.json", "top_flows.json"]:
        (tmp_path / name).write_bytes((full_run / name).read_bytes())
    assert main(["route", "--out", str(tmp_path), "--seed", "7", "--jobs", "4"]) == 0
    assert tree(tmp_path / "routes") == tree(full_run / "routes")


def test_route_without_flows_names_missing_file(tmp_path, capsys):
    assert main(["route", "--out", str(tmp_path)]) != 0
    assert "top_flows.json" in capsys.readouterr().err


def test_cluster_without_links(tmp_path, capsys):
    assert main(["cluster", "--out", str(tmp_path)]) != 0
    assert "links.csv" in capsys.readouterr().err


def test_bad_config_file(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text('{"eps_meters": 3}')
    assert main(["link", "--config", str(cfg), "--out", str(tmp_path)]) != 0
    assert "eps_meters" in capsys.readouterr().err
    cfg.write_text("{not json")
    assert main(["link", "--config", str(cfg), "--out", str(tmp_path)]) != 0


def test_config_file_with_flag_override(fixture_csv, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"input": str(fixture_csv), "out": str(tmp_path / "o"),
                               "min_distance_m": 5000, "speed_max_kmh": 80}))
    assert main(["link", "--config", str(cfg), "--min-distance-m", "300"]) == 0
    links = read_links_csv(tmp_path / "o" / "links.csv")
    assert min(l.distance for l in links) >= 300
    assert min(l.distance for l in links) < 5000
    assert max(l.speed for l in links) <= 80


def test_build_config_defaults():
    cfg = build_config({})
    assert cfg.filters.min_distance == 100 and cfg.cluster.eps == 500
    assert cfg.router.fare == 4.30 and cfg.top_k == 7 and cfg.provider.kind == "offline"


def test_invalid_parameter_is_reported(fixture_csv, tmp_path, capsys):
    assert main(["link", "--input", str(fixture_csv), "--out", str(tmp_path),
                 "--speed-min-kmh", "200"]) != 0
    assert "min_speed" in capsys.readouterr().err


def test_continue_on_error(full_run, tmp_path, capsys):
    top = json.loads((full_run / "top_flows.json").read_text())
    # send one flow far outside the synthetic city
    top[0]["representative_dest"] = {"lat": 10.0, "lon": 10.0}
    (tmp_path / "top_flows.json").write_text(json.dumps(top))
    assert main(["route", "--out", str(tmp_path)]) != 0
    capsys.readouterr()
    assert main(["route", "--out", str(tmp_path), "--continue-on-error"]) == 0
    summary = json.loads(capsys.readouterr().out)
    bad = f"z{top[0]['origin_zone']}-z{top[0]['dest_zone']}"
    assert "error" in summary[bad]
    assert len(list((tmp_path / "routes").iterdir())) == len(top) - 1
    assert main(["report", "--out", str(tmp_path), "--continue-on-error"]) == 0


def test_synth(tmp_path):
    p = tmp_path / "s.csv"
    assert main(["synth", "--input", str(p), "--seed", "3", "--users", "20", "--days", "2"]) == 0
    assert len(read_observations(p)) > 40


def test_map_flags(full_run, tmp_path):
    for name in ["top_flows.json"]:
        (tmp_path / name).write_bytes((full_run / name).read_bytes())
    (tmp_path / "routes").mkdir()
    for p in (full_run / "routes").iterdir():
        (tmp_path / "routes" / p.name).write_bytes(p.read_bytes())
    assert main(["map", "--out", str(tmp_path), "--map-lat", "-22.9", "--map-lon", "-43.2",
                 "--map-zoom", "11"]) == 0
    doc = (tmp_path / "maps" / "flows.html").read_text()
    assert "setView([-22.900000, -43.200000], 11)" in doc
