"""Command line entry point: one subcommand per pipeline stage, plus ``all``.

Every stage reads the previous stage's files from ``--out`` and writes its
own there, so stages can be rerun individually.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

from .charts import emit_charts
from .flows import (
    ClusterParams,
    EndpointAssignment,
    FunctionalZone,
    aggregate_flows,
    classify_flows,
    cluster_endpoints,
    flows_from_json,
    flows_to_json,
    top_flows,
)
from .geo import GeoPoint
from .ingestion import read_observations, write_observations
from .linkage import FilterConfig, read_links_csv, run_filter_pipeline, write_links_csv
from .mapgen import MapConfig, render_flow_overview, render_map
from .metrics import DEFAULT_FARE, aggregate, compare_flow, emit_report
from .providers import ProviderConfig, make_provider
from .router import (
    NoMixedOptions,
    RouterConfig,
    compute_route_options,
    label_options,
    options_from_json,
    options_to_json,
)

logger = logging.getLogger("urbanflow")

OBSERVATIONS = "observations.csv"
INGEST_SUMMARY = "ingest.json"
LINKS = "links.csv"
STAGE_COUNTS = "stage_counts.json"
ZONES = "zones.json"
ASSIGNMENT = "assignment.csv"
FLOWS = "flows.json"
TOP_FLOWS = "top_flows.json"
ROUTES = "routes"
REPORT = "report"
CHARTS = "charts"
MAPS = "maps"

STAGES = ("ingest", "link", "cluster", "flows", "route", "report", "map")


class StageError(Exception):
    pass


@dataclass
class PipelineConfig:
    input: Optional[str] = None
    out: str = "out"
    filters: FilterConfig = field(default_factory=FilterConfig)
    cluster: ClusterParams = field(default_factory=ClusterParams)
    router: RouterConfig = field(default_factory=RouterConfig)
    provider: ProviderConfig = field(default_factory=ProviderConfig)
    top_k: int = 7
    jobs: int = 1
    continue_on_error: bool = False
    map: MapConfig = field(default_factory=MapConfig)

    @property
    def out_dir(self) -> Path:
        return Path(self.out)


# option name -> (flag, type); JSON config keys use the option name
OPTIONS = {
    "input": ("--input", str),
    "out": ("--out", str),
    "min_distance_m": ("--min-distance-m", float),
    "min_duration_ms": ("--min-duration-ms", int),
    "speed_min_kmh": ("--speed-min-kmh", float),
    "speed_max_kmh": ("--speed-max-kmh", float),
    "tz_offset_min": ("--tz-offset-min", int),
    "eps_m": ("--eps-m", float),
    "min_pts": ("--min-pts", int),
    "top_k": ("--top-k", int),
    "congestion_ratio": ("--congestion-ratio", float),
    "walk_max_m": ("--walk-max-m", float),
    "fare": ("--fare", float),
    "provider": ("--provider", str),
    "seed": ("--seed", int),
    "jobs": ("--jobs", int),
    "rate_limit": ("--rate-limit", float),
    "cache_dir": ("--cache-dir", str),
    "map_lat": ("--map-lat", float),
    "map_lon": ("--map-lon", float),
    "map_zoom": ("--map-zoom", int),
}


def build_config(values: dict) -> PipelineConfig:
    v = values.get
    default_map = MapConfig()
    filters = FilterConfig(
        min_distance=v("min_distance_m", 100.0),
        min_duration=v("min_duration_ms", 1000),
        min_speed=v("speed_min_kmh", 2.0),
        max_speed=v("speed_max_kmh", 100.0),
        day_timezone_offset=v("tz_offset_min", 0),
    )
    return PipelineConfig(
        input=v("input"),
        out=v("out", "out"),
        filters=filters,
        cluster=ClusterParams(eps=v("eps_m", 500.0), min_pts=v("min_pts", 10)),
        router=RouterConfig(congestion_ratio=v("congestion_ratio", 1.5),
                            walk_max=v("walk_max_m", 2000.0), fare=v("fare", DEFAULT_FARE)),
        provider=ProviderConfig(kind=v("provider", "offline"), seed=v("seed", 0),
                                rate_limit=v("rate_limit", 5.0), cache_dir=v("cache_dir")),
        top_k=v("top_k", 7),
        jobs=v("jobs", 1),
        continue_on_error=bool(v("continue_on_error", False)),
        map=MapConfig(center=GeoPoint(v("map_lat", default_map.center.lat),
                                      v("map_lon", default_map.center.lon)),
                      zoom=v("map_zoom", default_map.zoom)),
    )


def _require(path: Path) -> Path:
    if not path.exists():
        raise StageError(f"missing input file: {path}")
    return path


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2) + "\n", encoding="utf-8")


# stages


def cmd_ingest(cfg: PipelineConfig) -> dict:
    if not cfg.input:
        raise StageError("ingest needs --input")
    ds = read_observations(_require(Path(cfg.input)))
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    write_observations(cfg.out_dir / OBSERVATIONS, ds.records)
    summary = {"records": len(ds.records), "rejected": ds.rejected_count}
    _write_json(cfg.out_dir / INGEST_SUMMARY, summary)
    return summary


def cmd_link(cfg: PipelineConfig) -> dict:
    src = cfg.out_dir / OBSERVATIONS
    if not src.exists() and cfg.input:
        src = Path(cfg.input)
    ds = read_observations(_require(src))
    links, counts = run_filter_pipeline(ds, cfg.filters)
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    write_links_csv(cfg.out_dir / LINKS, links)
    _write_json(cfg.out_dir / STAGE_COUNTS, counts.as_dict())
    return counts.as_dict()


def cmd_cluster(cfg: PipelineConfig) -> dict:
    links = read_links_csv(_require(cfg.out_dir / LINKS))
    if not links:
        raise StageError("no links survived filtering; nothing to cluster")
    zones, assignment = cluster_endpoints(links, cfg.cluster)
    _write_json(cfg.out_dir / ZONES, [z.as_dict() for z in zones])
    with open(cfg.out_dir / ASSIGNMENT, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["origin_zone", "dest_zone"])
        w.writerows(zip(assignment.origin, assignment.dest))
    noise = sum(1 for z in assignment.origin + assignment.dest if z < 0)
    return {"zones": len(zones), "noise_endpoints": noise}


def _read_assignment(path: Path) -> EndpointAssignment:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [(int(r["origin_zone"]), int(r["dest_zone"])) for r in csv.DictReader(fh)]
    return EndpointAssignment(tuple(r[0] for r in rows), tuple(r[1] for r in rows))


def cmd_flows(cfg: PipelineConfig) -> dict:
    links = read_links_csv(_require(cfg.out_dir / LINKS))
    zones = [FunctionalZone.from_dict(d) for d in
             json.loads(_require(cfg.out_dir / ZONES).read_text(encoding="utf-8"))]
    assignment = _read_assignment(_require(cfg.out_dir / ASSIGNMENT))
    flows = classify_flows(aggregate_flows(links, assignment, zones))
    chosen = top_flows(flows, cfg.top_k) if flows else []
    (cfg.out_dir / FLOWS).write_text(flows_to_json(flows), encoding="utf-8")
    (cfg.out_dir / TOP_FLOWS).write_text(flows_to_json(chosen), encoding="utf-8")
    return {"flows": len(flows), "trend": sum(f.classification == "Trend" for f in flows),
            "selected": [f.flow_id for f in chosen]}


def _label(options, fare: float):
    # warning filters are process-global, so this runs on the main thread only
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", NoMixedOptions)
        labeled = label_options(options, fare)
    notes = [str(w.message) for w in caught if issubclass(w.category, NoMixedOptions)]
    return labeled, notes


def cmd_route(cfg: PipelineConfig) -> dict:
    flows = flows_from_json(_require(cfg.out_dir / TOP_FLOWS).read_text(encoding="utf-8"))
    provider = make_provider(cfg.provider)
    route_dir = cfg.out_dir / ROUTES
    route_dir.mkdir(parents=True, exist_ok=True)

    def work(flow):
        try:
            return compute_route_options(flow.representative_origin, flow.representative_dest,
                                         provider, cfg.router), None
        except Exception as exc:  # reported per flow
            return None, exc

    with ThreadPoolExecutor(max_workers=max(1, cfg.jobs)) as pool:
        results = list(pool.map(work, flows))

    summary = {}
    for flow, (res, err) in zip(flows, results):
        if err is not None:
            if not cfg.continue_on_error:
                raise StageError(f"routing {flow.flow_id} failed: {err}") from err
            logger.warning("routing %s failed: %s", flow.flow_id, err)
            summary[flow.flow_id] = {"error": str(err)}
            continue
        options, notes = _label(res, cfg.router.fare)
        (route_dir / f"{flow.flow_id}.json").write_text(options_to_json(options), encoding="utf-8")
        summary[flow.flow_id] = {"options": len(options),
                                 "labels": [o.label for o in options if o.label != "Other"]}
        if notes:
            summary[flow.flow_id]["notes"] = notes
    return summary


def _routed_flows(cfg: PipelineConfig):
    flows = flows_from_json(_require(cfg.out_dir / TOP_FLOWS).read_text(encoding="utf-8"))
    out = []
    for flow in flows:
        path = cfg.out_dir / ROUTES / f"{flow.flow_id}.json"
        if not path.exists():
            if cfg.continue_on_error:
                continue
            raise StageError(f"missing input file: {path}")
        out.append((flow, options_from_json(path.read_text(encoding="utf-8"))))
    return out


def cmd_report(cfg: PipelineConfig) -> dict:
    routed = _routed_flows(cfg)
    if not routed:
        raise StageError("no routed flows to report")
    comparisons = [compare_flow(flow.flow_id, options) for flow, options in routed]
    report = aggregate(comparisons)
    emit_report(report, comparisons, cfg.out_dir / REPORT)
    emit_charts(report, cfg.out_dir / REPORT / CHARTS)
    return {label: (m.as_dict() if m else None) for label, m in report.means.items()}


def cmd_map(cfg: PipelineConfig) -> dict:
    routed = _routed_flows(cfg)
    map_dir = cfg.out_dir / MAPS
    map_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for flow, options in routed:
        for opt in options:
            if opt.label == "Other":
                continue
            name = f"{flow.flow_id}_{opt.label}.html"
            doc = render_map(opt, cfg.map, title=f"{flow.flow_id} {opt.label}")
            (map_dir / name).write_text(doc, encoding="utf-8")
            written.append(name)
    flows = flows_from_json(_require(cfg.out_dir / TOP_FLOWS).read_text(encoding="utf-8"))
    (map_dir / "flows.html").write_text(render_flow_overview(flows, cfg.map), encoding="utf-8")
    return {"maps": len(written)}


COMMANDS = {
    "ingest": cmd_ingest,
    "link": cmd_link,
    "cluster": cmd_cluster,
    "flows": cmd_flows,
    "route": cmd_route,
    "report": cmd_report,
    "map": cmd_map,
}


def cmd_all(cfg: PipelineConfig) -> dict:
    return {name: COMMANDS[name](cfg) for name in STAGES}


def cmd_synth(cfg: PipelineConfig, n_users: int = 240, days: int = 5) -> dict:
    from .synthetic import make_observations

    if not cfg.input:
        raise StageError("synth needs --input naming the file to write")
    records = make_observations(cfg.provider.seed, n_users=n_users, days=days)
    Path(cfg.input).parent.mkdir(parents=True, exist_ok=True)
    write_observations(cfg.input, records)
    return {"records": len(records), "path": cfg.input}


COMMANDS["all"] = cmd_all


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="urbanflow", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in (*STAGES, "all", "synth"):
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON file of option values; flags win")
        for key, (flag, typ) in OPTIONS.items():
            kwargs = {"dest": key, "type": typ, "default": None}
            if key == "provider":
                kwargs["choices"] = ("offline", "http")
            p.add_argument(flag, **kwargs)
        p.add_argument("--continue-on-error", dest="continue_on_error",
                       action="store_true", default=None)
        if name == "synth":
            p.add_argument("--users", type=int, default=240)
            p.add_argument("--days", type=int, default=5)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    values = {}
    try:
        if args.config:
            values.update(json.loads(Path(args.config).read_text(encoding="utf-8")))
        values.update({k: v for k, v in vars(args).items()
                       if v is not None and (k in OPTIONS or k == "continue_on_error")})
        unknown = set(values) - set(OPTIONS) - {"continue_on_error"}
        if unknown:
            raise StageError(f"unknown config keys: {sorted(unknown)}")
        cfg = build_config(values)
        if args.command == "synth":
            result = cmd_synth(cfg, args.users, args.days)
        else:
            result = COMMANDS[args.command](cfg)
    except (StageError, FileNotFoundError, ValueError) as exc:
        print(f"urbanflow {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"urbanflow {args.command}: failed: {exc}", file=sys.stderr)
        return 1
    print(json.dumps(result, indent=2))
    return 0


if __name__ == "__main__":
    sys.exit(main())
