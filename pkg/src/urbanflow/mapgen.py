"""Standalone HTML maps of route options, one colored path per step."""

from __future__ import annotations

import html
import json
from dataclasses import dataclass, field
from typing import Dict, Iterable, Mapping, Sequence

from .geo import GeoPoint, PolylineError, decode_polyline
from .providers.base import TravelMode

LEAFLET_CSS = "https://unpkg.com/leaflet@1.9.4/dist/leaflet.css"
LEAFLET_JS = "https://unpkg.com/leaflet@1.9.4/dist/leaflet.js"
TILE_URL = "https://{s}.tile.openstreetmap.org/{z}/{x}/{y}.png"

DEFAULT_COLORS = {
    TravelMode.TRANSIT: "red",
    TravelMode.WALK: "green",
    TravelMode.RIDE_HAIL: "blue",
    TravelMode.DRIVE: "gray",
}


class PolylineDecodeError(ValueError):
    def __init__(self, step_index: int, cause: Exception):
        super().__init__(f"step {step_index}: {cause}")
        self.step_index = step_index


@dataclass(frozen=True)
class MapConfig:
    center: GeoPoint = GeoPoint(-23.551615, -46.633611)
    zoom: int = 12
    edge_width: int = 3
    mode_colors: Mapping[TravelMode, str] = field(default_factory=lambda: dict(DEFAULT_COLORS))

    def __post_init__(self):
        if not 1 <= self.zoom <= 20:
            raise ValueError("zoom must be within [1, 20]")
        if self.edge_width < 1:
            raise ValueError("edge_width must be at least 1")
        missing = [m for m in TravelMode if m not in self.mode_colors]
        if missing:
            raise ValueError(f"no color for modes {missing}")


def color_for_mode(mode: TravelMode, cfg: MapConfig = MapConfig()) -> str:
    return cfg.mode_colors[TravelMode(mode)]


def _coords(points: Iterable[GeoPoint]) -> str:
    return "[" + ",".join(f"[{p.lat:.5f},{p.lon:.5f}]" for p in points) + "]"


_PAGE = """<!DOCTYPE html>
<html>
<head>
<meta charset="utf-8">
<title>{title}</title>
<link rel="stylesheet" href="{css}">
<script src="{js}"></script>
<style>html, body, #map {{ height: 100%; margin: 0; }}</style>
</head>
<body>
<div id="map"></div>
<script>
var map = L.map("map").setView([{lat:.6f}, {lon:.6f}], {zoom});
L.tileLayer("{tiles}", {{maxZoom: 19, attribution: "&copy; OpenStreetMap contributors"}}).addTo(map);
{paths}</script>
</body>
</html>
"""


def _page(title: str, path_lines: Sequence[str], cfg: MapConfig) -> str:
    return _PAGE.format(
        title=html.escape(title), css=LEAFLET_CSS, js=LEAFLET_JS, tiles=TILE_URL,
        lat=cfg.center.lat, lon=cfg.center.lon, zoom=cfg.zoom,
        paths="".join(line + "\n" for line in path_lines),
    )


def _path_line(points, color: str, width: int, tooltip: str) -> str:
    return (f'L.polyline({_coords(points)}, {{color: {json.dumps(color)}, '
            f'weight: {width}}}).bindTooltip({json.dumps(tooltip)}).addTo(map);')


def render_map(route, cfg: MapConfig = MapConfig(), title: str = "route") -> str:
    """HTML document drawing every step's decoded polyline in its mode color."""
    lines = []
    for i, step in enumerate(route.steps):
        try:
            points = decode_polyline(step.polyline)
        except PolylineError as exc:
            raise PolylineDecodeError(i, exc) from exc
        if not points:
            raise PolylineDecodeError(i, ValueError("empty polyline"))
        mode = TravelMode(step.mode)
        lines.append(_path_line(points, color_for_mode(mode, cfg), cfg.edge_width,
                                f"{i + 1}: {mode.value}"))
    return _page(title, lines, cfg)


def render_flow_overview(flows, cfg: MapConfig = MapConfig(),
                         colors: Dict[str, str] = None) -> str:
    """Straight zone-to-zone lines, thicker for busier flows."""
    colors = colors or {"Trend": "darkred", "Secondary": "orange"}
    top = max((f.trip_count for f in flows), default=1)
    lines = []
    for f in flows:
        width = cfg.edge_width + int(5 * f.trip_count / top + 0.5)
        lines.append(_path_line(
            [f.representative_origin, f.representative_dest],
            colors.get(f.classification, "black"), width,
            f"{f.flow_id}: {f.trip_count} trips ({f.classification})",
        ))
    return _page("flows", lines, cfg)
