"""Deterministic offline provider over a synthetic grid city.

The city is a square grid of nodes joined by two-way road edges. Every
edge carries a congestion multiplier drawn once from a seeded generator.
Transit runs along every ``line_spacing``-th row and column, with a stop
at each node of a line.
"""

from __future__ import annotations

import hashlib
import heapq
import math
import random
import threading
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Tuple

from ..geo import EARTH_RADIUS_M, GeoPoint, encode_polyline, haversine_distance
from .base import (
    DrivingRoute,
    DrivingStep,
    NoRoute,
    RideEstimate,
    RouteStep,
    TransitItinerary,
    TravelMode,
    same_place,
    walk_step,
)

Node = Tuple[int, int]  # (row, col); row grows northwards, col eastwards


@dataclass(frozen=True)
class CityConfig:
    size: int = 40  # nodes per side
    edge_m: float = 250.0
    center: GeoPoint = GeoPoint(-23.551615, -46.633611)
    free_flow_kmh: float = 40.0
    congested_share: float = 0.12
    congested_range: Tuple[float, float] = (1.5, 3.0)
    normal_range: Tuple[float, float] = (1.0, 1.3)
    line_spacing: int = 6  # nodes between parallel transit lines
    headway_s: float = 600.0
    transit_kmh: float = 24.0
    base_fare: float = 5.00
    per_km: float = 1.40
    per_min: float = 0.26
    pickup_range: Tuple[int, int] = (120, 480)


def ride_tariff(distance_m: float, duration_s: float, cfg: CityConfig = CityConfig()) -> float:
    return cfg.base_fare + cfg.per_km * distance_m / 1000.0 + cfg.per_min * duration_s / 60.0


def edge_key(a: Node, b: Node) -> Tuple[Node, Node]:
    return (a, b) if a <= b else (b, a)


class SyntheticCity:
    kind = "offline"

    def __init__(self, seed: int = 0, config: CityConfig = CityConfig(),
                 congestion_overrides: Optional[Mapping[Tuple[Node, Node], float]] = None):
        self.seed = seed
        self.config = config
        n = config.size
        self._half = (n - 1) * config.edge_m / 2.0
        self._lat0 = math.radians(config.center.lat)
        self._cos0 = math.cos(self._lat0)
        self.multipliers = self._draw_multipliers()
        for (a, b), m in (congestion_overrides or {}).items():
            if m < 1.0:
                raise ValueError("congestion multiplier below 1")
            self.multipliers[edge_key(a, b)] = m
        self._paths: Dict[Tuple[Node, Node], List[Node]] = {}
        self._lock = threading.Lock()

    def _draw_multipliers(self) -> Dict[Tuple[Node, Node], float]:
        cfg = self.config
        rng = random.Random(self.seed)
        out = {}
        for r in range(cfg.size):
            for c in range(cfg.size):
                for nb in ((r, c + 1), (r + 1, c)):
                    if nb[0] >= cfg.size or nb[1] >= cfg.size:
                        continue
                    if rng.random() < cfg.congested_share:
                        m = rng.uniform(*cfg.congested_range)
                    else:
                        m = rng.uniform(*cfg.normal_range)
                    out[((r, c), nb)] = m
        return out

    # grid geometry

    def node_point(self, node: Node) -> GeoPoint:
        r, c = node
        y = r * self.config.edge_m - self._half
        x = c * self.config.edge_m - self._half
        lat = self.config.center.lat + math.degrees(y / EARTH_RADIUS_M)
        lon = self.config.center.lon + math.degrees(x / (EARTH_RADIUS_M * self._cos0))
        return GeoPoint(lat, lon)

    def _grid_coords(self, p: GeoPoint) -> Tuple[float, float]:
        """Fractional (row, col) of a point; raises NoRoute outside the city."""
        y = math.radians(p.lat - self.config.center.lat) * EARTH_RADIUS_M + self._half
        x = math.radians(p.lon - self.config.center.lon) * EARTH_RADIUS_M * self._cos0 + self._half
        e = self.config.edge_m
        limit = 2 * self._half + e / 2
        if not (-e / 2 <= y <= limit and -e / 2 <= x <= limit):
            raise NoRoute(f"{p} lies outside the synthetic city")
        return y / e, x / e

    def _snap(self, f: float) -> int:
        return min(self.config.size - 1, max(0, int(math.floor(f + 0.5))))

    def nearest_node(self, p: GeoPoint) -> Node:
        fr, fc = self._grid_coords(p)
        return self._snap(fr), self._snap(fc)

    def free_flow_s(self, distance_m: float) -> float:
        return distance_m * 3.6 / self.config.free_flow_kmh

    # driving

    def shortest_path(self, a: Node, b: Node) -> List[Node]:
        """Fewest-free-flow-seconds node path; ties settle on the lower node."""
        key = (a, b)
        cached = self._paths.get(key)
        if cached is not None:
            return cached
        n = self.config.size
        dist = {a: 0.0}
        prev: Dict[Node, Node] = {}
        heap = [(0.0, a)]
        done = set()
        w = self.free_flow_s(self.config.edge_m)
        while heap:
            d, u = heapq.heappop(heap)
            if u in done:
                continue
            done.add(u)
            if u == b:
                break
            r, c = u
            for v in ((r - 1, c), (r, c - 1), (r, c + 1), (r + 1, c)):
                if not (0 <= v[0] < n and 0 <= v[1] < n) or v in done:
                    continue
                nd = d + w
                if nd < dist.get(v, math.inf):
                    dist[v] = nd
                    prev[v] = u
                    heapq.heappush(heap, (nd, v))
        if b not in done:
            raise NoRoute(f"no path from {a} to {b}")
        path = [b]
        while path[-1] != a:
            path.append(prev[path[-1]])
        path.reverse()
        with self._lock:
            self._paths[key] = path
        return path

    def _connector(self, o: GeoPoint, d: GeoPoint) -> DrivingStep:
        dist = haversine_distance(o, d)
        t = self.free_flow_s(dist)
        return DrivingStep(o, d, dist, t, t, encode_polyline([o, d]))

    def get_driving_way(self, origin: GeoPoint, destination: GeoPoint) -> DrivingRoute:
        if same_place(origin, destination):
            raise NoRoute("origin and destination coincide")
        a = self.nearest_node(origin)
        b = self.nearest_node(destination)
        nodes = self.shortest_path(a, b)
        pts = [self.node_point(x) for x in nodes]
        steps = []
        if not same_place(origin, pts[0]):
            steps.append(self._connector(origin, pts[0]))
        e = self.config.edge_m
        ff = self.free_flow_s(e)
        for u, v, pu, pv in zip(nodes, nodes[1:], pts, pts[1:]):
            m = self.multipliers[edge_key(u, v)]
            steps.append(DrivingStep(pu, pv, e, ff, ff * m, encode_polyline([pu, pv])))
        if not same_place(pts[-1], destination):
            steps.append(self._connector(pts[-1], destination))
        if not steps:
            steps.append(self._connector(origin, destination))
        return DrivingRoute(tuple(steps))

    # ride hail

    def pickup_wait(self, origin: GeoPoint) -> int:
        lo, hi = self.config.pickup_range
        digest = hashlib.sha256(f"{self.seed}:{origin.lat:.5f}:{origin.lon:.5f}".encode()).digest()
        return lo + int.from_bytes(digest[:8], "big") % (hi - lo + 1)

    def get_ride_estimate(self, origin: GeoPoint, destination: GeoPoint) -> RideEstimate:
        route = self.get_driving_way(origin, destination)
        pts = [route.steps[0].origin] + [s.destination for s in route.steps]
        duration = route.live_duration
        distance = route.distance
        return RideEstimate(
            price=ride_tariff(distance, duration, self.config),
            pickup_wait=float(self.pickup_wait(origin)),
            duration=duration,
            distance=distance,
            polyline=encode_polyline(pts),
        )

    # walking

    def get_walk_route(self, origin: GeoPoint, destination: GeoPoint) -> RouteStep:
        return walk_step(origin, destination)

    # transit

    def _lines_near(self, f: float) -> List[int]:
        s = self.config.line_spacing
        top = (self.config.size - 1) // s * s
        lo = min(top, max(0, int(math.floor(f / s)) * s))
        return sorted({lo, min(top, lo + s)})

    def _transit_step(self, a: Node, b: Node) -> RouteStep:
        dist = (abs(a[0] - b[0]) + abs(a[1] - b[1])) * self.config.edge_m
        pa, pb = self.node_point(a), self.node_point(b)
        return RouteStep(TravelMode.TRANSIT, pa, pb, dist * 3.6 / self.config.transit_kmh,
                         dist, wait=self.config.headway_s / 2, polyline=encode_polyline([pa, pb]))

    def _candidate_rides(self, fa, fb) -> List[List[Tuple[Node, Node]]]:
        ra, ca = self._snap(fa[0]), self._snap(fa[1])
        rb, cb = self._snap(fb[0]), self._snap(fb[1])
        rows_a, cols_a = self._lines_near(fa[0]), self._lines_near(fa[1])
        rows_b, cols_b = self._lines_near(fb[0]), self._lines_near(fb[1])
        out = []
        for h in sorted(set(rows_a) | set(rows_b)):
            out.append([((h, ca), (h, cb))])
        for v in sorted(set(cols_a) | set(cols_b)):
            out.append([((ra, v), (rb, v))])
        for h in rows_a:
            for v in cols_b:
                out.append([((h, ca), (h, v)), ((h, v), (rb, v))])
        for v in cols_a:
            for h in rows_b:
                out.append([((ra, v), (h, v)), ((h, v), (h, cb))])
        return [legs for legs in out if all(x != y for x, y in legs)]

    def get_transit_route(self, origin: GeoPoint, destination: GeoPoint) -> TransitItinerary:
        """Fastest door-to-door itinerary using one line or one transfer."""
        if same_place(origin, destination):
            raise NoRoute("origin and destination coincide")
        fa = self._grid_coords(origin)
        fb = self._grid_coords(destination)
        best = None
        for legs in self._candidate_rides(fa, fb):
            steps = []
            board = self.node_point(legs[0][0])
            if not same_place(origin, board):
                steps.append(walk_step(origin, board))
            steps.extend(self._transit_step(a, b) for a, b in legs)
            alight = steps[-1].destination
            if not same_place(alight, destination):
                steps.append(walk_step(alight, destination))
            cost = sum(s.duration + s.wait for s in steps)
            if best is None or (cost, len(legs)) < best[0]:
                best = ((cost, len(legs)), steps)
        if best is None:
            raise NoRoute("no transit line connects these points")
        steps = best[1]
        first_ride = next(s for s in steps if s.mode is TravelMode.TRANSIT)
        return TransitItinerary(tuple(steps), first_ride.wait)
