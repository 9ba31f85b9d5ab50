"""HTTP adapters for live routing services.

Only used when the provider kind is ``http``. Every request passes through
a shared token bucket and, when a cache directory is configured, a JSON
response cache keyed by (operation, rounded coordinates, provider kind).
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import tempfile
import threading
import time
from pathlib import Path
from typing import Callable, List, Optional

from ..geo import GeoPoint, encode_polyline, path_length
from .base import (
    DrivingRoute,
    DrivingStep,
    NoRoute,
    ProviderConfig,
    ProviderUnavailable,
    RideEstimate,
    RouteStep,
    TransitItinerary,
    TravelMode,
    same_place,
    walk_step,
)

logger = logging.getLogger(__name__)

DEFAULT_BASE_URLS = {
    "driving": "https://api.tomtom.com",
    "transit": "https://maps.googleapis.com",
    "ride": "https://api.uber.com",
}
MILE_M = 1609.344


class TokenBucket:
    """Blocking token bucket allowing ``rate`` requests per second on average."""

    def __init__(self, rate: float, capacity: Optional[float] = None,
                 clock: Callable[[], float] = time.monotonic,
                 sleep: Callable[[float], None] = time.sleep):
        if rate <= 0:
            raise ValueError("rate must be positive")
        self.rate = rate
        self.capacity = capacity if capacity is not None else max(1.0, rate)
        self._tokens = self.capacity
        self._clock = clock
        self._sleep = sleep
        self._last = clock()
        self._lock = threading.Lock()

    def acquire(self) -> None:
        with self._lock:
            while True:
                now = self._clock()
                self._tokens = min(self.capacity, self._tokens + (now - self._last) * self.rate)
                self._last = now
                if self._tokens >= 1:
                    self._tokens -= 1
                    return
                self._sleep((1 - self._tokens) / self.rate)


def cache_key(operation: str, points, kind: str) -> str:
    coords = [[round(p.lat, 5), round(p.lon, 5)] for p in points]
    return json.dumps([operation, coords, kind], separators=(",", ":"))


class ResponseCache:
    """One JSON file per response, named by the SHA-256 of the cache key."""

    def __init__(self, directory):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)

    def _path(self, key: str) -> Path:
        return self.directory / (hashlib.sha256(key.encode()).hexdigest() + ".json")

    def get(self, key: str):
        try:
            return json.loads(self._path(key).read_text(encoding="utf-8"))
        except FileNotFoundError:
            return None

    def put(self, key: str, value) -> None:
        target = self._path(key)
        fd, tmp = tempfile.mkstemp(dir=self.directory, suffix=".tmp")
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            json.dump(value, fh)
        # atomic; concurrent writers of one key leave the last one in place
        os.replace(tmp, target)


class HttpProvider:
    kind = "http"

    def __init__(self, cfg: ProviderConfig, session=None,
                 limiter: Optional[TokenBucket] = None):
        if session is None:
            import requests

            session = requests.Session()
        self.cfg = cfg
        self.session = session
        self.limiter = limiter or TokenBucket(cfg.rate_limit)
        self.cache = ResponseCache(cfg.cache_dir) if cfg.cache_dir else None
        self.base_urls = {**DEFAULT_BASE_URLS, **cfg.base_urls}

    def _key(self, role: str) -> str:
        name = self.cfg.api_key_env_names.get(role, "")
        value = os.environ.get(name)
        if not value:
            raise ProviderUnavailable(f"environment variable {name or role!r} is not set")
        return value

    def _fetch(self, operation: str, points, url: str, params=None, headers=None) -> dict:
        key = cache_key(operation, points, self.kind)
        if self.cache is not None:
            hit = self.cache.get(key)
            if hit is not None:
                return hit
        self.limiter.acquire()
        try:
            resp = self.session.get(url, params=params, headers=headers, timeout=30)
        except Exception as exc:  # transport errors of whichever HTTP client
            raise ProviderUnavailable(f"{operation}: {exc}") from exc
        if resp.status_code == 404:
            raise NoRoute(f"{operation}: not found")
        if resp.status_code != 200:
            raise ProviderUnavailable(f"{operation}: HTTP {resp.status_code}")
        data = resp.json()
        if self.cache is not None:
            self.cache.put(key, data)
        return data

    # driving, with traffic sections

    def get_driving_way(self, origin: GeoPoint, destination: GeoPoint) -> DrivingRoute:
        if same_place(origin, destination):
            raise NoRoute("origin and destination coincide")
        url = (f"{self.base_urls['driving']}/routing/1/calculateRoute/"
               f"{origin.lat},{origin.lon}:{destination.lat},{destination.lon}/json")
        params = {"key": self._key("driving"), "traffic": "true",
                  "sectionType": "traffic", "computeTravelTimeFor": "all"}
        data = self._fetch("driving", [origin, destination], url, params)
        return parse_tomtom_route(data)

    # transit

    def get_transit_route(self, origin: GeoPoint, destination: GeoPoint) -> TransitItinerary:
        if same_place(origin, destination):
            raise NoRoute("origin and destination coincide")
        url = f"{self.base_urls['transit']}/maps/api/directions/json"
        params = {"origin": f"{origin.lat},{origin.lon}",
                  "destination": f"{destination.lat},{destination.lon}",
                  "mode": "transit", "key": self._key("transit")}
        data = self._fetch("transit", [origin, destination], url, params)
        return parse_google_transit(data)

    # ride hail

    def get_ride_estimate(self, origin: GeoPoint, destination: GeoPoint) -> RideEstimate:
        if same_place(origin, destination):
            raise NoRoute("origin and destination coincide")
        headers = {"Authorization": f"Token {self._key('ride')}"}
        base = self.base_urls["ride"]
        trip = {"start_latitude": origin.lat, "start_longitude": origin.lon,
                "end_latitude": destination.lat, "end_longitude": destination.lon}
        prices = self._fetch("ride_price", [origin, destination],
                             f"{base}/v1.2/estimates/price", trip, headers)
        times = self._fetch("ride_time", [origin], f"{base}/v1.2/estimates/time",
                            {"start_latitude": origin.lat, "start_longitude": origin.lon},
                            headers)
        try:
            route = self.get_driving_way(origin, destination)
            pts = [route.steps[0].origin] + [s.destination for s in route.steps]
        except (NoRoute, ProviderUnavailable):
            pts = [origin, destination]
        return parse_uber_estimate(prices, times, encode_polyline(pts))

    def get_walk_route(self, origin: GeoPoint, destination: GeoPoint) -> RouteStep:
        return walk_step(origin, destination)


def _pt(d: dict) -> GeoPoint:
    return GeoPoint(float(d.get("latitude", d.get("lat"))),
                    float(d.get("longitude", d.get("lng", d.get("lon")))))


def parse_tomtom_route(data: dict) -> DrivingRoute:
    """Split the route geometry at traffic-section boundaries.

    Free-flow time is spread over steps by length; a traffic section adds
    its reported delay to the step it covers.
    """
    try:
        route = data["routes"][0]
    except (KeyError, IndexError):
        raise NoRoute("driving response has no route") from None
    points: List[GeoPoint] = []
    for leg in route.get("legs", []):
        for p in leg.get("points", []):
            q = _pt(p)
            if not points or q != points[-1]:
                points.append(q)
    if len(points) < 2:
        raise NoRoute("driving route has fewer than two points")
    summary = route.get("summary", {})
    total = path_length(points)
    free_total = float(summary.get("noTrafficTravelTimeInSeconds")
                       or summary.get("travelTimeInSeconds") or 0)
    if total <= 0 or free_total <= 0:
        raise NoRoute("degenerate driving route")

    delays = {}
    cuts = {0, len(points) - 1}
    for sec in route.get("sections", []):
        if sec.get("sectionType") != "TRAFFIC":
            continue
        a = min(int(sec["startPointIndex"]), len(points) - 1)
        b = min(int(sec["endPointIndex"]), len(points) - 1)
        if b <= a:
            continue
        cuts.update((a, b))
        delays[(a, b)] = float(sec.get("delayInSeconds", 0))
    bounds = sorted(cuts)
    steps = []
    for a, b in zip(bounds, bounds[1:]):
        seg = points[a:b + 1]
        dist = path_length(seg)
        if dist <= 0:
            continue
        free = free_total * dist / total
        live = free + max(0.0, delays.get((a, b), 0.0))
        steps.append(DrivingStep(seg[0], seg[-1], dist, free, live, encode_polyline(seg)))
    return DrivingRoute(tuple(steps))


def parse_google_transit(data: dict) -> TransitItinerary:
    status = data.get("status", "OK")
    if status == "ZERO_RESULTS" or not data.get("routes"):
        raise NoRoute(f"transit status {status}")
    if status != "OK":
        raise ProviderUnavailable(f"transit status {status}")
    steps = []
    for s in data["routes"][0]["legs"][0]["steps"]:
        mode = TravelMode.TRANSIT if s.get("travel_mode") == "TRANSIT" else TravelMode.WALK
        o, d = _pt(s["start_location"]), _pt(s["end_location"])
        poly = s.get("polyline", {}).get("points") or encode_polyline([o, d])
        wait = 0.0
        if mode is TravelMode.TRANSIT:
            headway = s.get("transit_details", {}).get("headway")
            wait = float(headway) / 2 if headway else 0.0
        steps.append(RouteStep(mode, o, d, float(s["duration"]["value"]),
                               float(s["distance"]["value"]), wait, 0.0, poly))
    if not any(s.mode is TravelMode.TRANSIT for s in steps):
        raise NoRoute("itinerary has no transit vehicle")
    first = next(s for s in steps if s.mode is TravelMode.TRANSIT)
    return TransitItinerary(tuple(steps), first.wait)


def parse_uber_estimate(prices: dict, times: dict, polyline: str,
                        product: str = "UberX") -> RideEstimate:
    options = prices.get("prices") or []
    if not options:
        raise NoRoute("no ride products for this trip")
    chosen = next((p for p in options if p.get("display_name") == product), options[0])
    eta = next((t for t in times.get("times", [])
                if t.get("product_id") == chosen.get("product_id")), None)
    low = float(chosen.get("low_estimate") or 0)
    high = float(chosen.get("high_estimate") or low)
    return RideEstimate(
        price=(low + high) / 2,
        pickup_wait=float(eta["estimate"]) if eta else 0.0,
        duration=float(chosen.get("duration", 0)),
        distance=float(chosen.get("distance", 0)) * MILE_M,
        polyline=polyline,
    )

