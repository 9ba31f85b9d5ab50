"""Provider contract: route and estimate types returned by every provider."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Dict, Optional, Protocol, Tuple

from ..geo import GeoPoint, encode_polyline, haversine_distance

WALK_SPEED_KMH = 5.0
CONTIGUITY_TOLERANCE_M = 1.0


class NoRoute(Exception):
    pass


class ProviderUnavailable(Exception):
    pass


class TravelMode(str, enum.Enum):
    WALK = "Walk"
    TRANSIT = "Transit"
    RIDE_HAIL = "RideHail"
    DRIVE = "Drive"


@dataclass(frozen=True)
class RouteStep:
    mode: TravelMode
    origin: GeoPoint
    destination: GeoPoint
    duration: float  # seconds, in motion
    distance: float  # meters
    wait: float = 0.0  # seconds before departure
    price: float = 0.0  # BRL
    polyline: str = ""

    def __post_init__(self):
        if min(self.duration, self.distance, self.wait, self.price) < 0:
            raise ValueError(f"negative quantity in {self!r}")
        if self.mode is TravelMode.WALK and (self.price or self.wait):
            raise ValueError("walk steps carry neither price nor wait")

    def as_dict(self) -> dict:
        return {
            "mode": self.mode.value,
            "o": self.origin.as_dict(),
            "d": self.destination.as_dict(),
            "duration_s": self.duration,
            "distance_m": self.distance,
            "wait_s": self.wait,
            "price": self.price,
            "polyline": self.polyline,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RouteStep":
        return cls(
            TravelMode(d["mode"]),
            GeoPoint.from_dict(d["o"]),
            GeoPoint.from_dict(d["d"]),
            float(d["duration_s"]),
            float(d["distance_m"]),
            float(d.get("wait_s", 0.0)),
            float(d.get("price", 0.0)),
            d.get("polyline", ""),
        )


@dataclass(frozen=True)
class DrivingStep:
    origin: GeoPoint
    destination: GeoPoint
    distance: float
    free_flow_duration: float
    live_duration: float
    polyline: str = ""

    def __post_init__(self):
        if not self.live_duration >= self.free_flow_duration > 0:
            raise ValueError("need live_duration >= free_flow_duration > 0")
        if self.distance <= 0:
            raise ValueError("driving step distance must be positive")


@dataclass(frozen=True)
class DrivingRoute:
    steps: Tuple[DrivingStep, ...]

    @property
    def distance(self) -> float:
        return sum(s.distance for s in self.steps)

    @property
    def live_duration(self) -> float:
        return sum(s.live_duration for s in self.steps)


@dataclass(frozen=True)
class TransitItinerary:
    steps: Tuple[RouteStep, ...]
    initial_wait: float

    @property
    def boardings(self) -> int:
        return sum(1 for s in self.steps if s.mode is TravelMode.TRANSIT)


@dataclass(frozen=True)
class RideEstimate:
    price: float
    pickup_wait: float
    duration: float
    distance: float
    polyline: str = ""

    def as_step(self, origin: GeoPoint, destination: GeoPoint) -> RouteStep:
        return RouteStep(TravelMode.RIDE_HAIL, origin, destination, self.duration,
                         self.distance, self.pickup_wait, self.price, self.polyline)


@dataclass(frozen=True)
class ProviderConfig:
    kind: str = "offline"  # "offline" or "http"
    seed: int = 0
    rate_limit: float = 5.0  # requests per second
    cache_dir: Optional[str] = None
    base_urls: Dict[str, str] = field(default_factory=dict)
    api_key_env_names: Dict[str, str] = field(default_factory=lambda: {
        "driving": "URBANFLOW_TOMTOM_KEY",
        "transit": "URBANFLOW_GOOGLE_KEY",
        "ride": "URBANFLOW_UBER_TOKEN",
    })

    def __post_init__(self):
        if self.rate_limit <= 0:
            raise ValueError("rate_limit must be positive")
        if self.kind not in ("offline", "http"):
            raise ValueError(f"unknown provider kind {self.kind!r}")


class RouteProvider(Protocol):
    kind: str

    def get_driving_way(self, origin: GeoPoint, destination: GeoPoint) -> DrivingRoute: ...

    def get_transit_route(self, origin: GeoPoint, destination: GeoPoint) -> TransitItinerary: ...

    def get_ride_estimate(self, origin: GeoPoint, destination: GeoPoint) -> RideEstimate: ...

    def get_walk_route(self, origin: GeoPoint, destination: GeoPoint) -> RouteStep: ...


def same_place(a: GeoPoint, b: GeoPoint) -> bool:
    return haversine_distance(a, b) <= CONTIGUITY_TOLERANCE_M


def walk_step(origin: GeoPoint, destination: GeoPoint) -> RouteStep:
    """Straight-line walk at 5 km/h."""
    dist = haversine_distance(origin, destination)
    return RouteStep(TravelMode.WALK, origin, destination,
                     dist * 3.6 / WALK_SPEED_KMH, dist,
                     polyline=encode_polyline([origin, destination]))
