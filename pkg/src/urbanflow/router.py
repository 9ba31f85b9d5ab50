"""Multimodal route options for one origin-destination pair.

Congested steps of a reference driving route become candidate points where
the traveller may switch mode. Every (start, end) candidate pair splits the
trip into three legs; each leg gets a mode and the legs are queried from a
provider and concatenated into one option.
"""

from __future__ import annotations

import itertools
import json
import warnings
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple

from .geo import GeoPoint, haversine_distance
from .metrics import DEFAULT_FARE, OptionMetrics, compute_metrics
from .providers.base import (
    DrivingRoute,
    DrivingStep,
    NoRoute,
    RouteProvider,
    RouteStep,
    TravelMode,
    same_place,
)

WALK, TRANSIT, RIDE = TravelMode.WALK, TravelMode.TRANSIT, TravelMode.RIDE_HAIL

PURE_TRANSIT = "transit"
PURE_RIDE = "ride"
MULTIMODAL = "multimodal"


class AllOptionsFailed(Exception):
    pass


class NoMixedOptions(UserWarning):
    pass


@dataclass(frozen=True)
class RouterConfig:
    congestion_ratio: float = 1.5
    walk_max: float = 2000.0  # meters, per leg
    fare: float = DEFAULT_FARE

    def __post_init__(self):
        if self.congestion_ratio <= 1:
            raise ValueError("congestion_ratio must exceed 1")
        if self.walk_max <= 0:
            raise ValueError("walk_max must be positive")


@dataclass(frozen=True)
class TransitionCandidates:
    starts: Tuple[GeoPoint, ...]
    ends: Tuple[GeoPoint, ...]


@dataclass(frozen=True)
class RouteOption:
    steps: Tuple[RouteStep, ...]
    composition: str = MULTIMODAL
    label: str = "Other"
    metrics: Optional[OptionMetrics] = None

    def signature(self) -> tuple:
        return tuple(
            (s.mode.value, round(s.origin.lat, 7), round(s.origin.lon, 7),
             round(s.destination.lat, 7), round(s.destination.lon, 7))
            for s in self.steps
        )

    def mode_distance(self, mode: TravelMode) -> float:
        return sum(s.distance for s in self.steps if s.mode is mode)

    def share(self, mode: TravelMode) -> float:
        total = sum(s.distance for s in self.steps)
        return self.mode_distance(mode) / total if total > 0 else 0.0

    def modes(self) -> set:
        return {s.mode for s in self.steps}

    def as_dict(self) -> dict:
        return {
            "label": self.label,
            "composition": self.composition,
            "metrics": self.metrics.as_dict() if self.metrics else None,
            "steps": [s.as_dict() for s in self.steps],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RouteOption":
        m = d.get("metrics")
        return cls(tuple(RouteStep.from_dict(s) for s in d["steps"]),
                   d.get("composition", MULTIMODAL), d.get("label", "Other"),
                   OptionMetrics.from_dict(m) if m else None)


def is_congested(step: DrivingStep, cfg: RouterConfig = RouterConfig()) -> bool:
    return step.live_duration / step.free_flow_duration >= cfg.congestion_ratio


def find_transition_candidates(route: DrivingRoute, origin: GeoPoint, destination: GeoPoint,
                               cfg: RouterConfig = RouterConfig()) -> TransitionCandidates:
    starts = [origin]
    ends = [destination]
    for step in route.steps:
        if is_congested(step, cfg):
            starts.append(step.origin)
            ends.append(step.destination)
    return TransitionCandidates(tuple(starts), tuple(ends))


def leg_steps(provider: RouteProvider, a: GeoPoint, b: GeoPoint, mode: TravelMode) -> List[RouteStep]:
    if mode is WALK:
        return [provider.get_walk_route(a, b)]
    if mode is TRANSIT:
        return list(provider.get_transit_route(a, b).steps)
    if mode is RIDE:
        return [provider.get_ride_estimate(a, b).as_step(a, b)]
    raise ValueError(f"mode {mode} cannot form a leg")


def pure_options(origin: GeoPoint, destination: GeoPoint, provider: RouteProvider) -> List[RouteOption]:
    out = []
    for mode, composition in ((TRANSIT, PURE_TRANSIT), (RIDE, PURE_RIDE)):
        try:
            out.append(RouteOption(tuple(leg_steps(provider, origin, destination, mode)),
                                   composition))
        except NoRoute:
            continue
    if not out:
        raise AllOptionsFailed("neither transit nor ride-hail reaches the destination")
    return out


def leg_assignments(legs: Sequence[Tuple[GeoPoint, GeoPoint, Tuple[TravelMode, ...]]],
                    cfg: RouterConfig) -> List[Tuple[Tuple[GeoPoint, GeoPoint, TravelMode], ...]]:
    """Mode assignments for the non-degenerate legs, in enumeration order.

    Walking is offered only for legs no longer than ``walk_max``. An
    assignment riding every motorized leg by ride-hail with no walk in
    between just duplicates the pure ride-hail option and is skipped, as is
    one without any motorized leg.
    """
    active = []
    for a, b, choices in legs:
        if same_place(a, b):
            continue
        if WALK in choices and haversine_distance(a, b) > cfg.walk_max:
            choices = tuple(m for m in choices if m is not WALK)
        active.append([(a, b, m) for m in choices])
    out = []
    for combo in itertools.product(*active):
        modes = [m for _, _, m in combo]
        if WALK not in modes and all(m is RIDE for m in modes):
            continue
        if all(m is WALK for m in modes):
            continue
        out.append(combo)
    return out


def get_options(origin: GeoPoint, ts: GeoPoint, te: GeoPoint, destination: GeoPoint,
                provider: RouteProvider, cfg: RouterConfig = RouterConfig()) -> List[RouteOption]:
    if same_place(ts, origin) and same_place(te, destination):
        return pure_options(origin, destination, provider)
    legs = [
        (origin, ts, (WALK, RIDE)),
        (ts, te, (TRANSIT, RIDE)),
        (te, destination, (WALK, RIDE)),
    ]
    options = []
    assignments = leg_assignments(legs, cfg)
    for combo in assignments:
        try:
            steps = [s for a, b, m in combo for s in leg_steps(provider, a, b, m)]
        except NoRoute:
            continue
        options.append(RouteOption(tuple(steps)))
    if assignments and not options:
        raise AllOptionsFailed("no leg assignment produced a route")
    return options


def compute_route_options(origin: GeoPoint, destination: GeoPoint, provider: RouteProvider,
                          cfg: RouterConfig = RouterConfig()) -> List[RouteOption]:
    """All deduplicated options for a trip, with metrics; pure options first."""
    if same_place(origin, destination):
        raise NoRoute("origin and destination coincide")
    route = provider.get_driving_way(origin, destination)
    cands = find_transition_candidates(route, origin, destination, cfg)
    seen = set()
    options = []
    for ts in cands.starts:
        for te in cands.ends:
            try:
                found = get_options(origin, ts, te, destination, provider, cfg)
            except AllOptionsFailed:
                continue
            for opt in found:
                sig = opt.signature()
                if sig in seen:
                    continue
                seen.add(sig)
                options.append(replace(opt, metrics=compute_metrics(opt, cfg.fare)))
    if not options:
        raise AllOptionsFailed("no route option could be built")
    return options


def is_mixed(option: RouteOption) -> bool:
    """A multimodal option switching between transit and ride-hail."""
    return option.composition == MULTIMODAL and {TRANSIT, RIDE} <= option.modes()


def _price(o: RouteOption, fare: float) -> float:
    return (o.metrics or compute_metrics(o, fare)).price


def _duration(o: RouteOption, fare: float) -> float:
    return (o.metrics or compute_metrics(o, fare)).duration


def label_options(options: Sequence[RouteOption], fare: float = DEFAULT_FARE) -> List[RouteOption]:
    """Label pure options Transit / RideHail and pick Hybrid1 (largest transit
    distance share) and Hybrid2 (largest ride-hail share) among mixed ones."""
    labels = ["Other"] * len(options)
    for i, o in enumerate(options):
        if o.composition == PURE_TRANSIT:
            labels[i] = "Transit"
        elif o.composition == PURE_RIDE:
            labels[i] = "RideHail"

    mixed = [i for i, o in enumerate(options) if is_mixed(o)]
    if len(mixed) < 2:
        warnings.warn(NoMixedOptions(f"{len(mixed)} mixed option(s); hybrid labels omitted"))
    else:
        by_transit = sorted(mixed, key=lambda i: (-options[i].share(TRANSIT),
                                                  _price(options[i], fare),
                                                  _duration(options[i], fare), i))
        by_ride = sorted(mixed, key=lambda i: (-options[i].share(RIDE),
                                               _duration(options[i], fare),
                                               _price(options[i], fare), i))
        h1 = by_transit[0]
        h2 = by_ride[0] if by_ride[0] != h1 else by_ride[1]
        labels[h1] = "Hybrid1"
        labels[h2] = "Hybrid2"
    return [replace(o, label=l) for o, l in zip(options, labels)]


def options_to_json(options: Sequence[RouteOption]) -> str:
    return json.dumps([o.as_dict() for o in options], indent=2) + "\n"


def options_from_json(text: str) -> List[RouteOption]:
    return [RouteOption.from_dict(d) for d in json.loads(text)]

