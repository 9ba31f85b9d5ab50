"""Per-user trip links and the validity filters applied before flow mining."""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass
from itertools import groupby
from typing import Iterable, List, Tuple

from .geo import GeoPoint, haversine_distance, speed_kmh
from .ingestion import Dataset

MS_PER_DAY = 86_400_000

LINK_COLUMNS = (
    "uid", "o_lat", "o_lon", "o_ts", "d_lat", "d_lon", "d_ts",
    "distance_m", "duration_ms", "speed_kmh",
)


@dataclass(frozen=True)
class FilterConfig:
    min_distance: float = 100.0  # meters
    min_duration: int = 1000  # milliseconds
    min_speed: float = 2.0  # km/h
    max_speed: float = 100.0  # km/h
    day_timezone_offset: int = 0  # minutes east of UTC

    def __post_init__(self):
        if not self.min_speed < self.max_speed:
            raise ValueError("min_speed must be below max_speed")
        if self.min_distance <= 0 or self.min_duration <= 0:
            raise ValueError("min_distance and min_duration must be positive")


@dataclass(frozen=True)
class TripLink:
    uid: str
    origin_point: GeoPoint
    origin_time: int
    dest_point: GeoPoint
    dest_time: int
    distance: float
    duration: int
    speed: float

    @classmethod
    def between(cls, uid: str, o: GeoPoint, o_ts: int, d: GeoPoint, d_ts: int) -> "TripLink":
        distance = haversine_distance(o, d)
        duration = d_ts - o_ts
        if duration > 0:
            speed = speed_kmh(distance, duration)
        else:
            # simultaneous observations; removed by the duration filter
            speed = math.inf if distance > 0 else 0.0
        return cls(uid, o, o_ts, d, d_ts, distance, duration, speed)


@dataclass(frozen=True)
class StageCounts:
    initial_records: int = 0
    linked: int = 0
    after_same_day: int = 0
    after_min_distance: int = 0
    after_min_duration: int = 0
    after_speed_band: int = 0

    def as_dict(self) -> dict:
        return asdict(self)

    def is_monotone(self) -> bool:
        c = (self.linked, self.after_same_day, self.after_min_distance,
             self.after_min_duration, self.after_speed_band)
        return all(a >= b for a, b in zip(c, c[1:])) and c[-1] >= 0


def link_by_user(d: Dataset) -> List[TripLink]:
    """Connect temporally adjacent observations of each user.

    Output is ordered by uid, then origin time. Equal timestamps keep
    input order.
    """
    by_user = sorted(d.records, key=lambda r: r.uid)
    links = []
    for uid, group in groupby(by_user, key=lambda r: r.uid):
        seq = sorted(group, key=lambda r: r.timestamp_ms)
        for a, b in zip(seq, seq[1:]):
            links.append(TripLink.between(uid, a.point, a.timestamp_ms, b.point, b.timestamp_ms))
    return links


def local_day(ts_ms: int, offset_min: int) -> int:
    return (ts_ms + offset_min * 60_000) // MS_PER_DAY


def same_day(link: TripLink, cfg: FilterConfig) -> bool:
    off = cfg.day_timezone_offset
    return local_day(link.origin_time, off) == local_day(link.dest_time, off)


def filter_same_day(links: Iterable[TripLink], cfg: FilterConfig) -> List[TripLink]:
    return [l for l in links if same_day(l, cfg)]


def filter_min_distance(links: Iterable[TripLink], cfg: FilterConfig) -> List[TripLink]:
    return [l for l in links if l.distance >= cfg.min_distance]


def filter_min_duration(links: Iterable[TripLink], cfg: FilterConfig) -> List[TripLink]:
    return [l for l in links if l.duration >= cfg.min_duration]


def filter_speed_band(links: Iterable[TripLink], cfg: FilterConfig) -> List[TripLink]:
    return [l for l in links if cfg.min_speed <= l.speed <= cfg.max_speed]


def run_filter_pipeline(d: Dataset, cfg: FilterConfig = FilterConfig()) -> Tuple[List[TripLink], StageCounts]:
    """Link, then filter by same day, distance, duration and speed, in that order."""
    linked = link_by_user(d)
    s1 = filter_same_day(linked, cfg)
    s2 = filter_min_distance(s1, cfg)
    s3 = filter_min_duration(s2, cfg)
    s4 = filter_speed_band(s3, cfg)
    counts = StageCounts(len(d.records), len(linked), len(s1), len(s2), len(s3), len(s4))
    return s4, counts


def write_links_csv(path, links: Iterable[TripLink]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(LINK_COLUMNS)
        for l in links:
            w.writerow([
                l.uid, repr(l.origin_point.lat), repr(l.origin_point.lon), l.origin_time,
                repr(l.dest_point.lat), repr(l.dest_point.lon), l.dest_time,
                repr(l.distance), l.duration, repr(l.speed),
            ])


def read_links_csv(path) -> List[TripLink]:
    links = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            links.append(TripLink(
                row["uid"],
                GeoPoint(float(row["o_lat"]), float(row["o_lon"])),
                int(row["o_ts"]),
                GeoPoint(float(row["d_lat"]), float(row["d_lon"])),
                int(row["d_ts"]),
                float(row["distance_m"]),
                int(row["duration_ms"]),
                float(row["speed_kmh"]),
            ))
    return links
