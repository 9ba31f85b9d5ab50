"""Seeded synthetic observation datasets over the offline city.

Users commute between a home and a work hotspot on weekdays and tweet at
both ends, with some same-place repeats, overnight gaps, implausibly fast
jumps and background noise mixed in so every filter has work to do.
"""

from __future__ import annotations

import math
import random
from typing import List, Tuple

from .geo import EARTH_RADIUS_M, GeoPoint
from .ingestion import ObservationRecord
from .providers.offline import SyntheticCity

HOTSPOT_NODES = ((6, 6), (8, 30), (20, 18), (32, 8), (33, 33), (24, 34))
# (home hotspot, work hotspot, relative popularity)
COMMUTES = ((0, 2, 6), (2, 0, 2), (1, 2, 4), (3, 4, 3), (4, 1, 2), (5, 0, 1), (3, 2, 2))

DAY_MS = 86_400_000
START_MS = 1_546_300_800_000  # 2019-01-01T00:00Z


def jitter(p: GeoPoint, sigma_m: float, rng: random.Random) -> GeoPoint:
    dy = rng.gauss(0.0, sigma_m)
    dx = rng.gauss(0.0, sigma_m)
    lat = p.lat + math.degrees(dy / EARTH_RADIUS_M)
    lon = p.lon + math.degrees(dx / (EARTH_RADIUS_M * math.cos(math.radians(p.lat))))
    return GeoPoint(lat, lon)


def make_observations(seed: int = 7, n_users: int = 240, days: int = 5,
                      city: SyntheticCity = None) -> List[ObservationRecord]:
    rng = random.Random(seed)
    city = city or SyntheticCity(seed)
    hotspots = [city.node_point(n) for n in HOTSPOT_NODES]
    weights = [w for _, _, w in COMMUTES]
    corner = city.node_point((1, 1))
    far = city.node_point((city.config.size - 2, city.config.size - 2))

    records: List[ObservationRecord] = []

    def emit(uid: str, p: GeoPoint, ts: int) -> None:
        records.append(ObservationRecord(uid, p, ts))

    for u in range(n_users):
        uid = f"u{u:04d}"
        home_i, work_i, _ = rng.choices(COMMUTES, weights)[0]
        home, work = hotspots[home_i], hotspots[work_i]
        for day in range(days):
            if rng.random() > 0.8:
                continue
            base = START_MS + day * DAY_MS
            # morning leg, local time UTC-3
            t = base + int(rng.uniform(10.0, 11.5) * 3_600_000)
            emit(uid, jitter(home, 60, rng), t)
            if rng.random() < 0.25:
                t += int(rng.uniform(1, 5) * 60_000)
                emit(uid, jitter(home, 20, rng), t)
            t += int(rng.uniform(20, 60) * 60_000)
            emit(uid, jitter(work, 60, rng), t)
            # evening leg
            t = base + int(rng.uniform(20.0, 21.5) * 3_600_000)
            emit(uid, jitter(work, 60, rng), t)
            t += int(rng.uniform(20, 60) * 60_000)
            emit(uid, jitter(home, 60, rng), t)
            if rng.random() < 0.2:
                # late post crossing midnight UTC
                emit(uid, jitter(work, 60, rng), base + DAY_MS + int(1.5 * 3_600_000))
            if rng.random() < 0.05:
                # two posts stamped with the same millisecond
                p = jitter(work, 60, rng)
                emit(uid, p, base + int(15 * 3_600_000))
                emit(uid, jitter(p, 300, rng), base + int(15 * 3_600_000))
            if rng.random() < 0.05:
                # implausible jump: corner to corner within a minute
                emit(uid, corner, base + int(13 * 3_600_000))
                emit(uid, far, base + int(13 * 3_600_000) + 45_000)

    n_noise = n_users // 2
    for k in range(n_noise):
        r = rng.uniform(0, city.config.size - 1)
        c = rng.uniform(0, city.config.size - 1)
        p = _grid_point(city, r, c)
        emit(f"n{k:04d}", p, START_MS + int(rng.uniform(0, days) * DAY_MS))
        p2 = _grid_point(city, rng.uniform(0, city.config.size - 1),
                         rng.uniform(0, city.config.size - 1))
        emit(f"n{k:04d}", p2, records[-1].timestamp_ms + int(rng.uniform(10, 90) * 60_000))

    rng.shuffle(records)
    return records


def _grid_point(city: SyntheticCity, r: float, c: float) -> GeoPoint:
    a = city.node_point((0, 0))
    b = city.node_point((1, 1))
    return GeoPoint(a.lat + r * (b.lat - a.lat), a.lon + c * (b.lon - a.lon))


def hotspot_points(city: SyntheticCity) -> List[Tuple[int, GeoPoint]]:
    return [(i, city.node_point(n)) for i, n in enumerate(HOTSPOT_NODES)]
