"""Density clustering of trip endpoints into zones and aggregation of trip
links into origin-destination flows."""

from __future__ import annotations

import json
import math
import statistics
from collections import Counter, defaultdict, deque
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .geo import EARTH_RADIUS_M, GeoPoint
from .linkage import TripLink

NOISE = -1
_UNSEEN = -2
TREND = "Trend"
SECONDARY = "Secondary"


class EmptyInput(ValueError):
    pass


@dataclass(frozen=True)
class ClusterParams:
    eps: float = 500.0  # meters
    min_pts: int = 10
    method: str = "dbscan"  # slot for a hierarchical variant

    def __post_init__(self):
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        if self.min_pts < 2:
            raise ValueError("min_pts must be at least 2")
        if self.method != "dbscan":
            raise NotImplementedError(f"clustering method {self.method!r}")


@dataclass(frozen=True)
class FunctionalZone:
    zone_id: int
    centroid: GeoPoint
    member_count: int

    def as_dict(self) -> dict:
        return {"zone_id": self.zone_id, "centroid": self.centroid.as_dict(),
                "member_count": self.member_count}

    @classmethod
    def from_dict(cls, d: dict) -> "FunctionalZone":
        return cls(int(d["zone_id"]), GeoPoint.from_dict(d["centroid"]), int(d["member_count"]))


@dataclass(frozen=True)
class EndpointAssignment:
    """Zone label (or NOISE) of each link's origin and destination."""
    origin: Tuple[int, ...]
    dest: Tuple[int, ...]


@dataclass(frozen=True)
class Flow:
    origin_zone: int
    dest_zone: int
    trip_count: int
    representative_origin: GeoPoint
    representative_dest: GeoPoint
    classification: str = SECONDARY

    @property
    def flow_id(self) -> str:
        return f"z{self.origin_zone}-z{self.dest_zone}"

    def as_dict(self) -> dict:
        return {
            "origin_zone": self.origin_zone,
            "dest_zone": self.dest_zone,
            "trip_count": self.trip_count,
            "classification": self.classification,
            "representative_origin": self.representative_origin.as_dict(),
            "representative_dest": self.representative_dest.as_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Flow":
        return cls(
            int(d["origin_zone"]), int(d["dest_zone"]), int(d["trip_count"]),
            GeoPoint.from_dict(d["representative_origin"]),
            GeoPoint.from_dict(d["representative_dest"]),
            d.get("classification", SECONDARY),
        )


class _GridIndex:
    """Buckets points into lat/lon cells at least eps wide, so every
    neighbor within eps lies in the 3x3 block around a point's cell."""

    def __init__(self, lat: np.ndarray, lon: np.ndarray, eps: float):
        self.phi = np.radians(lat)
        self.lmb = np.radians(lon)
        self.cos_phi = np.cos(self.phi)
        self.eps = eps
        ang = eps / EARTH_RADIUS_M
        self.lat_cell = ang
        # d <= eps implies sin(dlon/2) * cos(max|lat|) <= sin(eps / 2R)
        cos_max = math.cos(float(np.max(np.abs(self.phi)))) if len(lat) else 1.0
        ratio = math.sin(ang / 2) / cos_max if cos_max > 0 else 2.0
        self.lon_cell = 2 * math.asin(ratio) if ratio < 1 else None
        rows = np.floor(self.phi / self.lat_cell).astype(np.int64)
        if self.lon_cell is None:
            cols = np.zeros(len(lat), dtype=np.int64)
        else:
            cols = np.floor(self.lmb / self.lon_cell).astype(np.int64)
        self.cells = list(zip(rows.tolist(), cols.tolist()))
        buckets: Dict[Tuple[int, int], List[int]] = defaultdict(list)
        for i, c in enumerate(self.cells):
            buckets[c].append(i)
        self.buckets = {k: np.array(v, dtype=np.int64) for k, v in buckets.items()}

    def neighbors(self, i: int) -> np.ndarray:
        """Indices within eps of point i (itself included), ascending."""
        r, c = self.cells[i]
        parts = [self.buckets[k] for k in
                 ((r + dr, c + dc) for dr in (-1, 0, 1) for dc in (-1, 0, 1))
                 if k in self.buckets]
        cand = np.concatenate(parts)
        d = haversine_m_vec(self.phi[i], self.lmb[i], self.cos_phi[i],
                            self.phi[cand], self.lmb[cand], self.cos_phi[cand])
        return np.sort(cand[d <= self.eps])


def haversine_m_vec(phi1, lmb1, cos1, phi2, lmb2, cos2):
    h = np.sin((phi2 - phi1) / 2) ** 2 + cos1 * cos2 * np.sin((lmb2 - lmb1) / 2) ** 2
    return 2 * EARTH_RADIUS_M * np.arcsin(np.minimum(1.0, np.sqrt(h)))


def dbscan(points: Sequence[GeoPoint], eps: float, min_pts: int) -> List[int]:
    """DBSCAN labels under the haversine metric.

    Points are visited in input order and clusters grow breadth-first in
    ascending index order, so labels are deterministic. A border point
    reachable from two clusters goes to the one that reaches it first.
    """
    n = len(points)
    if n == 0:
        return []
    lat = np.fromiter((p.lat for p in points), dtype=float, count=n)
    lon = np.fromiter((p.lon for p in points), dtype=float, count=n)
    index = _GridIndex(lat, lon, eps)

    labels = np.full(n, _UNSEEN, dtype=np.int64)
    cluster = 0
    for i in range(n):
        if labels[i] != _UNSEEN:
            continue
        nbrs = index.neighbors(i)
        if len(nbrs) < min_pts:
            labels[i] = NOISE
            continue
        labels[i] = cluster
        queue = deque()
        while True:
            # a point is labeled when queued; only core points spread further
            grab = nbrs[labels[nbrs] < 0]
            fresh = grab[labels[grab] == _UNSEEN]
            labels[grab] = cluster
            queue.extend(fresh.tolist())
            while queue:
                nbrs = index.neighbors(queue.popleft())
                if len(nbrs) >= min_pts:
                    break
            else:
                break
        cluster += 1
    return labels.tolist()


def cluster_endpoints(links: Sequence[TripLink], params: ClusterParams = ClusterParams()
                      ) -> Tuple[List[FunctionalZone], EndpointAssignment]:
    """Cluster origins and destinations jointly (interleaved o0, d0, o1, d1, ...)."""
    if not links:
        raise EmptyInput("no links to cluster")
    points = []
    for l in links:
        points.append(l.origin_point)
        points.append(l.dest_point)
    labels = dbscan(points, params.eps, params.min_pts)
    zones = zones_from_labels(points, labels)
    return zones, EndpointAssignment(tuple(labels[0::2]), tuple(labels[1::2]))


def zones_from_labels(points: Sequence[GeoPoint], labels: Sequence[int]) -> List[FunctionalZone]:
    sums: Dict[int, List[float]] = {}
    for p, z in zip(points, labels):
        if z == NOISE:
            continue
        acc = sums.setdefault(z, [0.0, 0.0, 0])
        acc[0] += p.lat
        acc[1] += p.lon
        acc[2] += 1
    return [FunctionalZone(z, GeoPoint(s[0] / s[2], s[1] / s[2]), s[2])
            for z, s in sorted(sums.items())]


def aggregate_flows(links: Sequence[TripLink], assignment: EndpointAssignment,
                    zones: Sequence[FunctionalZone]) -> List[Flow]:
    """One flow per ordered pair of distinct zones, ordered by (origin, dest).

    Links with a noise endpoint and intra-zone links are dropped.
    """
    if len(assignment.origin) != len(links) or len(assignment.dest) != len(links):
        raise ValueError("assignment does not match links")
    centroid = {z.zone_id: z.centroid for z in zones}
    counts = Counter(
        (o, d) for o, d in zip(assignment.origin, assignment.dest)
        if o != NOISE and d != NOISE and o != d
    )
    return [Flow(o, d, n, centroid[o], centroid[d]) for (o, d), n in sorted(counts.items())]


def classify_flows(flows: Sequence[Flow]) -> List[Flow]:
    """Trend iff trip_count >= mean + population stddev of all counts."""
    if not flows:
        return []
    counts = [f.trip_count for f in flows]
    threshold = statistics.fmean(counts) + statistics.pstdev(counts)
    return [
        Flow(f.origin_zone, f.dest_zone, f.trip_count, f.representative_origin,
             f.representative_dest, TREND if f.trip_count >= threshold else SECONDARY)
        for f in flows
    ]


def top_flows(flows: Sequence[Flow], k: int) -> List[Flow]:
    if k < 1:
        raise ValueError("k must be at least 1")
    ranked = sorted(flows, key=lambda f: (-f.trip_count, f.origin_zone, f.dest_zone))
    return ranked[:k]


def flows_to_json(flows: Sequence[Flow]) -> str:
    return json.dumps([f.as_dict() for f in flows], indent=2) + "\n"


def flows_from_json(text: str) -> List[Flow]:
    return [Flow.from_dict(d) for d in json.loads(text)]
