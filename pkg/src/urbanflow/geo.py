"""Geographic primitives: points, great-circle distance, speed and the
encoded polyline codec."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterable, List, Sequence

EARTH_RADIUS_M = 6_371_000.0

_PRECISION = 100_000  # 5 decimal places
_MIN_CHAR = 63
_MAX_CHAR = 126

# 10-bit lookup tables: two continuation characters, or the final one or two
_PAIR = [bytes([((v & 31) | 32) + 63, (((v >> 5) & 31) | 32) + 63]) for v in range(1024)]
_TAIL = [bytes([v + 63]) if v < 32 else bytes([((v & 31) | 32) + 63, (v >> 5) + 63])
         for v in range(1024)]
# one encoded value: any continuation characters, then a final one
_VALUE = re.compile(rb"[_-~]*[?-^]")
# character -> its 5-bit payload as a base-32 digit
_DIGITS = bytes(b"0123456789abcdefghijklmnopqrstuv"[(c - 63) & 31] for c in range(256))


class InvalidCoordinate(ValueError):
    pass


class PolylineError(ValueError):
    pass


class TruncatedEncoding(PolylineError):
    pass


class InvalidCharacter(PolylineError):
    pass


class EmptyPath(ValueError):
    pass


class ZeroDuration(ValueError):
    pass


@dataclass(frozen=True)
class GeoPoint:
    lat: float
    lon: float

    def __post_init__(self):
        # NaN fails both comparisons, so it is rejected too
        if not -90.0 <= self.lat <= 90.0:
            raise InvalidCoordinate(f"latitude out of range: {self.lat!r}")
        if not -180.0 <= self.lon <= 180.0:
            raise InvalidCoordinate(f"longitude out of range: {self.lon!r}")

    def as_dict(self) -> dict:
        return {"lat": self.lat, "lon": self.lon}

    @classmethod
    def from_dict(cls, d: dict) -> "GeoPoint":
        return cls(float(d["lat"]), float(d["lon"]))


Path = List[GeoPoint]


def haversine_distance(a: GeoPoint, b: GeoPoint) -> float:
    """Great-circle distance in meters on a sphere of radius 6,371 km."""
    phi1 = math.radians(a.lat)
    phi2 = math.radians(b.lat)
    dphi = phi2 - phi1
    dlmb = math.radians(b.lon - a.lon)
    h = math.sin(dphi / 2) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(dlmb / 2) ** 2
    return 2 * EARTH_RADIUS_M * math.asin(min(1.0, math.sqrt(h)))


def speed_kmh(distance: float, duration_ms: float) -> float:
    if duration_ms <= 0:
        raise ZeroDuration(f"duration must be positive, got {duration_ms!r}")
    return (distance / 1000.0) / (duration_ms / 3_600_000.0)


def _to_fixed(x: float) -> int:
    # round half away from zero, as the reference encoder does
    if x >= 0:
        return int(x * _PRECISION + 0.5)
    return -int(-x * _PRECISION + 0.5)


def encode_polyline(points: Sequence[GeoPoint]) -> str:
    """Encode a non-empty path, latitude before longitude, 5-decimal precision."""
    if len(points) == 0:
        raise EmptyPath("cannot encode an empty path")
    out: list = []
    append = out.append
    prev_lat = prev_lon = 0
    for p in points:
        lat = _to_fixed(p.lat)
        lon = _to_fixed(p.lon)
        for delta in (lat - prev_lat, lon - prev_lon):
            v = ~(delta << 1) if delta < 0 else delta << 1
            while v >= 1024:
                append(_PAIR[v & 1023])
                v >>= 10
            append(_TAIL[v])
        prev_lat, prev_lon = lat, lon
    return b"".join(out).decode("ascii")


def _check_characters(text: str) -> bytes:
    try:
        data = text.encode("latin-1")
    except UnicodeEncodeError as exc:
        raise InvalidCharacter(
            f"character {text[exc.start]!r} at offset {exc.start} is outside [63, 126]"
        ) from None
    if data and (min(data) < _MIN_CHAR or max(data) > _MAX_CHAR):
        for i, b in enumerate(data):
            if not _MIN_CHAR <= b <= _MAX_CHAR:
                raise InvalidCharacter(
                    f"character {chr(b)!r} at offset {i} is outside [63, 126]"
                )
    return data


def decode_values(text: str) -> List[int]:
    """Decode the raw delta-coded integers of a polyline string."""
    data = _check_characters(text)
    if data and data[-1] > _MIN_CHAR + 31:
        raise TruncatedEncoding("continuation bit set on the final chunk")
    # chunks are little-endian base-32 digits
    raw = [int(chunk.translate(_DIGITS)[::-1], 32) for chunk in _VALUE.findall(data)]
    return [~(v >> 1) if v & 1 else v >> 1 for v in raw]


def decode_polyline(text: str) -> Path:
    values = decode_values(text)
    if len(values) % 2:
        raise TruncatedEncoding("latitude without a matching longitude")
    points = []
    lat = lon = 0
    for i in range(0, len(values), 2):
        lat += values[i]
        lon += values[i + 1]
        points.append(GeoPoint(lat / _PRECISION, lon / _PRECISION))
    return points


class EncodedPolyline(str):
    """A polyline string validated at construction."""

    def __new__(cls, text: str):
        decode_polyline(text)
        return super().__new__(cls, text)

    def decode(self) -> Path:
        return decode_polyline(self)


def path_length(points: Iterable[GeoPoint]) -> float:
    total = 0.0
    prev = None
    for p in points:
        if prev is not None:
            total += haversine_distance(prev, p)
        prev = p
    return total
