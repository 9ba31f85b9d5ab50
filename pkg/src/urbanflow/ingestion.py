"""Reading geotagged observation files (uid, lat, lon, timestamp_ms)."""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, List, Tuple

from .geo import GeoPoint

logger = logging.getLogger(__name__)

COLUMNS = ("uid", "lat", "lon", "timestamp_ms")


class MalformedHeader(ValueError):
    pass


class RowError(ValueError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


@dataclass(frozen=True)
class ObservationRecord:
    uid: str
    point: GeoPoint
    timestamp_ms: int


@dataclass(frozen=True)
class Dataset:
    records: Tuple[ObservationRecord, ...]
    source_path: str
    rejected_count: int = 0
    # (line number, reason) for every rejected row
    rejections: Tuple[Tuple[int, str], ...] = field(default=(), compare=False)

    def __len__(self):
        return len(self.records)


def _parse_float(text: str) -> float:
    value = float(text)
    if not math.isfinite(value):
        raise ValueError(text)
    return value


def _parse_timestamp(text: str) -> int:
    try:
        return int(text)
    except ValueError:
        value = float(text)
        if not value.is_integer():
            raise
        return int(value)


def parse_row(fields: List[str], index: dict) -> ObservationRecord:
    """Turn one CSV row into a record; raises ValueError carrying a reason code."""
    if len(fields) < len(index):
        raise ValueError("WrongFieldCount")
    uid = fields[index["uid"]].strip()
    if not uid:
        raise ValueError("EmptyUid")
    try:
        lat = _parse_float(fields[index["lat"]])
        lon = _parse_float(fields[index["lon"]])
    except ValueError:
        raise ValueError("BadCoordinate") from None
    try:
        ts = _parse_timestamp(fields[index["timestamp_ms"]].strip())
    except ValueError:
        raise ValueError("BadTimestamp") from None
    if not -90.0 <= lat <= 90.0:
        raise ValueError("OutOfRangeLatitude")
    if not -180.0 <= lon <= 180.0:
        raise ValueError("OutOfRangeLongitude")
    if ts <= 0:
        raise ValueError("NonPositiveTimestamp")
    return ObservationRecord(uid, GeoPoint(lat, lon), ts)


def _looks_numeric(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def _header_index(header: List[str]) -> dict:
    names = [h.strip().lower() for h in header]
    missing = [c for c in COLUMNS if c not in names]
    if missing:
        raise MalformedHeader(f"header {header!r} lacks columns {missing}")
    return {c: names.index(c) for c in COLUMNS}


def read_observations(path, strict: bool = False) -> Dataset:
    """Read an observation CSV.

    The first line is a header naming ``uid,lat,lon,timestamp_ms`` in any
    order. A file whose first field parses as a number is taken as
    headerless, in that column order. Blank lines are not rows.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(str(path))

    records: List[ObservationRecord] = []
    rejections: List[Tuple[int, str]] = []
    index = None
    with path.open(newline="", encoding="utf-8-sig") as fh:
        for line_no, fields in enumerate(csv.reader(fh), start=1):
            if not fields or all(not f.strip() for f in fields):
                continue
            if index is None:
                if _looks_numeric(fields[0]):
                    index = {c: i for i, c in enumerate(COLUMNS)}
                else:
                    index = _header_index(fields)
                    continue
            try:
                records.append(parse_row(fields, index))
            except ValueError as exc:
                if strict:
                    raise RowError(line_no, str(exc)) from None
                rejections.append((line_no, str(exc)))

    if rejections:
        logger.info("%s: rejected %d rows", path, len(rejections))
    return Dataset(tuple(records), str(path), len(rejections), tuple(rejections))


def write_observations(path, records: Iterable[ObservationRecord]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COLUMNS)
        for r in records:
            w.writerow([r.uid, repr(r.point.lat), repr(r.point.lon), r.timestamp_ms])
