"""Per-option comparison metrics, per-flow comparisons and cross-flow means."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence

from .providers.base import TravelMode

DEFAULT_FARE = 4.30  # BRL per transit boarding
LABELS = ("Transit", "RideHail", "Hybrid1", "Hybrid2")
METRIC_FIELDS = ("price", "duration", "wait", "distance", "walk_distance")
CSV_COLUMNS = ("flow_id", "label", "price_brl", "duration_s", "wait_s", "distance_m",
               "walk_distance_m")


class EmptyInput(ValueError):
    pass


@dataclass(frozen=True)
class OptionMetrics:
    price: float  # BRL
    duration: float  # seconds in motion, waits excluded
    wait: float  # seconds
    distance: float  # meters
    walk_distance: float  # meters

    def as_dict(self) -> dict:
        return {"price": self.price, "duration_s": self.duration, "wait_s": self.wait,
                "distance_m": self.distance, "walk_distance_m": self.walk_distance}

    @classmethod
    def from_dict(cls, d: dict) -> "OptionMetrics":
        return cls(float(d["price"]), float(d["duration_s"]), float(d["wait_s"]),
                   float(d["distance_m"]), float(d["walk_distance_m"]))


def compute_metrics(option, fare: float = DEFAULT_FARE) -> OptionMetrics:
    """Metrics of anything exposing ``steps``; each transit boarding pays ``fare``."""
    price = duration = wait = distance = walk = 0.0
    for s in option.steps:
        duration += s.duration
        wait += s.wait
        distance += s.distance
        if s.mode is TravelMode.TRANSIT:
            price += fare
        elif s.mode is TravelMode.RIDE_HAIL:
            price += s.price
        elif s.mode is TravelMode.WALK:
            walk += s.distance
    return OptionMetrics(price, duration, wait, distance, walk)


@dataclass(frozen=True)
class FlowComparison:
    flow_id: str
    # label -> metrics, None when the flow has no option with that label
    metrics: Dict[str, Optional[OptionMetrics]]

    def present(self) -> List[str]:
        return [l for l in LABELS if self.metrics.get(l) is not None]


def compare_flow(flow_id: str, options) -> FlowComparison:
    by_label = {}
    for opt in options:
        if opt.label in LABELS and opt.label not in by_label:
            by_label[opt.label] = opt.metrics
    return FlowComparison(flow_id, {l: by_label.get(l) for l in LABELS})


@dataclass(frozen=True)
class AggregateReport:
    flow_count: int
    # label -> mean metrics over the flows where the label exists
    means: Dict[str, Optional[OptionMetrics]]
    label_counts: Dict[str, int]


def aggregate(comparisons: Sequence[FlowComparison]) -> AggregateReport:
    if not comparisons:
        raise EmptyInput("no flow comparisons to aggregate")
    means: Dict[str, Optional[OptionMetrics]] = {}
    counts = {}
    for label in LABELS:
        present = [c.metrics[label] for c in comparisons if c.metrics.get(label) is not None]
        counts[label] = len(present)
        if not present:
            means[label] = None
            continue
        n = len(present)
        means[label] = OptionMetrics(*(
            sum(getattr(m, f) for m in present) / n for f in METRIC_FIELDS
        ))
    return AggregateReport(len(comparisons), means, counts)


def money(value: float) -> str:
    return str(Decimal(repr(value)).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


def _csv_row(flow_id: str, label: str, m: OptionMetrics) -> list:
    return [flow_id, label, money(m.price), f"{m.duration:.1f}", f"{m.wait:.1f}",
            f"{m.distance:.1f}", f"{m.walk_distance:.1f}"]


def emit_report(report: AggregateReport, comparisons: Iterable[FlowComparison], out_dir) -> List[Path]:
    """Write report.csv (one row per flow and present label) and report.json."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    comparisons = list(comparisons)
    csv_path = out_dir / "report.csv"
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for c in comparisons:
            for label in c.present():
                w.writerow(_csv_row(c.flow_id, label, c.metrics[label]))

    doc = {
        "flow_count": report.flow_count,
        "label_counts": report.label_counts,
        "means": {l: (m.as_dict() if m else None) for l, m in report.means.items()},
        "flows": [
            {"flow_id": c.flow_id,
             "metrics": {l: (m.as_dict() if m else None) for l, m in c.metrics.items()}}
            for c in comparisons
        ],
    }
    json_path = out_dir / "report.json"
    json_path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    return [csv_path, json_path]


def metrics_table(report: AggregateReport) -> Dict[str, Dict[str, float]]:
    """metric name -> label -> mean, for present labels only."""
    return {f: {l: getattr(m, f) for l, m in report.means.items() if m is not None}
            for f in METRIC_FIELDS}

