"""urbanflow: mine origin-destination flows from geotagged posts and compare
transit, ride-hail and hybrid routes for the busiest ones."""

from .geo import GeoPoint, decode_polyline, encode_polyline, haversine_distance
from .ingestion import Dataset, ObservationRecord, read_observations
from .linkage import FilterConfig, StageCounts, TripLink, run_filter_pipeline
from .flows import ClusterParams, Flow, FunctionalZone, cluster_endpoints
from .router import RouteOption, RouterConfig, compute_route_options, label_options

__version__ = "0.1.0"

__all__ = [
    "ClusterParams", "Dataset", "FilterConfig", "Flow", "FunctionalZone", "GeoPoint",
    "ObservationRecord", "RouteOption", "RouterConfig", "StageCounts", "TripLink",
    "cluster_endpoints", "compute_route_options", "decode_polyline", "encode_polyline",
    "haversine_distance", "label_options", "read_observations", "run_filter_pipeline",
]
