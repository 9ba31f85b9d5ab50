"""Route providers: the offline synthetic city and HTTP adapters."""

from .base import (
    DrivingRoute,
    DrivingStep,
    NoRoute,
    ProviderConfig,
    ProviderUnavailable,
    RideEstimate,
    RouteProvider,
    RouteStep,
    TransitItinerary,
    TravelMode,
)
from .offline import CityConfig, SyntheticCity


def make_provider(cfg: ProviderConfig) -> RouteProvider:
    if cfg.kind == "offline":
        return SyntheticCity(seed=cfg.seed)
    from .http import HttpProvider

    return HttpProvider(cfg)


__all__ = [
    "CityConfig", "DrivingRoute", "DrivingStep", "NoRoute", "ProviderConfig",
    "ProviderUnavailable", "RideEstimate", "RouteProvider", "RouteStep",
    "SyntheticCity", "TransitItinerary", "TravelMode", "make_provider",
]
