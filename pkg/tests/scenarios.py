"""Synthetic-city instances shared by the router and acceptance tests."""

from urbanflow.providers.offline import CityConfig, SyntheticCity

QUIET = CityConfig(congested_share=0.0)


def city_with_congestion(k, origin=(3, 4), dest=(21, 27), seed=11, factor=2.0):
    """A city whose driving route origin -> dest has exactly k congested steps,
    spread evenly along the path."""
    base = SyntheticCity(seed, QUIET)
    path = base.shortest_path(origin, dest)
    edges = list(zip(path, path[1:]))
    picks = [edges[(i + 1) * len(edges) // (k + 1)] for i in range(k)]
    city = SyntheticCity(seed, QUIET, {e: factor for e in picks})
    return city, city.node_point(origin), city.node_point(dest)
