"""Earth mover's distance between images and the delta-image of an image.

``emd_exact`` is a test oracle: successive shortest augmenting paths on the bipartite pixel
graph, with Bellman-Ford on the residual network. It is only meant for images of at most
8x8 pixels.
"""
from dataclasses import dataclass

import networkx as nx
import numpy as np

from racer.estimators import check_metric, gm_landscape
from racer.exceptions import NoMassError, OracleSizeError
from racer.grid_geometry import composed_distance
from racer.utils import as_image

ORACLE_MAX_EXTENT = 8


@dataclass(frozen=True)
class DeltaImage:
    extent: tuple
    location: tuple
    mass: float

    def to_array(self):
        image = np.zeros(self.extent)
        image[self.location] = self.mass
        return image


def delta_image(image, p):
    image = as_image(image)
    return DeltaImage(image.shape, tuple(p), float(np.abs(image).sum()))


def emd_to_delta(image, p, metric="composed"):
    """Closed form sum_s I(s) d(s, p) / E, E the total intensity."""
    image = as_image(image)
    total = image.sum()
    if not total > 0:
        raise NoMassError()
    return float(gm_landscape(image, metric).cost[tuple(p)] / total)


def _ground_distance(a, b, metric):
    if metric == "composed":
        return composed_distance(a, b)
    return float(np.hypot(a[0] - b[0], a[1] - b[1]))


def _add_arc(residual, u, v, capacity, cost):
    residual.add_edge(u, v, capacity=capacity, weight=cost)


def _push(residual, u, v, amount):
    """Move ``amount`` units along u -> v, keeping only arcs with positive residual capacity."""
    forward = residual[u][v]
    cost = forward["weight"]
    forward["capacity"] -= amount
    if forward["capacity"] <= 1e-12:
        residual.remove_edge(u, v)
    if residual.has_edge(v, u):
        residual[v][u]["capacity"] += amount
    else:
        _add_arc(residual, v, u, amount, -cost)


def min_cost_flow(supply, demand, metric="composed"):
    """Flows f[(i, j)] from source pixels to target pixels moving min(total supply, total demand)."""
    residual = nx.DiGraph()
    for pixel, mass in supply.items():
        _add_arc(residual, "source", ("a", pixel), mass, 0)
        for target in demand:
            _add_arc(residual, ("a", pixel), ("b", target), np.inf, _ground_distance(pixel, target, metric))
    for pixel, mass in demand.items():
        _add_arc(residual, ("b", pixel), "sink", mass, 0)

    remaining = min(sum(supply.values()), sum(demand.values()))
    tolerance = 1e-12 * max(remaining, 1.0)
    flows = {}
    while remaining > tolerance:
        try:
            path = nx.bellman_ford_path(residual, "source", "sink", weight="weight")
        except nx.NetworkXNoPath:
            break
        amount = min(remaining, min(residual[u][v]["capacity"] for u, v in zip(path, path[1:])))
        for u, v in zip(path, path[1:]):
            _push(residual, u, v, amount)
            if u[0] == "a" and v[0] == "b":
                flows[(u[1], v[1])] = flows.get((u[1], v[1]), 0.0) + amount
            elif u[0] == "b" and v[0] == "a":
                flows[(v[1], u[1])] -= amount
        remaining -= amount
    return {pair: flow for pair, flow in flows.items() if flow > tolerance}


def emd_exact(a, b, metric="composed"):
    """Minimal transport cost between two non-negative images, divided by the total flow."""
    check_metric(metric)
    a, b = as_image(a, "first image"), as_image(b, "second image")
    for image in (a, b):
        if max(image.shape) > ORACLE_MAX_EXTENT:
            raise OracleSizeError(f"exact EMD is a test oracle limited to {ORACLE_MAX_EXTENT}x{ORACLE_MAX_EXTENT} images, got {image.shape}")
        if not image.sum() > 0:
            raise NoMassError()
    supply = {tuple(int(i) for i in p): float(a[tuple(p)]) for p in np.argwhere(a > 0)}
    demand = {tuple(int(i) for i in p): float(b[tuple(p)]) for p in np.argwhere(b > 0)}
    flows = min_cost_flow(supply, demand, metric)
    total_flow = sum(flows.values())
    cost = sum(flow * _ground_distance(i, j, metric) for (i, j), flow in flows.items())
    return cost / total_flow
