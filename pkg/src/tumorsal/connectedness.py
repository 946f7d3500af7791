"""Boundary-seeded connectedness maps over the region graph.

Two maps are produced from the border regions of a partition:

* a truth map: for each region, the widest-path (maximin) connectedness to
  the border, where an edge between adjacent regions scores
  exp(-|gray_i - gray_j| / 0.5) and a path scores the minimum of its edges;
* a confidence map: the running maximum of edge confidences
  1 - max(h_i, h_j) along the selected strongest path, used to break ties
  between equal-truth paths and for diagnostics.

Border regions are the seeds: truth 1, confidence 1 - h(seed). A geodesic
baseline map is also provided: additive shortest-path distance to the border
with edge weights |gray_i - gray_j|, mapped through exp(-d / 0.5) so it shares
the truth map's orientation and range.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from itertools import count
from typing import Callable, Iterable, Sequence

import numpy as np

from .superpixel import RegionGraph

__all__ = [
    "INTENSITY_BANDWIDTH",
    "ConnectednessResult",
    "edge_truth",
    "edge_confidence",
    "widest_paths_from_seeds",
    "shortest_paths_from_seeds",
    "propagate",
    "geodesic_background",
]

# Bandwidth of all intensity-difference kernels (exp(-|dg| / bandwidth)).
INTENSITY_BANDWIDTH = 0.5


@dataclass(frozen=True, eq=False)
class ConnectednessResult:
    """Per-region truth and confidence of connectedness to the image border."""

    truth: np.ndarray
    confidence: np.ndarray


def edge_truth(gray_i: float, gray_j: float) -> float:
    """Connectedness of two adjacent regions from their mean intensities."""
    return math.exp(-abs(gray_i - gray_j) / INTENSITY_BANDWIDTH)


def edge_confidence(inhom_i: float, inhom_j: float) -> float:
    """Confidence of an adjacency: 1 - max of the two inhomogeneities."""
    return 1.0 - max(inhom_i, inhom_j)


def widest_paths_from_seeds(
    n: int,
    adjacency: Sequence[Sequence[int]],
    truth_of: Callable[[int, int], float],
    confidence_of: Callable[[int, int], float],
    seeds: Iterable[int],
    seed_confidence: Callable[[int], float],
) -> tuple[np.ndarray, np.ndarray]:
    """Best-first maximin propagation from seed nodes.

    Keys are lexicographic (truth descending, confidence descending); a node's
    value is replaced whenever a strictly better key reaches it, so the truth
    output satisfies the maximin fixed point exactly. Seed values are pinned.
    """
    truth = np.full(n, -1.0)
    conf = np.full(n, -1.0)
    seed_list = sorted(set(seeds))
    if not seed_list:
        raise ValueError("no seed regions")
    heap: list[tuple[float, float, int, int]] = []
    tick = count()
    for s in seed_list:
        truth[s] = 1.0
        conf[s] = seed_confidence(s)
        heapq.heappush(heap, (-1.0, -conf[s], next(tick), s))
    seed_set = frozenset(seed_list)

    while heap:
        neg_t, neg_c, _, r = heapq.heappop(heap)
        t, c = -neg_t, -neg_c
        if t != truth[r] or c != conf[r]:
            continue  # stale entry
        for q in adjacency[r]:
            if q in seed_set:
                continue
            t_q = min(t, truth_of(r, q))
            c_q = max(c, confidence_of(r, q))
            if (t_q, c_q) > (truth[q], conf[q]):
                truth[q] = t_q
                conf[q] = c_q
                heapq.heappush(heap, (-t_q, -c_q, next(tick), q))

    if bool((truth < 0.0).any()):
        raise ValueError("region graph is not connected to the border seeds")
    return truth, conf


def shortest_paths_from_seeds(
    n: int,
    adjacency: Sequence[Sequence[int]],
    weight_of: Callable[[int, int], float],
    seeds: Iterable[int],
) -> np.ndarray:
    """Additive shortest-path distances from the seed set (Dijkstra)."""
    seed_list = sorted(set(seeds))
    if not seed_list:
        raise ValueError("no seed regions")
    dist = np.full(n, np.inf)
    heap: list[tuple[float, int, int]] = []
    tick = count()
    for s in seed_list:
        dist[s] = 0.0
        heapq.heappush(heap, (0.0, next(tick), s))
    while heap:
        d, _, r = heapq.heappop(heap)
        if d != dist[r]:
            continue
        for q in adjacency[r]:
            cand = d + weight_of(r, q)
            if cand < dist[q]:
                dist[q] = cand
                heapq.heappush(heap, (cand, next(tick), q))
    if bool(np.isinf(dist).any()):
        raise ValueError("region graph is not connected to the border seeds")
    return dist


def propagate(graph: RegionGraph) -> ConnectednessResult:
    """Truth and confidence maps seeded at the border regions."""
    if not graph.border_regions:
        raise ValueError("graph has no border regions")
    gray, inhom = graph.gray, graph.inhom
    truth, conf = widest_paths_from_seeds(
        graph.n,
        graph.adjacency,
        lambda i, j: edge_truth(gray[i], gray[j]),
        lambda i, j: edge_confidence(inhom[i], inhom[j]),
        graph.border_regions,
        lambda s: 1.0 - float(inhom[s]),
    )
    return ConnectednessResult(truth=truth, confidence=conf)


def geodesic_background(graph: RegionGraph) -> np.ndarray:
    """Additive shortest-path background map, the comparison baseline.

    Edge weights are |gray_i - gray_j|; border regions sit at distance 0 and
    the map value is exp(-distance / 0.5), near 1 for background regions that
    reach the border through smooth paths.
    """
    if not graph.border_regions:
        raise ValueError("graph has no border regions")
    gray = graph.gray
    dist = shortest_paths_from_seeds(
        graph.n,
        graph.adjacency,
        lambda i, j: abs(float(gray[i]) - float(gray[j])),
        graph.border_regions,
    )
    return np.exp(-dist / INTENSITY_BANDWIDTH)
