"""Macroscopic statistics of instance graphs.

Every statistic marked as orientation-free is computed on the undirected
view (sum rule, weights ignored).  Undefined values are ``None``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import shortest_path

from .errors import UndefinedStatisticError, ValidationError
from .graph import InstanceGraph, UndirectedGraph, components, induced_subgraph, undirected_view

EXACT_PATHS_MAX = 20_000
PATH_SAMPLE_SOURCES = 1_000


def reciprocity(g: InstanceGraph) -> float:
    """Fraction of edges (i, j) whose reverse (j, i) is also an edge."""
    if g.m == 0:
        raise UndefinedStatisticError("reciprocity of a graph without edges")
    keys = g.src * g.n + g.dst  # sorted, since edges are stored by (src, dst)
    rev = g.dst * g.n + g.src
    pos = np.searchsorted(keys, rev)
    pos[pos == len(keys)] = 0
    return float(np.count_nonzero(keys[pos] == rev) / g.m)


def density(g: InstanceGraph) -> float:
    if g.n < 2:
        raise UndefinedStatisticError("density needs at least two nodes")
    return g.m / (g.n * (g.n - 1))


@dataclass(frozen=True)
class DegreeSummary:
    avg_degree: float
    avg_in_degree: float
    pct_sources: float
    pct_sinks: float
    in_degree: np.ndarray
    out_degree: np.ndarray
    total_degree: np.ndarray
    undirected_degree: np.ndarray


def degree_summary(g: InstanceGraph, ug: UndirectedGraph | None = None) -> DegreeSummary:
    """Average degrees and source/sink fractions.

    ``avg_degree`` is taken on the undirected view (``2|E_u| / n``);
    ``avg_in_degree`` is ``|E| / n``.  Sources have in-degree 0, sinks
    out-degree 0.
    """
    if g.n == 0:
        raise UndefinedStatisticError("degree summary of an empty graph")
    ug = ug or undirected_view(g)
    return DegreeSummary(
        avg_degree=2 * ug.m / g.n,
        avg_in_degree=g.m / g.n,
        pct_sources=float(np.count_nonzero(g.in_degree == 0) / g.n),
        pct_sinks=float(np.count_nonzero(g.out_degree == 0) / g.n),
        in_degree=g.in_degree.copy(),
        out_degree=g.out_degree.copy(),
        total_degree=g.degree.copy(),
        undirected_degree=ug.degree.copy(),
    )


def _pearson(x: np.ndarray, y: np.ndarray) -> float | None:
    x = x.astype(np.float64)
    y = y.astype(np.float64)
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx <= 0 or syy <= 0:
        return None
    return float(dx @ dy) / float(np.sqrt(sxx * syy))


def degree_assortativity(g: InstanceGraph, variant: str = "undirected",
                         ug: UndirectedGraph | None = None) -> float | None:
    """Pearson correlation of degrees at the two ends of each edge.

    ``undirected`` lists every undirected edge in both orientations with
    undirected degrees; ``directed_total`` uses each arc once with total
    (in + out) degree at both ends.  Returns ``None`` when either degree
    sequence has zero variance.
    """
    if variant == "undirected":
        ug = ug or undirected_view(g)
        if ug.m < 1:
            raise UndefinedStatisticError("assortativity needs at least one edge")
        d = ug.degree
        x = np.concatenate((d[ug.u], d[ug.v]))
        y = np.concatenate((d[ug.v], d[ug.u]))
    elif variant == "directed_total":
        if g.m < 2:
            raise UndefinedStatisticError("assortativity needs at least two edges")
        d = g.degree
        x, y = d[g.src], d[g.dst]
    else:
        raise ValidationError(f"unknown assortativity variant {variant!r}")
    return _pearson(x, y)


@dataclass(frozen=True)
class PathMetrics:
    avg_path_length: float
    diameter: int
    mode: str
    sampled: bool
    sources: int
    nodes: int


def path_metrics(g: InstanceGraph, mode: str = "undirected_lwcc",
                 exact_max: int = EXACT_PATHS_MAX, samples: int = PATH_SAMPLE_SOURCES,
                 seed: int = 0, chunk: int = 256) -> PathMetrics:
    """Average shortest-path length and diameter in unweighted hops.

    ``undirected_lwcc`` works on the largest weakly connected component
    with orientation discarded; ``directed_reachable`` averages over all
    ordered pairs (i, j), i != j, with j reachable from i.  Above
    ``exact_max`` nodes, BFS runs from ``samples`` seeded random sources.
    """
    if mode == "undirected_lwcc":
        sub = induced_subgraph(g, components(g).largest_wcc()) if g.n else g
        directed = False
    elif mode == "directed_reachable":
        sub = g
        directed = True
    else:
        raise ValidationError(f"unknown path mode {mode!r}")
    n = sub.n
    if n < 2:
        raise UndefinedStatisticError("path metrics need at least two nodes")
    a = sub.adjacency(weighted=False)
    sampled = n > exact_max
    if sampled:
        rng = np.random.default_rng(seed)
        sources = np.sort(rng.choice(n, size=min(samples, n), replace=False))
    else:
        sources = np.arange(n)
    total = 0.0
    pairs = 0
    diameter = 0
    for start in range(0, len(sources), chunk):
        idx = sources[start:start + chunk]
        dist = shortest_path(a, method="D", directed=directed, unweighted=True, indices=idx)
        finite = np.isfinite(dist) & (dist > 0)
        vals = dist[finite]
        if vals.size:
            total += float(vals.sum())
            pairs += int(vals.size)
            diameter = max(diameter, int(vals.max()))
    if pairs == 0:
        raise UndefinedStatisticError("no pair of distinct connected nodes")
    return PathMetrics(total / pairs, diameter, mode, sampled, len(sources), n)


@dataclass(frozen=True)
class TriadicStats:
    transitivity: float
    clustering_restricted: float
    clustering_full: float
    local_clustering: np.ndarray


def triangles_per_node(ug: UndirectedGraph, block: int = 512) -> np.ndarray:
    a = ug.adjacency
    tri = np.zeros(ug.n)
    for start in range(0, ug.n, block):
        rows = a[start:start + block]
        tri[start:start + block] = np.asarray((rows @ a).multiply(rows).sum(axis=1)).ravel()
    return tri / 2


def triadic_stats(g: InstanceGraph, ug: UndirectedGraph | None = None) -> TriadicStats:
    """Transitivity and the two averages of the local clustering coefficient.

    ``clustering_restricted`` averages over nodes of degree >= 2 only;
    ``clustering_full`` averages over all nodes with zeros for the rest.
    """
    ug = ug or undirected_view(g)
    d = ug.degree.astype(np.float64)
    tri = triangles_per_node(ug)
    triads = d * (d - 1) / 2
    ok = d >= 2
    local = np.zeros(ug.n)
    local[ok] = tri[ok] / triads[ok]
    total_triads = triads.sum()
    transitivity = float(tri.sum() / total_triads) if total_triads > 0 else 0.0
    restricted = float(local[ok].mean()) if ok.any() else 0.0
    full = float(local.mean()) if ug.n else 0.0
    return TriadicStats(transitivity, restricted, full, local)


def knn_distribution(g: InstanceGraph, ug: UndirectedGraph | None = None) -> list[tuple[int, float]]:
    """Mean neighbour degree averaged over the nodes of each degree ``k >= 1``."""
    ug = ug or undirected_view(g)
    d = ug.degree.astype(np.float64)
    nbr_sum = ug.adjacency @ d
    has = d > 0
    per_node = np.zeros(ug.n)
    per_node[has] = nbr_sum[has] / d[has]
    ks = ug.degree[has]
    out = []
    for k in np.unique(ks):
        out.append((int(k), float(per_node[has][ks == k].mean())))
    return out


def loglog_slope(points: list[tuple[int, float]]) -> float | None:
    """Least-squares slope of log knn against log k."""
    if len(points) < 2:
        return None
    k = np.log([p[0] for p in points])
    y = np.log([p[1] for p in points])
    return float(np.polyfit(k, y, 1)[0])
