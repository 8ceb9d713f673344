"""Brute-force reference computations.

Each oracle recomputes one statistic straight from its definition, reading
nothing from a graph but its node count and plain edge triples.  None of
them share code with the optimised implementations.
"""

from __future__ import annotations

import itertools
import math
from collections import defaultdict

import numpy as np
from scipy import integrate, special

from ..errors import OracleRefused, UndefinedStatisticError, ValidationError

# node-count bounds per oracle kind (cubic or worse)
LIMITS = {
    "components": 200, "triangles": 200, "paths": 200, "cores": 200,
    "pagerank": 500, "modularity": 500, "kendall": 5000,
}


def _guard(kind: str, size: int):
    limit = LIMITS.get(kind)
    if limit is not None and size > limit:
        raise OracleRefused(f"{kind} oracle refuses size {size} > {limit}")


def _arcs(g):
    return [(i, j, w) for i, j, w in g.edges()]


def _undirected_sets(g) -> list[set]:
    nb = [set() for _ in range(g.n)]
    for i, j, _ in _arcs(g):
        nb[i].add(j)
        nb[j].add(i)
    return nb


# -- connectivity ------------------------------------------------------------

def _closure(n, pairs) -> np.ndarray:
    reach = np.eye(n, dtype=bool)
    for i, j in pairs:
        reach[i, j] = True
    for k in range(n):  # Floyd-Warshall on booleans
        reach |= reach[:, k:k + 1] & reach[k:k + 1, :]
    return reach


def _count_classes(rel: np.ndarray) -> int:
    n = rel.shape[0]
    seen = [False] * n
    count = 0
    for i in range(n):
        if not seen[i]:
            count += 1
            for j in range(n):
                if rel[i, j]:
                    seen[j] = True
    return count


def component_counts(g) -> tuple[int, int]:
    """(#SCC, #WCC) from transitive closures."""
    _guard("components", g.n)
    arcs = [(i, j) for i, j, _ in _arcs(g)]
    r = _closure(g.n, arcs)
    mutual = r & r.T
    sym = _closure(g.n, arcs + [(j, i) for i, j in arcs])
    return _count_classes(mutual), _count_classes(sym)


# -- simple statistics -------------------------------------------------------

def reciprocity(g) -> float:
    arcs = {(i, j) for i, j, _ in _arcs(g)}
    if not arcs:
        raise UndefinedStatisticError("no edges")
    return sum((j, i) in arcs for i, j in arcs) / len(arcs)


def _pearson(pairs):
    n = len(pairs)
    mx = sum(x for x, _ in pairs) / n
    my = sum(y for _, y in pairs) / n
    sxy = sum((x - mx) * (y - my) for x, y in pairs)
    sxx = sum((x - mx) ** 2 for x, _ in pairs)
    syy = sum((y - my) ** 2 for _, y in pairs)
    if sxx == 0 or syy == 0:
        return None
    return sxy / math.sqrt(sxx * syy)


def assortativity(g, variant: str):
    if variant == "undirected":
        nb = _undirected_sets(g)
        pairs = [(len(nb[i]), len(nb[j])) for i in range(g.n) for j in nb[i]]
    else:
        deg = [0] * g.n
        arcs = _arcs(g)
        for i, j, _ in arcs:
            deg[i] += 1
            deg[j] += 1
        pairs = [(deg[i], deg[j]) for i, j, _ in arcs]
    return _pearson(pairs)


def triadic(g) -> tuple[float, float, float]:
    """(transitivity, clustering over degree>=2 nodes, clustering over all nodes)."""
    _guard("triangles", g.n)
    nb = _undirected_sets(g)
    n = g.n
    tri = [0] * n
    for a, b, c in itertools.combinations(range(n), 3):
        if b in nb[a] and c in nb[a] and c in nb[b]:
            tri[a] += 1
            tri[b] += 1
            tri[c] += 1
    triples = [len(s) * (len(s) - 1) // 2 for s in nb]
    trans = sum(tri) / sum(triples) if sum(triples) else 0.0
    local = [tri[v] / triples[v] if triples[v] else 0.0 for v in range(n)]
    elig = [local[v] for v in range(n) if len(nb[v]) >= 2]
    restricted = sum(elig) / len(elig) if elig else 0.0
    return trans, restricted, (sum(local) / n if n else 0.0)


def knn(g) -> list[tuple[int, float]]:
    nb = _undirected_sets(g)
    by_k = defaultdict(list)
    for v in range(g.n):
        if nb[v]:
            by_k[len(nb[v])].append(sum(len(nb[u]) for u in nb[v]) / len(nb[v]))
    return [(k, sum(vals) / len(vals)) for k, vals in sorted(by_k.items())]


def path_metrics(g, mode: str = "undirected_lwcc") -> tuple[float, int]:
    """Floyd-Warshall hop distances; averages over connected ordered pairs."""
    _guard("paths", g.n)
    n = g.n
    INF = float("inf")
    dist = [[0 if i == j else INF for j in range(n)] for i in range(n)]
    for i, j, _ in _arcs(g):
        dist[i][j] = 1
        if mode == "undirected_lwcc":
            dist[j][i] = 1
    for k in range(n):
        dk = dist[k]
        for i in range(n):
            dik = dist[i][k]
            if dik == INF:
                continue
            di = dist[i]
            for j in range(n):
                if dik + dk[j] < di[j]:
                    di[j] = dik + dk[j]
    if mode == "undirected_lwcc":
        # largest class of mutually connected nodes; ties to the lowest id
        best = None
        for v in range(n):
            comp = [u for u in range(n) if dist[v][u] < INF]
            if best is None or len(comp) > len(best):
                best = comp
        nodes = best or []
    else:
        nodes = list(range(n))
    vals = [dist[i][j] for i in nodes for j in nodes if i != j and dist[i][j] < INF]
    if not vals:
        raise UndefinedStatisticError("no connected pairs")
    return sum(vals) / len(vals), int(max(vals))


# -- cores -------------------------------------------------------------------

def coreness(g, variant: str = "total") -> list[int]:
    """Repeatedly delete nodes with fewer than k arcs inside, for k = 1, 2, ...

    ``total`` counts arcs in both directions, so a reciprocated pair adds two.
    """
    _guard("cores", g.n)
    n = g.n
    arcs = {(i, j) for i, j, _ in _arcs(g)}

    def deg(v, alive):
        if variant == "total":
            return sum(((u, v) in arcs) + ((v, u) in arcs) for u in alive)
        if variant == "in":
            return sum(1 for u in alive if (u, v) in arcs)
        return sum(1 for u in alive if (v, u) in arcs)

    core = [0] * n
    k = 1
    alive = set(range(n))
    while alive:
        changed = True
        while changed:
            changed = False
            for v in sorted(alive):
                if deg(v, alive) < k:
                    alive.discard(v)
                    changed = True
        for v in alive:
            core[v] = k
        k += 1
    return core


# -- backbone ----------------------------------------------------------------

def binomial_sf(w: int, trials: int, p: float) -> float:
    """P[Bin(trials, p) >= w] by direct summation of the binomial terms."""
    if w <= 0:
        return 1.0
    if trials > 1000:
        raise OracleRefused("binomial oracle limited to 1000 trials")
    return math.fsum(math.comb(trials, x) * p ** x * (1 - p) ** (trials - x)
                     for x in range(int(w), int(trials) + 1))


def mlf_gamma(g) -> list[float]:
    arcs = _arcs(g)
    T = sum(w for _, _, w in arcs)
    s_out = defaultdict(float)
    s_in = defaultdict(float)
    for i, j, w in arcs:
        s_out[i] += w
        s_in[j] += w
    return [binomial_sf(int(w), int(T), s_out[i] * s_in[j] / T ** 2) for i, j, w in arcs]


def disparity_integral(p: float, k: int) -> float:
    """1 - (k-1) * integral_0^p (1-x)^(k-2) dx, the uniform-null tail probability."""
    if k <= 1:
        return 1.0
    val, _ = integrate.quad(lambda x: (1 - x) ** (k - 2), 0.0, p, epsabs=1e-14, epsrel=1e-13)
    return 1.0 - (k - 1) * val


def disparity_alphas(g) -> list[tuple[float, float]]:
    arcs = _arcs(g)
    s_out = defaultdict(float)
    s_in = defaultdict(float)
    k_out = defaultdict(int)
    k_in = defaultdict(int)
    for i, j, w in arcs:
        s_out[i] += w
        s_in[j] += w
        k_out[i] += 1
        k_in[j] += 1
    return [(disparity_integral(w / s_out[i], k_out[i]), disparity_integral(w / s_in[j], k_in[j]))
            for i, j, w in arcs]


# -- ranking -----------------------------------------------------------------

def pagerank(g, damping: float = 0.85, weighted: bool = True, iters: int = 100_000,
             tol: float = 1e-15) -> np.ndarray:
    """Dense Google-matrix power iteration."""
    _guard("pagerank", g.n)
    n = g.n
    a = np.zeros((n, n))
    for i, j, w in _arcs(g):
        a[i, j] += w if weighted else 1.0
    rows = a.sum(axis=1)
    p = np.empty((n, n))
    for i in range(n):
        p[i] = a[i] / rows[i] if rows[i] > 0 else np.full(n, 1.0 / n)
    google = damping * p + (1 - damping) / n
    x = np.full(n, 1.0 / n)
    for _ in range(iters):
        nxt = x @ google
        if np.abs(nxt - x).sum() < tol:
            x = nxt
            break
        x = nxt
    return x / x.sum()


def kendall_tau(r1: list, r2: list) -> float:
    """Tau from the symmetric difference of the ordered-pair sets on shared items."""
    shared = set(r1) & set(r2)
    a = [x for x in r1 if x in shared]
    b = [x for x in r2 if x in shared]
    _guard("kendall", len(a))
    n = len(a)
    if n < 2:
        raise UndefinedStatisticError("fewer than two shared items")
    pa = {(a[i], a[j]) for i in range(n) for j in range(i + 1, n)}
    pb = {(b[i], b[j]) for i in range(n) for j in range(i + 1, n)}
    delta = len(pa ^ pb)
    return 1 - 2 * delta / (n * (n - 1))


def fagin(r1: list, r2: list, k: int) -> float:
    return sum(len(set(r1[:q]) & set(r2[:q])) / q for q in range(1, k + 1)) / k


# -- communities ---------------------------------------------------------------

def modularity(g, assignment, variant: str) -> float:
    """Double sum over node pairs of the modularity matrix."""
    _guard("modularity", g.n)
    n = g.n
    a = np.zeros((n, n))
    if variant == "undirected_unweighted":
        for i, j, _ in _arcs(g):
            a[i, j] = a[j, i] = 1.0
        k = a.sum(axis=1)
        two_m = a.sum()
        q = 0.0
        for i in range(n):
            for j in range(n):
                if assignment[i] == assignment[j]:
                    q += a[i, j] - k[i] * k[j] / two_m
        return q / two_m
    for i, j, w in _arcs(g):
        a[i, j] += w
    s_out = a.sum(axis=1)
    s_in = a.sum(axis=0)
    W = a.sum()
    q = 0.0
    for i in range(n):
        for j in range(n):
            if assignment[i] == assignment[j]:
                q += a[i, j] - s_out[i] * s_in[j] / W
    return q / W


def conductance(g, assignment, ca, cb, weighted: bool) -> float:
    side = {v: ("a" if assignment[v] == ca else "b") for v in range(g.n)
            if assignment[v] in (ca, cb)}
    cut = 0.0
    vol = {"a": 0.0, "b": 0.0}
    for i, j, w in _arcs(g):
        if i in side and j in side:
            x = w if weighted else 1.0
            vol[side[i]] += x
            vol[side[j]] += x
            if side[i] != side[j]:
                cut += x
    lo = min(vol.values())
    if lo == 0:
        raise UndefinedStatisticError("zero volume")
    return cut / lo


# -- distributions -----------------------------------------------------------

def ks_scan(sample, cdf, lo: int, hi: int) -> float:
    """max |ECDF(x) - F(x)| over every integer x in [lo, hi]."""
    xs = sorted(int(v) for v in sample if lo <= v <= hi)
    n = len(xs)
    worst = 0.0
    idx = 0
    for x in range(lo, hi + 1):
        while idx < n and xs[idx] <= x:
            idx += 1
        worst = max(worst, abs(idx / n - cdf(x)))
    return worst


def powerlaw_cdf(alpha: float, xmin: int):
    z0 = float(special.zeta(alpha, xmin))
    return lambda x: 1.0 - float(special.zeta(alpha, x + 1)) / z0


# -- projection ----------------------------------------------------------------

def projection(records, distinct_source_users: bool = False) -> dict:
    pairs = defaultdict(set)
    for su, si, tu, ti in records:
        if si != ti:
            pairs[(si, ti)].add(su if distinct_source_users else (su, tu))
    return {k: len(v) for k, v in pairs.items()}


# -- dispatcher ------------------------------------------------------------------

_KINDS = {
    "components": component_counts,
    "reciprocity": reciprocity,
    "assortativity": assortativity,
    "triadic": triadic,
    "knn": knn,
    "paths": path_metrics,
    "cores": coreness,
    "mlf": mlf_gamma,
    "disparity": disparity_alphas,
    "pagerank": pagerank,
    "modularity": modularity,
    "conductance": conductance,
}


def oracle(kind: str, g, *args, **kwargs):
    """Run the named brute-force oracle on ``g``."""
    try:
        fn = _KINDS[kind]
    except KeyError:
        raise ValidationError(f"unknown oracle {kind!r}") from None
    return fn(g, *args, **kwargs)
