"""Community structure: Louvain optimisation, modularity, pairwise conductance.

Two modularity variants are supported.  ``undirected_unweighted`` works on
the undirected simple view; ``directed_weighted`` uses arc weights with the
directed null model ``s_i^out * s_j^in / W``.  Louvain runs one engine for
both, since the undirected score equals the directed one on the graph with
every undirected edge replaced by two unit arcs.
"""

from __future__ import annotations

import csv
import itertools
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import UndefinedStatisticError, ValidationError
from .graph import InstanceGraph, _data_rows, _open_text, undirected_view

log = logging.getLogger(__name__)

VARIANTS = ("undirected_unweighted", "directed_weighted")
SIGNIFICANT_SIZE = 10


@dataclass(frozen=True)
class Partition:
    assignment: np.ndarray
    method: str = "unknown"
    threshold: int = SIGNIFICANT_SIZE

    @classmethod
    def normalized(cls, assignment, method="unknown", threshold=SIGNIFICANT_SIZE) -> "Partition":
        """Relabel communities 0..c-1 by descending size, ties by lowest member."""
        a = np.asarray(assignment, dtype=np.int64)
        if a.size == 0:
            return cls(a, method, threshold)
        uniq, first, inv, counts = np.unique(a, return_index=True, return_inverse=True,
                                             return_counts=True)
        order = np.lexsort((first, -counts))
        rank = np.empty(len(uniq), dtype=np.int64)
        rank[order] = np.arange(len(uniq))
        return cls(rank[inv], method, threshold)

    @property
    def sizes(self) -> np.ndarray:
        return np.bincount(self.assignment) if self.assignment.size else np.zeros(0, dtype=int)

    @property
    def count(self) -> int:
        return len(self.sizes)

    @property
    def significant_count(self) -> int:
        return int(np.count_nonzero(self.sizes >= self.threshold))

    def members(self, c: int) -> np.ndarray:
        return np.flatnonzero(self.assignment == c)


@dataclass(frozen=True)
class ModularityScore:
    value: float
    variant: str


def _check_partition(g: InstanceGraph, partition) -> np.ndarray:
    a = partition.assignment if isinstance(partition, Partition) else np.asarray(partition)
    if a.shape != (g.n,):
        raise ValidationError(f"partition covers {a.size} nodes, graph has {g.n}")
    if a.size and a.min() < 0:
        raise ValidationError("partition leaves nodes unassigned")
    return a.astype(np.int64)


def modularity(g: InstanceGraph, partition, variant: str = "undirected_unweighted") -> ModularityScore:
    a = _check_partition(g, partition)
    if variant == "undirected_unweighted":
        ug = undirected_view(g)
        m = ug.m
        if m == 0:
            raise UndefinedStatisticError("modularity of a graph without edges")
        inside = np.count_nonzero(a[ug.u] == a[ug.v])
        d_c = np.bincount(a, weights=ug.degree, minlength=a.max() + 1)
        q = inside / m - float(np.sum((d_c / (2 * m)) ** 2))
    elif variant == "directed_weighted":
        W = g.total_weight
        if W == 0:
            raise UndefinedStatisticError("modularity of a graph without edges")
        same = a[g.src] == a[g.dst]
        inside = float(g.weight[same].sum())
        k = a.max() + 1
        s_out = np.bincount(a, weights=g.out_strength, minlength=k)
        s_in = np.bincount(a, weights=g.in_strength, minlength=k)
        q = (inside - float(s_out @ s_in) / W) / W
    else:
        raise ValidationError(f"unknown modularity variant {variant!r}")
    return ModularityScore(float(q), variant)


# -- Louvain ---------------------------------------------------------------

class _Level:
    """Weighted directed graph with self-loops, as adjacency dicts."""

    def __init__(self, n, arcs):
        self.n = n
        self.out = [dict() for _ in range(n)]
        self.inn = [dict() for _ in range(n)]
        self.loop = [0.0] * n
        for i, j, w in arcs:
            if i == j:
                self.loop[i] += w
            else:
                self.out[i][j] = self.out[i].get(j, 0.0) + w
                self.inn[j][i] = self.inn[j].get(i, 0.0) + w
        self.s_out = [sum(d.values()) + self.loop[i] for i, d in enumerate(self.out)]
        self.s_in = [sum(d.values()) + self.loop[i] for i, d in enumerate(self.inn)]

    def aggregate(self, comm: list[int]) -> "_Level":
        k = max(comm) + 1
        acc: dict = {}
        for i in range(self.n):
            ci = comm[i]
            if self.loop[i]:
                acc[(ci, ci)] = acc.get((ci, ci), 0.0) + self.loop[i]
            for j, w in self.out[i].items():
                key = (ci, comm[j])
                acc[key] = acc.get(key, 0.0) + w
        return _Level(k, [(i, j, w) for (i, j), w in sorted(acc.items())])


def _local_moving(level: _Level, W: float, rng: np.random.Generator) -> tuple[list[int], bool]:
    n = level.n
    comm = list(range(n))
    tot_out = level.s_out[:]
    tot_in = level.s_in[:]
    order = rng.permutation(n).tolist()
    moved_any = False
    improved = True
    while improved:
        improved = False
        for i in order:
            ci = comm[i]
            so, si = level.s_out[i], level.s_in[i]
            links: dict[int, float] = {}
            for j, w in level.out[i].items():
                cj = comm[j]
                links[cj] = links.get(cj, 0.0) + w
            for j, w in level.inn[i].items():
                cj = comm[j]
                links[cj] = links.get(cj, 0.0) + w
            tot_out[ci] -= so
            tot_in[ci] -= si
            best_c = ci
            best_gain = links.get(ci, 0.0) - (so * tot_in[ci] + si * tot_out[ci]) / W
            for c in sorted(links):
                if c == ci:
                    continue
                gain = links[c] - (so * tot_in[c] + si * tot_out[c]) / W
                if gain > best_gain + 1e-12 * W:
                    best_gain, best_c = gain, c
            tot_out[best_c] += so
            tot_in[best_c] += si
            if best_c != ci:
                comm[i] = best_c
                improved = True
                moved_any = True
    # densify
    remap: dict[int, int] = {}
    dense = [remap.setdefault(c, len(remap)) for c in comm]
    return dense, moved_any


@dataclass
class LouvainResult:
    partition: Partition
    score: ModularityScore
    level_modularity: list[float] = field(default_factory=list)
    seed: int = 0


def _louvain_arcs(g: InstanceGraph, variant: str):
    if variant == "undirected_unweighted":
        ug = undirected_view(g)
        u, v = ug.u.tolist(), ug.v.tolist()
        return [(a, b, 1.0) for a, b in zip(u, v)] + [(b, a, 1.0) for a, b in zip(u, v)]
    if variant == "directed_weighted":
        return list(g.edges())
    raise ValidationError(f"unknown modularity variant {variant!r}")


def louvain(g: InstanceGraph, variant: str = "undirected_unweighted", seed: int = 0,
            threshold: int = SIGNIFICANT_SIZE, max_levels: int = 100) -> LouvainResult:
    """Greedy two-phase modularity maximisation (resolution 1).

    Nodes are visited in a seeded random order; a node moves only for a
    strictly positive gain, ties going to the lowest community id.  The
    modularity of the flattened partition after each level is recorded in
    ``level_modularity``.
    """
    if g.m == 0:
        raise UndefinedStatisticError("Louvain needs at least one edge")
    arcs = _louvain_arcs(g, variant)
    level = _Level(g.n, arcs)
    W = sum(w for _, _, w in arcs)
    rng = np.random.default_rng(seed)
    node_comm = np.arange(g.n)
    history: list[float] = []
    for _ in range(max_levels):
        comm, moved = _local_moving(level, W, rng)
        if not moved:
            break
        node_comm = np.asarray(comm)[node_comm]
        history.append(modularity(g, node_comm, variant).value)
        level = level.aggregate(comm)
    part = Partition.normalized(node_comm, f"louvain:{variant}", threshold)
    score = modularity(g, part, variant)
    if not history:
        history.append(score.value)
    return LouvainResult(part, score, history, seed)


# -- conductance -------------------------------------------------------------

def conductance(g: InstanceGraph, partition, a: int, b: int, weighted: bool = False) -> float:
    """Cut between communities ``a`` and ``b`` over the smaller volume.

    Cut and volumes are taken in the subgraph induced by the union of the
    two communities; volume is the sum of total (in + out) degrees, or
    strengths when ``weighted``.
    """
    assign = _check_partition(g, partition)
    in_a = assign == a
    in_b = assign == b
    if not in_a.any() or not in_b.any():
        raise ValidationError("both communities must be non-empty")
    union = in_a | in_b
    e = union[g.src] & union[g.dst]
    src, dst = g.src[e], g.dst[e]
    w = g.weight[e] if weighted else np.ones(len(src))
    cross = in_a[src] != in_a[dst]
    cut = float(w[cross].sum())
    vol_a = float(w[in_a[src]].sum() + w[in_a[dst]].sum())
    vol_b = float(w[in_b[src]].sum() + w[in_b[dst]].sum())
    lo = min(vol_a, vol_b)
    if lo == 0:
        raise UndefinedStatisticError("conductance undefined: a community has zero volume")
    return cut / lo


def conductance_matrix(g: InstanceGraph, partition: Partition, weighted: bool = False,
                       include_insignificant: bool = False, top: int = 3) -> dict:
    """Pairwise conductance summary: mean over community pairs plus top pairs."""
    sizes = partition.sizes
    pool = [c for c in range(len(sizes))
            if include_insignificant or sizes[c] >= partition.threshold]
    pairs = {}
    for a, b in itertools.combinations(pool, 2):
        try:
            pairs[(a, b)] = conductance(g, partition, a, b, weighted)
        except UndefinedStatisticError:
            pairs[(a, b)] = None
    vals = [v for v in pairs.values() if v is not None]
    largest = [c for c in range(min(top, len(sizes)))]
    top_pairs = {f"{a}-{b}": pairs.get((a, b)) if (a, b) in pairs
                 else _safe_conductance(g, partition, a, b, weighted)
                 for a, b in itertools.combinations(largest, 2)}
    return {
        "weighted": weighted,
        "communities_considered": len(pool),
        "average": float(np.mean(vals)) if vals else None,
        "top_pairs": top_pairs,
    }


def _safe_conductance(g, partition, a, b, weighted):
    try:
        return conductance(g, partition, a, b, weighted)
    except UndefinedStatisticError:
        return None


# -- partition files -------------------------------------------------------

def export_partition(g: InstanceGraph, partition: Partition, path) -> None:
    with open(Path(path), "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, delimiter="\t", lineterminator="\n")
        for lab, c in zip(g.labels, partition.assignment.tolist()):
            w.writerow([lab, c])


def import_partition(path, g: InstanceGraph, method: str = "imported",
                     threshold: int = SIGNIFICANT_SIZE) -> Partition:
    """Read ``label, community_id`` rows and validate total coverage of ``g``."""
    lines, p = _open_text(path)
    index = g.index
    assign = np.full(g.n, -1, dtype=np.int64)
    ids: dict[str, int] = {}
    unknown = []
    for lineno, row in _data_rows(lines, p):
        if len(row) != 2:
            raise ValidationError(f"{p}:{lineno}: expected 2 columns, got {len(row)}")
        lab, cid = row
        if lab not in index:
            unknown.append(lab)
            continue
        assign[index[lab]] = ids.setdefault(cid, len(ids))
    missing = [g.labels[i] for i in np.flatnonzero(assign < 0)]
    if missing:
        shown = ", ".join(missing[:20]) + (" ..." if len(missing) > 20 else "")
        raise ValidationError(f"partition misses {len(missing)} node(s): {shown}")
    if unknown:
        log.warning("partition file %s names %d label(s) not in the graph: %s",
                    p, len(unknown), ", ".join(unknown[:20]))
    return Partition.normalized(assign, method, threshold)
