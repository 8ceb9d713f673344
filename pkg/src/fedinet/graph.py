"""Directed weighted instance graphs: construction, I/O, views and connectivity.

Nodes carry dense integer ids ``0..n-1`` plus an opaque string label.  Edges
are stored once, sorted by ``(source, target)``, which makes the edge arrays
double as the out-adjacency CSR.  Graphs are never mutated after construction.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from pathlib import Path
from typing import Callable, Iterable, Iterator, Mapping, NamedTuple

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .errors import ParseError, ValidationError


class Status(str, Enum):
    ONLINE = "online"
    OFFLINE = "offline"
    UNKNOWN = "unknown"


class Platform(str, Enum):
    MASTODON = "mastodon"
    OTHER = "other"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class NodeMeta:
    status: Status = Status.UNKNOWN
    platform: Platform = Platform.UNKNOWN


UNKNOWN_META = NodeMeta()


class EdgeRecord(NamedTuple):
    source: str
    target: str
    weight: float = 1.0


class InstanceGraph:
    """Immutable directed weighted simple graph over labelled nodes.

    Use :func:`build_graph` or :meth:`from_arrays` rather than the
    constructor; they aggregate duplicates and drop self-loops.
    """

    __slots__ = ("labels", "meta", "src", "dst", "weight", "self_loops_dropped",
                 "__dict__")

    def __init__(self, labels, meta, src, dst, weight, self_loops_dropped=0):
        self.labels: tuple[str, ...] = tuple(labels)
        self.meta: tuple[NodeMeta, ...] = tuple(meta)
        self.src = np.asarray(src, dtype=np.int64)
        self.dst = np.asarray(dst, dtype=np.int64)
        self.weight = np.asarray(weight, dtype=np.float64)
        self.self_loops_dropped = int(self_loops_dropped)
        for arr in (self.src, self.dst, self.weight):
            arr.setflags(write=False)
        if len(self.meta) != len(self.labels):
            raise ValidationError("metadata table does not match node count")

    @classmethod
    def from_arrays(cls, labels, src, dst, weight=None, meta=None):
        """Build from parallel id arrays, merging duplicates and dropping loops."""
        labels = tuple(labels)
        n = len(labels)
        src = np.asarray(src, dtype=np.int64)
        dst = np.asarray(dst, dtype=np.int64)
        weight = (np.ones(len(src)) if weight is None
                  else np.asarray(weight, dtype=np.float64))
        if not (len(src) == len(dst) == len(weight)):
            raise ValidationError("edge arrays have different lengths")
        if len(src) and (src.min() < 0 or dst.min() < 0
                         or src.max() >= n or dst.max() >= n):
            raise ValidationError("edge endpoint outside node range")
        if len(weight) and not np.all(weight > 0):
            raise ValidationError("edge weights must be positive")
        if len(set(labels)) != n:
            raise ValidationError("node labels must be unique")
        loops = src == dst
        n_loops = int(loops.sum())
        if n_loops:
            keep = ~loops
            src, dst, weight = src[keep], dst[keep], weight[keep]
        key = src * n + dst
        uniq, inverse = np.unique(key, return_inverse=True)
        agg = np.zeros(len(uniq))
        np.add.at(agg, inverse, weight)
        if meta is None:
            meta = [UNKNOWN_META] * n
        return cls(labels, meta, uniq // max(n, 1), uniq % max(n, 1), agg, n_loops)

    # -- size and lookup -------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def m(self) -> int:
        return len(self.src)

    def __len__(self):
        return self.n

    def __repr__(self):
        return f"InstanceGraph(n={self.n}, m={self.m})"

    @cached_property
    def index(self) -> dict[str, int]:
        return {label: i for i, label in enumerate(self.labels)}

    def edges(self) -> Iterator[tuple[int, int, float]]:
        return zip(self.src.tolist(), self.dst.tolist(), self.weight.tolist())

    def labelled_edges(self) -> Iterator[EdgeRecord]:
        lab = self.labels
        for i, j, w in self.edges():
            yield EdgeRecord(lab[i], lab[j], w)

    @property
    def total_weight(self) -> float:
        return float(self.weight.sum())

    @cached_property
    def has_integer_weights(self) -> bool:
        return bool(np.all(self.weight == np.round(self.weight)))

    # -- adjacency -------------------------------------------------------

    @cached_property
    def out_ptr(self) -> np.ndarray:
        return np.concatenate(([0], np.cumsum(np.bincount(self.src, minlength=self.n))))

    @cached_property
    def _in_order(self) -> np.ndarray:
        return np.lexsort((self.src, self.dst))

    @cached_property
    def in_ptr(self) -> np.ndarray:
        return np.concatenate(([0], np.cumsum(np.bincount(self.dst, minlength=self.n))))

    @cached_property
    def in_src(self) -> np.ndarray:
        """Sources of incoming edges, grouped by target (use with ``in_ptr``)."""
        return self.src[self._in_order]

    @cached_property
    def in_weight(self) -> np.ndarray:
        return self.weight[self._in_order]

    def successors(self, i: int) -> np.ndarray:
        return self.dst[self.out_ptr[i]:self.out_ptr[i + 1]]

    def predecessors(self, i: int) -> np.ndarray:
        return self.in_src[self.in_ptr[i]:self.in_ptr[i + 1]]

    @cached_property
    def out_degree(self) -> np.ndarray:
        return np.diff(self.out_ptr)

    @cached_property
    def in_degree(self) -> np.ndarray:
        return np.diff(self.in_ptr)

    @cached_property
    def degree(self) -> np.ndarray:
        """Total degree, in-degree plus out-degree."""
        return self.in_degree + self.out_degree

    @cached_property
    def out_strength(self) -> np.ndarray:
        return np.bincount(self.src, weights=self.weight, minlength=self.n)

    @cached_property
    def in_strength(self) -> np.ndarray:
        return np.bincount(self.dst, weights=self.weight, minlength=self.n)

    def adjacency(self, weighted: bool = True) -> sp.csr_matrix:
        data = self.weight if weighted else np.ones(self.m)
        return sp.csr_matrix((data, (self.src, self.dst)), shape=(self.n, self.n))

    def has_status(self) -> bool:
        return any(m.status is not Status.UNKNOWN for m in self.meta)


def build_graph(edges: Iterable, meta: Mapping[str, NodeMeta] | None = None,
                isolated: Iterable[str] = ()) -> InstanceGraph:
    """Build an :class:`InstanceGraph` from a stream of edge records.

    Ids are assigned in first-seen order over the edge stream, then to
    metadata labels and ``isolated`` labels that never appear in an edge.
    Duplicate (source, target) pairs are merged by summing weights and
    self-loops are dropped; their count is kept in ``self_loops_dropped``.
    """
    index: dict[str, int] = {}
    src: list[int] = []
    dst: list[int] = []
    wts: list[float] = []
    for pos, rec in enumerate(edges, start=1):
        if isinstance(rec, EdgeRecord):
            s, t, w = rec
        else:
            if len(rec) not in (2, 3):
                raise ParseError(f"expected 2 or 3 fields, got {len(rec)}", line=pos)
            s, t = rec[0], rec[1]
            w = rec[2] if len(rec) == 3 else 1.0
        if not s or not t:
            raise ParseError("empty node label", line=pos)
        try:
            w = float(w)
        except (TypeError, ValueError):
            raise ParseError(f"non-numeric weight {w!r}", line=pos) from None
        if not w > 0:
            raise ValidationError(f"record {pos}: weight must be positive, got {w}")
        for lab in (s, t):
            if lab not in index:
                index[lab] = len(index)
        src.append(index[s])
        dst.append(index[t])
        wts.append(w)
    extra = list(meta or ()) + list(isolated)
    for lab in extra:
        if lab not in index:
            index[lab] = len(index)
    labels = list(index)
    node_meta = [UNKNOWN_META] * len(labels)
    if meta:
        for lab, m in meta.items():
            node_meta[index[lab]] = m
    return InstanceGraph.from_arrays(labels, src, dst, wts, node_meta)


def induced_subgraph(g: InstanceGraph, keep) -> InstanceGraph:
    """Subgraph on the kept nodes, with ids re-densified in original order.

    ``keep`` is either a boolean mask over node ids or a predicate called
    as ``keep(node_id, label, meta)``.
    """
    if callable(keep):
        mask = np.fromiter((bool(keep(i, g.labels[i], g.meta[i])) for i in range(g.n)),
                           dtype=bool, count=g.n)
    else:
        mask = np.asarray(keep, dtype=bool)
        if mask.shape != (g.n,):
            raise ValidationError("mask length must equal node count")
    new_id = np.full(g.n, -1, dtype=np.int64)
    kept = np.flatnonzero(mask)
    new_id[kept] = np.arange(len(kept))
    emask = mask[g.src] & mask[g.dst]
    return InstanceGraph(
        [g.labels[i] for i in kept], [g.meta[i] for i in kept],
        new_id[g.src[emask]], new_id[g.dst[emask]], g.weight[emask],
    )


class UndirectedGraph:
    """Undirected simple view: each unordered pair appears once with ``u < v``."""

    def __init__(self, labels, u, v, weight):
        self.labels = tuple(labels)
        self.u = np.asarray(u, dtype=np.int64)
        self.v = np.asarray(v, dtype=np.int64)
        self.weight = np.asarray(weight, dtype=np.float64)

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def m(self) -> int:
        return len(self.u)

    def __repr__(self):
        return f"UndirectedGraph(n={self.n}, m={self.m})"

    @cached_property
    def adjacency(self) -> sp.csr_matrix:
        """Symmetric binary adjacency (CSR, sorted indices)."""
        rows = np.concatenate((self.u, self.v))
        cols = np.concatenate((self.v, self.u))
        a = sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(self.n, self.n))
        a.sort_indices()
        return a

    @cached_property
    def degree(self) -> np.ndarray:
        return (np.bincount(self.u, minlength=self.n)
                + np.bincount(self.v, minlength=self.n))

    @cached_property
    def strength(self) -> np.ndarray:
        return (np.bincount(self.u, weights=self.weight, minlength=self.n)
                + np.bincount(self.v, weights=self.weight, minlength=self.n))

    def neighbors(self, i: int) -> np.ndarray:
        a = self.adjacency
        return a.indices[a.indptr[i]:a.indptr[i + 1]]


def undirected_view(g: InstanceGraph, weight_rule: str = "sum") -> UndirectedGraph:
    """Collapse (i, j) and (j, i) into one undirected edge."""
    if weight_rule not in ("sum", "max"):
        raise ValidationError(f"unknown weight rule {weight_rule!r}")
    lo = np.minimum(g.src, g.dst)
    hi = np.maximum(g.src, g.dst)
    key = lo * max(g.n, 1) + hi
    uniq, inverse = np.unique(key, return_inverse=True)
    w = np.zeros(len(uniq))
    if weight_rule == "sum":
        np.add.at(w, inverse, g.weight)
    else:
        np.maximum.at(w, inverse, g.weight)
    n = max(g.n, 1)
    return UndirectedGraph(g.labels, uniq // n, uniq % n, w)


@dataclass(frozen=True)
class Components:
    scc_labels: np.ndarray
    wcc_labels: np.ndarray

    @property
    def scc_count(self) -> int:
        return int(self.scc_labels.max() + 1) if len(self.scc_labels) else 0

    @property
    def wcc_count(self) -> int:
        return int(self.wcc_labels.max() + 1) if len(self.wcc_labels) else 0

    @staticmethod
    def _groups(lab: np.ndarray) -> list[list[int]]:
        groups: dict[int, list[int]] = {}
        for i, c in enumerate(lab.tolist()):
            groups.setdefault(c, []).append(i)
        return sorted(groups.values(), key=lambda grp: (-len(grp), grp[0]))

    @property
    def sccs(self) -> list[list[int]]:
        return self._groups(self.scc_labels)

    @property
    def wccs(self) -> list[list[int]]:
        return self._groups(self.wcc_labels)

    def largest_wcc(self) -> np.ndarray:
        """Boolean mask of the largest WCC (ties go to the lowest node id)."""
        if not len(self.wcc_labels):
            return np.zeros(0, dtype=bool)
        return self.wcc_labels == self.wcc_labels[self.wccs[0][0]]


def _canonical(lab: np.ndarray) -> np.ndarray:
    # relabel so component ids follow first appearance by node id
    _, first, inv = np.unique(lab, return_index=True, return_inverse=True)
    order = np.argsort(np.argsort(first))
    return order[inv]


def components(g: InstanceGraph) -> Components:
    a = g.adjacency(weighted=False)
    _, scc = connected_components(a, directed=True, connection="strong")
    _, wcc = connected_components(a, directed=True, connection="weak")
    return Components(_canonical(scc), _canonical(wcc))


# -- file formats --------------------------------------------------------

def _sniff_delimiter(lines: list[str]) -> str:
    for line in lines:
        s = line.strip()
        if s and not s.startswith("#"):
            return "\t" if "\t" in s else ","
    return ","


def _data_rows(text: Iterable[str], path=None) -> Iterator[tuple[int, list[str]]]:
    lines = list(text)
    delim = _sniff_delimiter(lines)
    for lineno, line in enumerate(lines, start=1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        row = next(csv.reader([s], delimiter=delim))
        yield lineno, [f.strip() for f in row]


def _open_text(source) -> tuple[list[str], str | None]:
    if isinstance(source, io.TextIOBase):
        return source.read().splitlines(), None
    path = Path(source)
    return path.read_text(encoding="utf-8").splitlines(), str(path)


def parse_edge_lines(lines: Iterable[str], path=None) -> Iterator[EdgeRecord]:
    for lineno, row in _data_rows(lines, path):
        if len(row) not in (2, 3):
            raise ParseError(f"expected 2 or 3 columns, got {len(row)}", lineno, path)
        s, t = row[0], row[1]
        if not s or not t:
            raise ParseError("empty node label", lineno, path)
        w = 1.0
        if len(row) == 3:
            try:
                w = float(row[2])
            except ValueError:
                raise ParseError(f"non-numeric weight {row[2]!r}", lineno, path) from None
            if not w > 0:
                raise ValidationError(f"{path or '<input>'}:{lineno}: "
                                      f"weight must be positive, got {row[2]}")
        yield EdgeRecord(s, t, w)


def read_edge_list(source) -> list[EdgeRecord]:
    """Read ``source, target[, weight]`` rows (tab or comma separated)."""
    lines, path = _open_text(source)
    return list(parse_edge_lines(lines, path))


def read_meta(source) -> dict[str, NodeMeta]:
    """Read ``label, status, platform`` rows."""
    lines, path = _open_text(source)
    out: dict[str, NodeMeta] = {}
    for lineno, row in _data_rows(lines, path):
        if len(row) != 3:
            raise ParseError(f"expected 3 columns, got {len(row)}", lineno, path)
        label, status, platform = row
        if not label:
            raise ParseError("empty node label", lineno, path)
        try:
            out[label] = NodeMeta(Status(status.lower()), Platform(platform.lower()))
        except ValueError as exc:
            raise ParseError(str(exc), lineno, path) from None
    return out


def load_graph(edges_path, meta_path=None) -> InstanceGraph:
    meta = read_meta(meta_path) if meta_path else None
    return build_graph(read_edge_list(edges_path), meta)


def _fmt_weight(w: float) -> str:
    return str(int(w)) if w == int(w) else repr(w)


def write_edge_list(g: InstanceGraph, path, header: Iterable[str] = ()) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for line in header:
            fh.write(f"# {line}\n")
        for rec in g.labelled_edges():
            fh.write(f"{rec.source}\t{rec.target}\t{_fmt_weight(rec.weight)}\n")


def write_meta(g: InstanceGraph, path) -> None:
    write_meta_map(dict(zip(g.labels, g.meta)), path)


def write_meta_map(meta: Mapping[str, NodeMeta], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for lab, m in meta.items():
            fh.write(f"{lab}\t{m.status.value}\t{m.platform.value}\n")


NodePredicate = Callable[[int, str, NodeMeta], bool]
