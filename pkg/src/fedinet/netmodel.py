"""Instance-level network models built from user-level follow records.

Three graphs are derived here: the full instance network projected from
user follows, its restriction to online instances, and the expansion that
adds non-Mastodon boundary instances.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, NamedTuple

import numpy as np

from .errors import ConfigurationError, ParseError, ValidationError
from .graph import (EdgeRecord, InstanceGraph, NodeMeta, Platform, Status,
                    UNKNOWN_META, _data_rows, _open_text, build_graph,
                    induced_subgraph)


class UserEdgeRecord(NamedTuple):
    source_user: str
    source_instance: str
    target_user: str
    target_instance: str


@dataclass
class ProjectionStats:
    records: int = 0
    duplicates: int = 0
    intra_instance: int = 0
    extra: dict = field(default_factory=dict)


def read_user_edges(source) -> list[UserEdgeRecord]:
    """Read ``src_user_hash, src_instance, dst_user_hash, dst_instance`` rows."""
    lines, path = _open_text(source)
    out = []
    for lineno, row in _data_rows(lines, path):
        if len(row) != 4:
            raise ParseError(f"expected 4 columns, got {len(row)}", lineno, path)
        if not all(row):
            raise ParseError("empty field", lineno, path)
        out.append(UserEdgeRecord(*row))
    return out


def project_to_instances(records: Iterable, meta: Mapping[str, NodeMeta] | None = None,
                         distinct_source_users: bool = False,
                         stats: ProjectionStats | None = None) -> InstanceGraph:
    """Project user follows onto instances.

    The weight of (i, j) is the number of distinct (u, v) user pairs with
    u on instance i following v on instance j.  With
    ``distinct_source_users`` it is the number of distinct users u on i
    following anyone on j instead.  Follows inside one instance are dropped
    and counted in ``stats.intra_instance``.
    """
    stats = stats if stats is not None else ProjectionStats()
    seen: set = set()
    pair_weight: Counter = Counter()
    order: dict[tuple[str, str], None] = {}
    for pos, rec in enumerate(records, start=1):
        if len(rec) != 4:
            raise ParseError(f"expected 4 fields, got {len(rec)}", line=pos)
        su, si, tu, ti = rec
        if not (su and si and tu and ti):
            raise ParseError("empty field", line=pos)
        if (su, si) == (tu, ti):
            raise ValidationError(f"record {pos}: user follows itself")
        stats.records += 1
        if si == ti:
            stats.intra_instance += 1
            continue
        key = (su, si, ti) if distinct_source_users else (su, si, tu, ti)
        if key in seen:
            stats.duplicates += 1
            continue
        seen.add(key)
        pair_weight[(si, ti)] += 1
        order.setdefault((si, ti), None)
    edges = (EdgeRecord(s, t, float(pair_weight[(s, t)])) for s, t in order)
    return build_graph(edges, meta)


def online_subnetwork(g: InstanceGraph, drop_isolated: bool = False) -> InstanceGraph:
    """Induced subgraph on online nodes; unknown status counts as offline."""
    if not g.has_status():
        raise ConfigurationError("no node carries status metadata")
    mask = np.array([m.status is Status.ONLINE for m in g.meta], dtype=bool)
    sub = induced_subgraph(g, mask)
    if drop_isolated:
        sub = drop_isolated_nodes(sub)
    return sub


def drop_isolated_nodes(g: InstanceGraph) -> InstanceGraph:
    return induced_subgraph(g, (g.in_degree + g.out_degree) > 0)


def expanded_network(g: InstanceGraph, boundary_edges: Iterable) -> InstanceGraph:
    """Add non-Mastodon boundary nodes and the edges linking them to ``g``.

    Every boundary edge needs at least one endpoint already in ``g``;
    edges between two outside nodes are rejected together in one error.
    New nodes get platform ``other``.
    """
    inside = g.index
    records = [r if isinstance(r, EdgeRecord) else EdgeRecord(*r) for r in boundary_edges]
    bad = [(r.source, r.target) for r in records
           if r.source not in inside and r.target not in inside]
    if bad:
        shown = ", ".join(f"{s}->{t}" for s, t in bad[:20])
        more = f" (+{len(bad) - 20} more)" if len(bad) > 20 else ""
        raise ValidationError(
            f"{len(bad)} boundary edge(s) have no endpoint in the Mastodon node set: {shown}{more}")
    meta = {lab: (m if m.platform is not Platform.UNKNOWN
                  else NodeMeta(m.status, Platform.MASTODON))
            for lab, m in zip(g.labels, g.meta)}
    for r in records:
        for lab in (r.source, r.target):
            if lab not in meta:
                meta[lab] = NodeMeta(UNKNOWN_META.status, Platform.OTHER)
    return build_graph(list(g.labelled_edges()) + records, meta)


def load_user_graph(users_path, meta_path=None, **kw) -> tuple[InstanceGraph, ProjectionStats]:
    from .graph import read_meta

    meta = read_meta(meta_path) if meta_path else None
    stats = ProjectionStats()
    g = project_to_instances(read_user_edges(users_path), meta, stats=stats, **kw)
    return g, stats


def write_user_edges(records: Iterable[UserEdgeRecord], path) -> None:
    with open(Path(path), "w", encoding="utf-8", newline="") as fh:
        for r in records:
            fh.write("\t".join(r) + "\n")
