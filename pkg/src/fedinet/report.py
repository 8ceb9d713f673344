"""Flat statistics reports and deterministic report serialisation."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .errors import UndefinedStatisticError
from .graph import InstanceGraph, components, undirected_view
from .macrostats import (EXACT_PATHS_MAX, degree_assortativity, degree_summary, density,
                         path_metrics, reciprocity, triadic_stats)
from .mesoscale import SIGNIFICANT_SIZE, louvain

FLOAT_DIGITS = 10


@dataclass
class StatsReport:
    """One row of structural statistics; keys follow the summary-table rows."""

    nodes: int
    edges: int
    reciprocity: float | None = None
    density: float | None = None
    average_degree: float | None = None
    average_in_degree: float | None = None
    pct_sources: float | None = None
    pct_sinks: float | None = None
    degree_assortativity_undirected: float | None = None
    degree_assortativity: float | None = None
    average_path_length: float | None = None
    diameter: int | None = None
    transitivity: float | None = None
    clustering_coefficient: float | None = None
    clustering_coefficient_full_averaging: float | None = None
    strongly_connected_components: int | None = None
    weakly_connected_components: int | None = None
    modularity_louvain_undirected: float | None = None
    communities_louvain_undirected: int | None = None
    communities_louvain_undirected_total: int | None = None
    modularity_louvain_directed_weighted: float | None = None
    communities_louvain_directed_weighted: int | None = None
    communities_louvain_directed_weighted_total: int | None = None
    path_metrics_sampled: bool = False

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, raw: dict) -> "StatsReport":
        names = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in raw.items() if k in names})


def _maybe(fn, *args, **kw):
    try:
        return fn(*args, **kw)
    except UndefinedStatisticError:
        return None


def compute_stats(g: InstanceGraph, *, path_mode: str = "undirected_lwcc",
                  exact_paths_max: int = EXACT_PATHS_MAX, seed: int = 0,
                  communities: bool = True,
                  threshold: int = SIGNIFICANT_SIZE) -> StatsReport:
    """Every summary statistic of ``g``; undefined entries stay ``None``."""
    rep = StatsReport(nodes=g.n, edges=g.m)
    if g.n == 0:
        return rep
    ug = undirected_view(g)
    ds = degree_summary(g, ug)
    rep.average_degree = ds.avg_degree
    rep.average_in_degree = ds.avg_in_degree
    rep.pct_sources = ds.pct_sources
    rep.pct_sinks = ds.pct_sinks
    rep.density = _maybe(density, g)
    comp = components(g)
    rep.strongly_connected_components = comp.scc_count
    rep.weakly_connected_components = comp.wcc_count
    tri = triadic_stats(g, ug)
    rep.transitivity = tri.transitivity
    rep.clustering_coefficient = tri.clustering_restricted
    rep.clustering_coefficient_full_averaging = tri.clustering_full
    if g.m:
        rep.reciprocity = reciprocity(g)
        rep.degree_assortativity_undirected = _maybe(degree_assortativity, g, "undirected", ug)
        rep.degree_assortativity = _maybe(degree_assortativity, g, "directed_total")
    pm = _maybe(path_metrics, g, path_mode, exact_max=exact_paths_max, seed=seed)
    if pm is not None:
        rep.average_path_length = pm.avg_path_length
        rep.diameter = pm.diameter
        rep.path_metrics_sampled = pm.sampled
    if communities and g.m:
        lu = louvain(g, "undirected_unweighted", seed=seed, threshold=threshold)
        rep.modularity_louvain_undirected = lu.score.value
        rep.communities_louvain_undirected = lu.partition.significant_count
        rep.communities_louvain_undirected_total = lu.partition.count
        ld = louvain(g, "directed_weighted", seed=seed, threshold=threshold)
        rep.modularity_louvain_directed_weighted = ld.score.value
        rep.communities_louvain_directed_weighted = ld.partition.significant_count
        rep.communities_louvain_directed_weighted_total = ld.partition.count
    return rep


# -- serialisation -------------------------------------------------------------

def _clean(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        if not math.isfinite(f):
            return None
        return round(f, FLOAT_DIGITS) + 0.0
    return obj


def dumps(obj: Any) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def config_hash(config: dict) -> str:
    blob = json.dumps(_clean(config), sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def metadata(config: dict, seeds: dict, flags: dict) -> dict:
    return {
        "tool": "fedinet",
        "version": __version__,
        "config_hash": config_hash(config),
        "seeds": seeds,
        "flags": flags,
    }


def write_json(path: Path, meta: dict, data: Any) -> None:
    Path(path).write_text(dumps({"meta": meta, "data": data}), encoding="utf-8")


def csv_header(meta: dict) -> list[str]:
    return [f"{k}: {json.dumps(_clean(v), sort_keys=True)}" for k, v in sorted(meta.items())]


def write_csv(path: Path, meta: dict, columns: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for line in csv_header(meta):
            fh.write(f"# {line}\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt_cell(v) for v in row) + "\n")


def _fmt_cell(v) -> str:
    if isinstance(v, (float, np.floating)):
        v = _clean(v)
        return "" if v is None else repr(v)
    return str(v)


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()[:16]


def read_report(path) -> dict:
    """Load a stats JSON file and return the flat statistics mapping."""
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    data = raw.get("data", raw)
    if isinstance(data, dict) and "network" in data:
        data = data["network"]
    return data
