"""End-to-end analysis pipeline writing a deterministic report bundle.

Stages run in dependency order: ingest, model, stats, fits, communities,
cores, backbone, rank, compare.  After every stage the manifest is
rewritten, so a failing run leaves the completed outputs and a record of
where it stopped.
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .backbone import MODELS as FILTERS, edge_significance, prune, write_significance
from .coredecomp import VARIANTS as CORE_VARIANTS, core_decomposition, core_link_profile, innermost_core
from .distfit import FitResult, ccdf, fit_lognormal, fit_powerlaw, fit_reference
from .errors import ConfigurationError, FedinetError, ValidationError
from .graph import (InstanceGraph, build_graph, induced_subgraph, read_edge_list,
                    read_meta, write_edge_list, write_meta)
from .macrostats import EXACT_PATHS_MAX, knn_distribution
from .mesoscale import (SIGNIFICANT_SIZE, conductance_matrix, export_partition,
                        import_partition, louvain, modularity)
from .netmodel import (ProjectionStats, drop_isolated_nodes, expanded_network,
                       online_subnetwork, project_to_instances, read_user_edges)
from .ranking import compare_networks, compare_rankings, pagerank, write_ranking
from .report import (compute_stats, csv_header, file_digest, metadata, read_report, write_csv,
                     write_json)

log = logging.getLogger(__name__)

STAGES = ("ingest", "model", "stats", "fits", "communities", "cores", "backbone", "rank",
          "compare")
MODELS = ("instances", "online", "expanded")
OUT_ENV = "FEDINET_OUT"
DEGREE_KINDS = ("degree", "in_degree", "out_degree")


def default_out_dir() -> Path:
    return Path(os.environ.get(OUT_ENV, "fedinet-out"))


@dataclass
class PipelineConfig:
    edges: Path | None = None
    users: Path | None = None
    meta: Path | None = None
    boundary: Path | None = None
    reference: Path | None = None
    partition: Path | None = None
    model: str = "instances"
    alphas: tuple[float, ...] = (0.01, 0.05)
    seed: int = 0
    out: Path = field(default_factory=default_out_dir)
    exact_paths_max: int = EXACT_PATHS_MAX
    path_mode: str = "undirected_lwcc"
    unweighted_pagerank: bool = False
    include_insignificant: bool = False
    bootstrap: int = 1000
    distinct_source_users: bool = False
    keep_isolated_online: bool = False
    fit_intervals: tuple = ((None, None), (51, None))
    rank_depths: tuple[int, ...] = (10, 100, 1000)
    threshold: int = SIGNIFICANT_SIZE
    degree_kinds: tuple[str, ...] = DEGREE_KINDS

    def validate(self) -> None:
        if (self.edges is None) == (self.users is None):
            raise ConfigurationError("give exactly one of an edge list or a user-edge file")
        for name in ("edges", "users", "meta", "boundary", "reference", "partition"):
            p = getattr(self, name)
            if p is not None and not Path(p).is_file():
                raise ConfigurationError(f"{name} file not found: {p}")
        if self.model not in MODELS:
            raise ConfigurationError(f"unknown model {self.model!r}")
        if self.model == "online" and self.meta is None:
            raise ConfigurationError("the online model needs a metadata file with status")
        if self.model == "expanded" and self.boundary is None:
            raise ConfigurationError("the expanded model needs a boundary edge file")
        if not self.alphas or any(not 0 < a < 1 for a in self.alphas):
            raise ConfigurationError("significance levels must lie in (0, 1)")
        if self.bootstrap < 0 or self.exact_paths_max < 1:
            raise ConfigurationError("bootstrap must be >= 0 and exact-paths-max >= 1")
        for kind in self.degree_kinds:
            if kind not in DEGREE_KINDS:
                raise ConfigurationError(f"unknown degree kind {kind!r}")

    def fingerprint(self) -> dict:
        """Everything that determines the output bytes (inputs by content)."""
        inputs = {name: file_digest(p) for name in
                  ("edges", "users", "meta", "boundary", "reference", "partition")
                  if (p := getattr(self, name)) is not None}
        return {
            "inputs": inputs, "model": self.model, "alphas": list(self.alphas),
            "seed": self.seed, "exact_paths_max": self.exact_paths_max,
            "path_mode": self.path_mode, "unweighted_pagerank": self.unweighted_pagerank,
            "include_insignificant": self.include_insignificant, "bootstrap": self.bootstrap,
            "distinct_source_users": self.distinct_source_users,
            "keep_isolated_online": self.keep_isolated_online,
            "fit_intervals": [list(iv) for iv in self.fit_intervals],
            "rank_depths": list(self.rank_depths), "threshold": self.threshold,
            "degree_kinds": list(self.degree_kinds),
        }


class Pipeline:
    def __init__(self, config: PipelineConfig):
        config.validate()
        self.cfg = config
        self.out = Path(config.out)
        self.out.mkdir(parents=True, exist_ok=True)
        self.meta = metadata(
            config.fingerprint(),
            seeds={"analysis": config.seed},
            flags={
                "path_metrics": config.path_mode,
                "pagerank_weighting": "unweighted" if config.unweighted_pagerank else "weighted",
                "undirected_weight_rule": "sum",
                "significant_community_size": config.threshold,
                "conductance_pairs": "all" if config.include_insignificant else "significant",
                "disparity_keep_rule": "min(alpha_out, alpha_in) < alpha",
                "core_profile_attribution": "in: target coreness; out: source coreness",
                "projection_weight": ("distinct source users" if config.distinct_source_users
                                      else "distinct user pairs"),
                "bootstrap": config.bootstrap,
            },
        )
        self.status: dict[str, str] = {}
        self.files: set[str] = set()
        self.notes: dict = {}
        self.networks: dict[str, InstanceGraph] = {}
        self.graph: InstanceGraph | None = None
        self.stats = None

    # -- bookkeeping -----------------------------------------------------------

    def _path(self, name: str) -> Path:
        self.files.add(name)
        return self.out / name

    def _json(self, name: str, data) -> None:
        write_json(self._path(name), self.meta, data)

    def write_manifest(self, error: str | None = None) -> None:
        data = {"stages": dict(self.status), "files": sorted(self.files), "notes": self.notes}
        if error:
            data["error"] = error
        write_json(self.out / "manifest.json", self.meta, data)

    def run(self, stages=STAGES) -> dict:
        for name in STAGES:
            if name not in stages:
                continue
            try:
                getattr(self, f"stage_{name}")()
            except Exception as exc:
                self.status[name] = "failed"
                self.write_manifest(f"{name}: {exc}")
                raise
            self.status[name] = "completed"
            self.write_manifest()
        return self.status

    # -- stages ------------------------------------------------------------------

    def stage_ingest(self) -> None:
        cfg = self.cfg
        meta = read_meta(cfg.meta) if cfg.meta else None
        if cfg.users is not None:
            ps = ProjectionStats()
            g = project_to_instances(read_user_edges(cfg.users), meta,
                                     distinct_source_users=cfg.distinct_source_users, stats=ps)
            self.notes["projection"] = {"records": ps.records, "duplicates": ps.duplicates,
                                        "intra_instance_dropped": ps.intra_instance}
        else:
            g = build_graph(read_edge_list(cfg.edges), meta)
        if g.m == 0:
            raise ValidationError("input yields a graph without edges")
        self.notes["self_loops_dropped"] = g.self_loops_dropped
        self.networks["instances"] = g

    def stage_model(self) -> None:
        cfg = self.cfg
        base = self.networks["instances"]
        if base.has_status():
            online = online_subnetwork(base)
            if not cfg.keep_isolated_online:
                before = online.n
                online = drop_isolated_nodes(online)
                self.notes["online_isolated_dropped"] = before - online.n
            self.networks["online"] = online
        if cfg.boundary is not None:
            self.networks["expanded"] = expanded_network(base, read_edge_list(cfg.boundary))
        if cfg.model not in self.networks:
            raise ConfigurationError(f"model {cfg.model!r} cannot be built from the inputs")
        self.graph = self.networks[cfg.model]
        if self.graph.m == 0:
            raise ValidationError(f"the {cfg.model} network has no edges")
        header = csv_header(self.meta)
        write_edge_list(self.graph, self._path("network.tsv"), header)
        write_meta(self.graph, self._path("network_meta.tsv"))
        self.notes["networks"] = {k: {"nodes": v.n, "edges": v.m}
                                  for k, v in sorted(self.networks.items())}

    def _stats(self, g: InstanceGraph) -> dict:
        cfg = self.cfg
        return compute_stats(g, path_mode=cfg.path_mode, exact_paths_max=cfg.exact_paths_max,
                             seed=cfg.seed, threshold=cfg.threshold).to_dict()

    def stage_stats(self) -> None:
        g = self.graph
        self.stats = self._stats(g)
        inner = {}
        for variant in CORE_VARIANTS:
            core = innermost_core(g, core_decomposition(g, variant))
            inner[variant] = self._stats(core)
        self._json("stats.json", {"model": self.cfg.model, "network": self.stats,
                                  "innermost_cores": inner})

    def _degree_sample(self, kind: str) -> np.ndarray:
        g = self.graph
        return {"degree": g.degree, "in_degree": g.in_degree, "out_degree": g.out_degree}[kind]

    def stage_fits(self) -> None:
        cfg = self.cfg
        out = {}
        for kind in cfg.degree_kinds:
            x = self._degree_sample(kind)
            rows = []
            curves: list[FitResult] = []
            attempts = [("powerlaw", None)]
            attempts += [("lognormal", iv) for iv in cfg.fit_intervals]
            attempts += [("exponential", None), ("poisson", None)]
            for family, iv in attempts:
                try:
                    if family == "powerlaw":
                        res = fit_powerlaw(x, cfg.bootstrap, cfg.seed)
                    elif family == "lognormal":
                        res = fit_lognormal(x, iv, cfg.bootstrap, cfg.seed)
                    else:
                        res = fit_reference(x, family, None, cfg.bootstrap, cfg.seed)
                except FedinetError as exc:
                    rows.append({"family": family, "interval": list(iv) if iv else None,
                                 "error": str(exc)})
                    continue
                rows.append(res.as_row())
                if family != "lognormal" or not any(c.family == "lognormal" for c in curves):
                    curves.append(res)
            out[kind] = rows
            self._write_ccdf(kind, x, curves)
        self._json("fits.json", out)

    def _write_ccdf(self, kind: str, x, curves) -> None:
        pts = ccdf(x, curves)
        write_csv(self._path(f"ccdf_{kind}.csv"), self.meta, ["x", "ccdf"], pts["empirical"])
        for res in curves:
            write_csv(self._path(f"ccdf_{kind}_{res.family}.csv"),
                      {**self.meta, "fit_interval": list(res.interval)}, ["x", "ccdf"],
                      pts[res.family])

    def stage_communities(self) -> None:
        cfg = self.cfg
        g = self.graph
        parts = {}
        for variant in ("undirected_unweighted", "directed_weighted"):
            res = louvain(g, variant, seed=cfg.seed, threshold=cfg.threshold)
            parts[f"louvain_{variant}"] = (res.partition, res)
        if cfg.partition is not None:
            ext = import_partition(cfg.partition, g, "imported", cfg.threshold)
            parts["imported"] = (ext, None)
        summary = {}
        cond = {}
        for name, (part, res) in parts.items():
            entry = {
                "method": part.method,
                "communities": part.count,
                "significant_communities": part.significant_count,
                "sizes": part.sizes.tolist(),
                "modularity": {v: modularity(g, part, v).value
                               for v in ("undirected_unweighted", "directed_weighted")},
            }
            if res is not None:
                entry["level_modularity"] = res.level_modularity
            summary[name] = entry
            export_partition(g, part, self._path(f"communities_{name}.tsv"))
            cond[name] = {
                "unweighted": conductance_matrix(g, part, False, cfg.include_insignificant),
                "weighted": conductance_matrix(g, part, True, cfg.include_insignificant),
            }
        self._json("communities.json", summary)
        self._json("conductance.json", cond)
        # knn(k) for the network and inside the three largest directed-weighted communities
        write_csv(self._path("knn.csv"), self.meta, ["k", "knn"], knn_distribution(g))
        part = parts["louvain_directed_weighted"][0]
        for c in range(min(3, part.count)):
            sub = induced_subgraph(g, part.assignment == c)
            write_csv(self._path(f"knn_community_{c}.csv"), self.meta, ["k", "knn"],
                      knn_distribution(sub))

    def stage_cores(self) -> None:
        g = self.graph
        out = {}
        for variant in CORE_VARIANTS:
            cmap = core_decomposition(g, variant)
            prof = core_link_profile(g, cmap)
            inner = innermost_core(g, cmap)
            out[variant] = {
                "degeneracy": cmap.degeneracy,
                "innermost_core_nodes": inner.n,
                "innermost_core_edges": inner.m,
                "innermost_edge_fraction": prof.innermost_edge_fraction,
                "shell_sizes": cmap.shell_sizes(),
            }
            with open(self._path(f"coreness_{variant}.tsv"), "w", encoding="utf-8") as fh:
                for lab, c in zip(g.labels, cmap.coreness.tolist()):
                    fh.write(f"{lab}\t{c}\n")
            name = "core_profile.csv" if variant == "total" else f"core_profile_{variant}.csv"
            write_csv(self._path(name), {**self.meta, "variant": variant},
                      ["core_index", "in_links", "out_links"], prof.rows)
        out["attribution"] = "in: target coreness; out: source coreness"
        self._json("cores.json", out)

    def stage_backbone(self) -> None:
        cfg = self.cfg
        g = self.graph
        if self.stats is None:
            self.stats = self._stats(g)
        out = {"unpruned": self.stats}
        header = csv_header(self.meta)
        for model in FILTERS:
            try:
                sig = edge_significance(g, model)
            except ValidationError as exc:
                out[model] = {"error": str(exc)}
                continue
            write_significance(g, sig, self._path(f"significance_{model}.csv"), header)
            for alpha in sorted(cfg.alphas):
                pruned = prune(g, model, alpha, sig)
                key = f"{model}({alpha:g})"
                out[key] = self._stats(pruned) if pruned.m else {"nodes": pruned.n, "edges": 0}
                write_edge_list(pruned, self._path(f"backbone_{model}_{alpha:g}.tsv"), header)
        self._json("backbone.json", out)

    def _reference_graph(self) -> InstanceGraph | None:
        if self.cfg.reference is None:
            return None
        return build_graph(read_edge_list(self.cfg.reference))

    def stage_rank(self) -> None:
        cfg = self.cfg
        nets = dict(self.networks)
        ref = self._reference_graph()
        if ref is not None:
            nets["reference"] = ref
        ranks = {}
        for name in sorted(nets):
            r = pagerank(nets[name], weighted=not cfg.unweighted_pagerank)
            ranks[name] = r
            write_ranking(r, self._path(f"rankings_{name}.csv"), csv_header(self.meta))
        comparisons = {}
        names = sorted(ranks)
        for i, a in enumerate(names):
            for b in names[i + 1:]:
                comparisons[f"{a}~{b}"] = compare_rankings(ranks[a], ranks[b], cfg.rank_depths)
        self._json("rank_comparison.json", comparisons)

    def stage_compare(self) -> None:
        ref = self._reference_graph()
        if ref is None:
            self.notes["compare"] = "skipped: no reference network"
            return
        if self.stats is None:
            self.stats = self._stats(self.graph)
        ref_stats = self._stats(ref)
        self._json("comparison.json", {
            "network": self.cfg.model,
            "reference_stats": ref_stats,
            "changes": compare_networks(self.stats, ref_stats),
        })


def run_pipeline(config: PipelineConfig, stages=STAGES) -> dict:
    return Pipeline(config).run(stages)


def compare_report_files(a, b, decimals: int | None = 0) -> dict:
    return compare_networks(read_report(a), read_report(b), decimals)
