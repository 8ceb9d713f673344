"""Command-line front end.

Exit codes: 0 success, 1 invalid input or configuration, 2 runtime
failure, 3 non-convergence.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConvergenceError, FedinetError, ValidationError
from .graph import write_edge_list, write_meta_map
from .netmodel import write_user_edges
from .pipeline import DEGREE_KINDS, MODELS, STAGES, Pipeline, PipelineConfig, default_out_dir
from .ranking import compare_networks
from .report import dumps, read_report
from .testkit.generators import FederatedSim, GeneratorSpec, PlantedGraph, generate

log = logging.getLogger("fedinet")


def _interval(text: str) -> tuple:
    lo, _, hi = text.partition(":")
    try:
        return (int(lo) if lo else None, int(hi) if hi else None)
    except ValueError:
        raise argparse.ArgumentTypeError(f"interval must look like LO:HI, got {text!r}")


def _inputs(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("input")
    g.add_argument("--input", "-i", type=Path, help="instance edge list (source, target[, weight])")
    g.add_argument("--users", type=Path, help="user-level follow file to project")
    g.add_argument("--meta", type=Path, help="node metadata (label, status, platform)")
    g.add_argument("--boundary", type=Path, help="edges to non-Mastodon servers")
    g.add_argument("--model", choices=MODELS, default="instances")
    g.add_argument("--distinct-source-users", action="store_true",
                   help="weight projected edges by distinct source users")
    g.add_argument("--keep-isolated-online", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", "-o", type=Path, default=None,
                   help="output directory (default: $FEDINET_OUT or ./fedinet-out)")


def _stats_opts(p):
    p.add_argument("--exact-paths-max", type=int, default=20_000)
    p.add_argument("--path-mode", choices=("undirected_lwcc", "directed_reachable"),
                   default="undirected_lwcc")


def _fit_opts(p):
    p.add_argument("--bootstrap", type=int, default=1000)
    p.add_argument("--degree", action="append", choices=DEGREE_KINDS, dest="degrees")
    p.add_argument("--interval", action="append", type=_interval, dest="intervals",
                   help="lognormal fit range LO:HI (repeatable; default full and 51:)")


def _community_opts(p):
    p.add_argument("--partition", type=Path, help="external partition (label, community)")
    p.add_argument("--include-insignificant-communities", action="store_true")


def _backbone_opts(p):
    p.add_argument("--alpha", action="append", type=float, dest="alphas",
                   help="significance level (repeatable; default 0.01 and 0.05)")


def _rank_opts(p):
    p.add_argument("--unweighted-pagerank", action="store_true")
    p.add_argument("--reference", type=Path, help="earlier network edge list to compare with")
    p.add_argument("--depth", action="append", type=int, dest="depths",
                   help="Fagin depth (repeatable; default 10, 100, 1000)")


PIPELINE_COMMANDS = {
    "ingest": (("ingest", "model"), ()),
    "project": (("ingest", "model"), ()),
    "stats": (("ingest", "model", "stats"), (_stats_opts,)),
    "fit": (("ingest", "model", "fits"), (_fit_opts,)),
    "communities": (("ingest", "model", "communities"), (_community_opts,)),
    "cores": (("ingest", "model", "cores"), ()),
    "backbone": (("ingest", "model", "backbone"), (_stats_opts, _backbone_opts)),
    "rank": (("ingest", "model", "rank"), (_rank_opts,)),
    "report": (STAGES, (_stats_opts, _fit_opts, _community_opts, _backbone_opts, _rank_opts)),
}

HELP = {
    "ingest": "validate inputs and write the normalised network",
    "project": "project user-level follows onto instances",
    "stats": "macroscopic statistics (stats.json)",
    "fit": "degree-distribution fits (fits.json, ccdf_*.csv)",
    "communities": "Louvain communities, modularity and conductance",
    "cores": "k-core decompositions and core link profile",
    "backbone": "MLF and disparity backbones",
    "rank": "PageRank rankings and rank comparisons",
    "report": "run every stage and write the full bundle",
    "compare": "percentage change between two stats reports",
    "gen": "generate synthetic data from a generator spec",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fedinet", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"fedinet {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, extras) in PIPELINE_COMMANDS.items():
        p = sub.add_parser(name, help=HELP[name])
        _inputs(p)
        for add in extras:
            add(p)
    p = sub.add_parser("compare", help=HELP["compare"])
    p.add_argument("report", type=Path, help="stats JSON of the network of interest")
    p.add_argument("baseline", type=Path, help="stats JSON to compare against")
    p.add_argument("--decimals", type=int, default=0)
    p.add_argument("--out", "-o", type=Path)
    p = sub.add_parser("gen", help=HELP["gen"])
    p.add_argument("--spec", help="generator spec as JSON text or a path to a JSON file")
    p.add_argument("--family")
    p.add_argument("--param", action="append", default=[], metavar="KEY=VALUE")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", "-o", type=Path, default=None)
    return parser


def _config(args) -> PipelineConfig:
    if args.command == "project" and args.users is None:
        raise ValidationError("project needs --users")
    kw = dict(
        edges=args.input, users=args.users, meta=args.meta, boundary=args.boundary,
        model=args.model, seed=args.seed, out=args.out or default_out_dir(),
        distinct_source_users=args.distinct_source_users,
        keep_isolated_online=args.keep_isolated_online,
    )
    opt = vars(args)
    if "exact_paths_max" in opt:
        kw.update(exact_paths_max=args.exact_paths_max, path_mode=args.path_mode)
    if "bootstrap" in opt:
        kw["bootstrap"] = args.bootstrap
        if args.degrees:
            kw["degree_kinds"] = tuple(dict.fromkeys(args.degrees))
        if args.intervals:
            kw["fit_intervals"] = tuple(args.intervals)
    if "partition" in opt:
        kw.update(partition=args.partition,
                  include_insignificant=args.include_insignificant_communities)
    if opt.get("alphas"):
        kw["alphas"] = tuple(sorted(set(args.alphas)))
    if "unweighted_pagerank" in opt:
        kw.update(unweighted_pagerank=args.unweighted_pagerank, reference=args.reference)
        if args.depths:
            kw["rank_depths"] = tuple(args.depths)
    return PipelineConfig(**kw)


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _gen(args) -> None:
    if args.spec:
        text = Path(args.spec).read_text(encoding="utf-8") if Path(args.spec).is_file() else args.spec
        try:
            spec = GeneratorSpec.from_json(text)
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise ValidationError(f"bad generator spec: {exc}") from None
    elif args.family:
        params = {}
        for item in args.param:
            key, sep, val = item.partition("=")
            if not sep:
                raise ValidationError(f"--param expects KEY=VALUE, got {item!r}")
            params[key] = _parse_value(val)
        spec = GeneratorSpec(args.family, params, 0)
    else:
        raise ValidationError("gen needs --spec or --family")
    if args.seed is not None:
        spec = GeneratorSpec(spec.family, spec.params, args.seed)
    out = args.out or default_out_dir()
    out.mkdir(parents=True, exist_ok=True)
    result = generate(spec)
    header = [f"generator: {spec.to_json()}", f"version: {__version__}"]
    written = []
    if isinstance(result, FederatedSim):
        write_user_edges(result.users, out / "users.tsv")
        write_meta_map(result.meta, out / "meta.tsv")
        with open(out / "boundary.tsv", "w", encoding="utf-8") as fh:
            for r in result.boundary:
                fh.write(f"{r.source}\t{r.target}\t{int(r.weight)}\n")
        written = ["users.tsv", "meta.tsv", "boundary.tsv"]
    elif isinstance(result, np.ndarray):
        np.savetxt(out / "sample.txt", result, fmt="%d", header="\n".join(header))
        written = ["sample.txt"]
    else:
        graph = result.graph if isinstance(result, PlantedGraph) else result
        write_edge_list(graph, out / "edges.tsv", header)
        written = ["edges.tsv"]
        if isinstance(result, PlantedGraph):
            with open(out / "blocks.tsv", "w", encoding="utf-8") as fh:
                for lab, b in zip(graph.labels, result.blocks.tolist()):
                    fh.write(f"{lab}\t{b}\n")
            written.append("blocks.tsv")
    (out / "spec.json").write_text(spec.to_json() + "\n", encoding="utf-8")
    print(json.dumps({"spec": json.loads(spec.to_json()), "files": written + ["spec.json"]}))


def _compare(args) -> None:
    diff = compare_networks(read_report(args.report), read_report(args.baseline), args.decimals)
    text = dumps(diff)
    if args.out:
        args.out.write_text(text, encoding="utf-8")
    sys.stdout.write(text)


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "gen":
        _gen(args)
    elif args.command == "compare":
        _compare(args)
    else:
        stages, _ = PIPELINE_COMMANDS[args.command]
        pipe = Pipeline(_config(args))
        status = pipe.run(stages)
        print(json.dumps({"out": str(pipe.out), "stages": status,
                          "files": sorted(pipe.files)}, sort_keys=True))
    return 0


def main(argv=None) -> int:
    try:
        code = run(argv)
    except ConvergenceError as exc:
        print(f"fedinet: did not converge: {exc}", file=sys.stderr)
        code = exc.exit_code
    except FedinetError as exc:
        print(f"fedinet: error: {exc}", file=sys.stderr)
        code = exc.exit_code
    except (OSError, json.JSONDecodeError) as exc:
        print(f"fedinet: error: {exc}", file=sys.stderr)
        code = 1
    except Exception as exc:  # noqa: BLE001 - last-resort runtime failure
        log.debug("unexpected failure", exc_info=True)
        print(f"fedinet: runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        code = 2
    return code


if __name__ == "__main__":
    sys.exit(main())
