"""Command-line interface.

Each pipeline stage is independently invokable on the previous stage's
files, so very large runs can be checkpointed; `run` executes the whole
chain into one artifact directory.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .clustering import ClusteringConfig, sweep_k, _pick_best
from .community import (ModularityConfig, louvain_directed, read_partition,
                        write_partition)
from .graph import (DataError, load_edge_list, load_graph, save_graph_cache)
from .measures import (MEASURE_NAMES, compute_measures, correlation_matrix,
                       read_node_csv, threshold_role_inputs,
                       write_measures_csv, write_raw_features_csv)
from .pipeline import (PipelineConfig, StageError, format_stats_report,
                       read_assignment_csv, run_pipeline, write_assignment_csv,
                       write_crosstab_csv, write_roles_csv, write_sweep_csv)
from .roles import (RoleThresholds, anova_bonferroni, capitalist_band_codes,
                    crosstab, group_profiles, label_clusters, read_capitalists,
                    threshold_roles)
from .synth import PlantedRole, SynthParams, synth_generate

log = logging.getLogger("commroles.cli")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors must exit 1, not argparse's 2
        raise _UsageError(message)


def _add_graph_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", required=True, help="edge list (.txt) or graph cache (.npz)")
    p.add_argument("--convention", choices=("follow", "reverse"), default="follow",
                   help="line 'a b': follow = arc a->b, reverse = arc b->a")


def _aligned_assignment(measures_path: str, assignment_path: str):
    ids, vectors = read_node_csv(measures_path, MEASURE_NAMES)
    aids, labels = read_assignment_csv(assignment_path)
    if not np.array_equal(ids, aids):
        raise DataError("measures and assignment files cover different nodes")
    return ids, vectors, labels


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="commroles",
                     description="community-aware node-role analytics for directed graphs")
    parser.add_argument("--version", action="version", version=f"commroles {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse an edge list and write a binary graph cache")
    _add_graph_args(p)
    p.add_argument("--cache", required=True, help="output .npz path")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("communities", help="directed Louvain -> partition file")
    _add_graph_args(p)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--resolution", type=float, default=1.0)
    p.add_argument("--min-gain", type=float, default=1e-9)
    p.add_argument("--max-passes", type=int, default=100)
    p.set_defaults(func=cmd_communities)

    p = sub.add_parser("measures", help="compute the 8 role measures per node")
    _add_graph_args(p)
    p.add_argument("--partition", required=True, help="partition file")
    p.add_argument("--out", required=True, help="measures CSV")
    p.add_argument("--raw-out", help="also write the raw feature CSV")
    p.add_argument("--baseline-out",
                   help="also write the threshold-classifier CSV (node,z,P,role)")
    p.set_defaults(func=cmd_measures)

    p = sub.add_parser("cluster", help="k sweep over the measure vectors")
    p.add_argument("--measures", required=True)
    p.add_argument("--k-min", type=int, default=2)
    p.add_argument("--k-max", type=int, default=15)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--restarts", type=int, default=8)
    p.add_argument("--max-iterations", type=int, default=300)
    p.add_argument("--tolerance", type=float, default=1e-6)
    p.add_argument("--standardize", action="store_true")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--assignment-out", required=True)
    p.add_argument("--sweep-out", required=True)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("roles", help="profile and label the discovered clusters")
    p.add_argument("--measures", required=True)
    p.add_argument("--assignment", required=True)
    p.add_argument("--out", required=True, help="role report CSV")
    p.set_defaults(func=cmd_roles)

    p = sub.add_parser("capitalists", help="categorize capitalists and crosstab by cluster")
    _add_graph_args(p)
    p.add_argument("--assignment", required=True)
    p.add_argument("--capitalists", help="file of external node ids; omit to "
                                         "approximate by degree/ratio bands")
    p.add_argument("--low-min", type=int, default=500)
    p.add_argument("--low-max", type=int, default=10000)
    p.add_argument("--category-share-out", required=True)
    p.add_argument("--cluster-share-out", required=True)
    p.set_defaults(func=cmd_capitalists)

    p = sub.add_parser("stats", help="correlations, ANOVA and post-hoc tests")
    p.add_argument("--measures", required=True)
    p.add_argument("--assignment", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("synth", help="generate a planted-partition validation network")
    p.add_argument("--blocks", type=int, required=True)
    p.add_argument("--block-size", type=int, required=True)
    p.add_argument("--p-in", type=float, required=True)
    p.add_argument("--p-out", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--plant", action="append", default=[],
                   metavar="node=ID[,int_in=N][,int_out=N][,ext_in=N][,ext_out=N]",
                   help="force exact degree targets on a node (repeatable)")
    p.add_argument("--edges-out", required=True)
    p.add_argument("--partition-out", required=True)
    p.add_argument("--manifest-out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("run", help="full pipeline into one artifact directory")
    _add_graph_args(p)
    p.add_argument("--partition", default="louvain",
                   help="'louvain' or a precomputed partition file")
    p.add_argument("--k-min", type=int, default=2)
    p.add_argument("--k-max", type=int, default=15)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--restarts", type=int, default=8)
    p.add_argument("--max-iterations", type=int, default=300)
    p.add_argument("--tolerance", type=float, default=1e-6)
    p.add_argument("--standardize", action="store_true")
    p.add_argument("--resolution", type=float, default=1.0)
    p.add_argument("--capitalists")
    p.add_argument("--low-min", type=int, default=500)
    p.add_argument("--low-max", type=int, default=10000)
    p.add_argument("--hub-z", type=float, default=2.5)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", required=True, help="artifact directory")
    p.set_defaults(func=cmd_run)

    return parser


# ---- subcommands ---------------------------------------------------------------

def cmd_ingest(args) -> int:
    g = load_edge_list(args.input, args.convention)
    save_graph_cache(args.cache, g)
    print(f"n={g.n} m={g.m} duplicates={g.duplicate_arcs} self_loops={g.self_loops}")
    return 0


def cmd_communities(args) -> int:
    g = load_graph(args.input, args.convention)
    res = louvain_directed(g, ModularityConfig(
        resolution=args.resolution, min_gain=args.min_gain,
        max_passes=args.max_passes, seed=args.seed))
    write_partition(args.out, res.partition, g)
    print(f"communities={res.partition.c} Q={res.modularity!r}")
    return 0


def cmd_measures(args) -> int:
    g = load_graph(args.input, args.convention)
    p = read_partition(args.partition, g)
    raw, vectors = compute_measures(g, p)
    write_measures_csv(args.out, g, vectors)
    if args.raw_out:
        write_raw_features_csv(args.raw_out, g, raw)
    if args.baseline_out:
        z, pc = threshold_role_inputs(g, p)
        labels = threshold_roles(z, pc)
        with open(args.baseline_out, "w") as f:
            f.write("node,z,P,role\n")
            for u in range(g.n):
                f.write(f"{g.ext_ids[u]},{float(z[u])!r},{float(pc[u])!r},{labels[u]}\n")
    print(f"nodes={g.n} communities={p.c}")
    return 0


def cmd_cluster(args) -> int:
    ids, vectors = read_node_csv(args.measures, MEASURE_NAMES)
    cfg = ClusteringConfig(k_min=args.k_min, k_max=args.k_max, seed=args.seed,
                           max_iterations=args.max_iterations,
                           tolerance=args.tolerance, restarts=args.restarts,
                           standardize=args.standardize)
    sweep = sweep_k(vectors, cfg, threads=args.threads)
    k_star, best = _pick_best(sweep)
    write_sweep_csv(Path(args.sweep_out), sweep)
    write_assignment_csv(Path(args.assignment_out), ids, best.assignment)
    print(f"k_star={k_star} db={best.db_index!r}")
    return 0


def cmd_roles(args) -> int:
    _, vectors, labels = _aligned_assignment(args.measures, args.assignment)
    profiles = group_profiles(vectors, labels)
    names = label_clusters(profiles)
    write_roles_csv(Path(args.out), profiles, names)
    for p in profiles:
        print(f"cluster {p.cluster}: size={p.size} label={names[p.cluster]}")
    return 0


def cmd_capitalists(args) -> int:
    g = load_graph(args.input, args.convention)
    ids, labels = read_assignment_csv(args.assignment)
    if not np.array_equal(ids, g.ext_ids):
        raise DataError("assignment file does not cover the graph's nodes")
    caps = read_capitalists(args.capitalists, g) if args.capitalists else None
    if caps is None:
        log.info("no capitalist list; approximating by degree/ratio bands")
    deg, ratio = capitalist_band_codes(g, caps, (args.low_min, args.low_max))
    tab = crosstab(labels, deg, ratio)
    write_crosstab_csv(Path(args.category_share_out), tab.share_of_category, tab)
    write_crosstab_csv(Path(args.cluster_share_out), tab.share_of_cluster, tab)
    if tab.empty_rows:
        log.info("empty capitalist bands: %s", ",".join(map(str, tab.empty_rows)))
    return 0


def cmd_stats(args) -> int:
    _, vectors, labels = _aligned_assignment(args.measures, args.assignment)
    corr = correlation_matrix(vectors)
    report = anova_bonferroni(vectors, labels)
    Path(args.out).write_text(format_stats_report(corr, report))
    return 0


def _parse_plant(text: str) -> PlantedRole:
    fields = {}
    for part in text.split(","):
        key, _, value = part.partition("=")
        key = key.strip()
        if key not in ("node", "int_in", "int_out", "ext_in", "ext_out") or not value:
            raise _UsageError(f"bad --plant field {part!r}")
        try:
            fields[key] = int(value)
        except ValueError:
            raise _UsageError(f"bad --plant value {part!r}") from None
    if "node" not in fields:
        raise _UsageError(f"--plant needs node=ID: {text!r}")
    return PlantedRole(**fields)


def cmd_synth(args) -> int:
    params = SynthParams(blocks=args.blocks, block_size=args.block_size,
                         p_in=args.p_in, p_out=args.p_out, seed=args.seed,
                         planted=tuple(_parse_plant(s) for s in args.plant))
    summary = synth_generate(params, args.edges_out, args.partition_out,
                             args.manifest_out)
    print(f"n={summary['n']} m={summary['m']}")
    return 0


def cmd_run(args) -> int:
    cfg = PipelineConfig(
        input_path=Path(args.input), out_dir=Path(args.out),
        convention=args.convention, partition_source=args.partition,
        seed=args.seed, resolution=args.resolution,
        k_min=args.k_min, k_max=args.k_max, restarts=args.restarts,
        max_iterations=args.max_iterations, tolerance=args.tolerance,
        standardize=args.standardize,
        capitalists_path=Path(args.capitalists) if args.capitalists else None,
        low_band=(args.low_min, args.low_max),
        thresholds=RoleThresholds(hub_z=args.hub_z),
        threads=args.threads)
    result = run_pipeline(cfg)
    print(f"n={result.n} m={result.m} communities={result.n_communities} "
          f"Q={result.modularity!r} k_star={result.k_star} out={result.out_dir}")
    return 0


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO, format="%(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except _UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 1
    except StageError as e:
        cause = e.cause
        code = 2 if isinstance(cause, (DataError, ValueError, OSError)) else 3
        print(f"error: {e}", file=sys.stderr)
        return code
    except (DataError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except Exception as e:  # internal error
        print(f"internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
