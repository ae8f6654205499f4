"""Community detection: directed modularity and a directed Louvain.

Modularity for a directed graph compares each arc against a null model that
preserves both in- and out-degree sequences:

    Q = (1/m) * sum_uv [ A_uv - resolution * d_out(u) * d_in(v) / m ] * delta(c_u, c_v)

Louvain greedily maximizes Q in two alternating phases: sequential local
moves over a random node permutation (re-drawn each pass from the seed), and
aggregation of communities into weighted super-nodes.  Aggregated graphs
carry arc weights and self-loops even though the input graph is simple; the
formula generalizes with weights in the usual way.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO

import numpy as np

from .graph import DataError, DirectedGraph, Partition, PartitionError, _iter_pairs
from .seeding import STREAM_LOUVAIN, rng_from

log = logging.getLogger("commroles.community")


@dataclass(frozen=True)
class ModularityConfig:
    resolution: float = 1.0
    min_gain: float = 1e-9
    max_passes: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.resolution <= 0:
            raise ValueError("resolution must be > 0")
        if self.min_gain < 0:
            raise ValueError("min_gain must be >= 0")
        if self.max_passes < 1:
            raise ValueError("max_passes must be >= 1")


def directed_modularity(g: DirectedGraph, p: Partition, resolution: float = 1.0) -> float:
    """Directed modularity of a partition; raises on an arcless graph."""
    if g.m == 0:
        raise DataError("modularity undefined for a graph with no arcs")
    if p.n != g.n:
        raise PartitionError(f"partition covers {p.n} nodes, graph has {g.n}")
    src, dst = g.arc_arrays()
    a = p.assignment
    internal = int(np.count_nonzero(a[src] == a[dst]))
    k_out = np.bincount(a, weights=g.out_degrees().astype(np.float64), minlength=p.c)
    k_in = np.bincount(a, weights=g.in_degrees().astype(np.float64), minlength=p.c)
    m = float(g.m)
    return internal / m - resolution * float(np.dot(k_out, k_in)) / (m * m)


@dataclass
class LouvainResult:
    partition: Partition
    levels: list[Partition]
    modularity: float                 # recomputed from scratch on the final partition
    level_modularities: list[float] = field(default_factory=list)
    incremental_modularity: float = 0.0  # level-start Q plus accumulated move gains


def _local_move_phase(n, out_ptr, out_idx, out_w, in_ptr, in_idx, in_w,
                      k_out, k_in, m, resolution, min_gain, max_passes, rng,
                      init_comm=None):
    """Sequential local moves on one level.  All containers are plain lists.

    Starts from singletons unless `init_comm` seeds the communities.
    Returns (community list, total moves, accumulated Q gain).
    """
    if init_comm is None:
        comm = list(range(n))
        K_out = k_out[:]
        K_in = k_in[:]
    else:
        comm = list(init_comm)
        K_out = [0.0] * n
        K_in = [0.0] * n
        for u in range(n):
            K_out[comm[u]] += k_out[u]
            K_in[comm[u]] += k_in[u]
    gamma_m = resolution / m
    min_gain_scaled = min_gain * m
    total_moves = 0
    gain_sum = 0.0

    for _ in range(max_passes):
        moves = 0
        for u in rng.permutation(n).tolist():
            cu = comm[u]
            ko = k_out[u]
            ki = k_in[u]
            link: dict[int, float] = {}
            for t in range(out_ptr[u], out_ptr[u + 1]):
                v = out_idx[t]
                if v != u:
                    c = comm[v]
                    link[c] = link.get(c, 0.0) + out_w[t]
            for t in range(in_ptr[u], in_ptr[u + 1]):
                v = in_idx[t]
                if v != u:
                    c = comm[v]
                    link[c] = link.get(c, 0.0) + in_w[t]

            K_out[cu] -= ko
            K_in[cu] -= ki
            stay = link.get(cu, 0.0) - (ko * K_in[cu] + ki * K_out[cu]) * gamma_m

            best_gain = None
            best_c = cu
            for c in sorted(link):  # ascending id: ties resolve to lowest
                if c == cu:
                    continue
                gain = link[c] - (ko * K_in[c] + ki * K_out[c]) * gamma_m
                if best_gain is None or gain > best_gain:
                    best_gain = gain
                    best_c = c

            if best_gain is not None and best_gain - stay > min_gain_scaled:
                comm[u] = best_c
                gain_sum += best_gain - stay
                moves += 1
            else:
                best_c = cu
            K_out[best_c] += ko
            K_in[best_c] += ki
        total_moves += moves
        if moves == 0:
            break
    return comm, total_moves, gain_sum / m


class _MoveGraph:
    """Flat-list view of a weighted digraph for the local-move loop."""

    def __init__(self, src: np.ndarray, dst: np.ndarray, w: np.ndarray, n: int):
        self.n = n
        order = np.lexsort((dst, src))
        src, dst, w = src[order], dst[order], w[order]
        out_ptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=out_ptr[1:])
        rev = np.lexsort((src, dst))
        in_ptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(dst, minlength=n), out=in_ptr[1:])
        self.out_ptr = out_ptr.tolist()
        self.out_idx = dst.tolist()
        self.out_w = w.tolist()
        self.in_ptr = in_ptr.tolist()
        self.in_idx = src[rev].tolist()
        self.in_w = w[rev].tolist()
        self.k_out = np.bincount(src, weights=w, minlength=n).tolist()
        self.k_in = np.bincount(dst, weights=w, minlength=n).tolist()

    def local_move(self, m, cfg: ModularityConfig, rng, init_comm=None):
        return _local_move_phase(
            self.n, self.out_ptr, self.out_idx, self.out_w,
            self.in_ptr, self.in_idx, self.in_w, self.k_out, self.k_in,
            m, cfg.resolution, cfg.min_gain, cfg.max_passes, rng, init_comm)


def louvain_directed(g: DirectedGraph, cfg: ModularityConfig | None = None) -> LouvainResult:
    """Multi-level Louvain under directed modularity.

    Alternates the usual coarsening levels (local moves over aggregated
    super-nodes) with single-node refinement passes on the original graph,
    until neither finds a move.  The refinement guarantees that in the final
    partition no single node can be moved for a gain above min_gain.

    Deterministic for a given seed: the seed fixes the node visiting order
    of every pass, and ambiguous best-community choices go to the lowest
    community index.
    """
    if cfg is None:
        cfg = ModularityConfig()
    if g.m == 0:
        raise DataError("modularity undefined for a graph with no arcs")

    rng = rng_from(cfg.seed, STREAM_LOUVAIN)
    m = float(g.m)
    src0, dst0 = g.arc_arrays()
    w0 = np.ones(g.m, dtype=np.float64)
    base = _MoveGraph(src0, dst0, w0, g.n)

    assign = np.arange(g.n, dtype=np.int64)
    # Q of the all-singletons partition; move gains accumulate onto this
    q_inc = -cfg.resolution * float(np.dot(g.out_degrees().astype(np.float64),
                                           g.in_degrees().astype(np.float64))) / (m * m)

    levels: list[Partition] = []
    level_q: list[float] = []

    def record(new_assign: np.ndarray, gain: float) -> None:
        nonlocal assign, q_inc
        assign = new_assign
        q_inc += gain
        part = Partition(assign.copy())
        levels.append(part)
        level_q.append(directed_modularity(g, part, cfg.resolution))
        log.info("level %d: Q=%.12g", len(levels), level_q[-1])

    first = True
    while True:
        progressed = False

        # single-node phase on the original graph, seeded with the current
        # communities (on the first iteration this is the classic level-0
        # local-move phase from singletons)
        comm, moves, gain = base.local_move(
            m, cfg, rng, None if first else assign.tolist())
        first = False
        if moves:
            _, dense = np.unique(np.asarray(comm, dtype=np.int64), return_inverse=True)
            record(dense, gain)
            progressed = True

        # coarsening: aggregate communities into weighted super-nodes
        # (self-loops keep the internal weight) and move those
        while True:
            c = int(assign.max()) + 1
            if c == 1:
                break
            key = assign[src0] * c + assign[dst0]
            uniq_key, inverse = np.unique(key, return_inverse=True)
            w = np.bincount(inverse, weights=w0)
            level = _MoveGraph(uniq_key // c, uniq_key % c, w, c)
            comm, moves, gain = level.local_move(m, cfg, rng)
            if moves == 0:
                break
            _, dense = np.unique(np.asarray(comm, dtype=np.int64), return_inverse=True)
            record(dense[assign], gain)
            progressed = True

        if not progressed:
            break

    if levels:
        final = levels[-1]
        q_final = level_q[-1]
    else:
        final = Partition(np.arange(g.n, dtype=np.int64))
        q_final = directed_modularity(g, final, cfg.resolution)
    return LouvainResult(partition=final, levels=levels, modularity=q_final,
                         level_modularities=level_q, incremental_modularity=q_inc)


# ---- partition file IO -------------------------------------------------------

def read_partition(source: str | Path | IO[bytes], g: DirectedGraph) -> Partition:
    """Read "node_id community_id" lines; every graph node exactly once.

    Community ids are densified to [0, c) preserving grouping (ordered by
    raw id value).
    """
    if hasattr(source, "read"):
        data = source.read()
    else:
        data = Path(source).read_bytes()
    if isinstance(data, str):
        data = data.encode()
    pairs = np.asarray(list(_iter_pairs(data)), dtype=np.int64).reshape(-1, 2)
    ext, comm = pairs[:, 0], pairs[:, 1]
    if comm.size and comm.min() < 0:
        bad = int(np.flatnonzero(comm < 0)[0])
        raise PartitionError(f"node {ext[bad]} has negative community id {comm[bad]}")
    u = np.atleast_1d(np.asarray(g.to_internal(ext)))  # raises "node X unknown"
    counts = np.bincount(u, minlength=g.n) if u.size else np.zeros(g.n, dtype=np.int64)
    if (counts > 1).any():
        dup = int(np.flatnonzero(counts > 1)[0])
        raise PartitionError(f"node {g.ext_ids[dup]} assigned twice")
    if (counts == 0).any():
        missing = int(np.flatnonzero(counts == 0)[0])
        raise PartitionError(f"node {g.ext_ids[missing]} unassigned")
    labels = np.empty(g.n, dtype=np.int64)
    labels[u] = comm
    return Partition.densify(labels)


def write_partition(path: str | Path, p: Partition, g: DirectedGraph) -> None:
    if p.n != g.n:
        raise PartitionError(f"partition covers {p.n} nodes, graph has {g.n}")
    lines = [f"{e} {c}" for e, c in zip(g.ext_ids.tolist(), p.assignment.tolist())]
    with open(path, "w") as f:
        if lines:
            f.write("\n".join(lines) + "\n")
