"""Planted-partition network generator for validation runs.

Directed stochastic block model: every ordered cross-node pair (u, v) gets
arc u->v independently with probability p_in inside a block and p_out across
blocks.  Optional planted roles then add or remove arcs until chosen nodes
hit exact internal/external degree targets, so hub-like nodes exist by
construction.  Everything is deterministic for a given seed.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .graph import DataError
from .seeding import STREAM_SYNTH, rng_from


@dataclass(frozen=True)
class PlantedRole:
    node: int
    int_in: int | None = None
    int_out: int | None = None
    ext_in: int | None = None
    ext_out: int | None = None


@dataclass(frozen=True)
class SynthParams:
    blocks: int
    block_size: int
    p_in: float
    p_out: float
    seed: int = 0
    planted: tuple[PlantedRole, ...] = ()

    def __post_init__(self):
        if self.blocks < 2:
            raise ValueError("need at least 2 blocks")
        if self.block_size < 1:
            raise ValueError("block_size must be >= 1")
        if not (0.0 <= self.p_out < self.p_in <= 1.0):
            raise ValueError("need 0 <= p_out < p_in <= 1")

    @property
    def n(self) -> int:
        return self.blocks * self.block_size


def _check_feasible(params: SynthParams) -> None:
    bs, n = params.block_size, params.n
    for role in params.planted:
        if not 0 <= role.node < n:
            raise DataError(f"planted node {role.node} outside [0, {n})")
        for name, target, cap in (("int_in", role.int_in, bs - 1),
                                  ("int_out", role.int_out, bs - 1),
                                  ("ext_in", role.ext_in, n - bs),
                                  ("ext_out", role.ext_out, n - bs)):
            if target is None:
                continue
            if target < 0:
                raise DataError(f"planted {name} target {target} is negative")
            if target > cap:
                raise DataError(
                    f"planted {name}={target} for node {role.node} infeasible "
                    f"(at most {cap} candidates)")


def _sample_block_pair(rng: np.random.Generator, bi: int, bj: int, bs: int,
                       p: float) -> tuple[np.ndarray, np.ndarray] | None:
    same = bi == bj
    npairs = bs * bs - bs if same else bs * bs
    if npairs <= 0 or p <= 0.0:
        return None
    cnt = int(rng.binomial(npairs, p))
    if cnt == 0:
        return None
    cells = np.sort(rng.choice(npairs, size=cnt, replace=False))
    if same:
        # bijective indexing of the off-diagonal cells
        row = cells // (bs - 1)
        col = cells % (bs - 1)
        col = col + (col >= row)
    else:
        row = cells // bs
        col = cells % bs
    return bi * bs + row, bj * bs + col


def _adjust_degree(src: np.ndarray, dst: np.ndarray, rng: np.random.Generator,
                   node: int, target: int, outgoing: bool, internal: bool,
                   bs: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Add/remove arcs at `node` until one degree facet hits `target`."""
    anchor, other = (src, dst) if outgoing else (dst, src)
    block = node // bs
    in_block = other // bs == block
    mask = (anchor == node) & (in_block if internal else ~in_block)
    current = other[mask]
    have = len(current)
    if have > target:
        drop_local = rng.choice(have, size=have - target, replace=False)
        drop = np.flatnonzero(mask)[np.sort(drop_local)]
        keep = np.ones(len(src), dtype=bool)
        keep[drop] = False
        return src[keep], dst[keep]
    if have < target:
        if internal:
            pool = np.arange(block * bs, (block + 1) * bs, dtype=np.int64)
        else:
            pool = np.concatenate([np.arange(0, block * bs, dtype=np.int64),
                                   np.arange((block + 1) * bs, n, dtype=np.int64)])
        candidates = np.setdiff1d(pool, np.append(current, node))
        need = target - have
        if need > len(candidates):
            raise DataError(f"cannot reach degree target {target} for node {node}")
        chosen = candidates[np.sort(rng.choice(len(candidates), size=need, replace=False))]
        new_anchor = np.full(need, node, dtype=np.int64)
        if outgoing:
            return np.concatenate([src, new_anchor]), np.concatenate([dst, chosen])
        return np.concatenate([src, chosen]), np.concatenate([dst, new_anchor])
    return src, dst


def generate_arcs(params: SynthParams) -> tuple[np.ndarray, np.ndarray]:
    """(src, dst) arrays, sorted by (src, dst); node i belongs to block
    i // block_size."""
    _check_feasible(params)
    rng = rng_from(params.seed, STREAM_SYNTH)
    b, bs = params.blocks, params.block_size
    srcs, dsts = [], []
    for bi in range(b):
        for bj in range(b):
            sampled = _sample_block_pair(rng, bi, bj, bs,
                                         params.p_in if bi == bj else params.p_out)
            if sampled is not None:
                srcs.append(sampled[0])
                dsts.append(sampled[1])
    if srcs:
        src = np.concatenate(srcs)
        dst = np.concatenate(dsts)
    else:
        src = np.empty(0, dtype=np.int64)
        dst = np.empty(0, dtype=np.int64)

    for role in params.planted:
        for target, outgoing, internal in ((role.int_out, True, True),
                                           (role.int_in, False, True),
                                           (role.ext_out, True, False),
                                           (role.ext_in, False, False)):
            if target is not None:
                src, dst = _adjust_degree(src, dst, rng, role.node, target,
                                          outgoing, internal, bs, params.n)

    order = np.lexsort((dst, src))
    return src[order], dst[order]


def synth_generate(params: SynthParams, edges_path: str | Path,
                   partition_path: str | Path, manifest_path: str | Path) -> dict:
    """Write edge list, ground-truth partition and a JSON manifest.

    Identical params and seed reproduce all three files byte for byte.
    """
    src, dst = generate_arcs(params)
    n = params.n

    with open(edges_path, "w") as f:
        f.write("# synthetic planted-partition digraph: src dst (src follows dst)\n")
        chunk = [f"{s} {d}" for s, d in zip(src.tolist(), dst.tolist())]
        if chunk:
            f.write("\n".join(chunk) + "\n")

    bs = params.block_size
    with open(partition_path, "w") as f:
        f.write("\n".join(f"{u} {u // bs}" for u in range(n)) + "\n")

    summary = {
        "blocks": params.blocks,
        "block_size": params.block_size,
        "p_in": params.p_in,
        "p_out": params.p_out,
        "seed": params.seed,
        "n": n,
        "m": int(len(src)),
        "planted": [asdict(r) for r in params.planted],
    }
    with open(manifest_path, "w") as f:
        json.dump(summary, f, indent=2, sort_keys=True)
        f.write("\n")
    return summary
