"""Directed-graph storage, ingestion and degree machinery.

The graph is a simple directed graph (no self-loops, no parallel arcs) over
dense internal node ids [0, n).  Original external ids are kept in a sorted
side array, so the internal numbering is canonical: it depends only on the
set of arcs, not on input order.  Adjacency is CSR-style with sorted
neighbor lists in both directions, which keeps 10^7-node graphs in a few
flat arrays and gives O(log d) membership tests.
"""
from __future__ import annotations

import logging
from pathlib import Path
from typing import IO, Iterable, Literal

import numpy as np

log = logging.getLogger("commroles.graph")

Direction = Literal["in", "out", "total"]

#: ingestion conventions for an edge-list line "a b"
#: follow  -- a follows b, i.e. arc a -> b
#: reverse -- b follows a, i.e. arc b -> a (Kwak-style "user follower" dumps)
CONVENTIONS = ("follow", "reverse")


class DataError(ValueError):
    """Invalid input data (maps to CLI exit code 2)."""


class EdgeListParseError(DataError):
    def __init__(self, line_no: int, line: str, reason: str):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {reason}: {line!r}")


class PartitionError(DataError):
    pass


class DirectedGraph:
    """Immutable simple directed graph.

    Attributes
    ----------
    n, m : node and arc counts
    ext_ids : sorted array mapping internal id -> external id
    duplicate_arcs, self_loops : counts dropped during construction
    """

    __slots__ = (
        "n",
        "m",
        "ext_ids",
        "duplicate_arcs",
        "self_loops",
        "_out_indptr",
        "_out_indices",
        "_in_indptr",
        "_in_indices",
    )

    def __init__(
        self,
        out_indptr: np.ndarray,
        out_indices: np.ndarray,
        in_indptr: np.ndarray,
        in_indices: np.ndarray,
        ext_ids: np.ndarray,
        duplicate_arcs: int = 0,
        self_loops: int = 0,
    ):
        self.n = len(ext_ids)
        self.m = len(out_indices)
        self._out_indptr = out_indptr
        self._out_indices = out_indices
        self._in_indptr = in_indptr
        self._in_indices = in_indices
        self.ext_ids = ext_ids
        self.duplicate_arcs = duplicate_arcs
        self.self_loops = self_loops
        for a in (out_indptr, out_indices, in_indptr, in_indices, ext_ids):
            a.flags.writeable = False

    # ---- construction ----------------------------------------------------

    @classmethod
    def from_arcs(
        cls,
        arcs: Iterable[tuple[int, int]],
        nodes: Iterable[int] | None = None,
    ) -> "DirectedGraph":
        """Build from (src, dst) external-id pairs.

        Parallel arcs are collapsed and self-loops dropped (counted on the
        result).  `nodes` may add isolated nodes not present in any arc.
        """
        pairs = np.asarray(list(arcs), dtype=np.int64)
        if pairs.size == 0:
            pairs = pairs.reshape(0, 2)
        extra = np.asarray(list(nodes), dtype=np.int64) if nodes is not None else None
        return cls._build(pairs[:, 0], pairs[:, 1], extra)

    @classmethod
    def _build(
        cls,
        src: np.ndarray,
        dst: np.ndarray,
        extra_nodes: np.ndarray | None = None,
    ) -> "DirectedGraph":
        if src.size and (src.min() < 0 or dst.min() < 0):
            raise DataError("node ids must be non-negative")
        endpoints = [src, dst]
        if extra_nodes is not None and extra_nodes.size:
            if extra_nodes.min() < 0:
                raise DataError("node ids must be non-negative")
            endpoints.append(extra_nodes)
        ext_ids = np.unique(np.concatenate(endpoints)) if any(a.size for a in endpoints) else np.empty(0, np.int64)

        # re-index densely; np.unique returns sorted ids, so the mapping is
        # canonical for a given arc set
        s = np.searchsorted(ext_ids, src)
        d = np.searchsorted(ext_ids, dst)

        loops = s == d
        self_loops = int(np.count_nonzero(loops))
        s, d = s[~loops], d[~loops]
        before = len(s)
        if before:
            uniq = np.unique(np.stack([s, d], axis=1), axis=0)
            s, d = uniq[:, 0].copy(), uniq[:, 1].copy()
        duplicates = before - len(s)

        n = len(ext_ids)
        out_indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(s, minlength=n), out=out_indptr[1:])
        out_indices = d  # unique() already sorted rows by (s, d)

        order = np.lexsort((s, d))
        in_indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(d, minlength=n), out=in_indptr[1:])
        in_indices = s[order]

        return cls(out_indptr, out_indices, in_indptr, in_indices, ext_ids,
                   duplicate_arcs=duplicates, self_loops=self_loops)

    # ---- id mapping ------------------------------------------------------

    def to_internal(self, ext: np.ndarray | int) -> np.ndarray | int:
        """Map external id(s) to internal; raises on unknown ids."""
        scalar = np.isscalar(ext) or np.ndim(ext) == 0
        ext_arr = np.atleast_1d(np.asarray(ext, dtype=np.int64))
        if self.n == 0:
            if ext_arr.size:
                raise DataError(f"node {ext_arr[0]} unknown")
            return ext_arr
        idx = np.searchsorted(self.ext_ids, ext_arr)
        bad = (idx >= self.n) | (self.ext_ids[np.minimum(idx, self.n - 1)] != ext_arr)
        if bad.any():
            raise DataError(f"node {ext_arr[bad][0]} unknown")
        return int(idx[0]) if scalar else idx

    def to_external(self, internal: np.ndarray | int) -> np.ndarray | int:
        return self.ext_ids[internal]

    # ---- queries ---------------------------------------------------------

    def _check_node(self, u: int) -> None:
        if not 0 <= u < self.n:
            raise DataError(f"node index {u} out of range [0, {self.n})")

    def out_neighbors(self, u: int) -> np.ndarray:
        self._check_node(u)
        return self._out_indices[self._out_indptr[u]:self._out_indptr[u + 1]]

    def in_neighbors(self, u: int) -> np.ndarray:
        self._check_node(u)
        return self._in_indices[self._in_indptr[u]:self._in_indptr[u + 1]]

    def degree(self, u: int, direction: Direction = "total") -> int:
        self._check_node(u)
        d_out = int(self._out_indptr[u + 1] - self._out_indptr[u])
        d_in = int(self._in_indptr[u + 1] - self._in_indptr[u])
        if direction == "out":
            return d_out
        if direction == "in":
            return d_in
        if direction == "total":
            return d_in + d_out
        raise ValueError(f"unknown direction {direction!r}")

    def out_degrees(self) -> np.ndarray:
        return np.diff(self._out_indptr)

    def in_degrees(self) -> np.ndarray:
        return np.diff(self._in_indptr)

    def has_arc(self, u: int, v: int) -> bool:
        row = self.out_neighbors(u)
        i = np.searchsorted(row, v)
        return i < len(row) and row[i] == v

    def arc_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """(src, dst) internal-id arrays, ordered by (src, dst)."""
        src = np.repeat(np.arange(self.n, dtype=np.int64), self.out_degrees())
        return src, self._out_indices

    def __repr__(self) -> str:
        return f"DirectedGraph(n={self.n}, m={self.m})"


class Partition:
    """Dense node -> community assignment.

    Community ids must cover [0, c) with every community non-empty; use
    `Partition.densify` for raw labels.
    """

    __slots__ = ("assignment", "n", "c", "_members")

    def __init__(self, assignment: np.ndarray):
        assignment = np.asarray(assignment, dtype=np.int64)
        self.n = len(assignment)
        if self.n == 0:
            self.c = 0
        else:
            if assignment.min() < 0:
                raise PartitionError("negative community id")
            self.c = int(assignment.max()) + 1
            if len(np.unique(assignment)) != self.c:
                raise PartitionError("community ids are not dense")
        self.assignment = assignment
        self.assignment.flags.writeable = False
        self._members: list[np.ndarray] | None = None

    @classmethod
    def densify(cls, labels: np.ndarray) -> "Partition":
        """Map arbitrary labels to dense ids, ordered by label value."""
        labels = np.asarray(labels, dtype=np.int64)
        _, dense = np.unique(labels, return_inverse=True)
        return cls(dense)

    def members(self, community: int) -> np.ndarray:
        if not 0 <= community < self.c:
            raise PartitionError(f"community index {community} out of range [0, {self.c})")
        if self._members is None:
            order = np.argsort(self.assignment, kind="stable")
            sizes = np.bincount(self.assignment, minlength=self.c)
            bounds = np.zeros(self.c + 1, dtype=np.int64)
            np.cumsum(sizes, out=bounds[1:])
            self._members = [order[bounds[i]:bounds[i + 1]] for i in range(self.c)]
        return self._members[community]

    def sizes(self) -> np.ndarray:
        return np.bincount(self.assignment, minlength=self.c)

    def __eq__(self, other) -> bool:
        return isinstance(other, Partition) and np.array_equal(self.assignment, other.assignment)

    def __repr__(self) -> str:
        return f"Partition(n={self.n}, c={self.c})"


# ---- ingestion -------------------------------------------------------------

def _iter_pairs(data: bytes):
    for line_no, raw in enumerate(data.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith(b"#"):
            continue
        tokens = line.split()
        if len(tokens) != 2:
            raise EdgeListParseError(line_no, raw.decode(errors="replace"),
                                     f"expected 2 tokens, got {len(tokens)}")
        try:
            yield int(tokens[0]), int(tokens[1])
        except ValueError:
            raise EdgeListParseError(line_no, raw.decode(errors="replace"),
                                     "tokens must be base-10 integers") from None


def load_edge_list(
    source: str | Path | IO[bytes],
    convention: str = "follow",
) -> DirectedGraph:
    """Load a directed graph from a whitespace-separated edge list.

    One arc per line, two integer ids; '#' lines are comments.  Under the
    `follow` convention a line "a b" means a follows b (arc a->b); under
    `reverse` it means b follows a (arc b->a).  Duplicates are collapsed
    and self-loops dropped, with counts logged.
    """
    if convention not in CONVENTIONS:
        raise DataError(f"unknown convention {convention!r}; expected one of {CONVENTIONS}")
    if hasattr(source, "read"):
        data = source.read()
    else:
        data = Path(source).read_bytes()
    if isinstance(data, str):
        data = data.encode()

    pairs = list(_iter_pairs(data))
    arr = np.asarray(pairs, dtype=np.int64).reshape(len(pairs), 2)
    src, dst = arr[:, 0], arr[:, 1]
    if convention == "reverse":
        src, dst = dst, src
    g = DirectedGraph._build(src, dst)
    if g.duplicate_arcs or g.self_loops:
        log.warning("ingestion dropped %d duplicate arc(s) and %d self-loop(s)",
                    g.duplicate_arcs, g.self_loops)
    return g


# ---- binary cache ----------------------------------------------------------

_CACHE_VERSION = 1


def save_graph_cache(path: str | Path, g: DirectedGraph) -> None:
    """Compact binary cache of an ingested graph (npz)."""
    np.savez_compressed(
        path,
        version=np.int64(_CACHE_VERSION),
        out_indptr=g._out_indptr,
        out_indices=g._out_indices,
        in_indptr=g._in_indptr,
        in_indices=g._in_indices,
        ext_ids=g.ext_ids,
    )


def load_graph_cache(path: str | Path) -> DirectedGraph:
    with np.load(path) as z:
        if int(z["version"]) != _CACHE_VERSION:
            raise DataError(f"unsupported graph cache version {int(z['version'])}")
        return DirectedGraph(
            z["out_indptr"].copy(), z["out_indices"].copy(),
            z["in_indptr"].copy(), z["in_indices"].copy(),
            z["ext_ids"].copy(),
        )


def load_graph(path: str | Path, convention: str = "follow") -> DirectedGraph:
    """Dispatch on suffix: .npz cache, anything else is a text edge list."""
    p = Path(path)
    if p.suffix == ".npz":
        return load_graph_cache(p)
    return load_edge_list(p, convention)


# ---- degree machinery over (graph, partition) -------------------------------

def community_degree(g: DirectedGraph, p: Partition, u: int, community: int,
                     direction: Direction) -> int:
    """Number of arcs between `u` and members of `community`, one direction."""
    if not 0 <= community < p.c:
        raise PartitionError(f"community index {community} out of range [0, {p.c})")
    if direction == "out":
        neigh = g.out_neighbors(u)
    elif direction == "in":
        neigh = g.in_neighbors(u)
    else:
        raise ValueError(f"direction must be 'in' or 'out', got {direction!r}")
    return int(np.count_nonzero(p.assignment[neigh] == community))


def degree_split(g: DirectedGraph, p: Partition, u: int,
                 direction: Direction) -> tuple[int, int]:
    """(internal, external) degree of `u` w.r.t. its own community."""
    internal = community_degree(g, p, u, int(p.assignment[u]), direction)
    return internal, g.degree(u, direction) - internal


def external_community_profile(g: DirectedGraph, p: Partition, u: int,
                               direction: Direction) -> dict[int, int]:
    """Arc counts of `u` into/from each external community (count > 0 only)."""
    if direction == "out":
        neigh = g.out_neighbors(u)
    elif direction == "in":
        neigh = g.in_neighbors(u)
    else:
        raise ValueError(f"direction must be 'in' or 'out', got {direction!r}")
    own = p.assignment[u]
    comms = p.assignment[neigh]
    comms = comms[comms != own]
    if comms.size == 0:
        return {}
    vals, counts = np.unique(comms, return_counts=True)
    return {int(c): int(k) for c, k in zip(vals, counts)}
