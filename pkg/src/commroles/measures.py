"""Community-relative node measures.

Every role measure is the z-score, inside a node's own community, of one base
quantity taken from the node's link profile:

    internal intensity  I_int  <- internal degree d_int
    external intensity  I_ext  <- external degree d_ext
    diversity           D      <- number of distinct external communities (eps)
    heterogeneity       H      <- std dev of per-external-community link counts (lambda)

each split into in- and out-link variants, giving 8 measures per node.  The
classic participation coefficient P = 1 - sum_i (d_i/d)^2 is kept for the
threshold-based baseline classifier and comparisons.

Statistics are population statistics (divide by community size), and lambda
ranges only over the external communities a node actually touches.  A
community in which every member has the same base value is degenerate for
that measure: the z-score is defined as 0 there.  That is the exact
arithmetic meaning of sigma = 0; the check is bitwise equality plus a
relative sigma floor, so float rounding in the mean cannot manufacture
spurious spread.
"""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .graph import DataError, DirectedGraph, Partition

#: column order used everywhere (arrays, CSV files, reports)
MEASURE_NAMES = ("I_int_in", "I_int_out", "I_ext_in", "I_ext_out",
                 "D_in", "D_out", "H_in", "H_out")
RAW_NAMES = ("d_int_in", "d_int_out", "d_ext_in", "d_ext_out",
             "eps_in", "eps_out", "lambda_in", "lambda_out")

PARTICIPATION_MODES = ("undirected", "in", "out")


# ---- z-scores ---------------------------------------------------------------

#: a community whose sigma is this small relative to its mean carries no
#: spread beyond float rounding; its z-scores are defined as 0
DEGENERATE_SIGMA_RTOL = 1e-12


def community_zscore(values, p: Partition) -> np.ndarray:
    """Per-node z-score of `values` relative to the node's own community.

    Communities where all members share one value (includes singletons)
    yield 0 for every member; sigma below rounding noise counts as 0.
    """
    v = np.asarray(values, dtype=np.float64)
    if len(v) != p.n:
        raise DataError(f"{len(v)} values for {p.n} nodes")
    if p.n == 0:
        return np.empty(0, dtype=np.float64)
    a = p.assignment
    cnt = np.bincount(a, minlength=p.c).astype(np.float64)
    mean = np.bincount(a, weights=v, minlength=p.c) / cnt
    dev = v - mean[a]
    var = np.bincount(a, weights=dev * dev, minlength=p.c) / cnt
    sigma = np.sqrt(var)

    cmax = np.full(p.c, -np.inf)
    cmin = np.full(p.c, np.inf)
    np.maximum.at(cmax, a, v)
    np.minimum.at(cmin, a, v)
    degenerate = (cmax == cmin) | (sigma <= DEGENERATE_SIGMA_RTOL * np.maximum(np.abs(mean), 1.0))

    safe_sigma = np.where(degenerate, 1.0, sigma)
    z = dev / safe_sigma[a]
    z[degenerate[a]] = 0.0
    return z


# ---- participation coefficient ------------------------------------------------

def participation_from_counts(counts) -> float:
    """P = 1 - sum_i (d_i/d)^2 over a per-community link-count profile."""
    c = np.asarray(counts, dtype=np.int64)
    d = int(c.sum())
    if d == 0:
        return 0.0
    return 1.0 - float(np.dot(c, c)) / (float(d) * float(d))


def _node_profile(g: DirectedGraph, p: Partition, u: int, mode: str) -> np.ndarray:
    if mode == "out":
        neigh = g.out_neighbors(u)
    elif mode == "in":
        neigh = g.in_neighbors(u)
    elif mode == "undirected":
        neigh = np.union1d(g.out_neighbors(u), g.in_neighbors(u))
    else:
        raise ValueError(f"mode must be one of {PARTICIPATION_MODES}, got {mode!r}")
    if len(neigh) == 0:
        return np.empty(0, dtype=np.int64)
    return np.bincount(p.assignment[neigh])


def participation(g: DirectedGraph, p: Partition, u: int, mode: str) -> float:
    """Participation coefficient of one node.

    `in`/`out` profiles count arcs per community; `undirected` counts
    distinct neighbors per community on the underlying undirected graph.
    Isolated endpoints (d = 0) give 0.
    """
    return participation_from_counts(_node_profile(g, p, u, mode))


def _undirected_pairs(g: DirectedGraph) -> tuple[np.ndarray, np.ndarray]:
    """Distinct (node, neighbor) pairs of the underlying undirected graph."""
    src, dst = g.arc_arrays()
    a = np.concatenate([src, dst])
    b = np.concatenate([dst, src])
    uniq = np.unique(np.stack([a, b], axis=1), axis=0)
    return uniq[:, 0], uniq[:, 1]


def _grouped_participation(nodes: np.ndarray, comms: np.ndarray,
                           n: int, c: int) -> np.ndarray:
    key = nodes * np.int64(c) + comms
    uniq, counts = np.unique(key, return_counts=True)
    node_of = uniq // c
    counts_f = counts.astype(np.float64)
    sumsq = np.bincount(node_of, weights=counts_f * counts_f, minlength=n)
    d = np.bincount(node_of, weights=counts_f, minlength=n)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = 1.0 - sumsq / (d * d)
    p[d == 0] = 0.0
    return p


def participation_all(g: DirectedGraph, p: Partition, mode: str) -> np.ndarray:
    """Vectorized participation for every node; same semantics as
    `participation`."""
    if g.n == 0:
        return np.empty(0, dtype=np.float64)
    if mode == "out":
        nodes, neigh = g.arc_arrays()
    elif mode == "in":
        neigh, nodes = g.arc_arrays()
    elif mode == "undirected":
        nodes, neigh = _undirected_pairs(g)
    else:
        raise ValueError(f"mode must be one of {PARTICIPATION_MODES}, got {mode!r}")
    return _grouped_participation(nodes, p.assignment[neigh], g.n, max(p.c, 1))


# ---- raw features -------------------------------------------------------------

def _external_profile_stats(nodes: np.ndarray, comms: np.ndarray,
                            n: int, c: int) -> tuple[np.ndarray, np.ndarray]:
    """(eps, lambda) per node from (node, external community) arc instances."""
    eps = np.zeros(n, dtype=np.float64)
    lam = np.zeros(n, dtype=np.float64)
    if len(nodes) == 0:
        return eps, lam
    key = nodes * np.int64(c) + comms
    uniq, counts = np.unique(key, return_counts=True)
    node_of = uniq // c
    eps = np.bincount(node_of, minlength=n).astype(np.float64)
    counts_f = counts.astype(np.float64)
    s = np.bincount(node_of, weights=counts_f, minlength=n)
    denom = np.maximum(eps, 1.0)
    mean = s / denom
    dev = counts_f - mean[node_of]
    var = np.bincount(node_of, weights=dev * dev, minlength=n) / denom
    lam = np.sqrt(var)
    lam[eps <= 1] = 0.0
    return eps, lam


def raw_features(g: DirectedGraph, p: Partition) -> np.ndarray:
    """(n, 8) array of base quantities in RAW_NAMES column order."""
    if p.n != g.n:
        raise DataError(f"partition covers {p.n} nodes, graph has {g.n}")
    n = g.n
    out = np.zeros((n, len(RAW_NAMES)), dtype=np.float64)
    if n == 0:
        return out
    src, dst = g.arc_arrays()
    a = p.assignment
    internal = a[src] == a[dst]

    d_out = g.out_degrees().astype(np.float64)
    d_in = g.in_degrees().astype(np.float64)
    d_int_out = np.bincount(src[internal], minlength=n).astype(np.float64)
    d_int_in = np.bincount(dst[internal], minlength=n).astype(np.float64)

    ext_src = src[~internal]
    ext_dst = dst[~internal]
    c = max(p.c, 1)
    eps_out, lam_out = _external_profile_stats(ext_src, a[ext_dst], n, c)
    eps_in, lam_in = _external_profile_stats(ext_dst, a[ext_src], n, c)

    out[:, 0] = d_int_in
    out[:, 1] = d_int_out
    out[:, 2] = d_in - d_int_in
    out[:, 3] = d_out - d_int_out
    out[:, 4] = eps_in
    out[:, 5] = eps_out
    out[:, 6] = lam_in
    out[:, 7] = lam_out
    return out


def measure_vectors(raw: np.ndarray, p: Partition) -> np.ndarray:
    """(n, 8) array of the role measures: column j is the community z-score
    of raw column j (RAW_NAMES and MEASURE_NAMES are index-aligned)."""
    raw = np.asarray(raw, dtype=np.float64)
    out = np.empty_like(raw)
    for j in range(raw.shape[1]):
        out[:, j] = community_zscore(raw[:, j], p)
    return out


def compute_measures(g: DirectedGraph, p: Partition) -> tuple[np.ndarray, np.ndarray]:
    """Convenience: (raw, vectors) in one call."""
    raw = raw_features(g, p)
    return raw, measure_vectors(raw, p)


# ---- baseline classifier inputs ------------------------------------------------

def threshold_role_inputs(g: DirectedGraph, p: Partition) -> tuple[np.ndarray, np.ndarray]:
    """(z, P) for the classic undirected threshold classifier.

    z is the community z-score of the undirected internal degree, P the
    undirected participation coefficient.
    """
    nodes, neigh = _undirected_pairs(g)
    internal = p.assignment[nodes] == p.assignment[neigh]
    d_int = np.bincount(nodes[internal], minlength=g.n).astype(np.float64)
    z = community_zscore(d_int, p)
    pc = participation_all(g, p, "undirected")
    return z, pc


# ---- correlations ---------------------------------------------------------------

def correlation_matrix(vectors: np.ndarray) -> np.ndarray:
    """Pearson correlation of the measure columns; symmetric, unit diagonal.

    Zero-variance columns are undefined and marked NaN.
    """
    v = np.asarray(vectors, dtype=np.float64)
    if v.ndim != 2 or v.shape[0] < 2:
        raise DataError("correlation requires at least 2 nodes")
    dev = v - v.mean(axis=0)
    cov = dev.T @ dev
    cov = (cov + cov.T) / 2.0
    var = np.diag(cov).copy()
    denom = np.sqrt(np.outer(var, var))
    with np.errstate(divide="ignore", invalid="ignore"):
        corr = cov / denom
    corr[var == 0, :] = np.nan
    corr[:, var == 0] = np.nan
    idx = np.arange(v.shape[1])
    corr[idx, idx] = np.where(var > 0, 1.0, np.nan)
    return corr


# ---- CSV IO ---------------------------------------------------------------------

def write_node_csv(path: str | Path, ext_ids: np.ndarray, matrix: np.ndarray,
                   names: tuple[str, ...]) -> None:
    """node,<names...> with full double precision (repr round-trips)."""
    with open(path, "w", newline="") as f:
        f.write("node," + ",".join(names) + "\n")
        for i in range(len(ext_ids)):
            f.write(str(int(ext_ids[i])) + ","
                    + ",".join(repr(float(x)) for x in matrix[i]) + "\n")


def read_node_csv(path: str | Path, names: tuple[str, ...]) -> tuple[np.ndarray, np.ndarray]:
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != ["node", *names]:
            raise DataError(f"unexpected header in {path}: {header}")
        ids, rows = [], []
        for row in reader:
            if not row:
                continue
            if len(row) != len(names) + 1:
                raise DataError(f"{path}: expected {len(names) + 1} fields, got {len(row)}")
            ids.append(int(row[0]))
            rows.append([float(x) for x in row[1:]])
    matrix = np.asarray(rows, dtype=np.float64) if rows else np.empty((0, len(names)))
    return np.asarray(ids, dtype=np.int64), matrix


def write_measures_csv(path: str | Path, g: DirectedGraph, vectors: np.ndarray) -> None:
    write_node_csv(path, g.ext_ids, vectors, MEASURE_NAMES)


def write_raw_features_csv(path: str | Path, g: DirectedGraph, raw: np.ndarray) -> None:
    write_node_csv(path, g.ext_ids, raw, RAW_NAMES)
