"""Node roles: threshold baseline, cluster labeling, capitalist categories,
and validation statistics.

The threshold classifier is the classic two-measure taxonomy (internal
z-score vs participation) with its published cut points; the cut points are
configurable because nothing guarantees they transfer to other data.  The
cluster labeler inverts that logic: given the mean measure profile of each
discovered cluster it attaches a descriptive name from the same vocabulary.
Labels are annotations for reports, never inputs to computation.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations
from pathlib import Path

import numpy as np
from scipy import stats as sstats

from .graph import DataError, DirectedGraph
from .measures import MEASURE_NAMES

# measure column indices
_I_INT_IN, _I_INT_OUT, _I_EXT_IN, _I_EXT_OUT, _D_IN, _D_OUT, _H_IN, _H_OUT = range(8)


# ---- threshold baseline --------------------------------------------------------

@dataclass(frozen=True)
class RoleThresholds:
    """Cut points of the original taxonomy; hubs at z >= hub_z (inclusive),
    participation buckets are closed on the left cut (P == cut stays in the
    lower role)."""
    hub_z: float = 2.5
    nonhub_p_cuts: tuple[float, ...] = (0.05, 0.62, 0.80)
    hub_p_cuts: tuple[float, ...] = (0.30, 0.75)


NONHUB_ROLES = ("ultra-peripheral non-hub", "peripheral non-hub",
                "connector non-hub", "kinless non-hub")
HUB_ROLES = ("provincial hub", "connector hub", "kinless hub")


def threshold_roles(z, p_coef, thresholds: RoleThresholds | None = None) -> np.ndarray:
    """Per-node role label from (z, P); returns an object array of strings."""
    if thresholds is None:
        thresholds = RoleThresholds()
    z = np.asarray(z, dtype=np.float64)
    p = np.asarray(p_coef, dtype=np.float64)
    if z.shape != p.shape:
        raise DataError("z and P must cover the same nodes")
    hub = z >= thresholds.hub_z
    nonhub_bucket = np.searchsorted(np.asarray(thresholds.nonhub_p_cuts), p, side="left")
    hub_bucket = np.searchsorted(np.asarray(thresholds.hub_p_cuts), p, side="left")
    out = np.empty(len(z), dtype=object)
    for i in range(len(z)):
        out[i] = HUB_ROLES[hub_bucket[i]] if hub[i] else NONHUB_ROLES[nonhub_bucket[i]]
    return out


# ---- cluster profiles and labels -------------------------------------------------

@dataclass(frozen=True)
class GroupProfile:
    cluster: int
    size: int
    proportion: float
    means: tuple[float, ...]  # MEASURE_NAMES order


def group_profiles(vectors: np.ndarray, assignment: np.ndarray) -> list[GroupProfile]:
    vectors = np.asarray(vectors, dtype=np.float64)
    labels = np.asarray(assignment, dtype=np.int64)
    n = len(labels)
    if n == 0:
        return []
    k = int(labels.max()) + 1
    sizes = np.bincount(labels, minlength=k)
    if (sizes == 0).any():
        raise DataError("empty cluster in assignment")
    profiles = []
    for c in range(k):
        means = vectors[labels == c].mean(axis=0)
        profiles.append(GroupProfile(cluster=c, size=int(sizes[c]),
                                     proportion=float(sizes[c]) / n,
                                     means=tuple(float(x) for x in means)))
    return profiles


# labeling rule cut points (on cluster mean measures)
HUB_MEAN_I_INT = 1.0
KINLESS_FLOOR = 5.0
CONNECTOR_MIN_D = 1.0
ULTRA_MAX_D = -0.5
DIRECTED_SUFFIX_MIN_D = 0.5


def _label_profile(means) -> str:
    hub = max(means[_I_INT_IN], means[_I_INT_OUT]) >= HUB_MEAN_I_INT
    if min(means) >= KINLESS_FLOOR:
        return "kinless hub" if hub else "kinless non-hub"
    if (max(means[_I_EXT_IN], means[_I_EXT_OUT]) >= 0.0
            and max(means[_D_IN], means[_D_OUT]) >= CONNECTOR_MIN_D):
        return "connector hub" if hub else "connector non-hub"
    if hub:
        return "provincial hub"
    d_in, d_out = means[_D_IN], means[_D_OUT]
    if d_in < ULTRA_MAX_D and d_out < ULTRA_MAX_D:
        return "ultra-peripheral non-hub"
    high_in = d_in > DIRECTED_SUFFIX_MIN_D
    high_out = d_out > DIRECTED_SUFFIX_MIN_D
    if high_in != high_out:
        return f"peripheral ({'in' if high_in else 'out'}) non-hub"
    return "peripheral non-hub"


def label_clusters(profiles: list[GroupProfile]) -> dict[int, str]:
    """Advisory descriptive label per cluster, from its mean profile."""
    if not profiles:
        raise DataError("no profiles to label")
    return {p.cluster: _label_profile(p.means) for p in profiles}


# ---- social-capitalist categories ---------------------------------------------

class DegreeBand(str, Enum):
    NONE = "none"
    LOW = "low"
    HIGH = "high"


class RatioBand(str, Enum):
    LT_0_7 = "lt_0_7"
    BETWEEN_0_7_AND_1 = "0_7_to_1"
    GT_1 = "gt_1"


@dataclass(frozen=True)
class CapitalistCategory:
    degree_band: DegreeBand
    ratio_band: RatioBand


def categorize_capitalist(in_degree: int, out_degree: int,
                          low_band: tuple[int, int] = (500, 10000)) -> CapitalistCategory:
    """Degree band from followers (in-degree), ratio = followees / followers.

    in-degree below the band floor means the node is excluded from the
    crosstabs (band NONE).  A node with followees but zero followers has an
    infinite ratio, hence GT_1.
    """
    if in_degree < 0 or out_degree < 0:
        raise DataError("degrees must be >= 0")
    low_min, low_max = low_band
    if in_degree > low_max:
        deg = DegreeBand.HIGH
    elif in_degree >= low_min:
        deg = DegreeBand.LOW
    else:
        deg = DegreeBand.NONE
    if in_degree == 0:
        ratio_band = RatioBand.GT_1 if out_degree > 0 else RatioBand.LT_0_7
    else:
        ratio = out_degree / in_degree
        if ratio < 0.7:
            ratio_band = RatioBand.LT_0_7
        elif ratio > 1.0:
            ratio_band = RatioBand.GT_1
        else:
            ratio_band = RatioBand.BETWEEN_0_7_AND_1
    return CapitalistCategory(deg, ratio_band)


def read_capitalists(source: str | Path, g: DirectedGraph) -> np.ndarray:
    """One external node id per line ('#' comments allowed) -> internal ids."""
    ids = []
    for line_no, raw in enumerate(Path(source).read_bytes().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith(b"#"):
            continue
        try:
            ids.append(int(line))
        except ValueError:
            raise DataError(f"capitalist list line {line_no}: not an integer: "
                            f"{raw.decode(errors='replace')!r}") from None
    if not ids:
        return np.empty(0, dtype=np.int64)
    return np.asarray(g.to_internal(np.asarray(ids, dtype=np.int64)))


def capitalist_band_codes(g: DirectedGraph, capitalists: np.ndarray | None = None,
                          low_band: tuple[int, int] = (500, 10000)
                          ) -> tuple[np.ndarray, np.ndarray]:
    """(degree_band, ratio_band) integer codes per node.

    degree codes: 0 none / 1 low / 2 high; ratio codes: 0 lt / 1 mid / 2 gt.
    With an explicit capitalist list, unlisted nodes are forced to band NONE;
    without one, the bands alone approximate the capitalist population.
    """
    d_in = g.in_degrees().astype(np.int64)
    d_out = g.out_degrees().astype(np.int64)
    low_min, low_max = low_band
    deg = np.where(d_in > low_max, 2, np.where(d_in >= low_min, 1, 0)).astype(np.int8)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = d_out / d_in
    ratio_band = np.where(ratio > 1.0, 2, np.where(ratio < 0.7, 0, 1)).astype(np.int8)
    ratio_band[(d_in == 0) & (d_out > 0)] = 2
    ratio_band[(d_in == 0) & (d_out == 0)] = 0
    if capitalists is not None:
        keep = np.zeros(g.n, dtype=bool)
        keep[capitalists] = True
        deg = np.where(keep, deg, 0).astype(np.int8)
    return deg, ratio_band


# ---- crosstabs ---------------------------------------------------------------

CROSSTAB_ROWS: tuple[tuple[DegreeBand, RatioBand], ...] = tuple(
    (d, r) for d in (DegreeBand.LOW, DegreeBand.HIGH)
    for r in (RatioBand.LT_0_7, RatioBand.BETWEEN_0_7_AND_1, RatioBand.GT_1))


@dataclass
class CrosstabResult:
    rows: tuple[tuple[DegreeBand, RatioBand], ...]
    n_clusters: int
    share_of_category: np.ndarray  # percent; each non-empty row sums to 100
    share_of_cluster: np.ndarray   # percent of the cluster that is in the band
    empty_rows: list[int] = field(default_factory=list)


def crosstab(assignment: np.ndarray, degree_codes: np.ndarray,
             ratio_codes: np.ndarray) -> CrosstabResult:
    """Distribution of each capitalist band over clusters, two normalizations."""
    labels = np.asarray(assignment, dtype=np.int64)
    if len(labels) != len(degree_codes) or len(labels) != len(ratio_codes):
        raise DataError("assignment and categories must cover the same nodes")
    k = int(labels.max()) + 1 if len(labels) else 0
    cluster_sizes = np.bincount(labels, minlength=k).astype(np.float64)

    nrows = len(CROSSTAB_ROWS)
    counts = np.zeros((nrows, k), dtype=np.float64)
    mask = degree_codes > 0
    if mask.any():
        row = (degree_codes[mask].astype(np.int64) - 1) * 3 + ratio_codes[mask]
        flat = np.bincount(row * k + labels[mask], minlength=nrows * k)
        counts = flat.reshape(nrows, k).astype(np.float64)

    row_totals = counts.sum(axis=1)
    empty = [i for i in range(nrows) if row_totals[i] == 0]
    with np.errstate(divide="ignore", invalid="ignore"):
        share_cat = 100.0 * counts / row_totals[:, None]
        share_clu = 100.0 * counts / cluster_sizes[None, :]
    share_cat[row_totals == 0, :] = 0.0
    share_clu[:, cluster_sizes == 0] = 0.0
    return CrosstabResult(rows=CROSSTAB_ROWS, n_clusters=k,
                          share_of_category=share_cat, share_of_cluster=share_clu,
                          empty_rows=empty)


# ---- validation statistics -----------------------------------------------------

@dataclass(frozen=True)
class AnovaEntry:
    measure: str
    f_stat: float
    p_value: float


@dataclass(frozen=True)
class PairwiseEntry:
    measure: str
    group_a: int
    group_b: int
    t_stat: float
    df: float
    p_raw: float
    p_corrected: float


@dataclass
class AnovaReport:
    anova: list[AnovaEntry]
    pairwise: list[PairwiseEntry]
    excluded_groups: list[int]
    n_pairs: int


def anova_f(groups: list[np.ndarray]) -> float:
    """One-way ANOVA F statistic (MS_between / MS_within)."""
    if len(groups) < 2:
        raise DataError("ANOVA needs at least 2 groups")
    ns = np.array([len(gr) for gr in groups], dtype=np.float64)
    if (ns == 0).any():
        raise DataError("empty group")
    total_n = ns.sum()
    k = len(groups)
    if total_n - k < 1:
        raise DataError("no within-group degrees of freedom")
    means = np.array([float(np.mean(gr)) for gr in groups])
    grand = float(sum(float(np.sum(gr)) for gr in groups)) / total_n
    ssb = float(np.sum(ns * (means - grand) ** 2))
    ssw = float(sum(float(np.sum((np.asarray(gr) - m) ** 2)) for gr, m in zip(groups, means)))
    msb = ssb / (k - 1)
    msw = ssw / (total_n - k)
    if msw == 0:
        return 0.0 if msb == 0 else np.inf
    return msb / msw


def _welch(a: np.ndarray, b: np.ndarray) -> tuple[float, float, float]:
    """(t, df, two-sided p) for unequal-variance two-sample t."""
    na, nb = len(a), len(b)
    ma, mb = float(np.mean(a)), float(np.mean(b))
    va = float(np.var(a, ddof=1))
    vb = float(np.var(b, ddof=1))
    se2 = va / na + vb / nb
    if se2 == 0:
        if ma == mb:
            return 0.0, float(na + nb - 2), 1.0
        return float(np.inf) if ma > mb else float(-np.inf), float(na + nb - 2), 0.0
    t = (ma - mb) / np.sqrt(se2)
    df = se2 ** 2 / ((va / na) ** 2 / (na - 1) + (vb / nb) ** 2 / (nb - 1))
    p = 2.0 * float(sstats.t.sf(abs(t), df))
    return float(t), float(df), p


def bonferroni(p: float, n_tests: int) -> float:
    return min(1.0, p * n_tests)


def anova_bonferroni(vectors: np.ndarray, assignment: np.ndarray,
                     measure_names: tuple[str, ...] = MEASURE_NAMES) -> AnovaReport:
    """Per-measure one-way ANOVA plus Welch pairwise t-tests with Bonferroni
    correction over the group pairs.  Groups with fewer than 2 members are
    excluded from the post-hoc tests and flagged."""
    vectors = np.asarray(vectors, dtype=np.float64)
    labels = np.asarray(assignment, dtype=np.int64)
    if len(labels) != len(vectors):
        raise DataError("vectors and assignment must cover the same nodes")
    k = int(labels.max()) + 1 if len(labels) else 0
    if k < 2:
        raise DataError("ANOVA needs at least 2 groups")
    sizes = np.bincount(labels, minlength=k)
    if (sizes == 0).any():
        raise DataError("empty cluster in assignment")

    included = [c for c in range(k) if sizes[c] >= 2]
    excluded = [c for c in range(k) if sizes[c] < 2]
    pairs = list(combinations(included, 2))
    n_pairs = len(pairs)

    by_cluster = [np.flatnonzero(labels == c) for c in range(k)]
    anova_entries: list[AnovaEntry] = []
    pairwise_entries: list[PairwiseEntry] = []
    for j, name in enumerate(measure_names):
        col = vectors[:, j]
        groups = [col[idx] for idx in by_cluster]
        f = anova_f(groups)
        if np.isinf(f):
            p = 0.0
        else:
            p = float(sstats.f.sf(f, k - 1, len(col) - k))
        anova_entries.append(AnovaEntry(measure=name, f_stat=float(f), p_value=p))
        for a, b in pairs:
            t, df, p_raw = _welch(groups[a], groups[b])
            pairwise_entries.append(PairwiseEntry(
                measure=name, group_a=a, group_b=b, t_stat=t, df=df,
                p_raw=p_raw, p_corrected=bonferroni(p_raw, n_pairs)))
    return AnovaReport(anova=anova_entries, pairwise=pairwise_entries,
                       excluded_groups=excluded, n_pairs=n_pairs)
