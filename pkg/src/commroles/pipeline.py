"""End-to-end pipeline: ingest -> communities -> measures -> k sweep -> roles
-> stats, with a deterministic artifact directory.

Every artifact is a plain text file whose bytes are a pure function of the
input data, the configuration and the root seed.  Stage wall-clock goes to
the run log only, so artifact directories from identical runs compare equal
byte for byte.  A lock file serializes pipelines per output directory; on
failure all partial outputs are removed.
"""
from __future__ import annotations

import hashlib
import logging
import os
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .clustering import ClusteringConfig, sweep_k, _pick_best
from .community import (ModularityConfig, directed_modularity, louvain_directed,
                        read_partition, write_partition)
from .graph import DataError, load_graph
from .measures import (MEASURE_NAMES, compute_measures, correlation_matrix,
                       write_measures_csv, write_raw_features_csv)
from .roles import (AnovaReport, CROSSTAB_ROWS, CrosstabResult, RoleThresholds,
                    anova_bonferroni, capitalist_band_codes, crosstab,
                    group_profiles, label_clusters, read_capitalists)

log = logging.getLogger("commroles.pipeline")

ARTIFACTS = (
    "partition.txt",
    "raw_features.csv",
    "measures.csv",
    "sweep.csv",
    "assignment.csv",
    "roles.csv",
    "crosstab_category_share.csv",
    "crosstab_cluster_share.csv",
    "stats.txt",
    "manifest.txt",
)

STAGES = ("ingest", "communities", "measures", "cluster", "roles", "stats")


class StageError(RuntimeError):
    def __init__(self, stage: str, cause: BaseException):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage {stage!r} failed: {cause}")


@dataclass
class PipelineConfig:
    input_path: Path
    out_dir: Path
    convention: str = "follow"
    partition_source: str = "louvain"  # "louvain" or a partition file path
    seed: int = 0
    resolution: float = 1.0
    min_gain: float = 1e-9
    max_passes: int = 100
    k_min: int = 2
    k_max: int = 15
    restarts: int = 8
    max_iterations: int = 300
    tolerance: float = 1e-6
    standardize: bool = False
    capitalists_path: Path | None = None
    low_band: tuple[int, int] = (500, 10000)
    thresholds: RoleThresholds = field(default_factory=RoleThresholds)
    threads: int = 1


@dataclass
class PipelineResult:
    out_dir: Path
    paths: dict[str, Path]
    n: int
    m: int
    modularity: float
    n_communities: int
    k_star: int


# ---- artifact formats -----------------------------------------------------------

def write_assignment_csv(path: Path, ext_ids: np.ndarray, labels: np.ndarray) -> None:
    with open(path, "w") as f:
        f.write("node,cluster\n")
        for i, c in zip(ext_ids.tolist(), labels.tolist()):
            f.write(f"{i},{c}\n")


def read_assignment_csv(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    ids, labels = [], []
    with open(path) as f:
        header = f.readline().strip()
        if header != "node,cluster":
            raise DataError(f"unexpected header in {path}: {header!r}")
        for line in f:
            line = line.strip()
            if not line:
                continue
            a, b = line.split(",")
            ids.append(int(a))
            labels.append(int(b))
    return np.asarray(ids, dtype=np.int64), np.asarray(labels, dtype=np.int64)


def write_sweep_csv(path: Path, sweep: list) -> None:
    with open(path, "w") as f:
        f.write("k,db_index,inertia\n")
        for k, res in sweep:
            f.write(f"{k},{res.db_index!r},{res.inertia!r}\n")


def write_roles_csv(path: Path, profiles, labels: dict[int, str]) -> None:
    with open(path, "w") as f:
        f.write("cluster,size,proportion,label,"
                + ",".join(f"mean_{name}" for name in MEASURE_NAMES) + "\n")
        for p in profiles:
            f.write(f"{p.cluster},{p.size},{p.proportion!r},{labels[p.cluster]},"
                    + ",".join(repr(m) for m in p.means) + "\n")


def write_crosstab_csv(path: Path, table: np.ndarray, result: CrosstabResult) -> None:
    with open(path, "w") as f:
        f.write("degree_band,ratio_band,"
                + ",".join(f"cluster_{c}" for c in range(result.n_clusters)) + "\n")
        for i, (deg, ratio) in enumerate(CROSSTAB_ROWS):
            f.write(f"{deg.value},{ratio.value},"
                    + ",".join(repr(float(x)) for x in table[i]) + "\n")


def format_stats_report(corr: np.ndarray, report: AnovaReport) -> str:
    lines = ["[correlation]"]
    lines.append("measure," + ",".join(MEASURE_NAMES))
    for i, name in enumerate(MEASURE_NAMES):
        lines.append(name + "," + ",".join(repr(float(x)) for x in corr[i]))
    lines.append("")
    lines.append("[anova]")
    lines.append("measure,f_stat,p_value")
    for e in report.anova:
        lines.append(f"{e.measure},{e.f_stat!r},{e.p_value!r}")
    lines.append("")
    lines.append(f"[pairwise]  # welch t, bonferroni over {report.n_pairs} pairs")
    lines.append("measure,group_a,group_b,t_stat,df,p_raw,p_corrected")
    for e in report.pairwise:
        lines.append(f"{e.measure},{e.group_a},{e.group_b},{e.t_stat!r},"
                     f"{e.df!r},{e.p_raw!r},{e.p_corrected!r}")
    lines.append("")
    lines.append("[excluded_groups]")
    lines.append(",".join(str(c) for c in report.excluded_groups) or "none")
    return "\n".join(lines) + "\n"


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(path: Path, cfg: PipelineConfig, summary: dict,
                   artifact_paths: dict[str, Path]) -> None:
    """Deterministic run record: config, versions, stages, checksums.

    Stage wall-clock is deliberately absent (it goes to the log) so two runs
    with the same config and seed produce identical directories.
    """
    lines = [
        f"tool: commroles {__version__}",
        f"numpy: {np.__version__}",
        f"scipy: {scipy.__version__}",
        f"seed: {cfg.seed}",
        f"input: {cfg.input_path}",
        f"convention: {cfg.convention}",
        f"partition_source: {cfg.partition_source}",
        f"resolution: {cfg.resolution!r}",
        f"min_gain: {cfg.min_gain!r}",
        f"max_passes: {cfg.max_passes}",
        f"k_min: {cfg.k_min}",
        f"k_max: {cfg.k_max}",
        f"restarts: {cfg.restarts}",
        f"max_iterations: {cfg.max_iterations}",
        f"tolerance: {cfg.tolerance!r}",
        f"standardize: {cfg.standardize}",
        f"capitalists: {cfg.capitalists_path or 'degree-ratio-bands'}",
        f"low_band: {cfg.low_band[0]}..{cfg.low_band[1]}",
        f"hub_z: {cfg.thresholds.hub_z!r}",
    ]
    for key, value in summary.items():
        lines.append(f"{key}: {value}")
    for stage in STAGES:
        lines.append(f"stage: {stage}")
    for name in sorted(artifact_paths):
        lines.append(f"artifact: {name} sha256={_sha256(artifact_paths[name])}")
    path.write_text("\n".join(lines) + "\n")


# ---- pipeline -------------------------------------------------------------------

class _StageClock:
    def __init__(self):
        self.current = None
        self._t0 = 0.0

    def start(self, stage: str):
        self.current = stage
        self._t0 = time.perf_counter()
        log.info("stage %s: start", stage)

    def stop(self):
        log.info("stage %s: seconds=%.3f", self.current, time.perf_counter() - self._t0)


def run_pipeline(cfg: PipelineConfig) -> PipelineResult:
    for label, path in (("input", cfg.input_path),
                        ("partition", None if str(cfg.partition_source) == "louvain"
                         else cfg.partition_source),
                        ("capitalists", cfg.capitalists_path)):
        if path is not None and not Path(path).exists():
            raise DataError(f"{label} path does not exist: {path}")
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    lock = out / ".lock"
    try:
        fd = os.open(lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        os.close(fd)
    except FileExistsError:
        raise DataError(f"output directory {out} is locked by another pipeline "
                        f"(remove {lock} if stale)") from None

    paths = {name: out / name for name in ARTIFACTS}
    created: list[Path] = []
    clock = _StageClock()

    def emit(name: str, writer) -> None:
        created.append(paths[name])  # track first so failed writers get cleaned up
        writer(paths[name])

    try:
        clock.start("ingest")
        g = load_graph(cfg.input_path, cfg.convention)
        clock.stop()

        clock.start("communities")
        if str(cfg.partition_source) == "louvain":
            louvain = louvain_directed(g, ModularityConfig(
                resolution=cfg.resolution, min_gain=cfg.min_gain,
                max_passes=cfg.max_passes, seed=cfg.seed))
            p = louvain.partition
            q = louvain.modularity
        else:
            p = read_partition(cfg.partition_source, g)
            q = directed_modularity(g, p, cfg.resolution)
        log.info("communities: c=%d Q=%.12g", p.c, q)
        emit("partition.txt", lambda path: write_partition(path, p, g))
        clock.stop()

        clock.start("measures")
        raw, vectors = compute_measures(g, p)
        emit("raw_features.csv", lambda path: write_raw_features_csv(path, g, raw))
        emit("measures.csv", lambda path: write_measures_csv(path, g, vectors))
        clock.stop()

        clock.start("cluster")
        ccfg = ClusteringConfig(k_min=cfg.k_min, k_max=cfg.k_max, seed=cfg.seed,
                                max_iterations=cfg.max_iterations,
                                tolerance=cfg.tolerance, restarts=cfg.restarts,
                                standardize=cfg.standardize)
        sweep = sweep_k(vectors, ccfg, threads=cfg.threads)
        k_star, best = _pick_best(sweep)
        log.info("cluster: k_star=%d db=%.6g", k_star, best.db_index)
        emit("sweep.csv", lambda path: write_sweep_csv(path, sweep))
        emit("assignment.csv",
             lambda path: write_assignment_csv(path, g.ext_ids, best.assignment))
        clock.stop()

        clock.start("roles")
        profiles = group_profiles(vectors, best.assignment)
        labels = label_clusters(profiles)
        emit("roles.csv", lambda path: write_roles_csv(path, profiles, labels))
        capitalists = None
        if cfg.capitalists_path is not None:
            capitalists = read_capitalists(cfg.capitalists_path, g)
        else:
            log.info("roles: no capitalist list; approximating by degree/ratio bands")
        deg_codes, ratio_codes = capitalist_band_codes(g, capitalists, cfg.low_band)
        tab = crosstab(best.assignment, deg_codes, ratio_codes)
        if tab.empty_rows:
            log.info("roles: empty capitalist bands: %s",
                     ",".join(str(i) for i in tab.empty_rows))
        emit("crosstab_category_share.csv",
             lambda path: write_crosstab_csv(path, tab.share_of_category, tab))
        emit("crosstab_cluster_share.csv",
             lambda path: write_crosstab_csv(path, tab.share_of_cluster, tab))
        clock.stop()

        clock.start("stats")
        corr = correlation_matrix(vectors)
        report = anova_bonferroni(vectors, best.assignment)
        emit("stats.txt",
             lambda path: path.write_text(format_stats_report(corr, report)))
        clock.stop()

        summary = {"n": g.n, "m": g.m, "communities": p.c,
                   "modularity": repr(q), "k_star": k_star,
                   "db_index": repr(best.db_index)}
        artifact_paths = {name: paths[name] for name in ARTIFACTS if name != "manifest.txt"}
        write_manifest(paths["manifest.txt"], cfg, summary, artifact_paths)

        return PipelineResult(out_dir=out, paths=paths, n=g.n, m=g.m,
                              modularity=q, n_communities=p.c, k_star=k_star)
    except BaseException as exc:
        for p_ in created:
            p_.unlink(missing_ok=True)
        paths["manifest.txt"].unlink(missing_ok=True)
        if isinstance(exc, (KeyboardInterrupt, SystemExit)):
            raise
        raise StageError(clock.current or "setup", exc) from exc
    finally:
        lock.unlink(missing_ok=True)
