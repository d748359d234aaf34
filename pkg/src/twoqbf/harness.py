"""Evaluation harness: run ranking configurations over dataset splits.

A HeuristicConfig names one ranking setup per side; evaluate_split runs every
config over every instance of a split, records per-instance iteration counts,
and flags any instance where a ranked run disagrees with the unranked one on
satisfiability (which would mean a soundness bug, not a tuning difference).
"""

from __future__ import annotations

import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .cegar import CANDIDATE, COUNTEREXAMPLE, solve_ranked
from .datagen import load_manifest, read_instance
from .gnn import load_bundle
from .ranking import gnn_ranker, hardness_ranker, maxsat_ranker

__all__ = [
    "HeuristicConfig",
    "parse_config",
    "build_rankers",
    "evaluate_split",
    "format_table",
]

CANDIDATE_KINDS = ("none", "maxsat", "hardness", "gnn")
COUNTER_KINDS = ("none", "maxsat", "gnn")


@dataclass(frozen=True)
class HeuristicConfig:
    candidate: str = "none"
    counterexample: str = "none"
    candidate_bundle: str | None = None
    counterexample_bundle: str | None = None
    n_max: int = 10
    iterations: int = 16

    def __post_init__(self) -> None:
        if self.candidate not in CANDIDATE_KINDS:
            raise ValueError(f"unknown candidate heuristic {self.candidate!r}")
        if self.counterexample not in COUNTER_KINDS:
            raise ValueError(
                f"unknown counterexample heuristic {self.counterexample!r}"
            )
        if self.candidate == "gnn" and not self.candidate_bundle:
            raise ValueError("candidate gnn heuristic needs a bundle path")
        if self.counterexample == "gnn" and not self.counterexample_bundle:
            raise ValueError("counterexample gnn heuristic needs a bundle path")
        if self.n_max < 1:
            raise ValueError("n_max must be positive")

    @property
    def name(self) -> str:
        return f"{self.candidate}/{self.counterexample}"

    @property
    def is_baseline(self) -> bool:
        return self.candidate == "none" and self.counterexample == "none"


def parse_config(text: str) -> HeuristicConfig:
    """Parse "cand=maxsat,counter=none,nmax=10,iters=16" into a config.

    A gnn side carries its bundle path after a colon: "cand=gnn:w.bin".
    """
    kw: dict = {}
    for token in text.split(","):
        token = token.strip()
        if not token:
            continue
        if "=" not in token:
            raise ValueError(f"expected key=value, got {token!r}")
        key, value = token.split("=", 1)
        key = key.strip()
        value = value.strip()
        if key in ("cand", "candidate"):
            kind, _, bundle = value.partition(":")
            kw["candidate"] = kind
            if bundle:
                kw["candidate_bundle"] = bundle
        elif key in ("counter", "counterexample"):
            kind, _, bundle = value.partition(":")
            kw["counterexample"] = kind
            if bundle:
                kw["counterexample_bundle"] = bundle
        elif key in ("nmax", "n_max"):
            kw["n_max"] = int(value)
        elif key in ("iters", "iterations"):
            kw["iterations"] = int(value)
        else:
            raise ValueError(f"unknown config key {key!r}")
    return HeuristicConfig(**kw)


def build_rankers(cfg: HeuristicConfig):
    """Instantiate the (candidate, counterexample) ranker pair for a config."""
    cand = None
    if cfg.candidate == "maxsat":
        cand = maxsat_ranker(CANDIDATE)
    elif cfg.candidate == "hardness":
        cand = hardness_ranker()
    elif cfg.candidate == "gnn":
        cand = gnn_ranker(load_bundle(cfg.candidate_bundle), CANDIDATE,
                          cfg.iterations)
    counter = None
    if cfg.counterexample == "maxsat":
        counter = maxsat_ranker(COUNTEREXAMPLE)
    elif cfg.counterexample == "gnn":
        counter = gnn_ranker(load_bundle(cfg.counterexample_bundle),
                             COUNTEREXAMPLE, cfg.iterations)
    return cand, counter


# per-process ranker cache so parallel workers load each bundle once
_RANKER_CACHE: dict[HeuristicConfig, tuple] = {}


def _cached_rankers(cfg: HeuristicConfig):
    if cfg not in _RANKER_CACHE:
        _RANKER_CACHE[cfg] = build_rankers(cfg)
    return _RANKER_CACHE[cfg]


def _eval_instance(task):
    dataset_dir, iid, configs, seed = task
    f = read_instance(dataset_dir, iid)
    rows = []
    for cfg in configs:
        cand, counter = _cached_rankers(cfg)
        t0 = time.perf_counter()
        res = solve_ranked(f, cand, counter, n_max=cfg.n_max, seed=seed)
        rows.append((res.status, res.iterations, time.perf_counter() - t0))
    return iid, rows


def evaluate_split(
    dataset_dir,
    split: str,
    configs: list[HeuristicConfig],
    seed: int = 0,
    jobs: int = 1,
) -> dict:
    """Run each config over every instance of a split and build the report.

    The unranked baseline is prepended when absent; every other config's
    status is checked against it per instance and mismatches are listed
    under "disagreements".
    """
    manifest = load_manifest(dataset_dir)
    if split not in manifest["splits"]:
        raise ValueError(
            f"unknown split {split!r}; have {sorted(manifest['splits'])}"
        )
    ids = manifest["splits"][split]
    if not any(c.is_baseline for c in configs):
        configs = [HeuristicConfig()] + list(configs)
    base_idx = next(i for i, c in enumerate(configs) if c.is_baseline)

    tasks = [(str(dataset_dir), iid, configs, seed) for iid in ids]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_eval_instance, tasks))
    else:
        results = [_eval_instance(t) for t in tasks]

    statuses = {iid: rows[base_idx][0] for iid, rows in results}
    disagreements = []
    config_rows = []
    for k, cfg in enumerate(configs):
        iters = {}
        elapsed = 0.0
        for iid, rows in results:
            status, n, dt = rows[k]
            iters[iid] = n
            elapsed += dt
            if status != statuses[iid]:
                disagreements.append(
                    {"instance": iid, "config": cfg.name,
                     "expected": statuses[iid], "got": status}
                )
        values = [iters[iid] for iid in ids]
        config_rows.append(
            {
                "name": cfg.name,
                "candidate": cfg.candidate,
                "counterexample": cfg.counterexample,
                "n_max": cfg.n_max,
                "gnn_iterations": cfg.iterations,
                "count": len(values),
                "mean_iterations": statistics.fmean(values) if values else 0.0,
                "median_iterations": float(statistics.median(values)) if values else 0.0,
                "std_iterations": statistics.pstdev(values) if len(values) > 1 else 0.0,
                "wall_time_s": elapsed,
                "iterations": iters,
            }
        )
    return {
        "dataset": str(dataset_dir),
        "split": split,
        "seed": seed,
        "n_instances": len(ids),
        "instances": list(ids),
        "statuses": statuses,
        "configs": config_rows,
        "disagreements": disagreements,
    }


def format_table(report: dict) -> str:
    """Aligned text table: one row per config, summary columns."""
    header = ("config", "mean", "median", "std", "n", "time[s]")
    rows = [
        (
            c["name"],
            f"{c['mean_iterations']:.3f}",
            f"{c['median_iterations']:.1f}",
            f"{c['std_iterations']:.3f}",
            str(c["count"]),
            f"{c['wall_time_s']:.2f}",
        )
        for c in report["configs"]
    ]
    widths = [
        max(len(header[i]), *(len(r[i]) for r in rows)) if rows else len(header[i])
        for i in range(len(header))
    ]
    lines = [
        "  ".join(
            h.ljust(widths[0]) if i == 0 else h.rjust(widths[i])
            for i, h in enumerate(header)
        )
    ]
    for r in rows:
        lines.append(
            "  ".join(
                r[0].ljust(widths[0]) if i == 0 else r[i].rjust(widths[i])
                for i in range(len(r))
            )
        )
    title = f"{report['split']}: {report['n_instances']} instances, seed {report['seed']}"
    return title + "\n" + "\n".join(lines)
