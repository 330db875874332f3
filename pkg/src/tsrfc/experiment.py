"""Simulation grid: every method configuration on replicated scenarios.

One data set is simulated per (scheme, replicate); all method configurations
are run on it.  CCR is computed on the non-contaminating series only, with
trimmed series scored through their posterior cluster.
"""

from __future__ import annotations

import csv
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .baselines import HSM_OPTIONS, LINKAGES, hsm_cluster, tvd_cluster
from .evaluation import score_partition
from .fda import PenaltyConfig
from .pipeline import prepare
from .rfc import RFCConfig, posterior_assign, rfc_fit
from .sim import SCHEMES, ScenarioSpec, generate_scenario
from .spectral import LagWindowConfig

METHODS = ("rfc", "tvd", "hsm")

ROW_FIELDS = [
    "scheme", "replicate", "data_seed", "method", "config", "alpha", "d",
    "linkage", "hsm_option", "q", "ccr", "ari", "rand_index", "n_trimmed",
    "trimmed_contaminants",
]


@dataclass(frozen=True)
class ExperimentGrid:
    """Schemes x method configurations x replicates.

    Defaults follow the published study: trimming levels 0 and 0.1,
    constraint levels 3, 10 and 1e10 (effectively unconstrained), both
    linkages, both merger options, 100 random starts of 20 iterations.
    """

    schemes: tuple[str, ...] = SCHEMES
    methods: tuple[str, ...] = METHODS
    alphas: tuple[float, ...] = (0.0, 0.1)
    d_levels: tuple[float, ...] = (3.0, 10.0, 1e10)
    linkages: tuple[str, ...] = LINKAGES
    hsm_options: tuple[str, ...] = HSM_OPTIONS
    replicates: int = 10
    base_seed: int = 0
    K: int = 2
    p: int = 6
    q_max: int = 3
    n_init: int = 100
    max_iter: int = 20
    T: int = 1000
    n_per_cluster: int = 50
    n_contaminating: int = 11
    max_lag: int | None = None
    n_knots: int = 14
    lam: float = 3e-6

    def __post_init__(self):
        for name, allowed in (("schemes", SCHEMES), ("methods", METHODS),
                              ("linkages", LINKAGES), ("hsm_options", HSM_OPTIONS)):
            values = tuple(getattr(self, name))
            object.__setattr__(self, name, values)
            bad = [v for v in values if v not in allowed]
            if bad:
                raise ValueError(f"unknown {name}: {bad}; allowed {list(allowed)}")
        if not self.schemes or not self.methods:
            raise ValueError("grid needs at least one scheme and one method")
        if "rfc" in self.methods and (not self.alphas or not self.d_levels):
            raise ValueError("rfc needs at least one alpha and one d level")
        if "tvd" in self.methods and not self.linkages:
            raise ValueError("tvd needs at least one linkage")
        if "hsm" in self.methods and not self.hsm_options:
            raise ValueError("hsm needs at least one option")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        object.__setattr__(self, "d_levels", tuple(float(d) for d in self.d_levels))

    def method_configs(self) -> list[dict]:
        out = []
        for m in self.methods:
            if m == "rfc":
                for a in self.alphas:
                    for d in self.d_levels:
                        out.append({"method": "rfc", "config": f"rfc(alpha={a:g},d={d:g})", "alpha": a, "d": d})
            elif m == "tvd":
                for lk in self.linkages:
                    out.append({"method": "tvd", "config": f"tvd({lk})", "linkage": lk})
            else:
                for op in self.hsm_options:
                    out.append({"method": "hsm", "config": f"hsm({op})", "hsm_option": op})
        return out

    def data_seed(self, scheme: str, replicate: int) -> int:
        ss = np.random.SeedSequence(self.base_seed, spawn_key=(SCHEMES.index(scheme), replicate))
        return int(ss.generate_state(1)[0])

    def to_dict(self) -> dict:
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in asdict(self).items()}


def _run_one(grid: ExperimentGrid, scheme: str, replicate: int) -> list[dict]:
    seed = grid.data_seed(scheme, replicate)
    spec = ScenarioSpec(scheme=scheme, n_per_cluster=grid.n_per_cluster,
                        n_contaminating=grid.n_contaminating, T=grid.T, seed=seed)
    series, truth = generate_scenario(spec)
    lag = LagWindowConfig(max_lag=grid.max_lag)
    data = prepare(series, lag, n_knots=grid.n_knots, penalty=PenaltyConfig(lam=grid.lam))
    contaminant = truth == 0

    rows = []
    for mc in grid.method_configs():
        row = {f: None for f in ROW_FIELDS}
        row.update(scheme=scheme, replicate=replicate, data_seed=seed, **mc)
        if mc["method"] == "rfc":
            cfg = RFCConfig(K=grid.K, alpha=mc["alpha"], d1=mc["d"], d2=mc["d"], p=grid.p,
                            q_max=grid.q_max, n_init=grid.n_init, max_iter=grid.max_iter, seed=seed)
            model, part = rfc_fit(data.coeffs, data.basis, cfg, W=data.gram)
            post = posterior_assign(model, data.coeffs, data.gram)
            scores = score_partition(part.labels, truth, posterior_labels=post.labels)
            row.update(q="-".join(str(v) for v in model.q), n_trimmed=int(part.trimmed.sum()),
                       trimmed_contaminants=int((part.trimmed & contaminant).sum()))
        elif mc["method"] == "tvd":
            part, _ = tvd_cluster(data.densities, mc["linkage"], grid.K)
            scores = score_partition(part.labels, truth)
        else:
            part, _ = hsm_cluster(series, mc["hsm_option"], grid.K, lag, densities=data.densities)
            scores = score_partition(part.labels, truth)
        row.update(ccr=scores["ccr"], ari=scores["ari"], rand_index=scores["rand_index"])
        rows.append(row)
    return rows


def _cell_means(rows: list[dict]) -> list[dict]:
    cells: dict[tuple[str, str], list[dict]] = {}
    for r in rows:
        cells.setdefault((r["scheme"], r["config"]), []).append(r)
    out = []
    for (scheme, config), rs in cells.items():
        ccrs = np.array([r["ccr"] for r in rs])
        cell = {
            "scheme": scheme,
            "config": config,
            "method": rs[0]["method"],
            "n": len(rs),
            "mean_ccr": float(ccrs.mean()),
            "sd_ccr": float(ccrs.std(ddof=1)) if len(rs) > 1 else 0.0,
            "mean_ari": float(np.mean([r["ari"] for r in rs])),
        }
        trimmed = [r["trimmed_contaminants"] for r in rs if r["trimmed_contaminants"] is not None]
        cell["mean_trimmed_contaminants"] = float(np.mean(trimmed)) if trimmed else None
        out.append(cell)
    return out


@dataclass
class ExperimentReport:
    grid: ExperimentGrid
    rows: list[dict]
    cells: list[dict]
    elapsed: float = 0.0
    extra: dict = field(default_factory=dict)

    def mean_ccr(self, scheme: str, config: str) -> float:
        for c in self.cells:
            if c["scheme"] == scheme and c["config"] == config:
                return c["mean_ccr"]
        raise KeyError((scheme, config))

    def to_dict(self) -> dict:
        return {"grid": self.grid.to_dict(), "rows": self.rows, "cells": self.cells}


def run_experiment(grid: ExperimentGrid, workers: int = 1, progress=None) -> ExperimentReport:
    """Run the grid.  Replicates are independent and may use a process pool;
    rows come back in (scheme, replicate, config) order regardless."""
    tasks = [(s, r) for s in grid.schemes for r in range(grid.replicates)]
    t0 = time.perf_counter()
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_one, grid, s, r) for s, r in tasks]
            results = []
            for (s, r), fut in zip(tasks, futures):
                results.append(fut.result())
                if progress:
                    progress(s, r)
    else:
        results = []
        for s, r in tasks:
            results.append(_run_one(grid, s, r))
            if progress:
                progress(s, r)
    rows = [row for chunk in results for row in chunk]
    return ExperimentReport(grid, rows, _cell_means(rows), time.perf_counter() - t0)


def report_schema() -> dict:
    text = resources.files("tsrfc").joinpath("schemas/experiment_report.schema.json").read_text()
    return json.loads(text)


def validate_report(payload: dict):
    """Raise ``jsonschema.ValidationError`` if ``payload`` is not a valid report."""
    import jsonschema

    jsonschema.validate(payload, report_schema())


def write_report(report: ExperimentReport, out_dir) -> tuple[Path, Path]:
    """Write ``ccr_rows.csv`` and ``report.json`` (validated) to ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "ccr_rows.csv"
    with open(csv_path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=ROW_FIELDS)
        w.writeheader()
        for r in report.rows:
            w.writerow({k: ("" if r[k] is None else r[k]) for k in ROW_FIELDS})
    payload = report.to_dict()
    validate_report(payload)
    json_path = out / "report.json"
    with open(json_path, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    return csv_path, json_path
