"""Command-line driver.

    tsrfc simulate   --scheme i --seed 1 --out data/series.csv
    tsrfc spectra    --input data/series.csv --out data/
    tsrfc cluster    --method rfc --input data/coefficients.csv --out fit/
    tsrfc evaluate   --pred fit/partition.json --truth data/series.csv
    tsrfc experiment --replicates 10 --out results/

Every option can also come from a JSON file given with ``--config``; keys are
the long option names with dashes replaced by underscores.  Flags override
the file, which overrides the built-in defaults.

Exit status: 0 success, 2 invalid configuration or input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import io
from .baselines import HSM_OPTIONS, LINKAGES, hsm_cluster, tvd_cluster
from .evaluation import score_partition
from .experiment import METHODS, ExperimentGrid, run_experiment, write_report
from .fda import BSplineBasis, PenaltyConfig, build_basis, fit_curves, gram_matrix
from .rfc import RFCConfig, RFCFitError, posterior_assign, rfc_fit
from .sim import SCHEMES, ScenarioSpec, generate_scenario
from .spectral import LagWindowConfig, SpectralDensity, density_matrix, estimate_normalized

log = logging.getLogger("tsrfc")

EXIT_CONFIG = 2
EXIT_NUMERIC = 3

DEFAULTS = {
    "scheme": "clean",
    "seed": 0,
    "T": 1000,
    "n_per_cluster": 50,
    "n_contaminating": 11,
    "max_lag": None,
    "grid_size": 512,
    "knots": 14,
    "lam": 3e-6,
    "method": "rfc",
    "k": 2,
    "alpha": 0.0,
    "d1": 3.0,
    "d2": 3.0,
    "p": 6,
    "q_max": 3,
    "n_init": 100,
    "max_iter": 20,
    "linkage": "complete",
    "hsm_option": "average",
    "replicates": 10,
    "workers": 1,
    "keep_contaminants": False,
    "trimmed_as_class": False,
}


_LIST_KEYS = {"schemes", "methods", "alphas", "d_levels", "linkages", "hsm_options", "out"}


class ConfigError(ValueError):
    pass


def _csv_list(text):
    return [t.strip() for t in text.split(",") if t.strip()]


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON file with option values")
    p.add_argument("--out", help="output file or directory")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tsrfc", description="Robust clustering of stationary time series.")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="simulate a labeled scenario")
    _add_common(sim)
    sim.add_argument("--scheme", choices=SCHEMES, help="contamination scheme (default clean)")
    sim.add_argument("--seed", type=int, help="simulation seed")
    sim.add_argument("--T", type=int, dest="T", help="series length (default 1000)")
    sim.add_argument("--n-per-cluster", type=int, help="series per clean group (default 50)")
    sim.add_argument("--n-contaminating", type=int, help="contaminating series (default 11)")

    spe = sub.add_parser("spectra", help="normalized spectra and spline coefficients")
    _add_common(spe)
    spe.add_argument("--input", required=True, help="series CSV")
    spe.add_argument("--max-lag", type=int, help="lag-window truncation (default T // 10)")
    spe.add_argument("--grid-size", type=int, help="frequencies in [0, ws/2] (default 512)")
    spe.add_argument("--knots", type=int, help="interior B-spline knots (default 14)")
    spe.add_argument("--lambda", type=float, dest="lam", help="roughness penalty (default 3e-6)")

    clu = sub.add_parser("cluster", help="run one clustering method")
    _add_common(clu)
    clu.add_argument("--input", required=True,
                     help="coefficients CSV (rfc), densities CSV (tvd) or series CSV (hsm)")
    clu.add_argument("--method", choices=METHODS)
    clu.add_argument("--k", type=int, help="number of clusters (default 2)")
    clu.add_argument("--alpha", type=float, help="trimmed fraction, rfc only (default 0)")
    clu.add_argument("--d1", type=float, help="max ratio of main variances (default 3)")
    clu.add_argument("--d2", type=float, help="max ratio of residual variances (default 3)")
    clu.add_argument("--p", type=int, help="retained principal directions (default 6)")
    clu.add_argument("--q-max", type=int, help="largest main dimension tried by BIC (default 3)")
    clu.add_argument("--n-init", type=int, help="random starts (default 100)")
    clu.add_argument("--max-iter", type=int, help="EM iterations per start (default 20)")
    clu.add_argument("--seed", type=int, help="seed for the random starts")
    clu.add_argument("--linkage", choices=LINKAGES)
    clu.add_argument("--hsm-option", choices=HSM_OPTIONS)
    clu.add_argument("--max-lag", type=int, help="lag-window truncation, hsm only")

    ev = sub.add_parser("evaluate", help="score a partition against true labels")
    _add_common(ev)
    ev.add_argument("--pred", required=True, help="partition JSON or CSV")
    ev.add_argument("--truth", required=True, help="CSV or JSON with a label column")
    ev.add_argument("--keep-contaminants", action="store_true", default=None,
                    help="also score items whose true label is 0")
    ev.add_argument("--trimmed-as-class", action="store_true", default=None,
                    help="score trimmed items as their own class instead of by posterior")

    ex = sub.add_parser("experiment", help="run the simulation grid")
    _add_common(ex)
    ex.add_argument("--scheme", type=_csv_list, dest="schemes", help="comma list")
    ex.add_argument("--method", type=_csv_list, dest="methods", help="comma list")
    ex.add_argument("--alpha", type=lambda s: [float(v) for v in _csv_list(s)], dest="alphas",
                    help="comma list of trimming levels (default 0,0.1)")
    ex.add_argument("--d", type=lambda s: [float(v) for v in _csv_list(s)], dest="d_levels",
                    help="comma list of constraint levels (default 3,10,1e10)")
    ex.add_argument("--d1", type=float, help="alias for a single constraint level")
    ex.add_argument("--d2", type=float, help="must equal --d1 when both are given")
    ex.add_argument("--linkage", type=_csv_list, dest="linkages")
    ex.add_argument("--hsm-option", type=_csv_list, dest="hsm_options")
    ex.add_argument("--k", type=int)
    ex.add_argument("--p", type=int)
    ex.add_argument("--q-max", type=int)
    ex.add_argument("--n-init", type=int)
    ex.add_argument("--replicates", type=int, help="data sets per scheme (default 10)")
    ex.add_argument("--seed", type=int, help="base seed for the data sets")
    ex.add_argument("--max-lag", type=int)
    ex.add_argument("--knots", type=int)
    ex.add_argument("--lambda", type=float, dest="lam")
    ex.add_argument("--workers", type=int, help="worker processes (default 1)")
    return parser


def resolve_options(args: argparse.Namespace) -> dict:
    """Merge defaults, the ``--config`` file and explicit flags, in that order."""
    opts = dict(DEFAULTS)
    if args.config:
        try:
            with open(args.config) as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(cfg, dict):
            raise ConfigError("config file must hold a JSON object")
        cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
        unknown = sorted(set(cfg) - set(opts) - _LIST_KEYS)
        if unknown:
            raise ConfigError(f"unknown config keys: {unknown}")
        opts.update(cfg)
    for k, v in vars(args).items():
        if v is not None and k not in ("config", "command"):
            opts[k] = v
    return opts


# -- subcommands


def cmd_simulate(o: dict) -> int:
    spec = ScenarioSpec(scheme=o["scheme"], n_per_cluster=o["n_per_cluster"],
                        n_contaminating=o["n_contaminating"], T=o["T"], seed=o["seed"])
    series, labels = generate_scenario(spec)
    out = Path(o.get("out") or f"{spec.scheme}_seed{spec.seed}.csv")
    io.write_series(out, series, labels)
    io.write_manifest(io.sidecar(out), {
        "scheme": spec.scheme, "seed": spec.seed, "T": spec.T, "ws": 1.0,
        "n_per_cluster": spec.n_per_cluster, "n_contaminating": spec.n_contaminating,
        "n_series": len(series),
    })
    log.info("wrote %d series to %s", len(series), out)
    return 0


def _lag(o) -> LagWindowConfig:
    return LagWindowConfig(max_lag=o["max_lag"], grid_size=o["grid_size"])


def cmd_spectra(o: dict) -> int:
    series, labels = io.read_series(o["input"])
    lag = _lag(o)
    dens = estimate_normalized(series, lag)
    freqs, values = density_matrix(dens)
    basis = build_basis((0.0, series[0].ws / 2), o["knots"])
    coeffs = fit_curves(freqs, values, basis, PenaltyConfig(lam=o["lam"]))
    out = Path(o.get("out") or ".")
    io.write_densities(out / "densities.csv", freqs, values, labels,
                       {"ws": series[0].ws, "max_lag": lag.lag_for(len(series[0])), "grid_size": lag.grid_size})
    io.write_coefficients(out / "coefficients.csv", coeffs, labels,
                          dict(basis.describe(), lam=o["lam"], penalty_order=2))
    log.info("wrote densities and coefficients for %d series to %s", len(series), out)
    return 0


def _basis_from_meta(meta: dict) -> BSplineBasis:
    try:
        return BSplineBasis(int(meta["degree"]), np.asarray(meta["knots"], dtype=float))
    except KeyError as exc:
        raise io.FormatError(f"basis descriptor lacks {exc}") from None


def cmd_cluster(o: dict) -> int:
    out = Path(o.get("out") or ".")
    method = o["method"]
    extra = {}
    if method == "rfc":
        coeffs, _, meta = io.read_coefficients(o["input"])
        basis = _basis_from_meta(meta)
        if coeffs.shape[1] != basis.n_basis:
            raise io.FormatError(f"{coeffs.shape[1]} coefficients per row but the basis has {basis.n_basis}")
        cfg = RFCConfig(K=o["k"], alpha=o["alpha"], d1=o["d1"], d2=o["d2"], p=o["p"], q_max=o["q_max"],
                        n_init=o["n_init"], max_iter=o["max_iter"], seed=o["seed"])
        W = gram_matrix(basis)
        model, part = rfc_fit(coeffs, basis, cfg, W=W)
        post = posterior_assign(model, coeffs, W)
        extra["posterior_labels"] = post.labels.tolist()
        io.write_json(out / "model.json", model.to_dict())
    elif method == "tvd":
        freqs, values, _, _ = io.read_densities(o["input"])
        dens = [SpectralDensity(freqs, v, normalized=True) for v in values]
        part, tree = tvd_cluster(dens, o["linkage"], o["k"])
        io.write_json(out / "merges.json", tree.to_dict())
    else:
        series, _ = io.read_series(o["input"])
        part, tree = hsm_cluster(series, o["hsm_option"], o["k"], _lag(o))
        io.write_json(out / "merges.json", tree.to_dict())
    payload = dict(part.to_dict(), method=method, **extra)
    io.write_json(out / "partition.json", payload)
    io.write_partition_csv(out / "partition.csv", part.labels)
    log.info("%s: %d clusters, %d trimmed", method, part.n_clusters, int(part.trimmed.sum()))
    return 0


def cmd_evaluate(o: dict) -> int:
    pred = io.read_partition(o["pred"])
    truth = io.read_partition(o["truth"])
    scores = score_partition(
        np.asarray(pred["labels"]), np.asarray(truth["labels"]),
        posterior_labels=pred.get("posterior_labels"),
        drop_truth_zero=not o["keep_contaminants"],
        trimmed_as_class=o["trimmed_as_class"],
    )
    text = json.dumps(scores, indent=2)
    if o.get("out"):
        io.write_json(o["out"], scores)
    print(text)
    return 0


def cmd_experiment(o: dict) -> int:
    d_levels = o.get("d_levels")
    if d_levels is None and o.get("d1") is not None:
        if o.get("d2") is not None and o["d2"] != o["d1"]:
            raise ConfigError("the experiment grid uses one level for both constraints; d1 and d2 differ")
        d_levels = [o["d1"]]
    kw = {k: o[k] for k in ("schemes", "methods", "alphas", "linkages", "hsm_options") if o.get(k) is not None}
    if d_levels is not None:
        kw["d_levels"] = d_levels
    grid = ExperimentGrid(K=o["k"], p=o["p"], q_max=o["q_max"], n_init=o["n_init"], replicates=o["replicates"],
                          base_seed=o["seed"], max_lag=o["max_lag"], n_knots=o["knots"], lam=o["lam"], **kw)
    report = run_experiment(grid, workers=o["workers"],
                            progress=lambda s, r: log.info("done scheme=%s replicate=%d", s, r))
    csv_path, json_path = write_report(report, o.get("out") or "experiment")
    for c in report.cells:
        print(f"{c['scheme']:>5}  {c['config']:<24} mean CCR {c['mean_ccr']:.3f}")
    log.info("wrote %s and %s in %.1f s", csv_path, json_path, report.elapsed)
    return 0


COMMANDS = {
    "simulate": cmd_simulate,
    "spectra": cmd_spectra,
    "cluster": cmd_cluster,
    "evaluate": cmd_evaluate,
    "experiment": cmd_experiment,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        opts = resolve_options(args)
        return COMMANDS[args.command](opts)
    except (RFCFitError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"tsrfc: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, TypeError, KeyError, OSError) as exc:
        print(f"tsrfc: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
