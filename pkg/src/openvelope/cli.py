"""Command-line front end.

    openvelope fit      --scenario I-b --beta 0.4 --seed 1 --out runs/b
    openvelope cv       --input mining.csv --response y --features a,b --gamma-grid 0,5,10 ...
    openvelope simulate --scenario II --n 1000 --seed 3 --out data
    openvelope mc       --scenario I-a --delta 0.3 --beta 0.25 --seed 0 --out runs/mc
    openvelope oracle   --scenario I-b --beta 0.4 --seed 1 --fit-report runs/b/report.json

Settings come from an optional JSON ``--config`` file; flags override it.
Every random stream is derived from ``seed`` (see ``openvelope.seeding``):
data generation uses ``("sim_bench", "generate")``, the train/test split
``("data", "split")``, the GA ``("ga",)`` and the bootstrap ``("bootstrap",)``.

Exit status: 0 success, 1 usage or data error, 2 no feasible envelope.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .data import DataError, Dataset, load_csv, split, write_csv
from .estimation import BootstrapConfig, BootstrapPlan
from .ga import GAConfig
from .model_selection import (SELECTION_POLICIES, GammaGrid, PenaltySchedule, cross_validate,
                              evaluate, fit, select_gamma)
from .report import (cv_summary, envelope_by_feature, fit_summary, write_history, write_json,
                     write_rows)
from .sim_bench import SimulationSpec, SolverConfig, generate, monte_carlo, oracle_1d
from .seeding import derive_seed

log = logging.getLogger("openvelope")

EXIT_OK, EXIT_ERROR, EXIT_INFEASIBLE = 0, 1, 2

DEFAULTS = {
    "input": None,
    "response_column": "y",
    "feature_columns": None,
    "scenario": None,
    "n": 1000,
    "delta": 0.0,
    "sigma_eps": None,
    "mixture_scale": 2.5,
    "scale_is_variance": True,
    "L": 1,
    "beta": 0.2,
    "gamma": 0.0,
    "gamma_grid": None,
    "penalty_schedule": None,
    "eta": None,
    "ga": {},
    "bootstrap": {"M": 500},
    "folds": 4,
    "split_fraction": None,
    "restarts": 1,
    "repetitions": 20,
    "selection_policy": "default",
    "manual_gamma": None,
    "seed": None,
    "workers": None,
    "out": "out",
    "fit_report": None,
}

# where and how a run executes, not what it computes; kept out of reports
_EXECUTION_KEYS = ("out", "workers")

# flag dest -> config key, for flags whose names differ
_FLAG_KEYS = {"response": "response_column", "features": "feature_columns"}


class UsageError(Exception):
    pass


def _float_list(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _str_list(text: str) -> list[str]:
    return [v.strip() for v in text.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="openvelope", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    S = argparse.SUPPRESS
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--input", default=S, help="CSV file with a header row")
    common.add_argument("--response", default=S, help="response column name")
    common.add_argument("--features", type=_str_list, default=S, help="comma-separated feature columns")
    common.add_argument("--scenario", default=S, help="I-a | I-b | I-c | I-d | II")
    common.add_argument("--n", type=int, default=S)
    common.add_argument("--delta", type=float, default=S)
    common.add_argument("--L", type=int, default=S, dest="L")
    common.add_argument("--beta", type=float, default=S)
    common.add_argument("--gamma", type=float, default=S)
    common.add_argument("--gamma-grid", type=_float_list, default=S, dest="gamma_grid")
    common.add_argument("--penalty-schedule", type=_float_list, default=S, dest="penalty_schedule")
    common.add_argument("--folds", type=int, default=S)
    common.add_argument("--split-fraction", type=float, default=S, dest="split_fraction")
    common.add_argument("--restarts", type=int, default=S)
    common.add_argument("--repetitions", type=int, default=S)
    common.add_argument("--selection-policy", choices=SELECTION_POLICIES, default=S,
                        dest="selection_policy")
    common.add_argument("--seed", type=int, default=S)
    common.add_argument("--workers", type=int, default=S)
    common.add_argument("--out", default=S, help="output directory")
    common.add_argument("-v", "--verbose", action="store_true")
    for name, help_ in [("fit", "fit one envelope"), ("cv", "cross-validate gamma and refit"),
                        ("simulate", "write a synthetic dataset"), ("mc", "Monte Carlo study"),
                        ("oracle", "exhaustive 1-D interval search")]:
        p = sub.add_parser(name, parents=[common], help=help_)
        if name == "oracle":
            p.add_argument("--fit-report", default=S, dest="fit_report")
    return parser


def resolve_config(args: argparse.Namespace) -> dict:
    cfg = json.loads(json.dumps(DEFAULTS))
    if args.config:
        try:
            loaded = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        unknown = set(loaded) - set(DEFAULTS)
        if unknown:
            raise UsageError(f"unknown config key(s): {', '.join(sorted(unknown))}")
        cfg.update(loaded)
    for key, value in vars(args).items():
        if key in ("command", "config", "verbose"):
            continue
        cfg[_FLAG_KEYS.get(key, key)] = value
    if cfg["seed"] is None:
        raise UsageError("a seed is required (--seed or config 'seed')")
    return cfg


def _echo(cfg: dict) -> dict:
    return {k: v for k, v in cfg.items() if k not in _EXECUTION_KEYS}


def _ga_config(cfg: dict) -> GAConfig:
    return GAConfig(**{**cfg["ga"], "seed": derive_seed(cfg["seed"], "ga")})


def _boot_config(cfg: dict) -> BootstrapConfig:
    return BootstrapConfig(**{**cfg["bootstrap"], "seed": derive_seed(cfg["seed"], "bootstrap")})


def _sim_spec(cfg: dict) -> SimulationSpec:
    sigma = cfg["sigma_eps"]
    return SimulationSpec(
        scenario=cfg["scenario"], n=cfg["n"], delta=cfg["delta"],
        sigma_eps=tuple(sigma) if isinstance(sigma, list) else sigma,
        seed=derive_seed(cfg["seed"], "sim_bench", "generate"),
        mixture_scale=cfg["mixture_scale"], scale_is_variance=cfg["scale_is_variance"])


def load_data(cfg: dict) -> Dataset:
    if cfg["input"]:
        features = cfg["feature_columns"]
        if not features:
            path = Path(cfg["input"])
            if not path.is_file():
                raise DataError(f"no such file: {path}")
            with path.open(encoding="utf-8") as fh:
                header = [h.strip() for h in fh.readline().split(",")]
            features = [h for h in header if h and h != cfg["response_column"]]
        return load_csv(cfg["input"], cfg["response_column"], features)
    if cfg["scenario"]:
        return generate(_sim_spec(cfg))
    raise UsageError("give --input CSV or --scenario")


def train_test(cfg: dict, d: Dataset) -> tuple[Dataset, Dataset | None]:
    frac = cfg["split_fraction"]
    if frac is None:
        return d, None
    return split(d, frac, derive_seed(cfg["seed"], "data", "split"))


def _schedule(cfg: dict) -> PenaltySchedule | None:
    s = cfg["penalty_schedule"]
    return PenaltySchedule(tuple(s)) if s else None


def _dataset_info(d: Dataset, train: Dataset, test: Dataset | None) -> dict:
    return {"n": d.n, "p": d.p, "feature_names": list(d.feature_names),
            "n_train": train.n, "n_test": None if test is None else test.n,
            "baseline_mean": float(d.y.mean())}


def _test_info(test: Dataset | None, region) -> dict | None:
    if test is None:
        return None
    mean, cov = evaluate(test, region)
    return {"test_mean": mean, "test_coverage": cov}


def cmd_fit(cfg: dict) -> int:
    if cfg["gamma_grid"]:
        return cmd_cv(cfg)
    out = Path(cfg["out"])
    d = load_data(cfg)
    train, test = train_test(cfg, d)
    res = fit(train, cfg["L"], cfg["beta"], cfg["gamma"], _schedule(cfg), _ga_config(cfg),
              _boot_config(cfg), eta=cfg["eta"], restarts=cfg["restarts"],
              workers=cfg["workers"] or 1)
    out.mkdir(parents=True, exist_ok=True)
    report = {"command": "fit", "config": _echo(cfg), "dataset": _dataset_info(d, train, test),
              "result": fit_summary(res, d.feature_names), "test": _test_info(test, res.region)}
    write_json(report, out / "report.json")
    write_history(res.ga_run, out / "fitness_history.csv")
    return EXIT_OK if res.feasible else EXIT_INFEASIBLE


def cmd_cv(cfg: dict) -> int:
    out = Path(cfg["out"])
    d = load_data(cfg)
    train, test = train_test(cfg, d)
    grid = GammaGrid(tuple(cfg["gamma_grid"] or [cfg["gamma"]]))
    schedule = _schedule(cfg)
    ga_cfg, boot_cfg = _ga_config(cfg), _boot_config(cfg)
    reports = cross_validate(train, cfg["L"], cfg["beta"], grid, cfg["folds"], schedule,
                             ga_cfg, boot_cfg, derive_seed(cfg["seed"], "model_selection"),
                             eta=cfg["eta"], restarts=cfg["restarts"], workers=cfg["workers"])
    gamma_star = select_gamma(reports, cfg["selection_policy"], cfg["manual_gamma"])
    final = fit(train, cfg["L"], cfg["beta"], gamma_star, schedule, ga_cfg, boot_cfg,
                eta=cfg["eta"], restarts=cfg["restarts"])
    at_star = next(r for r in reports if r.gamma == gamma_star)
    test_info = _test_info(test, final.region)
    summary = {
        "L": cfg["L"],
        "gamma": gamma_star,
        "envelope": envelope_by_feature(final.region, d.feature_names),
        "train": final.train_mean,
        "test": None if test_info is None else test_info["test_mean"],
        "bias": at_star.bias,
        "variance": at_star.variance,
        "baseline_mean": float(d.y.mean()),
    }
    out.mkdir(parents=True, exist_ok=True)
    write_json({"command": "cv", "config": _echo(cfg), "gamma_star": gamma_star,
                "selection_policy": cfg["selection_policy"],
                "reports": [cv_summary(r) for r in reports]}, out / "cv_report.json")
    write_json({"command": "cv", "config": _echo(cfg), "dataset": _dataset_info(d, train, test),
                "gamma_star": gamma_star, "result": fit_summary(final, d.feature_names),
                "cv_regions_at_gamma_star": at_star.fold_regions,
                "test": test_info, "summary": summary}, out / "report.json")
    write_rows(out / "bias_variance.csv", ["gamma", "bias", "variance", "n_empty"],
               [(r.gamma, r.bias, r.variance, r.n_empty) for r in reports])
    write_history(final.ga_run, out / "fitness_history.csv")
    return EXIT_OK if final.feasible else EXIT_INFEASIBLE


def cmd_simulate(cfg: dict) -> int:
    if not cfg["scenario"]:
        raise UsageError("simulate needs --scenario")
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    write_csv(generate(_sim_spec(cfg)), out / "dataset.csv")
    return EXIT_OK


def cmd_mc(cfg: dict) -> int:
    if not cfg["scenario"]:
        raise UsageError("mc needs --scenario")
    out = Path(cfg["out"])
    solver = SolverConfig(L=cfg["L"], beta=cfg["beta"], gamma=cfg["gamma"],
                          schedule=tuple(cfg["penalty_schedule"]) if cfg["penalty_schedule"] else None,
                          ga=_ga_config(cfg), bootstrap=_boot_config(cfg), restarts=cfg["restarts"])
    rep = monte_carlo(_sim_spec(cfg), solver, cfg["repetitions"], workers=cfg["workers"])
    out.mkdir(parents=True, exist_ok=True)
    write_json({"command": "mc", "config": _echo(cfg), "repetitions": rep.repetitions,
                "subregion_counts": rep.subregion_counts, "fractions": rep.fractions(),
                "per_rep_results": rep.per_rep_results}, out / "mc_report.json")
    write_rows(out / "mc_counts.csv", ["subregion", "count"], rep.subregion_counts.items())
    return EXIT_OK


def cmd_oracle(cfg: dict) -> int:
    out = Path(cfg["out"])
    d = load_data(cfg)
    train, _ = train_test(cfg, d)
    if train.p != 1:
        raise UsageError("oracle supports p = 1 only")
    boot_cfg = _boot_config(cfg)
    plan = BootstrapPlan(train, boot_cfg) if cfg["gamma"] > 0 else None
    res = oracle_1d(train, cfg["beta"], cfg["gamma"], boot_cfg, plan)
    report = {"command": "oracle", "config": _echo(cfg), "interval": list(res.interval),
              "objective": res.objective, "mean": res.mean, "coverage": res.coverage,
              "sd": res.sd, "gap": None}
    if cfg["fit_report"]:
        from .estimation import saa_mean
        from .region import RegionUnion

        fitted = json.loads(Path(cfg["fit_report"]).read_text(encoding="utf-8"))
        region = RegionUnion.from_json(fitted["result"]["region"])
        fit_obj = saa_mean(train, region)
        if cfg["gamma"] > 0:
            fit_obj -= cfg["gamma"] * plan.sd(region)
        report["fit_objective"] = fit_obj
        report["gap"] = res.objective - fit_obj
        print(f"oracle objective {res.objective!r}  fit objective {fit_obj!r}  gap {report['gap']!r}")
    out.mkdir(parents=True, exist_ok=True)
    write_json(report, out / "oracle.json")
    return EXIT_OK


COMMANDS = {"fit": cmd_fit, "cv": cmd_cv, "simulate": cmd_simulate, "mc": cmd_mc,
            "oracle": cmd_oracle}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command](cfg)
    except (UsageError, DataError, ValueError, TypeError, OSError) as exc:
        print(f"openvelope: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
