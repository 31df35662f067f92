"""JSON/CSV emission for run reports.

Reports are written with sorted keys and a fixed float format (``repr``),
so identical runs give byte-identical files.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import math
from pathlib import Path

import numpy as np

from .ga import GARun
from .model_selection import Attempt, CVReport, FitResult
from .region import RegionUnion


def to_jsonable(obj):
    if obj is None or isinstance(obj, (bool, str, int)):
        return obj
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, np.generic):
        return to_jsonable(obj.item())
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, RegionUnion):
        return obj.to_json()
    if isinstance(obj, GARun):
        return {"best_vector": to_jsonable(obj.best_vector), "best_fitness": obj.best_fitness,
                "generations_used": obj.generations_used}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if dataclasses.is_dataclass(obj):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def envelope_by_feature(r: RegionUnion | None, names) -> list[dict] | None:
    """One ``{feature: [low, high]}`` mapping per box."""
    if r is None:
        return None
    return [{name: [lo, hi] for name, lo, hi in zip(names, b.lower, b.upper)} for b in r.boxes]


def attempt_summary(a: Attempt) -> dict:
    return {"c": a.c, "fitness": a.fitness, "region": a.region, "mean": a.mean,
            "coverage": a.coverage, "sd": a.sd, "feasible": a.feasible,
            "generations_used": a.run.generations_used}


def fit_summary(res: FitResult, names) -> dict:
    return {
        "region": res.region,
        "envelope": envelope_by_feature(res.region, names),
        "train_mean": res.train_mean,
        "train_coverage": res.train_coverage,
        "train_sd": res.train_sd,
        "objective": res.objective,
        "chosen_c": res.chosen_c,
        "feasible": res.feasible,
        "beta": res.beta,
        "gamma": res.gamma,
        "ga_run": res.ga_run,
        "attempts": [attempt_summary(a) for a in res.attempts],
    }


def cv_summary(rep: CVReport) -> dict:
    return to_jsonable(rep)


def write_json(obj, path) -> None:
    text = json.dumps(to_jsonable(obj), sort_keys=True, indent=2, allow_nan=False)
    Path(path).write_text(text + "\n", encoding="utf-8")


def write_rows(path, header, rows) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow(["" if v is None else repr(v) if isinstance(v, float) else v for v in row])


def write_history(run: GARun, path) -> None:
    write_rows(path, ["generation", "best_fitness"], enumerate(run.history))
