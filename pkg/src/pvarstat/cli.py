"""Command-line surface: simulation, p-variation, calibration, testing, studies.

Configs are JSON, series and samples are single-column CSV, tables and
reports are JSON.  Every command's output is a pure function of its config
file: all randomness flows from the configured seed through per-replicate
derived streams, so study outputs are byte-identical across worker counts.

Exit codes: 0 success, 2 validation error (bad config, bad input file),
3 runtime error.
"""

from __future__ import annotations

import csv
import functools
import json
import math
import sys
from pathlib import Path

import click
import numpy as np
from scipy import stats

from . import __version__
from .changepoint import ChangeModel, cp_test, simulate_cpm, size_power_study
from .errors import PvarstatError, ValidationError
from .filters import FilterSpec, InnovationSpec, Series, a_psi as filter_gain, simulate_path
from .funcspace import function_from_config, integral_sq
from .limits import CriticalValueTable, build_cv_table
from .pvar import pvar_dp
from .regress import RegressionScenario, beta_clt_study, simulate_regression
from .rng import GENERATOR_TAG

_VERSION_LINE = f"pvarstat {__version__} ({GENERATOR_TAG})"


# ---------------------------------------------------------------------------
# config plumbing

def _check_keys(obj, path: str, required: dict, optional: dict = ()) -> None:
    """Schema check with JSON-pointer paths in the error messages."""
    if not isinstance(obj, dict):
        raise ValidationError(f"{path or '/'}: expected an object")
    optional = dict(optional)
    for key in obj:
        if key not in required and key not in optional:
            raise ValidationError(f"{path}/{key}: unknown key")
    for key, kind in required.items():
        if key not in obj:
            raise ValidationError(f"{path}/{key}: missing required key")
        _check_type(obj[key], kind, f"{path}/{key}")
    for key, kind in optional.items():
        if key in obj:
            _check_type(obj[key], kind, f"{path}/{key}")


def _check_type(value, kind, path: str) -> None:
    if kind == "number":
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ValidationError(f"{path}: expected a number")
    elif kind == "int":
        if not isinstance(value, int) or isinstance(value, bool):
            raise ValidationError(f"{path}: expected an integer")
    elif kind == "str":
        if not isinstance(value, str):
            raise ValidationError(f"{path}: expected a string")
    elif kind == "list":
        if not isinstance(value, list):
            raise ValidationError(f"{path}: expected an array")
    elif kind == "dict":
        if not isinstance(value, dict):
            raise ValidationError(f"{path}: expected an object")
    elif kind == "bool":
        if not isinstance(value, bool):
            raise ValidationError(f"{path}: expected a boolean")


def _load_json(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ValidationError(f"{path}: top-level JSON value must be an object")
    return data


def _filter_from_config(cfg, path: str) -> FilterSpec:
    _check_keys(cfg, path, {"family": "str"},
                {"phi": "number", "scale": "number", "coeffs": "list",
                 "truncation_tol": "number"})
    family = cfg["family"]
    tol = float(cfg.get("truncation_tol", 1e-12))
    if family == "geometric":
        if "phi" not in cfg:
            raise ValidationError(f"{path}/phi: missing required key")
        return FilterSpec.geometric(cfg["phi"], cfg.get("scale", 1.0), truncation_tol=tol)
    if family == "finite":
        if "coeffs" not in cfg:
            raise ValidationError(f"{path}/coeffs: missing required key")
        return FilterSpec.finite(cfg["coeffs"], truncation_tol=tol)
    raise ValidationError(f"{path}/family: must be 'geometric' or 'finite' in configs")


def _innov_from_config(cfg, path: str) -> InnovationSpec:
    _check_keys(cfg, path, {"distribution": "str"},
                {"sigma_eta": "number", "df": "number"})
    return InnovationSpec(distribution=cfg["distribution"],
                          sigma_eta=float(cfg.get("sigma_eta", 1.0)),
                          df=cfg.get("df"))


def _model_from_config(cfg, path: str) -> ChangeModel:
    _check_keys(cfg, path, {"tau": "list", "beta": "list"})
    return ChangeModel(tau=tuple(cfg["tau"]), beta=tuple(cfg["beta"]))


# ---------------------------------------------------------------------------
# file I/O

def _read_series(path, origin: str) -> Series:
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from exc
    if not rows or rows[0] != ["value"]:
        raise ValidationError(f"{path}: expected a single-column CSV with header 'value'")
    try:
        values = [float(r[0]) for r in rows[1:] if r]
    except (ValueError, IndexError) as exc:
        raise ValidationError(f"{path}: malformed CSV row: {exc}") from exc
    if not values:
        raise ValidationError(f"{path}: series is empty")
    return Series(np.asarray(values), origin=origin)


def _write_series(path, values) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["value"])
        for v in np.asarray(values, dtype=float):
            writer.writerow([repr(float(v))])


def _echo_json(data, out=None) -> None:
    text = json.dumps(data, indent=2, sort_keys=True)
    if out:
        Path(out).write_text(text + "\n")
    else:
        click.echo(text)


def _cli_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ValidationError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(2)
        except (PvarstatError, OSError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(3)
    return wrapper


# ---------------------------------------------------------------------------
# commands

@click.group()
@click.version_option(version=__version__, message=_VERSION_LINE)
def main():
    """p-variation statistics for weighted sums of short-memory linear processes."""


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(), help="JSON config.")
@click.option("--out", "out_path", required=True, type=click.Path(), help="Output series CSV.")
@_cli_errors
def simulate(config_path, out_path):
    """Simulate a series: plain noise, change-point means, or regression."""
    cfg = _load_json(config_path)
    _check_keys(cfg, "", {"mode": "str", "n": "int", "seed": "int",
                          "filter": "dict", "innovations": "dict"},
                {"model": "dict", "beta": "number", "f": "dict"})
    mode = cfg["mode"]
    filt = _filter_from_config(cfg["filter"], "/filter")
    innov = _innov_from_config(cfg["innovations"], "/innovations")
    n, seed = cfg["n"], cfg["seed"]
    if mode == "linproc":
        series = simulate_path(filt, innov, n, seed)
    elif mode == "cpm":
        if "model" not in cfg:
            raise ValidationError("/model: missing required key for mode 'cpm'")
        series = simulate_cpm(_model_from_config(cfg["model"], "/model"),
                              filt, innov, n, seed)
    elif mode == "regression":
        for key in ("beta", "f"):
            if key not in cfg:
                raise ValidationError(f"/{key}: missing required key for mode 'regression'")
        scenario = RegressionScenario(beta=float(cfg["beta"]),
                                      f=function_from_config(cfg["f"]),
                                      filter_spec=filt, innovations=innov,
                                      n=n, seed=seed)
        series = simulate_regression(scenario)
    else:
        raise ValidationError("/mode: must be 'linproc', 'cpm', or 'regression'")
    _write_series(out_path, series.values)


@main.command(name="pvar")
@click.option("--input", "input_path", required=True, type=click.Path(), help="Series CSV.")
@click.option("--p", "p", required=True, type=float, help="Variation exponent, p >= 1.")
@click.option("--raw", "origin", flag_value="raw", help="Rows are raw increments.")
@click.option("--cumulative", "origin", flag_value="cumulative",
              help="Rows are the cumulative path itself.")
@click.option("--emit-partition", is_flag=True, help="Include the optimal partition.")
@_cli_errors
def pvar_cmd(input_path, p, origin, emit_partition):
    """p-variation of a series, printed as JSON."""
    if origin is None:
        raise ValidationError("choose one of --raw or --cumulative")
    series = _read_series(input_path, origin)
    if origin == "raw":
        path = series.cumulative()
    else:
        path = series
    result = pvar_dp(path, p)
    payload = {"p": result.p, "value": result.value, "norm": result.norm()}
    if emit_partition:
        payload["partition"] = list(result.partition)
    _echo_json(payload)


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(), help="JSON config.")
@click.option("--out", "out_path", required=True, type=click.Path(), help="Output table JSON.")
@click.option("--workers", default=1, show_default=True, help="Worker processes.")
@_cli_errors
def calibrate(config_path, out_path, workers):
    """Build a critical-value table for the Wiener p-variation norm."""
    cfg = _load_json(config_path)
    _check_keys(cfg, "", {"p": "number", "grid": "int", "reps": "int", "seed": "int"},
                {"levels": "list", "include_sample": "bool"})
    table = build_cv_table(
        p=float(cfg["p"]), grid=cfg["grid"], reps=cfg["reps"],
        levels=tuple(cfg.get("levels", (0.90, 0.95, 0.99))),
        seed=cfg["seed"], workers=workers,
        include_sample=bool(cfg.get("include_sample", True)))
    table.save(out_path)


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path(), help="Series CSV.")
@click.option("--p", "p", required=True, type=float, help="Variation exponent, p > 2.")
@click.option("--alpha", required=True, type=float, help="Test level in (0, 1).")
@click.option("--cv", "cv_path", required=True, type=click.Path(), help="Critical-value table JSON.")
@click.option("--sigma-eta", type=float, default=None, help="Known innovation sigma.")
@click.option("--a-psi", type=float, default=None, help="Known long-run filter gain.")
@click.option("--estimate-lrv", is_flag=True, help="Bartlett plug-in for the noise scale.")
@click.option("--bandwidth", type=int, default=None, help="Bartlett bandwidth override.")
@click.option("--out", "out_path", type=click.Path(), default=None, help="Report JSON path.")
@_cli_errors
def cptest(input_path, p, alpha, cv_path, sigma_eta, a_psi, estimate_lrv, bandwidth, out_path):
    """Calibrated change-point test on a series."""
    series = _read_series(input_path, "raw")
    table = CriticalValueTable.load(cv_path)
    report = cp_test(series, p=p, alpha=alpha, table=table, sigma_eta=sigma_eta,
                     a_psi=a_psi, estimate_lrv=estimate_lrv, bandwidth=bandwidth)
    payload = report.to_dict()
    payload["version"] = __version__
    payload["generator"] = GENERATOR_TAG
    _echo_json(payload, out_path)


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(), help="JSON config.")
@click.option("--out", "out_path", required=True, type=click.Path(), help="Output CSV.")
@click.option("--workers", default=1, show_default=True, help="Worker processes.")
@_cli_errors
def cpstudy(config_path, out_path, workers):
    """Size/power study over a grid of change-point scenarios."""
    cfg = _load_json(config_path)
    _check_keys(cfg, "", {"p": "number", "alpha": "number", "seed": "int",
                          "cv_table": "str", "filter": "dict", "innovations": "dict",
                          "n": "list", "reps": "int", "scenarios": "list"})
    filt = _filter_from_config(cfg["filter"], "/filter")
    innov = _innov_from_config(cfg["innovations"], "/innovations")
    table_path = Path(config_path).parent / cfg["cv_table"]
    table = CriticalValueTable.load(table_path)
    scenarios = []
    for i, sc in enumerate(cfg["scenarios"]):
        _check_keys(sc, f"/scenarios/{i}", {"id": "str", "tau": "list", "beta": "list"})
        scenarios.append((sc["id"], ChangeModel(tau=tuple(sc["tau"]), beta=tuple(sc["beta"]))))
    rows = size_power_study(scenarios, filt, innov, p=float(cfg["p"]), ns=cfg["n"],
                            reps=cfg["reps"], seed=cfg["seed"], table=table,
                            alpha=float(cfg["alpha"]), workers=workers)
    with open(out_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["scenario_id", "n", "drift", "rejections", "reps", "rate"])
        for row in rows:
            writer.writerow([row["scenario_id"], row["n"], repr(float(row["drift"])),
                             row["rejections"], row["reps"], repr(float(row["rate"]))])


@main.command(name="regress-study")
@click.option("--config", "config_path", required=True, type=click.Path(), help="JSON config.")
@click.option("--out", "out_path", required=True, type=click.Path(), help="Sample CSV.")
@click.option("--summary", "summary_path", type=click.Path(), default=None,
              help="Summary JSON path.")
@click.option("--workers", default=1, show_default=True, help="Worker processes.")
@_cli_errors
def regress_study(config_path, out_path, summary_path, workers):
    """Monte Carlo study of the normalized least-squares error."""
    cfg = _load_json(config_path)
    _check_keys(cfg, "", {"beta": "number", "f": "dict", "filter": "dict",
                          "innovations": "dict", "n": "int", "reps": "int", "seed": "int"})
    filt = _filter_from_config(cfg["filter"], "/filter")
    innov = _innov_from_config(cfg["innovations"], "/innovations")
    f = function_from_config(cfg["f"])
    scenario = RegressionScenario(beta=float(cfg["beta"]), f=f, filter_spec=filt,
                                  innovations=innov, n=cfg["n"], seed=cfg["seed"])
    sample = beta_clt_study(scenario, cfg["reps"], workers=workers)
    _write_series(out_path, sample.values)
    target_var = (innov.sigma_eta * filter_gain(filt)) ** 2 / integral_sq(f)
    ks = stats.kstest(sample.values, "norm", args=(0.0, math.sqrt(target_var))).statistic
    summary = {
        "mean": float(np.mean(sample.values)),
        "variance": float(np.var(sample.values)),
        "theoretical_variance": float(target_var),
        "ks_vs_normal": float(ks),
        "reps": int(cfg["reps"]),
        "n": int(cfg["n"]),
        "seed": int(cfg["seed"]),
        "version": __version__,
        "generator": GENERATOR_TAG,
    }
    _echo_json(summary, summary_path)


if __name__ == "__main__":
    main()
