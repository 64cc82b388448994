"""Command-line surface: fit, predict, outliers, fuse, compare, synth.

Exit codes: 0 ok, 2 config, 3 input parse, 4 numerical failure,
5 domain/coverage. Errors print one machine-parsable line to stderr.
"""

from __future__ import annotations

import csv
import functools
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import click
import numpy as np

from . import baselines, core, fusion, outliers, synth
from .errors import AlpsError, ConfigError, ParseError, exit_code_for
from .solver import LambdaGrid
from .timeseries import FLOAT_FMT, TimeSeries, read_timeseries, write_timeseries


@dataclass(frozen=True)
class RunConfig:
    """Validated knobs shared by the fitting subcommands."""

    p: int = 4
    q: int = 2
    placement: str = "quantile"
    alpha: float = 0.05
    lambda_lo: float = 1e-4
    lambda_hi: float = 1e4
    lambda_num: int = 41
    m_scan: str = "exhaustive"
    threshold1: float = 3.0
    threshold2: float = 1.2

    def validate(self) -> "RunConfig":
        if not 2 <= self.p <= 4:
            raise ConfigError(f"p must be in [2, 4], got {self.p}")
        if not 1 <= self.q < self.p:
            raise ConfigError(f"q must satisfy 1 <= q < p, got q={self.q}, p={self.p}")
        if self.placement not in ("quantile", "equidistant"):
            raise ConfigError(f"unknown placement {self.placement!r}")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f"alpha must be in (0, 1), got {self.alpha}")
        if not (0 < self.lambda_lo <= self.lambda_hi) or self.lambda_num < 1:
            raise ConfigError("lambda grid needs 0 < lo <= hi and at least one point")
        if self.m_scan not in ("exhaustive", "strided"):
            raise ConfigError(f"m_scan must be 'exhaustive' or 'strided', got {self.m_scan!r}")
        if self.threshold1 <= 0 or self.threshold2 <= 0:
            raise ConfigError("outlier thresholds must be positive")
        return self

    def lambda_grid(self) -> LambdaGrid:
        return LambdaGrid(self.lambda_lo, self.lambda_hi, self.lambda_num)


def _handle_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except AlpsError as exc:
            message = " ".join(str(exc).split())
            click.echo(f"error: {type(exc).__name__}: {message}", err=True)
            sys.exit(exit_code_for(exc))

    return wrapper


def _fit_options(fn):
    fn = click.option("--p", type=int, default=4, show_default=True,
                      help="Basis degree (2-4).")(fn)
    fn = click.option("--q", type=int, default=2, show_default=True,
                      help="Penalty order (< p).")(fn)
    fn = click.option("--placement", type=click.Choice(["quantile", "equidistant"]),
                      default="quantile", show_default=True)(fn)
    fn = click.option("--lambda-lo", type=float, default=1e-4, show_default=True)(fn)
    fn = click.option("--lambda-hi", type=float, default=1e4, show_default=True)(fn)
    fn = click.option("--lambda-num", type=int, default=41, show_default=True)(fn)
    fn = click.option("--m-scan", type=click.Choice(["exhaustive", "strided"]),
                      default="exhaustive", show_default=True)(fn)
    return fn


def _write_band(path, band: core.PredictionBand) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "mean", "std", "ci_lo", "ci_hi"])
        for t, m, s, lo, hi in zip(band.epochs, band.mean, band.std,
                                   band.lower, band.upper):
            writer.writerow([FLOAT_FMT.format(v) for v in (t, m, s, lo, hi)])


def _report_lines(model: core.AlpsModel) -> list[str]:
    meta = model.fit_metadata
    return [
        f"m_hat={meta.m_hat}",
        f"lambda_hat={FLOAT_FMT.format(model.lambda_hat)}",
        f"gcv_cost={FLOAT_FMT.format(meta.gcv_cost)}",
        f"df_res={FLOAT_FMT.format(model.df_res)}",
        f"sigma2={FLOAT_FMT.format(model.sigma2)}",
        f"n={meta.n}",
    ]


@click.group()
@click.option("--verbose", is_flag=True, help="Enable info-level logging.")
def main(verbose: bool):
    """Penalized-spline smoothing for irregularly sampled time series."""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING)


@main.command("fit")
@click.argument("data", type=click.Path())
@_fit_options
@click.option("--model-out", type=click.Path(), default=None,
              help="Serialized model path (single-file mode).")
@click.option("--batch", is_flag=True,
              help="Treat DATA as a directory of CSVs; fit each concurrently.")
@click.option("--out-dir", type=click.Path(), default=None,
              help="Output directory for batch mode.")
@_handle_errors
def fit_cmd(data, p, q, placement, lambda_lo, lambda_hi, lambda_num, m_scan,
            model_out, batch, out_dir):
    """Fit one series (or a directory of them) and write the model(s)."""
    cfg = RunConfig(p=p, q=q, placement=placement, lambda_lo=lambda_lo,
                    lambda_hi=lambda_hi, lambda_num=lambda_num, m_scan=m_scan).validate()
    if batch:
        if out_dir is None:
            raise ConfigError("--batch requires --out-dir")
        _run_batch_fit(Path(data), Path(out_dir), cfg)
        return
    series = read_timeseries(data)
    model = core.fit(series, p=cfg.p, q=cfg.q, placement=cfg.placement,
                     lambda_grid=cfg.lambda_grid(), m_scan=cfg.m_scan)
    if model_out:
        core.save_model(model, model_out)
    for line in _report_lines(model):
        click.echo(line)


def _run_batch_fit(data_dir: Path, out_dir: Path, cfg: RunConfig) -> None:
    if not data_dir.is_dir():
        raise ConfigError(f"{data_dir} is not a directory")
    files = sorted(data_dir.glob("*.csv"))
    if not files:
        raise ParseError(f"no .csv files in {data_dir}")
    out_dir.mkdir(parents=True, exist_ok=True)

    def one(path: Path):
        series = read_timeseries(path)
        model = core.fit(series, p=cfg.p, q=cfg.q, placement=cfg.placement,
                         lambda_grid=cfg.lambda_grid(), m_scan=cfg.m_scan)
        core.save_model(model, out_dir / (path.stem + ".model.json"))
        return path.name, model

    with ThreadPoolExecutor() as pool:
        results = list(pool.map(one, files))
    for name, model in results:
        click.echo(f"{name}: " + " ".join(_report_lines(model)))


def _prediction_epochs(model: core.AlpsModel, grid: int | None, at: str | None) -> np.ndarray:
    if (grid is None) == (at is None):
        raise ConfigError("exactly one of --grid or --at is required")
    if grid is not None:
        if grid < 2:
            raise ConfigError("--grid needs at least 2 points")
        lo, hi = model.domain
        return np.linspace(lo, hi, grid)
    return read_timeseries(at).times


@main.command("predict")
@click.argument("model_path", type=click.Path())
@click.option("--grid", type=int, default=None,
              help="Number of evenly spaced epochs over the model domain.")
@click.option("--at", type=click.Path(), default=None,
              help="CSV whose time column gives the prediction epochs.")
@click.option("--alpha", type=float, default=0.05, show_default=True)
@click.option("--out", type=click.Path(), required=True)
@click.option("--derivative-out", type=click.Path(), default=None)
@_handle_errors
def predict_cmd(model_path, grid, at, alpha, out, derivative_out):
    """Evaluate a saved model: mean and derivative bands as CSV."""
    if not 0.0 < alpha < 1.0:
        raise ConfigError(f"alpha must be in (0, 1), got {alpha}")
    model = core.load_model(model_path)
    epochs = _prediction_epochs(model, grid, at)
    _write_band(out, core.predict(model, epochs, alpha=alpha))
    if derivative_out:
        _write_band(derivative_out, core.predict_derivative(model, epochs, alpha=alpha))


@main.command("outliers")
@click.argument("data", type=click.Path())
@_fit_options
@click.option("--threshold1", type=float, default=3.0, show_default=True)
@click.option("--threshold2", type=float, default=1.2, show_default=True)
@click.option("--flags-out", type=click.Path(), required=True)
@click.option("--model-out", type=click.Path(), default=None,
              help="Serialized cleaned-fit model.")
@click.option("--clean-out", type=click.Path(), default=None,
              help="CSV of the doubly cleaned series.")
@_handle_errors
def outliers_cmd(data, p, q, placement, lambda_lo, lambda_hi, lambda_num, m_scan,
                 threshold1, threshold2, flags_out, model_out, clean_out):
    """Two-level outlier detection; writes flags and the cleaned fit."""
    cfg = RunConfig(p=p, q=q, placement=placement, lambda_lo=lambda_lo,
                    lambda_hi=lambda_hi, lambda_num=lambda_num, m_scan=m_scan,
                    threshold1=threshold1, threshold2=threshold2).validate()
    series = read_timeseries(data)
    report = outliers.detect_and_refit(
        series, p=cfg.p, q=cfg.q, threshold1=cfg.threshold1, threshold2=cfg.threshold2,
        placement=cfg.placement, lambda_grid=cfg.lambda_grid(),
    )
    with open(flags_out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "time", "value", "level"])
        for level, idx_list in ((1, report.level1_indices), (2, report.level2_indices)):
            for i in idx_list:
                writer.writerow([i, FLOAT_FMT.format(series.times[i]),
                                 FLOAT_FMT.format(series.values[i]), level])
    if model_out:
        core.save_model(report.final_model, model_out)
    if clean_out:
        write_timeseries(clean_out, report.clean_data)
    click.echo(f"level1={list(report.level1_indices)}")
    click.echo(f"level2={list(report.level2_indices)}")
    for line in _report_lines(report.final_model):
        click.echo(line)


@main.command("fuse")
@click.argument("observations", type=click.Path())
@click.argument("dense_model", type=click.Path())
@click.option("--p", type=int, default=4, show_default=True)
@click.option("--q", type=int, default=2, show_default=True)
@click.option("--alpha", type=float, default=0.05, show_default=True)
@click.option("--out", type=click.Path(), required=True)
@_handle_errors
def fuse_cmd(observations, dense_model, p, q, alpha, out):
    """Reconstruct a dense record from sparse observations plus a dense
    companion series."""
    cfg = RunConfig(p=p, q=q, alpha=alpha).validate()
    obs = read_timeseries(observations, kind="elevation")
    dense = read_timeseries(dense_model, kind="elevation")
    result = fusion.reconstruct(fusion.FusionInput(obs, dense),
                                p=cfg.p, q=cfg.q, alpha=cfg.alpha)
    _write_band(out, result.reconstruction)
    model = result.dibc_model
    click.echo(f"m_hat={model.m_hat} lambda_hat={FLOAT_FMT.format(model.lambda_hat)}")


def _rmse(a: np.ndarray, b: np.ndarray) -> float:
    diff = np.asarray(a) - np.asarray(b)
    return float(np.sqrt(np.mean(diff * diff)))


@main.command("compare")
@click.argument("data", type=click.Path())
@_fit_options
@click.option("--degrees", default="2,3,4,5", show_default=True,
              help="Comma-separated polynomial degrees to compare.")
@click.option("--truth", type=click.Path(), default=None,
              help="CSV of noise-free truth for RMSE columns.")
@click.option("--out", type=click.Path(), required=True)
@_handle_errors
def compare_cmd(data, p, q, placement, lambda_lo, lambda_hi, lambda_num, m_scan,
                degrees, truth, out):
    """Head-to-head table: spline fit vs polynomial and interpolation
    baselines, with RMSE-vs-truth when a truth file is supplied."""
    cfg = RunConfig(p=p, q=q, placement=placement, lambda_lo=lambda_lo,
                    lambda_hi=lambda_hi, lambda_num=lambda_num, m_scan=m_scan).validate()
    try:
        degree_list = [int(d) for d in degrees.split(",") if d.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad --degrees value {degrees!r}") from exc
    series = read_timeseries(data)
    truth_series = read_timeseries(truth) if truth else None
    if truth_series is not None:
        lo, hi = series.span
        keep = (truth_series.times >= lo) & (truth_series.times <= hi)
        truth_series = truth_series.subset(keep)

    model = core.fit(series, p=cfg.p, q=cfg.q, placement=cfg.placement,
                     lambda_grid=cfg.lambda_grid(), m_scan=cfg.m_scan)
    predictors = {"alps": lambda t: core.predict(model, t).mean}
    for d in degree_list:
        poly = baselines.fit_polynomial(series, d)
        predictors[f"poly{d}"] = poly.predict
    interp = baselines.linear_interpolation(series)
    predictors["interp"] = interp.predict

    with open(out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        header = ["model", "rmse_data"]
        if truth_series is not None:
            header.append("rmse_truth")
        writer.writerow(header)
        for name, predictor in predictors.items():
            row = [name, FLOAT_FMT.format(_rmse(predictor(series.times), series.values))]
            if truth_series is not None:
                row.append(FLOAT_FMT.format(
                    _rmse(predictor(truth_series.times), truth_series.values)))
            writer.writerow(row)


@main.group("synth")
def synth_group():
    """Generate the seeded synthetic datasets used by the test suites."""


@synth_group.command("gramacy-lee")
@click.option("--n", type=int, default=150, show_default=True)
@click.option("--noise", type=float, default=0.05, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(), required=True)
@click.option("--truth-out", type=click.Path(), default=None)
@_handle_errors
def synth_gramacy_lee(n, noise, seed, out, truth_out):
    """Noisy irregular samples of the oscillating benchmark function."""
    if n < 2:
        raise ConfigError("--n must be at least 2")
    if noise < 0:
        raise ConfigError("--noise must be >= 0")
    series, truth = synth.gramacy_lee_series(n=n, noise_sd=noise, seed=seed)
    write_timeseries(out, series)
    if truth_out:
        write_timeseries(truth_out, TimeSeries(series.times, truth))


@synth_group.command("fusion")
@click.option("--n-obs", type=int, default=25, show_default=True)
@click.option("--noise", type=float, default=0.05, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--obs-out", type=click.Path(), required=True)
@click.option("--dense-out", type=click.Path(), required=True)
@click.option("--truth-out", type=click.Path(), default=None)
@_handle_errors
def synth_fusion(n_obs, noise, seed, obs_out, dense_out, truth_out):
    """Seasonal dense series plus sparse observations of seasonal + slow."""
    if n_obs < 2:
        raise ConfigError("--n-obs must be at least 2")
    if noise < 0:
        raise ConfigError("--noise must be >= 0")
    suite = synth.fusion_suite(n_obs=n_obs, noise_sd=noise, seed=seed)
    write_timeseries(obs_out, suite.observations)
    write_timeseries(dense_out, suite.dense_model)
    if truth_out:
        write_timeseries(truth_out, TimeSeries(suite.dense_model.times, suite.truth_total))


if __name__ == "__main__":
    main()
