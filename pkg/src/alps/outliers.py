"""Two-level outlier detection and refit.

Level 1 fits the full series and flags points whose residual exceeds the
99% t-band scaled by threshold1. Level 2 refits without those points (full
hyperparameter re-selection) and flags survivors beyond threshold2 times
the new band. The final model is fit on the doubly cleaned series. Points
flagged at level 1 are never reconsidered.

The flagging band is a prediction-type band: per-point standard deviation
sigma_hat * sqrt(1 + q_i), where q_i is the fit-variance quadratic form.
An observation deviates from the fitted curve by its own noise plus the
fit's error, so both terms belong in the gate; a mean-curve band alone
narrows with n and would reject a large fraction of perfectly clean
points at the default thresholds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.stats

from . import core
from .basis import eval_basis
from .errors import ConfigError, InsufficientDataAfterRejectionError
from .solver import DEFAULT_LAMBDA_GRID, LambdaGrid
from .timeseries import TimeSeries


@dataclass(frozen=True)
class OutlierReport:
    level1_indices: tuple
    level2_indices: tuple
    thresholds: tuple
    final_model: core.AlpsModel
    clean_data: TimeSeries


def prediction_band_width(model: core.AlpsModel, epochs, alpha: float = 0.01) -> np.ndarray:
    """Half-width of the 100(1-alpha)% band for a new observation:
    t-quantile times sigma_hat * sqrt(1 + fit variance term)."""
    basis = eval_basis(model.knot_vector, epochs)
    X = scipy.linalg.cho_solve(model.normal_factorization, basis.values.T)
    quad = np.clip(np.einsum("ij,ji->i", basis.values, X), 0.0, None)
    sigma = math.sqrt(max(model.sigma2, 0.0))
    tq = float(scipy.stats.t.ppf(1.0 - alpha / 2.0, model.df_res))
    return tq * sigma * np.sqrt(1.0 + quad)


def _flag(model: core.AlpsModel, series: TimeSeries, threshold: float) -> np.ndarray:
    mean = core.predict(model, series.times, alpha=0.01).mean
    resid = np.abs(series.values - mean)
    width = prediction_band_width(model, series.times, alpha=0.01)
    # Guard against flagging pure floating-point noise when the fit is an
    # exact reproduction (band widths collapse to ~0 along with residuals).
    scale = 1e-12 * max(float(np.max(np.abs(series.values))), 1.0)
    return resid > np.maximum(threshold * width, scale)


def _fit_stage(series: TimeSeries, p, q, placement, lambda_grid,
               flagged, stage: str) -> core.AlpsModel:
    """Fit one pass, or fail with the flags accumulated so far."""
    if len(series) < p + 2:
        raise InsufficientDataAfterRejectionError(
            f"{stage}: only {len(series)} points remain (need {p + 2}); "
            f"flagged so far: {sorted(int(i) for i in flagged)}",
            flagged_so_far=tuple(int(i) for i in flagged),
        )
    return core.fit(series, p=p, q=q, placement=placement, lambda_grid=lambda_grid)


def detect_and_refit(
    data: TimeSeries,
    p: int = 4,
    q: int = 2,
    threshold1: float = 3.0,
    threshold2: float = 1.2,
    placement: str = "quantile",
    lambda_grid: LambdaGrid = DEFAULT_LAMBDA_GRID,
) -> OutlierReport:
    """Run the two-pass rejection and return flags plus the cleaned fit."""
    if threshold1 <= 0 or threshold2 <= 0:
        raise ConfigError("outlier thresholds must be positive")
    n = len(data)
    indices = np.arange(n)

    model1 = core.fit(data, p=p, q=q, placement=placement, lambda_grid=lambda_grid)
    level1_mask = _flag(model1, data, threshold1)
    level1 = indices[level1_mask]

    survivors = data.subset(~level1_mask)
    survivor_idx = indices[~level1_mask]
    model2 = _fit_stage(survivors, p, q, placement, lambda_grid, level1, "level 2")
    level2_mask = _flag(model2, survivors, threshold2)
    level2 = survivor_idx[level2_mask]

    clean = survivors.subset(~level2_mask)
    flagged_all = np.concatenate((level1, level2))
    final = _fit_stage(clean, p, q, placement, lambda_grid, flagged_all, "final fit")
    return OutlierReport(
        level1_indices=tuple(int(i) for i in level1),
        level2_indices=tuple(int(i) for i in level2),
        thresholds=(threshold1, threshold2),
        final_model=final,
        clean_data=clean,
    )
