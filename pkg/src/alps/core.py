"""Model fitting: scan section counts, select (m, lambda) by GCV, refit,
and produce predictions, derivatives, and t-confidence bands.

The scan walks m = 1..n-1, runs the lambda search for each section count,
and keeps the configuration with the smallest GCV cost, preferring fewer
sections on ties. The refit at the winning configuration caches the normal
factorization so bands at new epochs never re-solve the fit.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.stats

from .basis import KnotVector, build_knot_vector, eval_basis, eval_basis_derivative
from .errors import (
    ConfigError,
    DegenerateKnotsError,
    FitFailureError,
    InsufficientDataError,
    NoValidLambdaError,
    ParseError,
    RankDeficiencyError,
)
from .penalty import penalty_matrix
from .solver import (
    DEFAULT_LAMBDA_GRID,
    LambdaGrid,
    _cost_zero_floor,
    _tied,
    fit_penalized,
    minimize_gcv_lambda,
)
from .timeseries import TimeSeries

MODEL_FORMAT = "alps-model"
MODEL_VERSION = 1

# Strided scan kicks in above this size when requested.
STRIDE_THRESHOLD = 500


@dataclass(frozen=True)
class FitMetadata:
    m_hat: int
    gcv_cost: float
    placement: str
    n: int
    # One (m, lambda, cost) row per section count evaluated; cost is +inf
    # for degenerate configurations.
    scan: tuple = ()
    ridged: bool = False


@dataclass(frozen=True)
class AlpsModel:
    """Immutable fitted model; all prediction state is cached here."""

    knot_vector: KnotVector
    p: int
    q: int
    lambda_hat: float
    theta: np.ndarray
    df_res: float
    sigma2: float
    normal_factorization: tuple
    fit_metadata: FitMetadata

    @property
    def m_hat(self) -> int:
        return self.knot_vector.m

    @property
    def domain(self) -> tuple[float, float]:
        return self.knot_vector.domain


@dataclass(frozen=True)
class PredictionBand:
    """Mean curve (or its rate of change) with pointwise t-CIs."""

    epochs: np.ndarray
    mean: np.ndarray
    std: np.ndarray
    half_width: np.ndarray
    alpha: float

    @property
    def lower(self) -> np.ndarray:
        return self.mean - self.half_width

    @property
    def upper(self) -> np.ndarray:
        return self.mean + self.half_width


def _validate_hyperparameters(p: int, q: int, placement: str) -> None:
    if not 2 <= p <= 4:
        raise ConfigError(f"degree p must be in [2, 4], got {p}")
    if not 1 <= q < p:
        raise ConfigError(f"penalty order q must satisfy 1 <= q < p, got q={q}, p={p}")
    if placement not in ("quantile", "equidistant"):
        raise ConfigError(f"unknown knot placement {placement!r}")


def fit(
    data: TimeSeries,
    p: int = 4,
    q: int = 2,
    placement: str = "quantile",
    lambda_grid: LambdaGrid = DEFAULT_LAMBDA_GRID,
    m_scan: str = "exhaustive",
) -> AlpsModel:
    """Fit a penalized spline with GCV-selected section count and lambda.

    ``m_scan='strided'`` replaces the exhaustive section-count scan with a
    stride-then-refine pass for series longer than 500 points.
    """
    _validate_hyperparameters(p, q, placement)
    if m_scan not in ("exhaustive", "strided"):
        raise ConfigError(f"m_scan must be 'exhaustive' or 'strided', got {m_scan!r}")
    n = len(data)
    if n < p + 2:
        raise InsufficientDataError(f"need at least p + 2 = {p + 2} samples, got {n}")
    times, y = data.times, data.values
    floor = _cost_zero_floor(y)

    def evaluate(m: int):
        try:
            kv = build_knot_vector(times, m, p, placement)
            B = eval_basis(kv, times)
            lam, cost = minimize_gcv_lambda(B, y, q, lambda_grid)
            return (m, lam, cost)
        except (DegenerateKnotsError, NoValidLambdaError, RankDeficiencyError):
            return (m, float("nan"), float("inf"))

    if m_scan == "strided" and n > STRIDE_THRESHOLD:
        stride = math.ceil(n / 100)
        rows = [evaluate(m) for m in range(1, n, stride)]
        best_m = _select(rows, floor)[0]
        seen = {m for m, _, _ in rows}
        refine = [m for m in range(max(1, best_m - stride), min(n - 1, best_m + stride) + 1)
                  if m not in seen]
        rows.extend(evaluate(m) for m in refine)
        rows.sort(key=lambda r: r[0])
    else:
        rows = [evaluate(m) for m in range(1, n)]

    m_hat, lambda_hat, cost = _select(rows, floor)
    if not np.isfinite(cost):
        raise FitFailureError(
            "every (m, lambda) configuration was degenerate", diagnostics=tuple(rows)
        )

    kv = build_knot_vector(times, m_hat, p, placement)
    B = eval_basis(kv, times)
    spec = penalty_matrix(q, kv.n_bases, lambda_hat)
    result = fit_penalized(B, y, spec)
    meta = FitMetadata(
        m_hat=m_hat, gcv_cost=cost, placement=placement, n=n,
        scan=tuple(rows), ridged=result.ridged,
    )
    return AlpsModel(
        knot_vector=kv, p=p, q=q, lambda_hat=lambda_hat, theta=result.theta,
        df_res=result.df_res, sigma2=result.sigma2,
        normal_factorization=result.normal_factorization, fit_metadata=meta,
    )


def _select(rows, floor):
    """Smallest cost wins; ties (relative 1e-12 or both at the zero floor)
    keep the smaller section count."""
    best = None
    for m, lam, cost in sorted(rows, key=lambda r: r[0]):
        if not np.isfinite(cost):
            continue
        if best is None:
            best = (m, lam, cost)
        elif not _tied(cost, best[2], floor) and cost < best[2]:
            best = (m, lam, cost)
    if best is None:
        return rows[0][0], float("nan"), float("inf")
    return best


def _band(model: AlpsModel, basis, alpha: float) -> PredictionBand:
    if not 0.0 < alpha < 1.0:
        raise ConfigError(f"alpha must be in (0, 1), got {alpha}")
    mean = basis.values @ model.theta
    X = scipy.linalg.cho_solve(model.normal_factorization, basis.values.T)
    quad = np.einsum("ij,ji->i", basis.values, X)
    std = math.sqrt(max(model.sigma2, 0.0)) * np.sqrt(np.clip(quad, 0.0, None))
    tq = float(scipy.stats.t.ppf(1.0 - alpha / 2.0, model.df_res))
    return PredictionBand(
        epochs=basis.epochs, mean=mean, std=std, half_width=tq * std, alpha=alpha
    )


def predict(model: AlpsModel, epochs, alpha: float = 0.05) -> PredictionBand:
    """Mean prediction with 100(1-alpha)% pointwise t-confidence bands."""
    return _band(model, eval_basis(model.knot_vector, epochs), alpha)


def predict_derivative(model: AlpsModel, epochs, alpha: float = 0.05) -> PredictionBand:
    """First derivative of the fitted curve with t-confidence bands."""
    return _band(model, eval_basis_derivative(model.knot_vector, epochs), alpha)


def model_to_dict(model: AlpsModel) -> dict:
    factor, lower = model.normal_factorization
    return {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "p": model.p,
        "q": model.q,
        "m": model.m_hat,
        "placement": model.fit_metadata.placement,
        "n": model.fit_metadata.n,
        "lambda": model.lambda_hat,
        "gcv_cost": model.fit_metadata.gcv_cost,
        "df_res": model.df_res,
        "sigma2": model.sigma2,
        "ridged": model.fit_metadata.ridged,
        "knots": model.knot_vector.knots.tolist(),
        "theta": model.theta.tolist(),
        # The factor as produced by the factorization routine; storing it
        # verbatim makes load-then-predict bit-identical to in-memory use.
        "normal_factor": np.asarray(factor).tolist(),
        "factor_lower": bool(lower),
    }


def save_model(model: AlpsModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model), fh)
        fh.write("\n")


def model_from_dict(doc: dict) -> AlpsModel:
    try:
        if doc.get("format") != MODEL_FORMAT:
            raise ParseError(f"not a {MODEL_FORMAT} document")
        p, q, m = int(doc["p"]), int(doc["q"]), int(doc["m"])
        kv = KnotVector(np.array(doc["knots"], dtype=float), p=p, m=m)
        theta = np.array(doc["theta"], dtype=float)
        factor = np.array(doc["normal_factor"], dtype=float)
        c = m + p
        if theta.shape != (c,) or factor.shape != (c, c):
            raise ParseError("coefficient/factor dimensions inconsistent with m + p")
        meta = FitMetadata(
            m_hat=m, gcv_cost=float(doc["gcv_cost"]), placement=doc["placement"],
            n=int(doc["n"]), scan=(), ridged=bool(doc.get("ridged", False)),
        )
        return AlpsModel(
            knot_vector=kv, p=p, q=q, lambda_hat=float(doc["lambda"]), theta=theta,
            df_res=float(doc["df_res"]), sigma2=float(doc["sigma2"]),
            normal_factorization=(factor, bool(doc["factor_lower"])),
            fit_metadata=meta,
        )
    except (AttributeError, KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed model document: {exc}") from exc


def load_model(path) -> AlpsModel:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ParseError(f"{path}: cannot open ({exc})") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc})") from exc
    return model_from_dict(doc)
