"""S-curve fitting of cumulative patent counts and technology life-cycle staging.

Two growth laws are supported, both in the time origin ``t = year - t0_year``::

    Gompertz:  Y(t) = L * exp(-a * exp(-b t))
    logistic:  Y(t) = L / (1 + a * exp(-b t))

Parameters are estimated by nonlinear least squares with a projected
Levenberg-Marquardt iteration (L is kept at or above the largest
observation, a and b strictly positive).
"""

from __future__ import annotations

import enum
import json
import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .corpus import TimeSeries
from .errors import DegenerateSeries, InsufficientData, NonConvergence

MAX_ITER = 500
REL_TOL = 1e-10
SATURATION_FRACTION = 0.99
# starting asymptotes, as multiples of the largest observation
_L_STARTS = (1.05, 1.25, 1.5, 2.0, 3.0, 5.0, 10.0, 30.0)
_B_GRID = tuple(round(0.05 * k, 2) for k in range(1, 21))
_POS_FLOOR = 1e-12


class Model(enum.Enum):
    GOMPERTZ = "gompertz"
    LOGISTIC = "logistic"


class Phase(enum.Enum):
    EMERGING = "Emerging"
    GROWTH = "Growth"
    MATURITY = "Maturity"
    SATURATION = "Saturation"


def gompertz(t, L, a, b):
    return L * np.exp(-a * np.exp(-b * np.asarray(t, dtype=float)))


def logistic(t, L, a, b):
    return L / (1.0 + a * np.exp(-b * np.asarray(t, dtype=float)))


def curve(model: Model, t, L, a, b):
    return gompertz(t, L, a, b) if model is Model.GOMPERTZ else logistic(t, L, a, b)


def curve_jacobian(model: Model, t, params) -> np.ndarray:
    """Partial derivatives of the curve w.r.t. (L, a, b); shape (len(t), 3)."""
    L, a, b = params
    t = np.asarray(t, dtype=float)
    e = np.exp(-b * t)
    if model is Model.GOMPERTZ:
        g = np.exp(-a * e)
        y = L * g
        return np.column_stack([g, -y * e, y * a * t * e])
    den = 1.0 + a * e
    return np.column_stack([1.0 / den, -L * e / den**2, L * a * t * e / den**2])


def sse(model: Model, params, t, y) -> float:
    r = np.asarray(y, dtype=float) - curve(model, t, *params)
    return float(r @ r)


def sse_gradient(model: Model, params, t, y) -> np.ndarray:
    r = np.asarray(y, dtype=float) - curve(model, t, *params)
    return -2.0 * curve_jacobian(model, t, params).T @ r


@dataclass(frozen=True)
class FitMetrics:
    r_squared: float
    rmse: float
    mape: float | None
    n_points: int
    mape_excluded: int = 0


@dataclass(frozen=True)
class GrowthFit:
    model: Model
    L: float
    a: float
    b: float
    t0_year: float
    metrics: FitMetrics | None = None
    converged: bool = True
    iterations: int = 0

    @property
    def params(self) -> tuple[float, float, float]:
        return self.L, self.a, self.b

    def predict(self, years) -> np.ndarray:
        t = np.asarray(years, dtype=float) - self.t0_year
        return curve(self.model, t, self.L, self.a, self.b)

    @property
    def inflection_year(self) -> float:
        # Gompertz: Y = L/e there; logistic: Y = L/2
        return self.t0_year + math.log(self.a) / self.b

    def saturation_year(self, fraction: float = SATURATION_FRACTION) -> float:
        """First (real-valued) year at which the curve reaches ``fraction * L``."""
        if self.model is Model.GOMPERTZ:
            level = -math.log(fraction)
        else:
            level = 1.0 / fraction - 1.0
        return self.t0_year + math.log(self.a / level) / self.b


@dataclass(frozen=True)
class MaturityAssessment:
    phase: Phase
    fraction_of_L: float
    at_year: float
    inflection_year: float
    saturation_year: float


@dataclass(frozen=True)
class PhaseThresholds:
    """Fractions of L separating Emerging/Growth/Maturity/Saturation (a convention)."""

    growth: float = 0.10
    maturity: float = 0.50
    saturation: float = 0.90

    def __post_init__(self):
        if not 0 < self.growth < self.maturity < self.saturation < 1:
            raise ValueError("phase thresholds must satisfy 0 < growth < maturity < saturation < 1")


@dataclass
class _Run:
    params: np.ndarray
    sse: float
    converged: bool
    iterations: int


def _project(p: np.ndarray, l_min: float) -> np.ndarray:
    return np.array([max(p[0], l_min), max(p[1], _POS_FLOOR), max(p[2], _POS_FLOOR)])


def _levenberg_marquardt(model, t, y, p0, l_min, max_iter=MAX_ITER, tol=REL_TOL) -> _Run:
    p = _project(np.asarray(p0, dtype=float), l_min)
    r = y - curve(model, t, *p)
    s = float(r @ r)
    lam = 1e-3
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        J = curve_jacobian(model, t, p)
        g = J.T @ r
        H = J.T @ J
        scale = np.maximum(np.diag(H), 1e-300)
        accepted = False
        while lam <= 1e20:
            try:
                step = np.linalg.solve(H + lam * np.diag(scale), g)
                if p[0] <= l_min and step[0] < 0:
                    # asymptote pinned at its bound: solve for (a, b) alone
                    step = np.zeros(3)
                    step[1:] = np.linalg.solve(H[1:, 1:] + lam * np.diag(scale[1:]), g[1:])
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            p_new = _project(p + step, l_min)
            r_new = y - curve(model, t, *p_new)
            s_new = float(r_new @ r_new)
            if np.isfinite(s_new) and np.all(np.isfinite(p_new)) and s_new <= s:
                accepted = True
                break
            lam *= 10.0
        if not accepted:
            # no damping level yields descent: a stationary point to working precision
            converged = True
            break
        decrease = (s - s_new) / s if s > 0 else 0.0
        p, r, s = p_new, r_new, s_new
        lam = max(lam / 10.0, 1e-15)
        if s == 0.0 or decrease < tol:
            converged = True
            break
    return _Run(p, s, converged, it)


def _linearized(model: Model, y: np.ndarray, L0: float) -> np.ndarray:
    # log-space ratio keeps tiny observations from overflowing L0 / y
    log_ratio = math.log(L0) - np.log(y)
    if model is Model.GOMPERTZ:
        return np.log(log_ratio)
    return np.log(np.expm1(np.minimum(log_ratio, 700.0)))


def _seed_params(model: Model, t: np.ndarray, y: np.ndarray, L0: float) -> tuple[float, float]:
    """Seed (a, b) for a fixed asymptote by linearizing the curve.

    Points below 0.1% of the largest observation are ignored. Falls back
    to a coarse grid over b when fewer than two points remain or the
    regression implies a non-positive rate.
    """
    # near-zero counts carry no shape information and swamp the regression
    ok = (y > 1e-3 * y.max()) & (y < L0)
    z = _linearized(model, y[ok], L0) if ok.any() else np.empty(0)
    if ok.sum() >= 2:
        slope, intercept = np.polyfit(t[ok], z, 1)
        if slope < 0 and math.isfinite(intercept) and intercept < 700:
            return math.exp(intercept), float(-slope)
    best = None
    for b in _B_GRID:
        log_a = float(np.mean(z + b * t[ok])) if ok.any() else 0.0
        a = math.exp(min(log_a, 700.0))
        cost = sse(model, (L0, a, b), t, y)
        if best is None or cost < best[0]:
            best = (cost, a, b)
    return best[1], best[2]


def _check_series(series: TimeSeries, require_monotone: bool) -> tuple[np.ndarray, np.ndarray]:
    years, y = series.arrays()
    if len(y) < 4:
        raise InsufficientData(f"need at least 4 points to fit a growth curve, got {len(y)}")
    if require_monotone and np.any(np.diff(y) < 0):
        raise DegenerateSeries("series must be non-decreasing (cumulative counts)")
    distinct = len(np.unique(y))
    if distinct == 1:
        raise DegenerateSeries("series is constant")
    if distinct < 3:
        raise DegenerateSeries(f"need at least 3 distinct values, got {distinct}")
    return years, y


def fit_growth(
    series: TimeSeries,
    model: Model | str = Model.GOMPERTZ,
    t0_year: float | None = None,
    max_iter: int = MAX_ITER,
    tol: float = REL_TOL,
    require_monotone: bool = True,
) -> GrowthFit:
    """Least-squares fit of a Gompertz or logistic curve.

    ``t0_year`` defaults to the first observed year. When every start
    hits ``max_iter`` the best iterate is returned with
    ``converged=False`` and a :class:`NonConvergence` warning.
    """
    model = Model(model) if not isinstance(model, Model) else model
    years, y = _check_series(series, require_monotone)
    t0 = float(years[0]) if t0_year is None else float(t0_year)
    t = years - t0
    y_max = float(y.max())

    best: _Run | None = None
    for factor in _L_STARTS:
        L0 = factor * y_max
        a0, b0 = _seed_params(model, t, y, L0)
        run = _levenberg_marquardt(model, t, y, (L0, a0, b0), y_max, max_iter, tol)
        if best is None or run.sse < best.sse:
            best = run
    L, a, b = (float(v) for v in best.params)
    if not best.converged:
        warnings.warn(
            f"{model.value} fit stopped after {best.iterations} iterations without converging",
            NonConvergence,
            stacklevel=2,
        )
    fit = GrowthFit(model, L, a, b, t0, None, best.converged, best.iterations)
    return GrowthFit(model, L, a, b, t0, goodness_of_fit(fit, series), best.converged, best.iterations)


def fit_gompertz(series: TimeSeries, t0_year: float | None = None, **kwargs) -> GrowthFit:
    return fit_growth(series, Model.GOMPERTZ, t0_year, **kwargs)


def fit_logistic(series: TimeSeries, t0_year: float | None = None, **kwargs) -> GrowthFit:
    return fit_growth(series, Model.LOGISTIC, t0_year, **kwargs)


def metrics_from_predictions(observed: Sequence[float], predicted: Sequence[float]) -> FitMetrics:
    obs = np.asarray(observed, dtype=float)
    pred = np.asarray(predicted, dtype=float)
    if obs.size == 0:
        raise InsufficientData("cannot score a fit on an empty series")
    resid = obs - pred
    ss_res = float(resid @ resid)
    centered = obs - obs.mean()
    ss_tot = float(centered @ centered)
    if ss_tot > 0:
        r2 = 1.0 - ss_res / ss_tot
    else:
        r2 = 1.0 if ss_res == 0 else -math.inf
    rmse = math.sqrt(ss_res / obs.size)
    nz = obs > 0
    mape = float(np.mean(np.abs(resid[nz]) / obs[nz]) * 100.0) if nz.any() else None
    return FitMetrics(r2, rmse, mape, int(obs.size), int((~nz).sum()))


def goodness_of_fit(fit: GrowthFit, series: TimeSeries) -> FitMetrics:
    """R-squared, RMSE and MAPE of ``fit`` against ``series``.

    MAPE skips zero observations; it is ``None`` when every observation is zero.
    """
    years, y = series.arrays()
    return metrics_from_predictions(y, fit.predict(years))


def select_model(candidates: Sequence[GrowthFit], series: TimeSeries | None = None) -> GrowthFit:
    """Pick the best fit: highest R-squared, then lower RMSE, then lower MAPE, then Gompertz."""
    if not candidates:
        raise ValueError("select_model needs at least one candidate")
    order = {Model.GOMPERTZ: 0, Model.LOGISTIC: 1}

    def key(fit: GrowthFit):
        m = goodness_of_fit(fit, series) if series is not None else fit.metrics
        mape = m.mape if m.mape is not None else math.inf
        return (-m.r_squared, m.rmse, mape, order[fit.model])

    return min(candidates, key=key)


def forecast(fit: GrowthFit, horizon_years: int) -> TimeSeries:
    """Yearly predictions for ``t0_year .. t0_year + horizon_years``."""
    if horizon_years < 1:
        raise ValueError("horizon must be a positive number of years")
    start = int(math.floor(fit.t0_year))
    years = np.arange(start, start + horizon_years + 1)
    values = np.minimum(fit.predict(years), fit.L)
    return TimeSeries(tuple(int(y) for y in years), tuple(float(v) for v in values))


def maturity_phase(fit: GrowthFit, at_year: float, thresholds: PhaseThresholds = PhaseThresholds()) -> MaturityAssessment:
    f = float(fit.predict([at_year])[0]) / fit.L
    if f < thresholds.growth:
        phase = Phase.EMERGING
    elif f < thresholds.maturity:
        phase = Phase.GROWTH
    elif f < thresholds.saturation:
        phase = Phase.MATURITY
    else:
        phase = Phase.SATURATION
    return MaturityAssessment(phase, f, float(at_year), fit.inflection_year, fit.saturation_year())


def fit_report(fit: GrowthFit, assessment: MaturityAssessment | None = None) -> dict:
    m = fit.metrics
    doc = {
        "model": fit.model.value,
        "L": fit.L,
        "a": fit.a,
        "b": fit.b,
        "t0_year": fit.t0_year,
        "r2": m.r_squared if m else None,
        "rmse": m.rmse if m else None,
        "mape": m.mape if m else None,
        "mape_excluded_points": m.mape_excluded if m else None,
        "n_points": m.n_points if m else None,
        "inflection_year": fit.inflection_year,
        "saturation_year": fit.saturation_year(),
        "converged": fit.converged,
        "iterations": fit.iterations,
    }
    if assessment is not None:
        doc["phase"] = assessment.phase.value
        doc["phase_year"] = assessment.at_year
        doc["fraction_of_L"] = assessment.fraction_of_L
    return doc


def forecast_csv(series: TimeSeries) -> str:
    lines = ["year,predicted_cumulative"]
    lines += [f"{y},{v!r}" for y, v in series.points]
    return "\n".join(lines) + "\n"


def fit_json(fit: GrowthFit, assessment: MaturityAssessment | None = None) -> str:
    return json.dumps(fit_report(fit, assessment), indent=2) + "\n"
