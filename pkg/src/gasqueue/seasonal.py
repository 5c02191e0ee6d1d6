"""Diurnal/weekly adjustment of inter-arrival times with a cubic spline.

Raw minute-granular durations are regressed on a truncated-power cubic
spline in the position within the week (minutes since Monday 00:00) plus a
linear trend in elapsed time, by weighted least squares with the durations
as weights. Adjusted durations are the exponentiated residuals, rescaled to
unit mean.

To make the weekly curve continuous across the Sunday/Monday boundary the
sample is stacked three times with week positions shifted by +-one week;
the adjustment itself is read off the middle copy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .gas import GasParams, gas_simulate

WEEK_MINUTES = 10080.0
DAY_MINUTES = 1440.0
DEFAULT_KNOT_SPACING = 90.0

# half the minimal positive inter-arrival time at minute granularity
ZERO_REPLACEMENT = 0.5


def preprocess_zeros(durations) -> tuple[np.ndarray, int]:
    """Replace zero durations by 0.5 minutes; returns (durations, count)."""
    d = np.asarray(durations, dtype=float).copy()
    if np.any(d < 0):
        raise ValueError("negative durations: timestamps out of order")
    zeros = d == 0.0
    d[zeros] = ZERO_REPLACEMENT
    return d, int(zeros.sum())


def week_position_of(timestamps: np.ndarray) -> np.ndarray:
    """Minutes since the Monday 00:00 of each timestamp's week."""
    s = timestamps.astype("datetime64[s]").astype(np.int64)
    days = s // 86400
    dow = (days + 3) % 7  # epoch day 0 is a Thursday
    return dow * 1440.0 + (s % 86400) / 60.0


@dataclass(frozen=True)
class InterArrivalSeries:
    """Durations with their calendar context.

    ``durations[i]`` is the gap ending at ``timestamps[i]`` (when built from
    timestamps); ``week_position`` is in [0, 10080) and ``trend`` is the
    cumulative elapsed time with trend[0] = 0.
    """

    durations: np.ndarray
    week_position: np.ndarray
    trend: np.ndarray
    timestamps: np.ndarray | None = None
    n_zero_replaced: int = 0

    def __post_init__(self):
        n = len(self.durations)
        if n == 0:
            raise ValueError("empty series")
        if len(self.week_position) != n or len(self.trend) != n:
            raise ValueError("field lengths disagree")

    @classmethod
    def from_timestamps(cls, timestamps, sort: bool = False) -> "InterArrivalSeries":
        ts = np.asarray(timestamps, dtype="datetime64[s]")
        if ts.size < 2:
            raise ValueError("need at least two timestamps")
        if np.any(np.diff(ts) < np.timedelta64(0, "s")):
            if not sort:
                raise ValueError("timestamps are not sorted (pass sort=True to sort)")
            ts = np.sort(ts)
        raw = np.diff(ts).astype("timedelta64[s]").astype(float) / 60.0
        dur, nz = preprocess_zeros(raw)
        trend = np.concatenate([[0.0], np.cumsum(dur[:-1])])
        return cls(durations=dur, week_position=week_position_of(ts[1:]),
                   trend=trend, timestamps=ts[1:], n_zero_replaced=nz)

    @classmethod
    def from_durations(cls, durations, week_offset: float = 0.0) -> "InterArrivalSeries":
        dur, nz = preprocess_zeros(durations)
        trend = np.concatenate([[0.0], np.cumsum(dur[:-1])])
        week_pos = (week_offset + trend + dur) % WEEK_MINUTES
        return cls(durations=dur, week_position=week_pos, trend=trend, n_zero_replaced=nz)


@dataclass
class DesignMatrix:
    X: np.ndarray
    log_y: np.ndarray
    weights: np.ndarray
    knots: np.ndarray
    n: int  # observations per stacked copy


@dataclass
class SplineFit:
    knots: np.ndarray
    beta: np.ndarray  # intercept, x, x^2, x^3, one coefficient per knot
    gamma: float
    knot_spacing: float = DEFAULT_KNOT_SPACING
    standardization: float = math.nan
    diagnostics: dict = field(default_factory=dict)

    def predict_log(self, week_position, trend) -> np.ndarray:
        x = np.asarray(week_position, dtype=float)
        t = np.asarray(trend, dtype=float)
        out = (self.beta[0] + self.beta[1] * x + self.beta[2] * x**2 + self.beta[3] * x**3
               + self.gamma * t)
        tp = np.maximum(0.0, x[:, None] - self.knots[None, :]) ** 3
        return out + tp @ self.beta[4:]

    def weekly_curve(self, week_position) -> np.ndarray:
        """The fitted weekly pattern alone (no trend)."""
        return self.predict_log(week_position, np.zeros(np.size(week_position)))


def _basis(x: np.ndarray, knots: np.ndarray) -> np.ndarray:
    cols = [np.ones_like(x), x, x**2, x**3]
    tp = np.maximum(0.0, x[:, None] - knots[None, :]) ** 3
    return np.column_stack(cols + [tp])


def build_design(series: InterArrivalSeries,
                 knot_spacing: float = DEFAULT_KNOT_SPACING) -> DesignMatrix:
    """Triple-stacked design matrix for the weekly spline regression.

    Each observation appears with week positions x - 10080, x, x + 10080
    and an unchanged response, weight and trend value; knots sit at the
    given spacing across the full stacked range.
    """
    if WEEK_MINUTES % knot_spacing != 0:
        raise ValueError("knot spacing must divide the week length of 10080 minutes")
    x = series.week_position
    stacked_x = np.concatenate([x - WEEK_MINUTES, x, x + WEEK_MINUTES])
    knots = np.arange(-WEEK_MINUTES, 2 * WEEK_MINUTES, knot_spacing, dtype=float)
    X = np.column_stack([_basis(stacked_x, knots), np.tile(series.trend, 3)])
    log_y = np.tile(np.log(series.durations), 3)
    weights = np.tile(series.durations, 3)
    return DesignMatrix(X=X, log_y=log_y, weights=weights, knots=knots, n=len(series.durations))


def wls_fit(design: DesignMatrix) -> SplineFit:
    """Weighted least squares via a column-scaled SVD solve.

    Rank-deficient systems (empty knot intervals) fall back to the
    minimum-norm solution and are flagged in the diagnostics.
    """
    if np.any(design.weights <= 0):
        raise ValueError("weights must be strictly positive")
    sw = np.sqrt(design.weights)
    A = design.X * sw[:, None]
    rhs = design.log_y * sw
    scale = np.max(np.abs(A), axis=0)
    scale[scale == 0] = 1.0
    coef, _, rank, _ = np.linalg.lstsq(A / scale[None, :], rhs, rcond=None)
    coef = coef / scale
    fitted = design.X @ coef
    resid = design.log_y - fitted
    wssr = float(np.sum(design.weights * resid**2))
    ybar = float(np.average(design.log_y, weights=design.weights))
    wsst = float(np.sum(design.weights * (design.log_y - ybar) ** 2))
    diags = {
        "rank": int(rank),
        "n_columns": design.X.shape[1],
        "rank_deficient": bool(rank < design.X.shape[1]),
        "weighted_r2": 1.0 - wssr / wsst if wsst > 0 else 1.0,
    }
    return SplineFit(knots=design.knots, beta=coef[:-1], gamma=float(coef[-1]),
                     knot_spacing=float(design.knots[1] - design.knots[0]), diagnostics=diags)


def adjust(series: InterArrivalSeries, fit: SplineFit) -> np.ndarray:
    """Exponentiated residuals from the middle stacked copy, unit-mean scaled.

    Stores the sample-mean divisor on the fit for reproducible re-use.
    """
    fitted = fit.predict_log(series.week_position, series.trend)
    adjusted = np.exp(np.log(series.durations) - fitted)
    fit.standardization = float(np.mean(adjusted))
    return adjusted / fit.standardization


def seasonal_adjust(series: InterArrivalSeries,
                    knot_spacing: float = DEFAULT_KNOT_SPACING):
    """Full pipeline: design, WLS fit, adjustment. Returns (adjusted, fit)."""
    design = build_design(series, knot_spacing)
    fit = wls_fit(design)
    return adjust(series, fit), fit


# ---------------------------------------------------------------------------
# Synthetic data generation (stand-in for confidential order logs)

DEFAULT_GAS_PARAMS = GasParams(c=-0.06, b=0.72, a=0.07, psi=1.15, phi=0.90)


def default_weekly_pattern(week_minute) -> np.ndarray:
    """Log-scale weekly pattern: night lull, mid-morning burst, weekly wave."""
    wm = np.asarray(week_minute, dtype=float)
    m = wm % DAY_MINUTES
    d = wm / DAY_MINUTES
    night = 1.1 * np.cos(2.0 * np.pi * (m - 240.0) / DAY_MINUTES)
    burst = -0.7 * np.exp(-0.5 * ((m - 600.0) / 75.0) ** 2)
    weekly = 0.35 * np.sin(2.0 * np.pi * (d - 1.5) / 7.0)
    return night + burst + weekly


def generate_synthetic_arrivals(seed: int,
                                weeks: int = 28,
                                gas_params: GasParams = DEFAULT_GAS_PARAMS,
                                mean_duration: float = 45.6,
                                trend_log_total: float = -0.4,
                                pattern=default_weekly_pattern,
                                pattern_scale: float = 1.0,
                                start=np.datetime64("2024-01-01T00:00"),
                                round_to_minute: bool = True):
    """Timestamped arrivals with injected diurnal/weekly pattern and trend.

    Residual durations follow the score-driven model; raw durations are the
    residuals scaled by exp(pattern + trend). By default timestamps are
    rounded to minute precision, which deliberately produces occasional zero
    gaps; round_to_minute=False keeps second precision for round-trip tests.
    Returns (timestamps, truth) where truth records the injected components.
    """
    total = weeks * WEEK_MINUTES
    gamma = trend_log_total / total
    base = pattern
    pattern = lambda x: pattern_scale * base(x)  # noqa: E731
    # events sample the calendar duration-weighted, so the realized mean
    # duration is the harmonic time-average of the scale multiplier
    grid = np.arange(0.0, total, 30.0)
    level = math.log(mean_duration) + math.log(float(np.mean(np.exp(-pattern(grid % WEEK_MINUTES) - gamma * grid))))

    rng = np.random.default_rng(seed)
    budget = int(3 * total / mean_duration) + 1000
    resid = gas_simulate(gas_params, budget, rng)

    clock = 0.0
    times = []
    for i in range(budget):
        scale = math.exp(level + float(pattern(clock % WEEK_MINUTES)) + gamma * clock)
        clock += resid[i] * scale
        if clock >= total:
            break
        times.append(clock)
    if round_to_minute:
        offsets = np.array([round(t) for t in times], dtype="timedelta64[m]")
    else:
        offsets = np.array([round(t * 60.0) for t in times], dtype="timedelta64[s]")
    timestamps = np.datetime64(start, "s") + offsets.astype("timedelta64[s]")
    truth = {"gas_params": gas_params, "gamma": gamma, "level": level,
             "pattern": pattern, "weeks": weeks}
    return timestamps, truth
