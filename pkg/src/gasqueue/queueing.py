"""Queueing simulation with score-driven arrivals, plus analytic oracles.

Arrivals come from the duration model (static draws or the score-driven
recursion), services are i.i.d. exponential, and ``c`` identical servers
drain a single FIFO queue. Number-in-system statistics are time-averaged
over the post-warm-up horizon (arrival-epoch sampling is biased when
arrivals cluster); response times are per customer; the busy period is the
span from an arrival into an empty system until the system empties again
for one server, and the span with all servers simultaneously busy for
several.

Closed-form M/M/1 and Erlang-C results serve as oracles for the static
exponential scenarios.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from ._kernels import serve_kernel
from .gas import GasParams, gas_simulate, stationary_mean
from .gengamma import GenGammaParams, sample as gg_sample

TIME_BIN_WIDTH = 0.1
TIME_HIST_MAX = 600.0  # minutes; mass beyond goes to an overflow bin
DEFAULT_WARMUP = 10_000
# retain raw samples up to this many; beyond, quantiles come from histograms
MAX_RETAINED_SAMPLES = 10_000_000


@dataclass(frozen=True)
class QueueScenario:
    """One simulation cell: arrival model, servers, service rate, run length."""

    arrival: GasParams
    servers: int
    service_rate: float
    n_arrivals: int
    seed: int
    warmup_arrivals: int = DEFAULT_WARMUP
    normalize_rate: bool = True
    replications: int = 1
    family: str = ""

    def __post_init__(self):
        if self.servers < 1:
            raise ValueError("need at least one server")
        if self.service_rate <= 0:
            raise ValueError("service rate must be positive")
        if not 0 <= self.warmup_arrivals < self.n_arrivals:
            raise ValueError("warm-up must be shorter than the run")
        if self.replications < 1:
            raise ValueError("need at least one replication")
        if self.utilization >= 1.0:
            raise ValueError(
                f"unstable scenario: utilization {self.utilization:.3f} >= 1")
        if not self.family:
            object.__setattr__(self, "family", GenGammaParams(0.0, self.arrival.psi, self.arrival.phi).family)

    @property
    def arrival_rate(self) -> float:
        return 1.0 if self.normalize_rate else 1.0 / stationary_mean(self.arrival)

    @property
    def utilization(self) -> float:
        return self.arrival_rate / (self.servers * self.service_rate)

    @property
    def dynamics(self) -> str:
        return "static" if self.arrival.is_static else "dynamic"


@dataclass
class MeasureStats:
    mean: float
    sd: float
    q95: float
    # integer pmf for counts, fixed 0.1-minute bins for times
    histogram: np.ndarray | None = None

    def as_dict(self) -> dict:
        return {"mean": self.mean, "sd": self.sd, "q95": self.q95,
                "histogram": None if self.histogram is None else self.histogram.tolist()}


@dataclass
class PerformanceSummary:
    number_in_system: MeasureStats
    busy_period: MeasureStats
    response_time: MeasureStats
    servers: int = 1
    realized_rate: float = math.nan
    measured_time: float = math.nan
    n_measured: int = 0
    n_busy_periods: int = 0

    @property
    def little_law_error(self) -> float:
        """Relative gap |L - lambda * W| / L on the measured window."""
        lam = self.n_measured / self.measured_time
        L = self.number_in_system.mean
        return abs(L - lam * self.response_time.mean) / L

    def as_dict(self) -> dict:
        return {
            "number_in_system": self.number_in_system.as_dict(),
            "busy_period": self.busy_period.as_dict(),
            "response_time": self.response_time.as_dict(),
            "servers": self.servers,
            "realized_rate": self.realized_rate,
            "measured_time": self.measured_time,
            "n_measured": self.n_measured,
            "n_busy_periods": self.n_busy_periods,
            "little_law_error": self.little_law_error,
        }


def arrival_durations(p: GasParams, n: int, rng: np.random.Generator,
                      normalize_rate: bool = True) -> np.ndarray:
    """Draw ``n`` inter-arrival durations from the model.

    With ``normalize_rate`` the durations are divided by the model's
    stationary mean so the long-run arrival rate is exactly one per minute.
    """
    if p.is_static:
        y = gg_sample(GenGammaParams(p.c, p.psi, p.phi), rng, n)
    else:
        y = gas_simulate(p, n, rng)
    if normalize_rate:
        y = y / stationary_mean(p)
    return y


def _time_histogram(samples: np.ndarray) -> np.ndarray:
    nbins = int(TIME_HIST_MAX / TIME_BIN_WIDTH)
    idx = np.minimum((samples / TIME_BIN_WIDTH).astype(np.int64), nbins)
    return np.bincount(idx, minlength=nbins + 1).astype(float)


def _hist_quantile(counts: np.ndarray, q: float) -> float:
    cdf = np.cumsum(counts)
    if cdf[-1] == 0:
        return math.nan
    i = int(np.searchsorted(cdf, q * cdf[-1]))
    return (i + 0.5) * TIME_BIN_WIDTH


@dataclass
class _RepStats:
    n_counts: np.ndarray  # time-weighted occupancy in each integer state
    resp_hist: np.ndarray
    busy_hist: np.ndarray
    resp_moments: tuple[int, float, float]  # count, sum, sum of squares
    busy_moments: tuple[int, float, float]
    resp_samples: np.ndarray | None
    busy_samples: np.ndarray | None
    measured_time: float
    n_measured: int
    realized_rate: float


def _moments(x: np.ndarray) -> tuple[int, float, float]:
    return len(x), float(x.sum()), float(np.square(x).sum())


def _simulate_once(scenario: QueueScenario, n: int, arr_rng, svc_rng,
                   keep_samples: bool) -> _RepStats:
    durations = arrival_durations(scenario.arrival, n, arr_rng, scenario.normalize_rate)
    arrivals = np.cumsum(durations)
    services = svc_rng.exponential(1.0 / scenario.service_rate, n)
    departures = serve_kernel(arrivals, services, scenario.servers)
    responses = departures - arrivals
    warm = scenario.warmup_arrivals

    # event-ordered trajectory of the number in system; at equal timestamps
    # departures precede arrivals (stable sort, departures listed first)
    sorted_dep = np.sort(departures)
    times = np.concatenate([sorted_dep, arrivals])
    marks = np.concatenate([-np.ones(n, dtype=np.int8), np.ones(n, dtype=np.int8)])
    order = np.argsort(times, kind="stable")
    times = times[order]
    n_sys = np.cumsum(marks[order])

    t_start, t_end = arrivals[warm], arrivals[-1]
    clipped = np.clip(times, t_start, t_end)
    dt = np.diff(clipped)
    n_counts = np.bincount(n_sys[:-1].astype(np.int64), weights=dt)

    # busy periods fully inside the measurement window
    threshold = 1 if scenario.servers == 1 else scenario.servers
    above = n_sys >= threshold
    edges = np.flatnonzero(above[1:] != above[:-1]) + 1
    if above[0]:
        edges = np.concatenate([[0], edges])
    starts = times[edges[0::2]]
    ends = times[edges[1::2]]
    m = min(len(starts), len(ends))
    starts, ends = starts[:m], ends[:m]
    keep = (starts >= t_start) & (ends <= t_end)
    busy = ends[keep] - starts[keep]

    resp = responses[warm:]
    return _RepStats(
        n_counts=n_counts,
        resp_hist=_time_histogram(resp),
        busy_hist=_time_histogram(busy),
        resp_moments=_moments(resp),
        busy_moments=_moments(busy),
        resp_samples=resp if keep_samples else None,
        busy_samples=busy if keep_samples else None,
        measured_time=float(t_end - t_start),
        n_measured=n - warm,
        realized_rate=n / float(arrivals[-1]),
    )


def _pool_measure(hists, moments, samples) -> MeasureStats:
    count = sum(m[0] for m in moments)
    total = sum(m[1] for m in moments)
    sq = sum(m[2] for m in moments)
    mean = total / count
    var = max(sq / count - mean**2, 0.0)
    hist = np.sum(hists, axis=0)
    if all(s is not None for s in samples):
        pooled = np.concatenate(samples)
        q95 = float(np.quantile(pooled, 0.95))
    else:
        q95 = _hist_quantile(hist, 0.95)
    return MeasureStats(mean=mean, sd=math.sqrt(var), q95=q95, histogram=hist)


def _count_measure(n_counts: np.ndarray) -> MeasureStats:
    pmf = n_counts / n_counts.sum()
    ks = np.arange(len(pmf))
    mean = float(ks @ pmf)
    var = float((ks**2) @ pmf) - mean**2
    q95 = int(np.searchsorted(np.cumsum(pmf), 0.95))
    return MeasureStats(mean=mean, sd=math.sqrt(max(var, 0.0)), q95=q95, histogram=pmf)


def simulate_queue(scenario: QueueScenario) -> PerformanceSummary:
    """Event-driven simulation of the scenario; see the module docstring.

    Total arrivals are split across independent seeded replications and the
    per-replication results merged by exact weighted pooling.
    """
    reps = scenario.replications
    keep = scenario.n_arrivals <= MAX_RETAINED_SAMPLES
    per = [scenario.n_arrivals // reps] * reps
    per[-1] += scenario.n_arrivals - sum(per)
    stats = []
    for child, n in zip(np.random.SeedSequence(scenario.seed).spawn(reps), per):
        arr_ss, svc_ss = child.spawn(2)
        stats.append(_simulate_once(scenario, n, np.random.default_rng(arr_ss),
                                    np.random.default_rng(svc_ss), keep))

    width = max(len(s.n_counts) for s in stats)
    n_counts = np.zeros(width)
    for s in stats:
        n_counts[: len(s.n_counts)] += s.n_counts

    measured_time = sum(s.measured_time for s in stats)
    n_measured = sum(s.n_measured for s in stats)
    realized = float(np.average([s.realized_rate for s in stats],
                                weights=[s.n_measured for s in stats]))
    if abs(realized - 1.0) > 0.01:
        warnings.warn(f"realized arrival rate {realized:.4f} deviates from 1 by more than 1%",
                      stacklevel=2)
    return PerformanceSummary(
        number_in_system=_count_measure(n_counts),
        busy_period=_pool_measure([s.busy_hist for s in stats],
                                  [s.busy_moments for s in stats],
                                  [s.busy_samples for s in stats]),
        response_time=_pool_measure([s.resp_hist for s in stats],
                                    [s.resp_moments for s in stats],
                                    [s.resp_samples for s in stats]),
        servers=scenario.servers,
        realized_rate=realized,
        measured_time=measured_time,
        n_measured=n_measured,
        n_busy_periods=sum(s.busy_moments[0] for s in stats),
    )


# ---------------------------------------------------------------------------
# Analytic oracles

def mm1_analytic(lam: float, mu: float) -> PerformanceSummary:
    """Closed-form single-server results for Poisson arrivals.

    Geometric number in system, exponential response time, and the standard
    busy-period transform moments (no closed-form busy-period quantile).
    """
    if lam >= mu:
        raise ValueError("requires lam < mu")
    rho = lam / mu
    kmax = max(int(math.log(1e-14) / math.log(rho)), 10)
    pmf = (1.0 - rho) * rho ** np.arange(kmax + 1)
    n_stats = MeasureStats(mean=rho / (1 - rho), sd=math.sqrt(rho) / (1 - rho),
                           q95=int(np.searchsorted(np.cumsum(pmf), 0.95)), histogram=pmf)

    nu = mu - lam
    edges = np.arange(0.0, TIME_HIST_MAX + TIME_BIN_WIDTH, TIME_BIN_WIDTH)
    resp_hist = np.diff(1.0 - np.exp(-nu * edges))
    resp_hist = np.append(resp_hist, math.exp(-nu * TIME_HIST_MAX))
    resp = MeasureStats(mean=1.0 / nu, sd=1.0 / nu, q95=-math.log(0.05) / nu,
                        histogram=resp_hist)

    b_mean = 1.0 / nu
    b_second = 2.0 / (mu**2 * (1.0 - rho) ** 3)
    busy = MeasureStats(mean=b_mean, sd=math.sqrt(b_second - b_mean**2), q95=math.nan)
    return PerformanceSummary(number_in_system=n_stats, busy_period=busy,
                              response_time=resp, servers=1)


def erlang_c_delay_probability(lam: float, mu: float, c: int) -> float:
    """Probability an arrival must wait, via the Erlang-B recursion."""
    a = lam / mu
    if a >= c:
        raise ValueError("requires lam < c * mu")
    b = 1.0
    for k in range(1, c + 1):
        b = a * b / (k + a * b)
    rho = a / c
    return b / (1.0 - rho * (1.0 - b))


def mmc_queue_tail(lam: float, mu: float, c: int, k: int, inclusive: bool = False) -> float:
    """Stationary P(queue length > k), or >= k with ``inclusive``."""
    C = erlang_c_delay_probability(lam, mu, c)
    rho = lam / (c * mu)
    return C * rho ** (k if inclusive else k + 1)


def mmc_analytic(lam: float, mu: float, c: int) -> PerformanceSummary:
    """Erlang-C results for ``c`` servers.

    Number-in-system moments come from the full stationary distribution;
    the response-time quantile from the hypoexponential mixture CDF. The
    full busy period (all servers occupied) behaves like a single-server
    busy period at service rate ``c * mu``.
    """
    a = lam / mu
    rho = a / c
    if rho >= 1:
        raise ValueError("requires lam < c * mu")
    C = erlang_c_delay_probability(lam, mu, c)

    kmax = c + max(int(math.log(1e-14) / math.log(rho)), 10)
    logs = np.arange(kmax + 1, dtype=float)
    log_unnorm = np.where(logs <= c,
                          logs * math.log(a) - [math.lgamma(k + 1) for k in range(kmax + 1)],
                          c * math.log(a) - math.lgamma(c + 1) + (logs - c) * math.log(rho))
    pmf = np.exp(log_unnorm)
    pmf /= pmf.sum()
    ks = np.arange(kmax + 1)
    L = float(ks @ pmf)
    n_stats = MeasureStats(mean=L, sd=math.sqrt(float(ks**2 @ pmf) - L**2),
                           q95=int(np.searchsorted(np.cumsum(pmf), 0.95)), histogram=pmf)

    nu = c * mu - lam
    w_mean = L / lam
    w_var = 1.0 / mu**2 + C * (2.0 - C) / nu**2

    def resp_cdf(t):
        if abs(nu - mu) < 1e-12:
            tail_sum = (1.0 + mu * t) * math.exp(-mu * t)
        else:
            tail_sum = (mu * math.exp(-nu * t) - nu * math.exp(-mu * t)) / (mu - nu)
        return 1.0 - (1.0 - C) * math.exp(-mu * t) - C * tail_sum

    hi = 10.0 * w_mean
    while resp_cdf(hi) < 0.95:
        hi *= 2.0
    q95 = brentq(lambda t: resp_cdf(t) - 0.95, 0.0, hi)
    resp = MeasureStats(mean=w_mean, sd=math.sqrt(w_var), q95=float(q95))

    b_mean = 1.0 / nu
    b_second = 2.0 / ((c * mu) ** 2 * (1.0 - rho) ** 3)
    busy = MeasureStats(mean=b_mean, sd=math.sqrt(b_second - b_mean**2), q95=math.nan)
    return PerformanceSummary(number_in_system=n_stats, busy_period=busy,
                              response_time=resp, servers=c)


# ---------------------------------------------------------------------------
# Staffing costs

@dataclass(frozen=True)
class CostModel:
    """Per-minute server cost plus a penalty while the queue is long.

    The penalty accrues whenever the number waiting reaches ``threshold``
    (inclusive), i.e. while the number in system is at least
    ``servers + threshold``.
    """

    server_cost: float
    congestion_cost: float
    threshold: int = 30

    def __post_init__(self):
        if self.server_cost <= 0 or self.congestion_cost < 0 or self.threshold < 0:
            raise ValueError("costs must be positive and the threshold nonnegative")


@dataclass
class CostPoint:
    servers: int
    server_cost: float
    congestion_cost: float
    total_cost: float
    excess_fraction: float


@dataclass
class CostCurve:
    points: list[CostPoint]

    @property
    def optimal(self) -> CostPoint:
        # ties break toward fewer servers (points are in ascending order)
        return min(self.points, key=lambda p: (p.total_cost, p.servers))


def excess_queue_fraction(summary: PerformanceSummary, model: CostModel) -> float:
    """Time fraction with at least ``threshold`` customers waiting."""
    pmf = summary.number_in_system.histogram
    cut = summary.servers + model.threshold
    return float(pmf[cut:].sum()) if cut < len(pmf) else 0.0


def cost_from_summary(summary: PerformanceSummary, model: CostModel) -> CostPoint:
    frac = excess_queue_fraction(summary, model)
    sc = summary.servers * model.server_cost
    cc = model.congestion_cost * frac
    return CostPoint(servers=summary.servers, server_cost=sc, congestion_cost=cc,
                     total_cost=sc + cc, excess_fraction=frac)


def cost_curve(scenarios: list[QueueScenario], model: CostModel) -> CostCurve:
    """Simulate each scenario and price it; scenarios must share everything
    but the server count."""
    if not scenarios:
        raise ValueError("no scenarios given")
    points = [cost_from_summary(simulate_queue(s), model)
              for s in sorted(scenarios, key=lambda s: s.servers)]
    return CostCurve(points=points)


def analytic_cost(lam: float, mu: float, c: int, model: CostModel,
                  inclusive: bool = True) -> float:
    """Erlang-C cost of ``c`` servers under Poisson arrivals."""
    frac = mmc_queue_tail(lam, mu, c, model.threshold, inclusive=inclusive)
    return c * model.server_cost + model.congestion_cost * frac
