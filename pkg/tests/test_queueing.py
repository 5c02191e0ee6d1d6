import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gasqueue._kernels import serve_kernel
from gasqueue.gas import GasParams
from gasqueue.queueing import (
    CostModel,
    QueueScenario,
    analytic_cost,
    arrival_durations,
    cost_curve,
    cost_from_summary,
    erlang_c_delay_probability,
    excess_queue_fraction,
    mm1_analytic,
    mmc_analytic,
    mmc_queue_tail,
    simulate_queue,
)

STATIC_EXP = GasParams(0.0, 0.0, 0.0, 1.0, 1.0)
DYN_GG = GasParams(-0.06, 0.72, 0.07, 1.15, 0.90)


def _scenario(**kw):
    base = dict(arrival=STATIC_EXP, servers=1, service_rate=1.5,
                n_arrivals=200_000, warmup_arrivals=10_000, seed=360)
    base.update(kw)
    return QueueScenario(**base)


# ---------------------------------------------------------------------------
# analytic oracles

def test_mm1_low_load():
    s = mm1_analytic(1.0, 2.0)
    assert s.number_in_system.mean == pytest.approx(1.0)


def test_mm1_table_values():
    s = mm1_analytic(1.0, 1.1)
    rho = 1.0 / 1.1
    assert s.number_in_system.mean == pytest.approx(10.0, abs=1e-9)
    assert s.number_in_system.sd == pytest.approx(math.sqrt(rho) / (1 - rho))
    assert s.number_in_system.q95 == 31
    assert s.response_time.mean == pytest.approx(10.0, abs=1e-9)
    assert s.response_time.sd == pytest.approx(10.0, abs=1e-9)
    assert s.response_time.q95 == pytest.approx(-math.log(0.05) * 10.0)
    assert s.busy_period.mean == pytest.approx(10.0, abs=1e-9)
    # SD from E[B^2] = 2 / (mu^2 (1-rho)^3)
    assert s.busy_period.sd == pytest.approx(
        math.sqrt(2.0 / (1.1**2 * (1 - rho) ** 3) - 100.0))


def test_mm1_response_quantile_mu_15():
    s = mm1_analytic(1.0, 1.5)
    assert s.response_time.mean == pytest.approx(2.0)
    assert s.response_time.q95 == pytest.approx(5.99, abs=0.01)


def test_mm1_geometric_q95_by_mu():
    expected = {1.1: 31, 1.2: 16, 1.3: 11, 1.4: 8, 1.5: 7}
    for mu, q in expected.items():
        assert mm1_analytic(1.0, mu).number_in_system.q95 == q


def test_mm1_histogram_mass():
    s = mm1_analytic(1.0, 1.3)
    assert s.number_in_system.histogram.sum() == pytest.approx(1.0)
    assert s.response_time.histogram.sum() == pytest.approx(1.0)


def test_mm1_domain():
    with pytest.raises(ValueError):
        mm1_analytic(1.0, 1.0)


def test_erlang_c_single_server_reduces_to_rho():
    for rho in (0.3, 0.7, 0.9):
        assert erlang_c_delay_probability(rho, 1.0, 1) == pytest.approx(rho)


def test_mmc_single_server_matches_mm1():
    a = mmc_analytic(1.0, 1.2, 1)
    b = mm1_analytic(1.0, 1.2)
    assert a.number_in_system.mean == pytest.approx(b.number_in_system.mean)
    assert a.number_in_system.sd == pytest.approx(b.number_in_system.sd, rel=1e-9)
    assert a.response_time.mean == pytest.approx(b.response_time.mean)
    assert a.busy_period.mean == pytest.approx(b.busy_period.mean)


def test_mmc_table3_static_row():
    s = mmc_analytic(1.0, 0.1, 11)
    assert s.number_in_system.mean == pytest.approx(16.8, abs=0.05)
    assert s.busy_period.mean == pytest.approx(10.0, abs=1e-9)


def test_mmc_tail_formula():
    lam, mu, c = 1.0, 0.1, 12
    C = erlang_c_delay_probability(lam, mu, c)
    rho = lam / (c * mu)
    assert mmc_queue_tail(lam, mu, c, 30) == pytest.approx(C * rho**31)
    assert mmc_queue_tail(lam, mu, c, 30, inclusive=True) == pytest.approx(C * rho**30)


def test_mmc_domain():
    with pytest.raises(ValueError):
        mmc_analytic(1.0, 0.1, 10)


# ---------------------------------------------------------------------------
# simulation

def test_scenario_validation():
    with pytest.raises(ValueError):
        _scenario(service_rate=0.9)  # rho > 1
    with pytest.raises(ValueError):
        _scenario(servers=0)
    with pytest.raises(ValueError):
        _scenario(warmup_arrivals=300_000)
    with pytest.raises(ValueError):
        _scenario(replications=0)


def test_scenario_rate_convention():
    s = _scenario(arrival=DYN_GG)
    assert s.arrival_rate == 1.0
    assert s.dynamics == "dynamic"
    assert s.family == "generalized_gamma"


def test_arrival_durations_normalization():
    rng = np.random.default_rng(1)
    y = arrival_durations(DYN_GG, 2_000_000, rng)
    assert y.mean() == pytest.approx(1.0, abs=0.005)


def test_simulation_matches_mm1():
    s = simulate_queue(_scenario())
    oracle = mm1_analytic(1.0, 1.5)
    assert s.number_in_system.mean == pytest.approx(oracle.number_in_system.mean, rel=0.05)
    assert s.response_time.mean == pytest.approx(oracle.response_time.mean, rel=0.03)
    assert s.response_time.q95 == pytest.approx(oracle.response_time.q95, rel=0.05)
    assert s.busy_period.mean == pytest.approx(oracle.busy_period.mean, rel=0.05)
    assert s.number_in_system.q95 == oracle.number_in_system.q95


def test_simulation_matches_erlang_c():
    s = simulate_queue(_scenario(servers=3, service_rate=0.5))
    oracle = mmc_analytic(1.0, 0.5, 3)
    assert s.number_in_system.mean == pytest.approx(oracle.number_in_system.mean, rel=0.05)
    assert s.response_time.mean == pytest.approx(oracle.response_time.mean, rel=0.03)
    assert s.busy_period.mean == pytest.approx(oracle.busy_period.mean, rel=0.10)


def test_littles_law():
    for scenario in (_scenario(), _scenario(arrival=DYN_GG, service_rate=1.4, seed=2)):
        assert simulate_queue(scenario).little_law_error < 0.01


def test_simulation_determinism():
    a = simulate_queue(_scenario(n_arrivals=50_000))
    b = simulate_queue(_scenario(n_arrivals=50_000))
    assert a.as_dict() == b.as_dict()


def test_replication_pooling():
    s = simulate_queue(_scenario(replications=4))
    assert s.n_measured == 200_000 - 4 * 10_000
    assert s.number_in_system.histogram.sum() == pytest.approx(1.0)
    assert s.little_law_error < 0.01
    oracle = mm1_analytic(1.0, 1.5)
    assert s.number_in_system.mean == pytest.approx(oracle.number_in_system.mean, rel=0.05)


def test_summary_dict_schema():
    d = simulate_queue(_scenario(n_arrivals=50_000)).as_dict()
    assert set(d) == {"number_in_system", "busy_period", "response_time", "servers",
                      "realized_rate", "measured_time", "n_measured", "n_busy_periods",
                      "little_law_error"}
    for key in ("number_in_system", "busy_period", "response_time"):
        assert set(d[key]) == {"mean", "sd", "q95", "histogram"}


def test_serve_kernel_single_server_recursion():
    arrivals = np.array([0.0, 1.0, 1.5, 10.0])
    services = np.array([2.0, 3.0, 1.0, 0.5])
    dep = serve_kernel(arrivals, services, 1)
    # D_i = max(A_i, D_{i-1}) + S_i for one server
    np.testing.assert_allclose(dep, [2.0, 5.0, 6.0, 10.5])


def test_serve_kernel_many_servers_no_waiting():
    arrivals = np.array([0.0, 0.1, 0.2])
    services = np.array([5.0, 5.0, 5.0])
    dep = serve_kernel(arrivals, services, 3)
    np.testing.assert_allclose(dep, arrivals + services)


@settings(max_examples=100, deadline=None)
@given(
    n=st.integers(1, 40),
    c=st.integers(1, 5),
    seed=st.integers(0, 2**31),
)
def test_serve_kernel_properties(n, c, seed):
    rng = np.random.default_rng(seed)
    arrivals = np.cumsum(rng.exponential(1.0, n))
    services = rng.exponential(1.0, n)
    dep = serve_kernel(arrivals, services, c)
    assert np.all(dep >= arrivals + services - 1e-12)
    if c >= n:
        np.testing.assert_allclose(dep, arrivals + services)
    # no more than c jobs in service at once
    for t in dep - 1e-9:
        in_service = np.sum((arrivals <= t) & (dep - services <= t) & (dep > t))
        assert in_service <= c


# ---------------------------------------------------------------------------
# costs

def test_cost_model_validation():
    with pytest.raises(ValueError):
        CostModel(server_cost=0.0, congestion_cost=1.0)
    with pytest.raises(ValueError):
        CostModel(server_cost=1.0, congestion_cost=-1.0)


def test_excess_fraction_from_pmf():
    s = mmc_analytic(1.0, 0.1, 12)
    model = CostModel(server_cost=10.0, congestion_cost=3000.0, threshold=30)
    frac = excess_queue_fraction(s, model)
    # pmf tail at N >= c + threshold matches the inclusive Erlang-C tail
    assert frac == pytest.approx(mmc_queue_tail(1.0, 0.1, 12, 30, inclusive=True),
                                 rel=1e-6)
    point = cost_from_summary(s, model)
    assert point.total_cost == pytest.approx(120.0 + 3000.0 * frac)


def test_analytic_cost_values():
    model = CostModel(server_cost=10.0, congestion_cost=3000.0, threshold=30)
    assert analytic_cost(1.0, 0.1, 12, model, inclusive=False) == pytest.approx(124.73, abs=0.01)
    assert analytic_cost(1.0, 0.1, 12, model, inclusive=True) == pytest.approx(125.68, abs=0.01)


def test_cost_curve_no_congestion_picks_fewest_servers():
    model = CostModel(server_cost=10.0, congestion_cost=0.0, threshold=30)
    scenarios = [_scenario(servers=c, service_rate=0.6, n_arrivals=40_000,
                           warmup_arrivals=2_000, seed=5)
                 for c in (2, 3, 4)]
    curve = cost_curve(scenarios, model)
    assert [p.servers for p in curve.points] == [2, 3, 4]
    assert curve.optimal.servers == 2
    assert curve.optimal.total_cost == pytest.approx(20.0)


def test_cost_curve_rejects_empty():
    with pytest.raises(ValueError):
        cost_curve([], CostModel(10.0, 3000.0))
