"""Score-driven duration models for clustered arrivals and their impact on
single- and multi-server queueing systems."""

from .gengamma import GenGammaParams, fisher_alpha, log_pdf, mean, sample, score_alpha, variance
from .gas import FilterOutput, GasParams, gas_filter, gas_simulate, gas_step, init_alpha, stationary_mean
from .estimation import FittedModel, ModelComparison, ModelSpec, aic, fit, model_table
from .seasonal import (
    InterArrivalSeries,
    SplineFit,
    adjust,
    build_design,
    generate_synthetic_arrivals,
    preprocess_zeros,
    seasonal_adjust,
    wls_fit,
)
from .queueing import (
    CostCurve,
    CostModel,
    PerformanceSummary,
    QueueScenario,
    analytic_cost,
    cost_curve,
    erlang_c_delay_probability,
    mm1_analytic,
    mmc_analytic,
    mmc_queue_tail,
    simulate_queue,
)

__version__ = "0.1.0"
