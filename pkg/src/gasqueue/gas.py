"""Score-driven recursion for the time-varying log-scale of durations.

The log-scale ``alpha_i`` of the generalized gamma distribution evolves as

    alpha_{i+1} = c + b * alpha_i + a * score(y_i, alpha_i)

started from the long-run mean ``c / (1 - b)``. The first observation is
evaluated at the long-run mean (the pre-sample score term is unobservable,
so the recursion contributes nothing before the first data point).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from . import gengamma
from ._kernels import ALPHA_CLAMP, filter_kernel, simulate_kernel
from .gengamma import GenGammaParams


@dataclass(frozen=True)
class GasParams:
    """Parameter vector (c, b, a, psi, phi) of the score-driven model."""

    c: float
    b: float
    a: float
    psi: float
    phi: float

    def __post_init__(self):
        vals = (self.c, self.b, self.a, self.psi, self.phi)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("parameters must be finite")
        if self.psi <= 0 or self.phi <= 0:
            raise ValueError("shape parameters must be positive")
        # |b| < 1 keeps the long-run mean finite and the recursion stable
        if abs(self.b) >= 1:
            raise ValueError(f"autoregressive coefficient must satisfy |b| < 1, got {self.b}")

    @property
    def is_static(self) -> bool:
        return self.a == 0.0 and self.b == 0.0

    def gengamma_at(self, alpha: float) -> GenGammaParams:
        return GenGammaParams(alpha=alpha, psi=self.psi, phi=self.phi)


@dataclass(frozen=True)
class FilterOutput:
    alphas: np.ndarray
    per_obs_loglik: np.ndarray
    total_loglik: float


def init_alpha(p: GasParams) -> float:
    """Long-run mean of the recursion, ``c / (1 - b)``."""
    return p.c / (1.0 - p.b)


def gas_step(alpha_i: float, y_i: float, p: GasParams) -> float:
    """One update of the recursion, clamped to ``[-50, 50]``.

    The clamp never binds at realistic fitted values; it only keeps the
    likelihood finite when an optimizer explores extreme parameters.
    """
    if y_i <= 0:
        raise ValueError("observations must be strictly positive")
    s = gengamma.score_alpha(y_i, p.gengamma_at(alpha_i))
    return float(np.clip(p.c + p.b * alpha_i + p.a * s, -ALPHA_CLAMP, ALPHA_CLAMP))


def gas_filter(series, p: GasParams) -> FilterOutput:
    """Filter a duration series, returning the alpha path and log-likelihood."""
    y = np.ascontiguousarray(series, dtype=float)
    if y.size == 0:
        raise ValueError("series must be nonempty")
    if np.any(y <= 0) or not np.all(np.isfinite(y)):
        raise ValueError("observations must be strictly positive and finite")
    alphas, terms = filter_kernel(y, p.c, p.b, p.a, p.psi, p.phi)
    return FilterOutput(alphas=alphas, per_obs_loglik=terms, total_loglik=float(terms.sum()))


def gas_simulate(p: GasParams, n: int, rng: np.random.Generator, return_alphas: bool = False):
    """Simulate ``n`` durations from the model.

    Each duration is a gamma-power draw at the current alpha; the recursion
    then advances on the realized score.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    g = rng.standard_gamma(p.psi, n)
    y, alphas = simulate_kernel(g, p.c, p.b, p.a, p.psi, p.phi)
    if return_alphas:
        return y, alphas
    return y


def stationary_mean(p: GasParams) -> float:
    """Stationary mean of the simulated durations, in closed form.

    With gamma innovations the stationary alpha is a linear filter of
    centered gamma variables, so E[exp(alpha)] is a convergent product of
    gamma moment generating functions. Requires ``a * phi * |b|^j < 1``,
    which holds for any realistic fit. The alpha clamp is ignored (it never
    binds in the stationary regime).
    """
    if p.is_static:
        return gengamma.mean(p.gengamma_at(p.c))
    log_m = init_alpha(p)
    t = p.a * p.phi
    for _ in range(10_000):
        if abs(t) < 1e-16:
            break
        if t >= 1.0:
            raise ValueError("stationary mean does not exist for a * phi >= 1")
        log_m += -p.psi * math.log1p(-t) - t * p.psi
        t *= p.b
    return math.exp(log_m + gammaln(p.psi + 1.0 / p.phi) - gammaln(p.psi))
