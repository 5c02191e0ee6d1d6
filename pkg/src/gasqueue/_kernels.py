"""Numba kernels for the hot loops: score filtering, path simulation and
the multi-server queue recursion.

The filter and simulator share the same jitted score/log-density helpers so
that filtering a simulated path reproduces the simulated state sequence bit
for bit.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

ALPHA_CLAMP = 50.0
_EXP_GUARD = 700.0


@njit(cache=True, nogil=True)
def _score(y, alpha, psi, phi):
    return phi * (math.exp(phi * (math.log(y) - alpha)) - psi)


@njit(cache=True, nogil=True)
def _log_pdf(y, alpha, psi, phi):
    z = math.log(y) - alpha
    if phi * z > _EXP_GUARD:
        return -np.inf
    return -math.lgamma(psi) + math.log(phi) - alpha + (psi * phi - 1.0) * z - math.exp(phi * z)


@njit(cache=True, nogil=True)
def _clamp(x):
    if x > ALPHA_CLAMP:
        return ALPHA_CLAMP
    if x < -ALPHA_CLAMP:
        return -ALPHA_CLAMP
    return x


@njit(cache=True, nogil=True)
def filter_kernel(y, c, b, a, psi, phi):
    """Run the score recursion over ``y``; returns (alphas, loglik terms)."""
    n = y.shape[0]
    alphas = np.empty(n)
    terms = np.empty(n)
    alpha = c / (1.0 - b)
    for i in range(n):
        alphas[i] = alpha
        terms[i] = _log_pdf(y[i], alpha, psi, phi)
        alpha = _clamp(c + b * alpha + a * _score(y[i], alpha, psi, phi))
    return alphas, terms


@njit(cache=True, nogil=True)
def simulate_kernel(g, c, b, a, psi, phi):
    """Transform i.i.d. standard-gamma draws ``g`` into a duration path.

    Returns (durations, alphas). The score driving the recursion is
    recomputed from the emitted duration with the same expression as the
    filter, so the filter replays the alpha path exactly.
    """
    n = g.shape[0]
    y = np.empty(n)
    alphas = np.empty(n)
    inv_phi = 1.0 / phi
    alpha = c / (1.0 - b)
    for i in range(n):
        alphas[i] = alpha
        y[i] = math.exp(alpha) * g[i] ** inv_phi
        alpha = _clamp(c + b * alpha + a * _score(y[i], alpha, psi, phi))
    return y, alphas


@njit(cache=True, nogil=True)
def serve_kernel(arrivals, services, c):
    """FIFO assignment of each arrival to the earliest-free of ``c`` servers.

    Returns per-customer departure times.
    """
    n = arrivals.shape[0]
    avail = np.zeros(c)
    departures = np.empty(n)
    for i in range(n):
        m = 0
        for j in range(1, c):
            if avail[j] < avail[m]:
                m = j
        start = arrivals[i] if arrivals[i] > avail[m] else avail[m]
        dep = start + services[i]
        avail[m] = dep
        departures[i] = dep
    return departures
