"""Water-filling power allocation against a fixed noise-plus-legacy spectrum."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectra import FrequencyGrid, Spectrum

_MAX_BISECT = 200
_POWER_RTOL = 1e-13


@dataclass(frozen=True)
class WaterfillResult:
    phi_x: Spectrum
    water_level: float
    rate: float
    power_used: float


def _fill_power(level: float, base: np.ndarray, weights: np.ndarray) -> float:
    return float(np.dot(weights, np.maximum(level - base, 0.0))) / np.pi


def _waterfill_bins(base: np.ndarray, weights: np.ndarray, budget: float):
    """Bisect the water level on raw bins; returns (phi_x values, level).

    The power-vs-level map is continuous, piecewise linear and monotone, so
    plain bisection converges; the bracket is widened geometrically first.
    """
    lo = float(np.min(base))
    hi = float(np.max(base)) + budget * np.pi
    while _fill_power(hi, base, weights) < budget:
        hi = 2.0 * hi + 1.0
    for _ in range(_MAX_BISECT):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        p = _fill_power(mid, base, weights)
        if abs(p - budget) <= _POWER_RTOL * budget:
            lo = hi = mid
            break
        if p < budget:
            lo = mid
        else:
            hi = mid
    level = 0.5 * (lo + hi)
    return np.maximum(level - base, 0.0), level


def waterfill(base: Spectrum, budget: float) -> WaterfillResult:
    """Maximize the log rate against `base` subject to a total power budget."""
    if budget <= 0:
        raise ValueError("power budget must be positive")
    phi, level = _waterfill_bins(base.values, base.grid.weights, budget)
    phi_x = Spectrum(base.grid, phi)
    return WaterfillResult(
        phi_x=phi_x,
        water_level=level,
        rate=rate(phi_x, base),
        power_used=base.grid.mean(phi),
    )


def rate(phi_x: Spectrum, base: Spectrum, bits: bool = False) -> float:
    """Achievable rate (1/2pi) int log(1 + phi_x/base); nats by default,
    bits per symbol with the units flag."""
    if phi_x.grid is not base.grid:
        raise ValueError("spectra must share a grid")
    r = rate_bins(phi_x.values, base.values, base.grid.weights)
    return r / np.log(2.0) if bits else r


def rate_bins(phi_x: np.ndarray, base: np.ndarray, weights: np.ndarray) -> float:
    active = phi_x > 0
    if np.any(active & (base <= 0)):
        raise ValueError("rate undefined: positive PSD over a zero noise floor")
    vals = np.zeros_like(base)
    np.divide(phi_x, base, out=vals, where=active)
    return float(np.dot(weights, np.log1p(vals))) / np.pi
