"""Legacy-receiver MSE functionals and feasibility floors.

Two receiver models: symbol-by-symbol MMSE estimation (ignores temporal
correlation, depends on variances only) and non-causal Wiener-Kolmogorov
smoothing (depends on the full spectra). The ratio form of the smoothing MSE
integrand is used throughout; the subtracted form cancels catastrophically
when the legacy gain is large.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectra import Spectrum, mean_power


@dataclass(frozen=True)
class UncodedScenario:
    """Uncoded legacy service: gain a, component spectra, targets D and P."""

    a: float
    phi_s: Spectrum
    phi_n: Spectrum
    D: float
    P: float

    def __post_init__(self):
        if self.a <= 0:
            raise ValueError("legacy channel gain must be positive")
        if self.D <= 0:
            raise ValueError("distortion target must be positive")
        if self.P <= 0:
            raise ValueError("power budget must be positive")
        if self.phi_s.grid is not self.phi_n.grid:
            raise ValueError("signal and noise spectra must share a grid")

    @property
    def grid(self):
        return self.phi_s.grid

    @property
    def sigma2_s(self) -> float:
        return mean_power(self.phi_s)

    @property
    def sigma2_n(self) -> float:
        return mean_power(self.phi_n)

    def base(self) -> np.ndarray:
        """Noise-plus-legacy floor a*phi_s + phi_n seen by the cognitive link."""
        return self.a * self.phi_s.values + self.phi_n.values


def memoryless_mse(sigma2_s: float, sigma2_x: float, sigma2_n: float, a: float) -> float:
    """MSE of symbol-by-symbol MMSE estimation of the legacy symbol."""
    if min(sigma2_s, sigma2_x, sigma2_n) < 0 or a < 0:
        raise ValueError("variances and gain must be nonnegative")
    denom = a * sigma2_s + sigma2_x + sigma2_n
    if denom == 0.0:
        raise ValueError("memoryless MSE undefined when all terms vanish")
    return sigma2_s * (sigma2_x + sigma2_n) / denom


def memoryless_floor(sigma2_s: float, sigma2_n: float, a: float) -> float:
    """Smallest distortion a memoryless receiver can reach (zero cognitive power)."""
    return 1.0 / (1.0 / sigma2_s + a / sigma2_n)


def memoryless_power_cap(scenario: UncodedScenario) -> float | None:
    """Total cognitive power admitted by a memoryless legacy receiver.

    Returns min(P, legacy-induced cap), or P when the target exceeds the
    legacy signal variance (constraint vacuous). Returns None when the target
    is unreachable even in silence; infeasibility is an expected outcome here,
    not an exception.
    """
    s2s, s2n = scenario.sigma2_s, scenario.sigma2_n
    if scenario.D >= s2s:
        return scenario.P
    if scenario.D < memoryless_floor(s2s, s2n, scenario.a):
        return None
    cap = s2s * scenario.D / (s2s - scenario.D) * scenario.a - s2n
    return min(scenario.P, cap)


def _wk_integrand(phi_x: np.ndarray, scenario: UncodedScenario) -> np.ndarray:
    s = scenario.phi_s.values
    num = s * (phi_x + scenario.phi_n.values)
    den = scenario.a * s + phi_x + scenario.phi_n.values
    out = np.zeros_like(num)
    np.divide(num, den, out=out, where=den > 0)
    return out


def wk_mse(phi_x: Spectrum, scenario: UncodedScenario) -> float:
    """MSE of non-causal Wiener-Kolmogorov smoothing against cognitive PSD phi_x."""
    if phi_x.grid is not scenario.grid:
        raise ValueError("cognitive PSD grid does not match the scenario grid")
    return scenario.grid.mean(_wk_integrand(phi_x.values, scenario))


def wk_floor(scenario: UncodedScenario) -> float:
    """Smoothing MSE with zero cognitive transmission; the feasibility floor."""
    zeros = np.zeros(scenario.grid.n_points)
    return scenario.grid.mean(_wk_integrand(zeros, scenario))
