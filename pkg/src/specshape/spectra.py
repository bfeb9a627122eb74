"""Frequency grids and sampled power spectral densities.

Every process in the scalar models is WSS with a real, even PSD, so all
spectra live on the half band [0, pi] and full-band integrals
(1/2pi) * int_{-pi}^{pi} f(w) dw are evaluated as (1/pi) * sum_i weight_i * f_i.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MIN_GRID_POINTS = 16


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class FrequencyGrid:
    """Uniform samples of [0, pi] with composite-trapezoid quadrature weights."""

    n_points: int
    omegas: np.ndarray
    weights: np.ndarray

    def integrate(self, values: np.ndarray) -> float:
        """Approximate int_0^pi f(w) dw from samples of f."""
        return float(np.dot(self.weights, values))

    def mean(self, values: np.ndarray) -> float:
        """Full-band average (1/2pi) int_{-pi}^{pi} of an even integrand."""
        return self.integrate(values) / np.pi


def make_grid(n_points: int = 4096) -> FrequencyGrid:
    """Build a uniform half-band grid with trapezoid weights summing to pi."""
    if n_points < MIN_GRID_POINTS:
        raise ValueError(f"need at least {MIN_GRID_POINTS} grid points, got {n_points}")
    omegas = np.linspace(0.0, np.pi, n_points)
    h = np.pi / (n_points - 1)
    weights = np.full(n_points, h)
    weights[0] = weights[-1] = h / 2.0
    return FrequencyGrid(n_points, _frozen(omegas), _frozen(weights))


@dataclass(frozen=True)
class Spectrum:
    """Nonnegative sampled PSD on a half-band grid (linear power units)."""

    grid: FrequencyGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.grid.omegas.shape:
            raise ValueError("PSD samples do not match the grid")
        if not np.all(np.isfinite(v)):
            raise ValueError("PSD samples must be finite")
        if np.any(v < 0):
            raise ValueError("PSD samples must be nonnegative")
        object.__setattr__(self, "values", _frozen(v))


@dataclass(frozen=True)
class OnOffSpectrum:
    """PSD taking only the values {0, level} on a boolean support mask."""

    grid: FrequencyGrid
    support: np.ndarray
    level: float

    def __post_init__(self):
        if self.level < 0:
            raise ValueError("on-level must be nonnegative")
        mask = np.asarray(self.support, dtype=bool)
        if mask.shape != self.grid.omegas.shape:
            raise ValueError("support mask does not match the grid")
        mask = mask.copy()
        mask.flags.writeable = False
        object.__setattr__(self, "support", mask)

    @property
    def support_fraction(self) -> float:
        return float(np.dot(self.grid.weights, self.support)) / np.pi

    def to_spectrum(self) -> Spectrum:
        return Spectrum(self.grid, np.where(self.support, self.level, 0.0))


def flat_spectrum(grid: FrequencyGrid, variance: float) -> Spectrum:
    """Constant PSD with mean power equal to `variance`."""
    if variance < 0:
        raise ValueError("variance must be nonnegative")
    return Spectrum(grid, np.full(grid.n_points, float(variance)))


def ar1_spectrum(grid: FrequencyGrid, variance: float, epsilon: float) -> Spectrum:
    """PSD of a first-order AR process with innovation rate epsilon in (0, 1].

    values = eps * variance / ((2 - eps) - 2 sqrt(1 - eps) cos w; epsilon = 1
    recovers the memoryless (flat) spectrum exactly.
    """
    if not 0.0 < epsilon <= 1.0:
        raise ValueError("innovation rate must lie in (0, 1]")
    if variance < 0:
        raise ValueError("variance must be nonnegative")
    denom = (2.0 - epsilon) - 2.0 * np.sqrt(1.0 - epsilon) * np.cos(grid.omegas)
    return Spectrum(grid, epsilon * variance / denom)


def tabulated_spectrum(grid: FrequencyGrid, values) -> Spectrum:
    """PSD from tabulated samples; values on a uniform [0, pi] grid of any
    length are linearly interpolated onto `grid`."""
    v = np.asarray(values, dtype=float)
    if v.ndim != 1 or v.size < 2:
        raise ValueError("tabulated PSD needs a 1-D array of at least 2 samples")
    if v.size == grid.n_points:
        return Spectrum(grid, v)
    src = np.linspace(0.0, np.pi, v.size)
    return Spectrum(grid, np.interp(grid.omegas, src, v))


def mean_power(spectrum: Spectrum) -> float:
    """Total power (1/2pi) int_{-pi}^{pi} phi(w) dw of an even PSD."""
    return spectrum.grid.mean(spectrum.values)
