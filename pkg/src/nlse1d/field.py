"""Spatial grid, complex wave field container, initial conditions, and run metrics.

The two scalar metrics live here: the bare-sum power P = sum |psi_i|^2 (the
quantity the integrator conserves) and the density-difference error report
comparing an initial and a final state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ConfigurationError, ContractViolationError, SimulationDivergedError

# Phase rotation rate of the unit-amplitude sech soliton (the analytic solution
# rotates as exp(i * t) at this rate when the background nonlinearity is -2).
SOLITON_PHASE_RATE = 1.0


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid with inclusive endpoints: x_i = x_min + i * dx, i = 0..n-1."""

    x_min: float
    x_max: float
    dx: float
    n: int

    @cached_property
    def nodes(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n)


def make_grid(x_min: float, x_max: float, dx: float) -> Grid1D:
    """Build a uniform grid; (x_max - x_min) must be a whole number of dx steps.

    The interval count (x_max - x_min)/dx must sit within dx/2 of an integer,
    so the last node lands within dx^2/2 of x_max.
    """
    for name, v in (("x_min", x_min), ("x_max", x_max), ("dx", dx)):
        if not math.isfinite(v):
            raise ConfigurationError(f"grid {name} must be finite, got {v!r}")
    if dx <= 0:
        raise ConfigurationError(f"grid dx must be > 0, got {dx}")
    if x_max <= x_min:
        raise ConfigurationError(f"grid needs x_max > x_min, got [{x_min}, {x_max}]")
    ratio = (x_max - x_min) / dx
    intervals = round(ratio)
    if intervals < 1 or abs(ratio - intervals) >= dx / 2:
        raise ConfigurationError(
            f"dx={dx} does not evenly divide [{x_min}, {x_max}] "
            f"(interval count {ratio:.6g} is not close enough to an integer)"
        )
    return Grid1D(float(x_min), float(x_max), float(dx), intervals + 1)


@dataclass(eq=False)
class WaveField:
    """Complex wavefunction samples on a grid at one instant. Treat as immutable."""

    grid: Grid1D
    values: np.ndarray

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=np.complex128)
        if values.shape != (self.grid.n,):
            raise ContractViolationError(
                f"field length {values.shape} does not match grid with n={self.grid.n}"
            )
        if not np.isfinite(values).all():
            raise SimulationDivergedError("non-finite amplitude in wave field")
        self.values = values


def density(field: WaveField) -> np.ndarray:
    """|psi_i|^2 per node."""
    v = field.values
    return v.real**2 + v.imag**2


def power(field: WaveField) -> float:
    """Bare sum of |psi_i|^2 over the grid (no dx weight); the conserved quantity."""
    return float(np.sum(density(field)))


def physical_norm(field: WaveField) -> float:
    """dx-weighted norm, power * dx; approximates the continuum integral of |psi|^2."""
    return power(field) * field.grid.dx


def soliton_initial(grid: Grid1D, x0: float = 0.0, velocity: float = 0.0) -> WaveField:
    """sech-shaped bright soliton centred at x0, peak density 1.

    A nonzero velocity multiplies by exp(i * velocity * x / 2), which makes the
    centroid translate at that speed under the noise-free evolution.
    """
    arg = grid.nodes - x0
    values = (1.0 / np.cosh(arg)).astype(np.complex128)
    if velocity != 0.0:
        values = values * np.exp(0.5j * velocity * grid.nodes)
    return WaveField(grid, values)


@dataclass(frozen=True)
class ErrorReport:
    """Density-difference metrics between an initial and a final state.

    signed_mean is the plain mean of (|psi_0|^2 - |psi_f|^2); because the
    integrator conserves power to roundoff this is ~0 for every run, so three
    robust companions are reported alongside it:

    - mean_abs: mean of |density difference|
    - rms: square root of the *sum* of squared density differences
    - l_inf: largest pointwise |density difference|
    """

    signed_mean: float
    mean_abs: float
    rms: float
    l_inf: float


def comparative_error(initial: WaveField, final: WaveField) -> ErrorReport:
    """Compare densities of two states on the same grid.

    signed_mean is computed as (power(initial) - power(final)) / n, which is
    algebraically identical to the mean density difference and makes the
    power-difference identity exact in floating point as well.
    """
    if initial.grid != final.grid:
        raise ContractViolationError("comparative_error requires both fields on the same grid")
    d0 = density(initial)
    df = density(final)
    diff = d0 - df
    n = initial.grid.n
    signed_mean = (power(initial) - power(final)) / n
    mean_abs = float(np.sum(np.abs(diff))) / n
    rms = math.sqrt(float(np.sum(diff * diff)))
    l_inf = float(np.max(np.abs(diff)))
    return ErrorReport(signed_mean=signed_mean, mean_abs=mean_abs, rms=rms, l_inf=l_inf)
