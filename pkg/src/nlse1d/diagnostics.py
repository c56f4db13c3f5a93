"""Observables sampled during a run and end-of-run summaries."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolationError
from .field import ErrorReport, WaveField, comparative_error, density, power


@dataclass(frozen=True)
class DiagnosticsRecord:
    """Per-sample observables: bare-sum power, density at the node nearest
    x = 0, density-weighted centroid, and the density peak."""

    t: float
    power: float
    height_x0: float
    centroid: float
    peak_pos: float
    peak_height: float


@dataclass(frozen=True)
class RunSummary:
    """End-of-run aggregate: |P(t_f) - P(0)|, the error report, the peak-height
    range over the sampled records, and the net centroid displacement."""

    power_error: float
    error_report: ErrorReport
    min_peak_height: float
    max_peak_height: float
    final_centroid_displacement: float


def height_at(field: WaveField, x: float) -> float:
    """Density at the node nearest x (no interpolation)."""
    grid = field.grid
    if not grid.x_min <= x <= grid.x_max:
        raise ContractViolationError(f"x={x} outside grid [{grid.x_min}, {grid.x_max}]")
    i = min(grid.n - 1, max(0, round((x - grid.x_min) / grid.dx)))
    v = field.values[i]
    return float(v.real**2 + v.imag**2)


def centroid(field: WaveField) -> float:
    """Density-weighted mean position; undefined for a zero field."""
    d = density(field)
    total = float(np.sum(d))
    if total <= 0.0:
        raise ContractViolationError("centroid undefined for a zero field")
    return float(np.sum(field.grid.nodes * d)) / total


def peak(field: WaveField) -> tuple[float, float]:
    """Position and value of the maximum density; ties break toward the
    smaller index."""
    d = density(field)
    i = int(np.argmax(d))
    return float(field.grid.nodes[i]), float(d[i])


def record(t: float, field: WaveField, probe_x: float = 0.0) -> DiagnosticsRecord:
    """Assemble one diagnostics sample at time t."""
    pos, height = peak(field)
    return DiagnosticsRecord(
        t=float(t),
        power=power(field),
        height_x0=height_at(field, probe_x),
        centroid=centroid(field),
        peak_pos=pos,
        peak_height=height,
    )


def summarize(initial: WaveField, final: WaveField, records) -> RunSummary:
    """End-of-run summary from the initial/final states and sampled records."""
    records = list(records)
    if not records:
        raise ContractViolationError("summarize needs at least one diagnostics record")
    heights = [r.peak_height for r in records]
    return RunSummary(
        power_error=abs(power(final) - power(initial)),
        error_report=comparative_error(initial, final),
        min_peak_height=min(heights),
        max_peak_height=max(heights),
        final_centroid_displacement=centroid(final) - centroid(initial),
    )


def discrete_energy(field: WaveField, background: float) -> float:
    """Discrete Hamiltonian sum(|forward difference|^2/dx^2 + (g/2)|psi|^4) dx;
    conserved by the noise-free continuum flow."""
    v = field.values
    dx = field.grid.dx
    diff = v[1:] - v[:-1]
    grad = float(np.sum(diff.real**2 + diff.imag**2)) / dx
    d = density(field)
    quart = 0.5 * background * float(np.sum(d * d)) * dx
    return grad + quart
