"""Observables and run summaries."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nlse1d import (
    ContractViolationError,
    WaveField,
    centroid,
    comparative_error,
    height_at,
    make_grid,
    peak,
    power,
    record,
    soliton_initial,
    summarize,
)


@pytest.fixture(scope="module")
def grid():
    return make_grid(-20, 20, 0.01)


class TestHeightAt:
    def test_soliton_center(self, grid):
        assert height_at(soliton_initial(grid), 0.0) == 1.0

    def test_zero_field(self, grid):
        f = WaveField(grid, np.zeros(grid.n, complex))
        assert height_at(f, 3.7) == 0.0

    def test_soliton_at_one(self, grid):
        # independent evaluation of sech^2(1)
        expected = 1 / math.cosh(1.0) ** 2
        assert height_at(soliton_initial(grid), 1.0) == pytest.approx(expected, rel=1e-12)

    def test_out_of_bounds(self, grid):
        with pytest.raises(ContractViolationError):
            height_at(soliton_initial(grid), 20.01)


class TestCentroid:
    def test_symmetric_soliton(self, grid):
        assert abs(centroid(soliton_initial(grid))) < 1e-10

    def test_translation_covariance(self, grid):
        assert centroid(soliton_initial(grid, x0=3.0)) == pytest.approx(3.0, abs=1e-6)

    def test_two_point_masses(self):
        g = make_grid(-2, 2, 1.0)
        v = np.zeros(g.n, complex)
        v[1] = 1.0  # x = -1
        v[3] = 1.0  # x = +1
        assert centroid(WaveField(g, v)) == 0.0

    def test_zero_field_undefined(self, grid):
        with pytest.raises(ContractViolationError):
            centroid(WaveField(grid, np.zeros(grid.n, complex)))


class TestPeak:
    def test_soliton(self, grid):
        pos, height = peak(soliton_initial(grid))
        assert pos == 0.0
        assert height == 1.0

    def test_constant_field_tie_break(self):
        g = make_grid(-2, 2, 0.5)
        pos, height = peak(WaveField(g, 0.5 * np.ones(g.n, complex)))
        assert pos == g.x_min
        assert height == 0.25

    def test_off_node_center(self, grid):
        pos, _ = peak(soliton_initial(grid, x0=2.005))
        assert abs(pos - 2.005) <= grid.dx


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=42, max_size=42))
def test_peak_height_consistency(values):
    g = make_grid(0, 20, 1.0)
    f = WaveField(g, np.array(values[:21]) + 1j * np.array(values[21:]))
    pos, height = peak(f)
    assert height_at(f, pos) == height
    assert height >= height_at(f, 10.0)


class TestRecordAndSummary:
    def test_record_fields(self, grid):
        f = soliton_initial(grid)
        rec = record(1.5, f)
        assert rec.t == 1.5
        assert rec.power == power(f)
        assert rec.height_x0 == 1.0
        assert rec.peak_height >= rec.height_x0
        assert grid.x_min <= rec.centroid <= grid.x_max
        assert grid.x_min <= rec.peak_pos <= grid.x_max

    def test_summary_of_identical_states(self, grid):
        f = soliton_initial(grid)
        s = summarize(f, f, [record(0.0, f)])
        assert s.power_error == 0.0
        assert s.error_report == comparative_error(f, f)
        assert s.min_peak_height == s.max_peak_height == 1.0
        assert s.final_centroid_displacement == 0.0

    def test_summary_tracks_peak_range(self, grid):
        a = soliton_initial(grid)
        b = WaveField(grid, 0.5 * a.values)
        s = summarize(a, a, [record(0.0, a), record(1.0, b)])
        assert s.min_peak_height == 0.25
        assert s.max_peak_height == 1.0

    def test_summary_needs_records(self, grid):
        f = soliton_initial(grid)
        with pytest.raises(ContractViolationError):
            summarize(f, f, [])
