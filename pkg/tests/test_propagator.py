"""Split-step integrator: CN core, phase rotation, composite steps, evolve, RK4."""

import math

import numpy as np
import pytest

from nlse1d import (
    ConfigurationError,
    ContractViolationError,
    PerturbationSpec,
    SimulationDivergedError,
    SolverParams,
    WaveField,
    build_schedule,
    centroid,
    cn_linear_step,
    density,
    discrete_energy,
    evolve,
    make_grid,
    nonlinearity,
    phase_step,
    power,
    quasiperiodic_profile,
    rk4_evolve,
    rk4_reference_step,
    soliton_initial,
    strang_step,
)
from nlse1d.propagator import StepWorkspace


def _random_field(grid, seed, pinned_ends=True):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=grid.n) + 1j * rng.normal(size=grid.n)
    if pinned_ends:
        v[0] = v[-1] = 0.0
    return WaveField(grid, v)


def _dirichlet_mode(grid, k):
    n = grid.n
    return WaveField(grid, np.sin(k * np.pi * np.arange(n) / (n - 1)).astype(complex))


class TestCnLinearStep:
    def test_zero_field(self):
        grid = make_grid(0, 1, 0.125)
        out = cn_linear_step(WaveField(grid, np.zeros(grid.n, complex)), 1e-3)
        assert np.all(out.values == 0.0)

    @pytest.mark.parametrize("boundary", ["dirichlet", "periodic"])
    def test_power_preserved(self, boundary):
        grid = make_grid(-5, 5, 0.1)
        f = _random_field(grid, 1, pinned_ends=boundary == "dirichlet")
        out = cn_linear_step(f, 2e-3, boundary)
        assert abs(power(out) - power(f)) / power(f) < 1e-12

    @pytest.mark.parametrize("k", [1, 3, 7])
    def test_dirichlet_eigenmode_phase(self, k):
        # sine modes are exact eigenvectors of the pinned stencil; the CN
        # update must equal the closed-form Cayley factor
        grid = make_grid(0, 1, 1 / 63)
        assert grid.n == 64
        dt = 1e-3
        f = _dirichlet_mode(grid, k)
        lam = (2 - 2 * math.cos(k * math.pi / (grid.n - 1))) / grid.dx**2
        factor = (1 - 0.5j * lam * dt) / (1 + 0.5j * lam * dt)
        out = cn_linear_step(f, dt)
        np.testing.assert_allclose(out.values, factor * f.values, rtol=0, atol=1e-12)

    @pytest.mark.parametrize("k", [1, 5])
    def test_periodic_eigenmode_phase(self, k):
        grid = make_grid(0, 1, 1 / 64)
        n = grid.n
        dt = 1e-3
        mode = np.exp(2j * np.pi * k * np.arange(n) / n)
        lam = (2 - 2 * math.cos(2 * math.pi * k / n)) / grid.dx**2
        factor = (1 - 0.5j * lam * dt) / (1 + 0.5j * lam * dt)
        out = cn_linear_step(WaveField(grid, mode), dt, "periodic")
        np.testing.assert_allclose(out.values, factor * mode, rtol=0, atol=1e-12)

    def test_dirichlet_pins_end_nodes(self):
        grid = make_grid(-5, 5, 0.1)
        out = cn_linear_step(_random_field(grid, 2, pinned_ends=False), 1e-3)
        assert out.values[0] == 0.0
        assert out.values[-1] == 0.0

    @pytest.mark.parametrize("boundary", ["dirichlet", "periodic"])
    def test_matches_dense_solve(self, boundary):
        # gold check of the factorised solver against a dense linear solve
        grid = make_grid(0, 1, 1 / 40)
        n = grid.n
        dt = 3e-3
        r = dt / (2 * grid.dx**2)
        f = _random_field(grid, 11, pinned_ends=boundary == "dirichlet")
        v = f.values
        if boundary == "dirichlet":
            lhs = np.zeros((n - 2, n - 2), complex)
            for i in range(n - 2):
                lhs[i, i] = 1 + 2j * r
                if i > 0:
                    lhs[i, i - 1] = -1j * r
                if i < n - 3:
                    lhs[i, i + 1] = -1j * r
            rhs = (1 - 2j * r) * v[1:-1] + 1j * r * (v[:-2] + v[2:])
            expected = np.zeros(n, complex)
            expected[1:-1] = np.linalg.solve(lhs, rhs)
        else:
            lhs = np.zeros((n, n), complex)
            rhs_mat = np.zeros((n, n), complex)
            for i in range(n):
                lhs[i, i] = 1 + 2j * r
                lhs[i, (i - 1) % n] = -1j * r
                lhs[i, (i + 1) % n] = -1j * r
                rhs_mat[i, i] = 1 - 2j * r
                rhs_mat[i, (i - 1) % n] = 1j * r
                rhs_mat[i, (i + 1) % n] = 1j * r
            expected = np.linalg.solve(lhs, rhs_mat @ v)
        out = cn_linear_step(f, dt, boundary)
        np.testing.assert_allclose(out.values, expected, rtol=0, atol=1e-13)


class TestPhaseStep:
    def test_zero_g_identity(self):
        grid = make_grid(-5, 5, 0.1)
        f = _random_field(grid, 3)
        out = phase_step(f, np.zeros(grid.n), 0.1)
        assert np.array_equal(out.values, f.values)

    def test_unit_amplitude_rotation(self):
        grid = make_grid(0, 1, 0.5)
        f = WaveField(grid, np.ones(3, complex))
        out = phase_step(f, np.full(3, -2.0), 0.5)
        expected = complex(math.cos(1.0), math.sin(1.0))  # exp(+1i)
        np.testing.assert_allclose(out.values, expected, rtol=1e-15)

    def test_modulus_preserved(self):
        grid = make_grid(-5, 5, 0.01)
        f = _random_field(grid, 4, pinned_ends=False)
        g = nonlinearity(-2.0, quasiperiodic_profile(grid, 0.5))
        out = phase_step(f, g, 0.37)
        d_in, d_out = density(f), density(out)
        mask = d_in > 0
        assert np.max(np.abs(d_out[mask] / d_in[mask] - 1.0)) < 1e-15

    def test_small_and_large_angles_agree_with_libm(self):
        # straddle the Taylor/libm switch; both paths must match numpy's exp
        grid = make_grid(0, 1, 0.01)
        f = _random_field(grid, 5, pinned_ends=False)
        for dt in (1e-4, 0.3):
            g = np.full(grid.n, -2.0)
            out = phase_step(f, g, dt)
            ref = f.values * np.exp(-1j * g * density(f) * dt)
            np.testing.assert_allclose(out.values, ref, rtol=0, atol=1e-15)

    def test_profile_length_checked(self):
        grid = make_grid(0, 1, 0.5)
        with pytest.raises(ContractViolationError):
            phase_step(WaveField(grid, np.ones(3, complex)), np.zeros(5), 0.1)


def _quasi_setup(n_intervals, alpha=0.3, dt=0.01, t_final=1.0):
    grid = make_grid(-20, 20, 40 / n_intervals)
    spec = PerturbationSpec(kind="quasiperiodic", epsilon=alpha)
    schedule = build_schedule(spec, grid, t_final)
    params = SolverParams(dt=dt, t_final=t_final, sample_interval=t_final)
    return grid, schedule, params


class TestStrangStep:
    def test_zero_field(self):
        grid, schedule, params = _quasi_setup(64)
        out = strang_step(WaveField(grid, np.zeros(grid.n, complex)), schedule, 0.0, params)
        assert np.all(out.values == 0.0)

    def test_stationary_soliton_one_step(self):
        # paper-scale step on the analytic soliton: density essentially frozen
        grid = make_grid(-20, 20, 0.01)
        schedule = build_schedule(PerturbationSpec(kind="none"), grid, 1.0)
        params = SolverParams(dt=1e-4, t_final=1.0)
        f = soliton_initial(grid)
        out = strang_step(f, schedule, 0.0, params)
        assert np.max(np.abs(density(out) - density(f))) < 1e-8

    def test_local_richardson_ratio(self):
        # one step vs two half-steps, both against an 8x-refined reference
        grid, schedule, _ = _quasi_setup(256)
        f = soliton_initial(grid)
        dt = 0.02

        def advance(step_dt, n):
            params = SolverParams(dt=step_dt, t_final=1.0, sample_interval=1.0)
            cur = f
            for k in range(n):
                cur = strang_step(cur, schedule, k * step_dt, params)
            return cur.values

        ref = advance(dt / 8, 8)
        e1 = np.max(np.abs(advance(dt, 1) - ref))
        e2 = np.max(np.abs(advance(dt / 2, 2) - ref))
        assert 3.5 < e1 / e2 < 4.5


class TestEvolve:
    def test_observer_fencepost(self):
        grid = make_grid(-5, 5, 0.5)
        schedule = build_schedule(PerturbationSpec(kind="none"), grid, 1.0)
        params = SolverParams(dt=0.1, t_final=1.0, sample_interval=0.1)
        seen = []
        evolve(soliton_initial(grid), schedule, params, lambda t, f: seen.append(t))
        assert len(seen) == 11
        assert seen[0] == 0.0

    def test_matches_repeated_strang_steps_bitwise(self):
        grid, schedule, params = _quasi_setup(128, dt=0.01, t_final=0.05)
        f0 = soliton_initial(grid)
        final, _ = evolve(f0, schedule, params)
        manual = f0
        for k in range(5):
            manual = strang_step(manual, schedule, k * params.dt, params)
        assert np.array_equal(final.values, manual.values)

    def test_noise_free_soliton_short_run(self):
        from nlse1d import record

        grid = make_grid(-20, 20, 0.02)
        schedule = build_schedule(PerturbationSpec(kind="none"), grid, 2.0)
        params = SolverParams(dt=1e-3, t_final=2.0)
        f0 = soliton_initial(grid)
        final, records = evolve(f0, schedule, params, record)
        sech2 = 1.0 / np.cosh(grid.nodes) ** 2
        assert np.max(np.abs(density(final) - sech2)) < 1e-3
        # the sampled height at the origin stays put for a stationary soliton
        assert max(abs(r.height_x0 - 1.0) for r in records) < 1e-3
        # x = 0 phase advance is t (unit phase rate)
        i0 = grid.n // 2
        drift = final.values[i0] * np.exp(-1j * (2.0 % (2 * math.pi)))
        assert abs(np.angle(drift)) < 5e-3
        assert abs(power(final) - power(f0)) / power(f0) < 1e-9

    def test_power_conserved_with_noise(self):
        grid = make_grid(-20, 20, 0.05)
        spec = PerturbationSpec(kind="chaotic", epsilon=0.5, tau=2.0, seed=7)
        schedule = build_schedule(spec, grid, 20.0)
        params = SolverParams(dt=1e-3, t_final=20.0)
        f0 = soliton_initial(grid)
        final, _ = evolve(f0, schedule, params)
        assert abs(power(final) - power(f0)) / power(f0) < 1e-9

    def test_energy_drift_noise_free(self):
        # paper-scale dt over T = 20; the shadow Hamiltonian stays put
        grid = make_grid(-20, 20, 0.1)
        schedule = build_schedule(PerturbationSpec(kind="none"), grid, 20.0)
        params = SolverParams(dt=1e-4, t_final=20.0)
        f0 = soliton_initial(grid)
        final, _ = evolve(f0, schedule, params)
        e0 = discrete_energy(f0, -2.0)
        ef = discrete_energy(final, -2.0)
        assert abs(ef - e0) / abs(e0) < 1e-4

    def test_galilean_translation(self):
        grid = make_grid(-20, 20, 0.05)
        schedule = build_schedule(PerturbationSpec(kind="none"), grid, 10.0)
        params = SolverParams(dt=1e-3, t_final=10.0)
        f0 = soliton_initial(grid, velocity=1.0)
        final, _ = evolve(f0, schedule, params)
        speed = (centroid(final) - centroid(f0)) / 10.0
        assert speed == pytest.approx(1.0, rel=0.02)

    def test_periodic_evolve_matches_dirichlet_for_interior_soliton(self):
        # a centred soliton only feels the boundary through its amplitude
        # tails, sech(20) ~ 4e-9, so the two treatments agree to that level
        grid = make_grid(-20, 20, 0.1)
        schedule = build_schedule(PerturbationSpec(kind="none"), grid, 1.0)
        f0 = soliton_initial(grid)
        runs = {}
        for boundary in ("dirichlet", "periodic"):
            params = SolverParams(dt=1e-3, t_final=1.0, boundary=boundary, sample_interval=1.0)
            final, _ = evolve(f0, schedule, params)
            runs[boundary] = final.values
        diff = np.max(np.abs(runs["dirichlet"] - runs["periodic"]))
        assert diff < 1e-7
        assert abs(power(WaveField(grid, runs["periodic"])) - power(f0)) / power(f0) < 1e-12

    def test_lie_splitting_runs_and_conserves_power(self):
        grid, schedule, params = _quasi_setup(128, dt=0.01, t_final=1.0)
        params = SolverParams(dt=0.01, t_final=1.0, splitting="lie", sample_interval=1.0)
        f0 = soliton_initial(grid)
        final, _ = evolve(f0, schedule, params)
        assert abs(power(final) - power(f0)) / power(f0) < 1e-10

    def test_misaligned_refresh_rejected(self):
        grid = make_grid(-5, 5, 0.1)
        spec = PerturbationSpec(kind="random", epsilon=0.1, tau=0.25, seed=1)
        schedule = build_schedule(spec, grid, 1.0)
        params = SolverParams(dt=0.1, t_final=1.0)  # tau/dt = 2.5
        with pytest.raises(ConfigurationError):
            evolve(soliton_initial(grid), schedule, params)

    def test_divergence_guard(self, monkeypatch):
        # inject spurious per-step growth to exercise the abort path
        from nlse1d import propagator as prop

        def growing_rotate(self, w, gh):
            w *= 1.001
            return float(np.dot(w, w))

        monkeypatch.setattr(prop.StepWorkspace, "rotate_inplace", growing_rotate)
        grid = make_grid(-5, 5, 0.1)
        schedule = build_schedule(PerturbationSpec(kind="none"), grid, 1.0)
        params = SolverParams(dt=0.1, t_final=1.0)
        with pytest.raises(SimulationDivergedError) as exc:
            evolve(soliton_initial(grid), schedule, params)
        err = exc.value
        assert err.t == pytest.approx(0.1)
        assert err.field is not None
        assert np.isfinite(err.field.values).all()
        assert len(err.records) == 0  # no observer supplied

    def test_boundary_proximity_warning(self):
        grid = make_grid(-20, 20, 0.1)
        schedule = build_schedule(PerturbationSpec(kind="none"), grid, 1.0)
        params = SolverParams(dt=0.01, t_final=1.0)
        f0 = soliton_initial(grid, x0=18.9)
        with pytest.warns(RuntimeWarning, match="boundary"):
            evolve(f0, schedule, params)


class TestRk4Reference:
    def test_zero_field(self):
        grid = make_grid(0, 1, 0.125)
        f = WaveField(grid, np.zeros(grid.n, complex))
        out = rk4_reference_step(f, np.zeros(grid.n), 1e-3)
        assert np.all(out.values == 0.0)

    @pytest.mark.parametrize("k", [1, 5])
    def test_linear_eigenmode_phase(self, k):
        # g = 0: one step must match exp(-i lambda dt) to O((lambda dt)^5)
        grid = make_grid(0, 1, 1 / 63)
        dt = 1.5e-4  # inside the explicit stability bound 0.7 dx^2
        f = _dirichlet_mode(grid, k)
        lam = (2 - 2 * math.cos(k * math.pi / (grid.n - 1))) / grid.dx**2
        out = rk4_reference_step(f, np.zeros(grid.n), dt)
        ref = np.exp(-1j * lam * dt) * f.values
        assert np.max(np.abs(out.values - ref)) < (lam * dt) ** 5 / 100 + 1e-14

    def test_stability_guard(self):
        grid = make_grid(-20, 20, 0.05)
        f = soliton_initial(grid)
        with pytest.raises(ContractViolationError):
            rk4_reference_step(f, np.zeros(grid.n), 0.1)

    def test_oracle_matches_strang_noise_free(self):
        grid = make_grid(-20, 20, 40 / 255)
        assert grid.n == 256
        f0 = soliton_initial(grid)
        g = np.full(grid.n, -2.0)
        schedule = build_schedule(PerturbationSpec(kind="none"), grid, 1.0)
        params = SolverParams(dt=1e-3, t_final=1.0, sample_interval=1.0)
        ssc, _ = evolve(f0, schedule, params)
        rk4 = rk4_evolve(f0, g, 1e-3, 1000)
        assert np.max(np.abs(ssc.values - rk4.values)) < 1e-4


class TestWorkspaceValidation:
    def test_rejects_tiny_grid(self):
        with pytest.raises(ConfigurationError):
            StepWorkspace(make_grid(0, 0.5, 0.5), 1e-3)

    def test_rejects_bad_boundary(self):
        with pytest.raises(ConfigurationError):
            StepWorkspace(make_grid(0, 1, 0.1), 1e-3, "absorbing")

    def test_rejects_bad_dt(self):
        with pytest.raises(ConfigurationError):
            StepWorkspace(make_grid(0, 1, 0.1), -1e-3)
