import numpy as np
import pytest

from kolmo import spectral as sp
from kolmo.errors import NonFiniteError

from oracles import fd_curl, fd_div

GRID = sp.Grid()


def laminar_expected_velocity(grid, params):
    _, yy = grid.mesh()
    return (params.re / params.n**2) * np.sin(params.n * yy)


class TestVelocityFromVorticity:
    def test_laminar_profile(self):
        p = sp.FlowParams(re=14.4, n=2)
        w = sp.laminar_state(GRID, p)
        u, v = sp.velocity_from_vorticity(w)
        assert np.allclose(u.to_physical(), laminar_expected_velocity(GRID, p), atol=1e-12)
        assert np.max(np.abs(v.to_physical())) < 1e-12
        assert abs(np.max(np.abs(u.to_physical())) - 14.4 / 4) < 1e-12

    def test_zero_field(self):
        w = sp.SpectralField.from_physical(GRID, np.zeros(GRID.shape))
        u, v = sp.velocity_from_vorticity(w)
        assert np.max(np.abs(u.to_physical())) == 0
        assert np.max(np.abs(v.to_physical())) == 0

    def test_single_x_mode(self):
        # w = cos(x): curl(u, v) = dv/dx - du/dy = cos(x) forces v = sin(x)
        xx, _ = GRID.mesh()
        w = sp.SpectralField.from_physical(GRID, np.cos(xx))
        u, v = sp.velocity_from_vorticity(w)
        assert np.max(np.abs(u.to_physical())) < 1e-12
        assert np.allclose(v.to_physical(), np.sin(xx), atol=1e-12)

    def test_fd_curl_divergence_oracle(self):
        w = sp.random_initial_condition(GRID, seed=11)
        u, v = sp.velocity_from_vorticity(w)
        up, vp = u.to_physical(), v.to_physical()
        wp = w.to_physical()
        # centered differences are 2nd order: compare at O(h^2) tolerance
        scale = np.max(np.abs(wp))
        assert np.max(np.abs(fd_curl(up, vp, GRID.lx, GRID.ly) - wp)) < 0.08 * scale
        assert np.max(np.abs(fd_div(up, vp, GRID.lx, GRID.ly))) < 0.05 * scale

    def test_divergence_free_spectral(self):
        kx, ky = GRID.wavenumbers()
        for seed in range(5):
            w = sp.random_initial_condition(GRID, seed=seed)
            u, v = sp.velocity_from_vorticity(w)
            div = 1j * kx * u.coeffs + 1j * ky * v.coeffs
            assert np.max(np.abs(div)) / GRID.npoints < 1e-10


class TestStep:
    def test_laminar_fixed_point_below_critical(self):
        p = sp.FlowParams(re=3.0, n=2, dt=0.01)
        assert p.re < sp.critical_reynolds(2)
        w = sp.laminar_state(GRID, p)
        w1 = sp.step(w, p)
        assert np.max(np.abs(w1.to_physical() - w.to_physical())) < 1e-10

    def test_forcing_response_from_rest(self):
        p = sp.FlowParams(re=3.0, n=2, dt=1e-3)
        w = sp.SpectralField.from_physical(GRID, np.zeros(GRID.shape))
        w1 = sp.step(w, p)
        _, yy = GRID.mesh()
        expected = -p.n * np.cos(p.n * yy) * p.dt
        assert np.max(np.abs(w1.to_physical() - expected)) < 5 * p.dt**2

    def test_perturbation_grows_above_critical(self):
        p = sp.FlowParams(re=14.4, n=2, dt=0.01)
        lam = sp.laminar_state(GRID, p)
        pert = sp.random_initial_condition(GRID, seed=4, ke=1e-6)
        w = sp.SpectralField(GRID, lam.coeffs + pert.coeffs)
        ke_lam = p.re**2 / (4 * p.n**4)
        d0 = abs(sp.diagnostics(w, p).ke - ke_lam)
        w = sp.advance(w, p, 150.0)
        d1 = abs(sp.diagnostics(w, p).ke - ke_lam)
        assert d1 > 100 * d0

    def test_hermitian_preserved(self):
        p = sp.FlowParams(re=14.4, n=2, dt=0.01)
        w = sp.random_initial_condition(GRID, seed=0)
        for _ in range(5):
            w = sp.step(w, p)
        assert w.hermitian_residual() < 1e-12
        assert abs(w.coeffs[0, 0]) == 0

    def test_nonfinite_raises(self):
        p = sp.FlowParams(re=1e6, n=2, dt=50.0)
        w = sp.random_initial_condition(GRID, seed=1, ke=100.0)
        with pytest.raises(NonFiniteError), np.errstate(all="ignore"):
            for _ in range(200):
                w = sp.step(w, p)


class TestDiagnostics:
    def test_laminar_values(self):
        for re in (3.0, 14.4):
            p = sp.FlowParams(re=re, n=2)
            d = sp.diagnostics(sp.laminar_state(GRID, p), p)
            assert abs(d.ke - re**2 / (4 * p.n**4)) < 1e-8
            assert abs(d.d - re / (2 * p.n**2)) < 1e-8
            assert abs(d.i - re / (2 * p.n**2)) < 1e-8

    def test_zero_field(self):
        p = sp.FlowParams(re=5.0, n=2)
        d = sp.diagnostics(sp.SpectralField.from_physical(GRID, np.zeros(GRID.shape)), p)
        assert d.ke == 0 and d.d == 0 and d.i == 0

    def test_real_space_quadrature_oracle(self):
        p = sp.FlowParams(re=9.0, n=2, dt=0.01)
        w = sp.advance(sp.random_initial_condition(GRID, seed=3), p, 5.0)
        d = sp.diagnostics(w, p)
        u, v = sp.velocity_from_vorticity(w)
        up, vp, wp = u.to_physical(), v.to_physical(), w.to_physical()
        _, yy = GRID.mesh()
        # uniform periodic grid: the trapezoid rule is the plain mean
        ke = 0.5 * np.mean(up**2 + vp**2)
        dd = np.mean(wp**2) / p.re
        ii = np.mean(up * np.sin(p.n * yy))
        assert abs(d.ke - ke) < 1e-10
        assert abs(d.d - dd) < 1e-10
        assert abs(d.i - ii) < 1e-10

    def test_series_observables_match_single(self):
        p = sp.FlowParams(re=9.0, n=2, dt=0.01)
        ser = sp.simulate(sp.random_initial_condition(GRID, seed=3), p, 10.0, 5.0)
        obs = sp.series_observables(ser.snapshots, GRID, p)
        for k in range(ser.count):
            f = sp.SpectralField.from_physical(GRID, ser.snapshots[k])
            d = sp.diagnostics(f, p)
            assert abs(obs["ke"][k] - d.ke) < 1e-12
            assert abs(obs["d"][k] - d.d) < 1e-12
            assert abs(obs["i"][k] - d.i) < 1e-12
            a01 = f.mode(0, 1)
            assert abs(obs["re_a01"][k] - a01.real) < 1e-12
            assert abs(obs["im_a01"][k] - a01.imag) < 1e-12


class TestSimulate:
    def test_zero_duration_returns_only_ic(self):
        p = sp.FlowParams(re=5.0, n=2, dt=0.01)
        ic = sp.random_initial_condition(GRID, seed=0)
        ser = sp.simulate(ic, p, 0.0, 5.0)
        assert ser.count == 1
        assert np.allclose(ser.snapshots[0], ic.to_physical())

    def test_snapshot_count(self):
        p = sp.FlowParams(re=5.0, n=2, dt=0.01)
        ic = sp.random_initial_condition(GRID, seed=0)
        ser = sp.simulate(ic, p, 20.0, 5.0)
        assert ser.count == 5
        assert np.allclose(ser.times, [0, 5, 10, 15, 20])

    def test_save_every_must_divide(self):
        p = sp.FlowParams(re=5.0, n=2, dt=0.01)
        ic = sp.random_initial_condition(GRID, seed=0)
        with pytest.raises(ValueError):
            sp.simulate(ic, p, 1.0, 0.0333)

    def test_divergence_free_snapshots(self):
        p = sp.FlowParams(re=14.4, n=2, dt=0.01)
        ser = sp.simulate(sp.random_initial_condition(GRID, seed=2), p, 20.0, 5.0)
        kx, ky = GRID.wavenumbers()
        for snap in ser.snapshots:
            u, v = sp.velocity_from_vorticity(sp.SpectralField.from_physical(GRID, snap))
            div = 1j * kx * u.coeffs + 1j * ky * v.coeffs
            assert np.max(np.abs(div)) / GRID.npoints < 1e-10


def test_energy_budget_second_order():
    # residual of KE(T) - KE(0) = int (I - D) dt shrinks ~4x when dt halves
    p_coarse = sp.FlowParams(re=14.4, n=2, dt=0.01)
    ic = sp.advance(sp.random_initial_condition(GRID, seed=9), p_coarse, 20.0)

    def residual(dt):
        from scipy.integrate import simpson

        p = sp.FlowParams(re=14.4, n=2, dt=dt)
        _, diags = sp.simulate(ic, p, 20.0, 20.0, record_diagnostics=True)
        t = np.array([d.t for d in diags])
        imd = np.array([d.i - d.d for d in diags])
        return abs(diags[-1].ke - diags[0].ke - simpson(imd, x=t))

    r1, r2 = residual(0.01), residual(0.005)
    assert r1 / r2 > 3.0, (r1, r2)


def test_random_ic_properties():
    f = sp.random_initial_condition(GRID, seed=5, ke=1.0)
    p = sp.FlowParams(re=1.0, n=1)
    assert abs(sp.diagnostics(f, p).ke - 1.0) < 1e-12
    assert f.hermitian_residual() < 1e-12
    assert abs(f.coeffs[0, 0]) == 0
