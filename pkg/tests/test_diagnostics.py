"""Scalar diagnostics, the energy-balance residual, and ledger invariants."""

import numpy as np
import pytest

from spectralns.diagnostics import (
    DiagnosticsRecord,
    EnergyLedger,
    bkm_update,
    dissipation_rate,
    energy_residual,
    kinetic_energy,
    max_velocity,
    max_vorticity,
    power_input,
)
from spectralns.dynamics import (
    InitialConditionSpec,
    PhysicsParams,
    make_initial_condition,
)
from spectralns.grid import BOX_VOLUME, GridSpec, SpectralField
from spectralns.stepping import SimulationState, StepControl, advance


def single_mode_z(n=16, amplitude=1.0):
    g = GridSpec(n)
    c = np.zeros((3, n, n, n), dtype=np.complex128)
    c[2, 1, 0, 0] = -0.5j * amplitude
    c[2, -1 % n, 0, 0] = 0.5j * amplitude
    return SpectralField(c, g)


def make_record(step, t, **overrides):
    base = dict(
        step=step,
        t=t,
        dt=0.01,
        energy=1.0,
        dissipation=0.1,
        power_in=0.0,
        max_velocity=1.0,
        max_vorticity=1.0,
        bkm_integral=0.0,
        residual=0.0,
        residual_accum=0.0,
    )
    base.update(overrides)
    return DiagnosticsRecord(**base)


class TestScalars:
    def test_taylor_green_energy(self):
        g = GridSpec(16)
        u = make_initial_condition(InitialConditionSpec("taylor_green"), g)
        assert kinetic_energy(u) == pytest.approx(np.pi**3, rel=1e-12)

    def test_zero_field_scalars(self):
        u = SpectralField.zeros(GridSpec(8))
        assert kinetic_energy(u) == 0.0
        assert dissipation_rate(u, 0.5) == 0.0
        assert max_velocity(u) == 0.0
        assert max_vorticity(u) == 0.0

    def test_energy_quadratic_scaling(self):
        u = single_mode_z()
        u2 = SpectralField(2.0 * u.coeffs, u.grid)
        assert kinetic_energy(u2) == pytest.approx(4.0 * kinetic_energy(u), rel=1e-13)

    def test_single_mode_dissipation(self):
        # ||grad u||^2 of sin x over the box is (2 pi)^3 / 2
        u = single_mode_z()
        assert dissipation_rate(u, 1.0) == pytest.approx(BOX_VOLUME / 2.0, rel=1e-13)

    def test_dissipation_linear_in_nu(self):
        u = single_mode_z()
        assert dissipation_rate(u, 0.2) == pytest.approx(
            2.0 * dissipation_rate(u, 0.1), rel=1e-13
        )

    def test_power_without_forcing_is_zero(self):
        assert power_input(single_mode_z(), None) == 0.0

    def test_self_forcing_power_is_twice_energy(self):
        u = single_mode_z(amplitude=1.7)
        assert power_input(u, u) == pytest.approx(2.0 * kinetic_energy(u), rel=1e-13)

    def test_orthogonal_forcing_power_is_zero(self):
        g = GridSpec(16)
        u = single_mode_z()
        c = np.zeros((3, 16, 16, 16), dtype=np.complex128)
        c[0, 0, 1, 0] = -0.5j  # different mode, different component
        c[0, 0, -1 % 16, 0] = 0.5j
        assert power_input(u, SpectralField(c, g)) == 0.0

    def test_power_grid_mismatch_rejected(self):
        u = single_mode_z(16)
        f = single_mode_z(8)
        with pytest.raises(ValueError, match="grids"):
            power_input(u, f)

    def test_max_velocity_hits_grid_peak(self):
        # sin x attains 1 exactly at x = pi/2, a grid point for n = 16
        assert max_velocity(single_mode_z()) == pytest.approx(1.0, rel=1e-13)
        assert max_velocity(single_mode_z(amplitude=2.5)) == pytest.approx(2.5, rel=1e-13)

    def test_max_vorticity_of_shear_mode(self):
        # curl (0, 0, sin x) = (0, -cos x, 0)
        assert max_vorticity(single_mode_z()) == pytest.approx(1.0, rel=1e-13)

    def test_uniform_flow_has_no_vorticity(self):
        g = GridSpec(8)
        c = np.zeros((3, 8, 8, 8), dtype=np.complex128)
        c[1, 0, 0, 0] = 3.0
        assert max_vorticity(SpectralField(c, g)) <= 1e-13


class TestBkmUpdate:
    def test_constant_vorticity(self):
        acc = 0.0
        for _ in range(10):
            acc = bkm_update(acc, 2.5, 0.1)
        assert acc == pytest.approx(2.5, rel=1e-13)

    def test_left_sum_oracle(self):
        # omega(t_j) = t_j on [0, 1) at dt = 0.1: sum = 0.1 * 0.1 * (0+...+9)
        acc = 0.0
        for j in range(10):
            acc = bkm_update(acc, 0.1 * j, 0.1)
        assert acc == pytest.approx(0.45, rel=1e-14)

    def test_zero_dt_is_identity(self):
        assert bkm_update(1.23, 99.0, 0.0) == 1.23


class TestEnergyResidual:
    def test_exact_balance_without_rates(self):
        # constant D and P make the trapezoid mean exact
        dt, d, p = 0.1, 0.3, 0.1
        e_prev = 1.0
        e_next = e_prev - dt * d + dt * p
        r = energy_residual(e_prev, e_next, d, d, p, p, dt)
        assert r == pytest.approx(0.0, abs=1e-15)

    def test_linear_rates_cancel_in_correction(self):
        dt = 0.1
        d_prev, d_next = 0.2, 0.4  # linear in t: trapezoid already exact
        e_prev = 1.0
        e_next = e_prev - dt * 0.5 * (d_prev + d_next)
        r = energy_residual(
            e_prev, e_next, d_prev, d_next, 0.0, 0.0, dt,
            d_rate_prev=2.0, d_rate_next=2.0,
        )
        assert r == pytest.approx(0.0, abs=1e-15)

    def test_correction_recovers_cubic_quadrature(self):
        # D(t) = t^2 on [0, h]: plain trapezoid misses by h^3/6, the
        # endpoint-rate correction makes the mean exact
        h = 0.1
        e_prev = 1.0
        exact_integral = h**3 / 3.0
        e_next = e_prev - exact_integral
        plain = energy_residual(e_prev, e_next, 0.0, h**2, 0.0, 0.0, h)
        corrected = energy_residual(
            e_prev, e_next, 0.0, h**2, 0.0, 0.0, h,
            d_rate_prev=0.0, d_rate_next=2.0 * h,
        )
        assert abs(plain) == pytest.approx(h**3 / 6.0, rel=1e-10)
        assert corrected == pytest.approx(0.0, abs=1e-15)

    def test_per_step_residual_is_fifth_order(self):
        # halving dt on a smooth viscous run shrinks the first-step
        # residual by ~2^5; that is the integrator defect, not quadrature
        u0 = single_mode_z()
        params = PhysicsParams(nu=1.0, nonlinearity=False)

        def first_residual(dt):
            rows = []
            advance(
                SimulationState(field=u0),
                StepControl(t_end=4 * dt, fixed_dt=dt),
                params,
                observers=[lambda s, r: rows.append(r)],
            )
            return abs(rows[1].residual)

        ratio = first_residual(8e-3) / first_residual(4e-3)
        assert ratio == pytest.approx(32.0, rel=0.15)


class TestEnergyLedger:
    def test_append_and_access(self):
        ledger = EnergyLedger()
        ledger.append(make_record(0, 0.0))
        ledger.append(make_record(1, 0.01, bkm_integral=0.01))
        assert len(ledger) == 2
        assert ledger[0].step == 0
        assert ledger.last.step == 1
        assert [r.step for r in ledger] == [0, 1]

    def test_construct_from_iterable(self):
        ledger = EnergyLedger([make_record(0, 0.0), make_record(2, 0.02)])
        assert len(ledger) == 2

    def test_step_must_advance(self):
        ledger = EnergyLedger([make_record(3, 0.03)])
        with pytest.raises(ValueError, match="advance"):
            ledger.append(make_record(3, 0.04))

    def test_time_must_not_regress(self):
        ledger = EnergyLedger([make_record(0, 0.5)])
        with pytest.raises(ValueError, match="backwards"):
            ledger.append(make_record(1, 0.4))

    def test_bkm_must_be_nondecreasing(self):
        ledger = EnergyLedger([make_record(0, 0.0, bkm_integral=1.0)])
        with pytest.raises(ValueError, match="bkm"):
            ledger.append(make_record(1, 0.01, bkm_integral=0.5))

    def test_residual_accum_must_be_nondecreasing(self):
        ledger = EnergyLedger([make_record(0, 0.0, residual_accum=1.0)])
        with pytest.raises(ValueError, match="residual_accum"):
            ledger.append(make_record(1, 0.01, residual_accum=0.1))

    def test_empty_last_raises(self):
        with pytest.raises(ValueError, match="empty"):
            EnergyLedger().last
