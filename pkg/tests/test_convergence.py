"""Order fitting and the temporal, spatial, and combined refinement studies."""

import numpy as np
import pytest

from spectralns.convergence import (
    FLAG_EXACT,
    FLAG_MODEL_SKIPPED,
    FLAG_ORDER_RANGE,
    combined_study,
    estimate_temporal_constant,
    observed_order,
    spatial_study,
    temporal_study,
)
from spectralns.dynamics import InitialConditionSpec, PhysicsParams, make_initial_condition
from spectralns.grid import GridSpec

STOKES = PhysicsParams(nu=0.5, nonlinearity=False)
TG = InitialConditionSpec("taylor_green")
SILENT = InitialConditionSpec("taylor_green", amplitude=0.0)


class TestObservedOrder:
    def test_clean_fourth_order(self):
        rate, r2 = observed_order([1.0, 1.0 / 16, 1.0 / 256], [1.0, 0.5, 0.25])
        assert rate == pytest.approx(4.0, rel=1e-12)
        assert r2 == pytest.approx(1.0, abs=1e-12)

    def test_exponential_model(self):
        errors = np.exp([-1.0, -2.0, -3.0])
        rate, r2 = observed_order(errors, [1.0, 2.0, 3.0], model="exponential")
        assert rate == pytest.approx(-1.0, rel=1e-12)
        assert r2 == pytest.approx(1.0, abs=1e-12)

    def test_noisy_fourth_order(self):
        rng = np.random.default_rng(11)
        dts = np.array([4e-3, 2e-3, 1e-3, 5e-4, 2.5e-4])
        errors = dts**4 * (1.0 + 0.05 * rng.uniform(-1, 1, size=dts.size))
        rate, r2 = observed_order(errors, dts)
        assert 3.7 <= rate <= 4.3
        assert r2 > 0.99

    def test_validation(self):
        with pytest.raises(ValueError, match="three"):
            observed_order([1.0, 0.1], [1.0, 0.5])
        with pytest.raises(ValueError, match="positive"):
            observed_order([1.0, 0.0, 0.1], [1.0, 0.5, 0.25])
        with pytest.raises(ValueError, match="1-d"):
            observed_order([1.0, 0.1, 0.01], [1.0, 0.5])
        with pytest.raises(ValueError, match="coincide"):
            observed_order([1.0, 0.1, 0.01], [0.5, 0.5, 0.5])
        with pytest.raises(ValueError, match="model"):
            observed_order([1.0, 0.1, 0.01], [1.0, 0.5, 0.25], model="cubic")


class TestTemporalStudy:
    def test_viscous_mode_refines_at_fourth_order(self):
        # Stokes dynamics on band-limited data: consecutive dt halvings
        # shrink the error by ~16x
        report = temporal_study(
            TG, STOKES, GridSpec(8), t_final=0.02, dts=[4e-3, 2e-3, 1e-3]
        )
        assert report.kind == "temporal"
        assert report.parameters == (4e-3, 2e-3, 1e-3)
        ratios = [a / b for a, b in zip(report.errors, report.errors[1:])]
        for r in ratios:
            assert r == pytest.approx(16.0, rel=0.1)
        assert report.fitted_rate == pytest.approx(4.0, abs=0.2)
        assert report.flags == ()

    def test_zero_error_skips_fit(self):
        # amplitude 0 makes every run identical to the reference
        report = temporal_study(
            SILENT, STOKES, GridSpec(8), t_final=0.01, dts=[4e-3, 2e-3, 1e-3]
        )
        assert report.flags == (FLAG_EXACT,)
        assert report.fitted_rate is None
        assert report.fit_r2 is None
        assert set(report.errors) == {0.0}

    def test_validation(self):
        with pytest.raises(ValueError, match="three distinct"):
            temporal_study(TG, STOKES, GridSpec(8), 0.01, dts=[1e-3, 1e-3, 2e-3])
        with pytest.raises(ValueError, match="t_final"):
            temporal_study(TG, STOKES, GridSpec(8), 0.0, dts=[4e-3, 2e-3, 1e-3])
        with pytest.raises(ValueError, match="refined"):
            temporal_study(
                TG, STOKES, GridSpec(8), 0.01, dts=[4e-3, 2e-3, 1e-3], ref_refine=1
            )


class TestSpatialStudy:
    def test_band_limited_data_already_converged(self):
        # Stokes decay of Taylor-Green is resolved exactly on every grid,
        # so all errors sit at roundoff
        report = spatial_study(
            TG,
            STOKES,
            grid_sizes=[8, 12, 16],
            reference_n=32,
            t_final=0.01,
            dt=1e-3,
        )
        assert report.kind == "spatial"
        assert report.parameters == (2, 4, 5)  # retained cutoffs
        assert max(report.errors) <= 1e-12

    def test_zero_error_skips_fit(self):
        report = spatial_study(
            SILENT, STOKES, grid_sizes=[8, 12, 16], reference_n=32,
            t_final=0.01, dt=1e-3,
        )
        assert report.flags == (FLAG_EXACT,)
        assert report.fitted_rate is None

    def test_analytic_data_decays_exponentially(self):
        # errors track exp(-delta K); the fitted rate is the strip width
        ic = InitialConditionSpec("random_analytic", concentration=1.0, seed=7)
        report = spatial_study(
            ic,
            PhysicsParams(nu=0.1, nonlinearity=False),
            grid_sizes=[8, 12, 16],
            reference_n=32,
            t_final=0.005,
            dt=1e-3,
        )
        assert all(a > b for a, b in zip(report.errors, report.errors[1:]))
        assert report.fitted_rate == pytest.approx(1.0, rel=0.35)
        assert report.fit_r2 > 0.95

    def test_validation(self):
        with pytest.raises(ValueError, match="three distinct"):
            spatial_study(TG, STOKES, [8, 8, 12], 48, 0.01, 1e-3)
        with pytest.raises(ValueError, match="finer"):
            spatial_study(TG, STOKES, [8, 12, 16], 16, 0.01, 1e-3)
        with pytest.raises(ValueError, match="4x"):
            spatial_study(TG, STOKES, [8, 12, 16], 24, 0.01, 1e-3)


class TestCombinedStudy:
    def test_temporal_variation_attributed_to_dt(self):
        # band-limited data on one grid: only the dt^4 term can explain
        # the error variation
        report = combined_study(
            TG,
            STOKES,
            pairs=[(8, 4e-3), (8, 2e-3), (8, 1e-3)],
            reference=(32, 2.5e-4),
            t_final=0.02,
        )
        assert report.kind == "combined"
        assert report.model_coeffs is not None
        assert report.dominance == ("temporal", "temporal", "temporal")
        assert report.fit_r2 > 0.99

    def test_spatial_variation_attributed_to_truncation(self):
        # analytic data at one dt: the truncation term carries the decay
        ic = InitialConditionSpec("random_analytic", concentration=1.0, seed=3)
        report = combined_study(
            ic,
            PhysicsParams(nu=0.1, nonlinearity=False),
            pairs=[(8, 1e-3), (12, 1e-3), (16, 1e-3)],
            reference=(32, 1e-3),
            t_final=0.005,
        )
        assert all(a > b for a, b in zip(report.errors, report.errors[1:]))
        c_spatial, c_temporal, delta = report.model_coeffs
        assert c_spatial > 0.0 and delta > 0.0
        assert report.dominance[0] == "spatial"

    def test_duplicate_pair_skips_model(self):
        report = combined_study(
            TG,
            STOKES,
            pairs=[(8, 1e-3), (8, 1e-3)],
            reference=(32, 1e-3),
            t_final=0.005,
        )
        assert FLAG_MODEL_SKIPPED in report.flags
        assert report.model_coeffs is None
        assert report.dominance == ()

    def test_validation(self):
        with pytest.raises(ValueError, match="pair"):
            combined_study(TG, STOKES, pairs=[], reference=(32, 1e-3), t_final=0.01)
        with pytest.raises(ValueError, match="finer"):
            combined_study(
                TG, STOKES, pairs=[(16, 1e-3)], reference=(16, 1e-3), t_final=0.01
            )
        with pytest.raises(ValueError, match="reference dt"):
            combined_study(
                TG, STOKES, pairs=[(8, 1e-3)], reference=(32, 2e-3), t_final=0.01
            )


def test_temporal_constant_probe_is_consistent():
    # the Richardson estimate of the dt^4 constant should not depend much
    # on the probe step size
    u0 = make_initial_condition(TG, GridSpec(8))
    c_a = estimate_temporal_constant(u0, STOKES, dt=2e-3, t_probe=0.01)
    c_b = estimate_temporal_constant(u0, STOKES, dt=1e-3, t_probe=0.01)
    assert c_a > 0.0
    assert c_b == pytest.approx(c_a, rel=0.5)
