import itertools
import math
import warnings

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st
from scipy import optimize

from acceptorloss import lindblad as lb
from acceptorloss.errors import (
    ApproximationInvalid,
    DegenerateSteadyState,
    ValidationError,
    ZeroTemperatureSaturation,
)

I4 = np.eye(4) / 4
SQ2 = math.sqrt(2)

params = st.builds(
    lb.FourLevelParams,
    gamma_prime=st.floats(0.1, 10),
    gamma_tilde=st.floats(0.0, 10),
    nbar=st.floats(0.0, 5),
    omega_rabi=st.complex_numbers(max_magnitude=20, allow_nan=False, allow_infinity=False),
    delta_big=st.floats(-100, 100),
    delta_small=st.floats(-100, 100),
)


def random_density(rng):
    a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


def element_rhs(p, rho, field_on):
    """Right-hand sides of the equations of motion, entry by entry."""
    g = p.gamma_prime + p.gamma_tilde
    gp, gt, n = p.gamma_prime, p.gamma_tilde, p.nbar
    om, omc = complex(p.omega_rabi), complex(p.omega_rabi).conjugate()
    D, d = (p.delta_big, p.delta_small) if field_on else (0.0, 0.0)
    r = lambda i, j: rho[i - 1, j - 1]  # noqa: E731
    return {
        (1, 1): -g * n * r(1, 1) + (1 + n) * (gp * r(3, 3) + gt * r(4, 4)) + 1j * om * r(1, 3) - 1j * omc * r(3, 1),
        (2, 2): -g * n * r(2, 2) + (1 + n) * (gt * r(3, 3) + gp * r(4, 4)) + 1j * om * r(2, 4) - 1j * omc * r(4, 2),
        (3, 3): -g * (1 + n) * r(3, 3) + n * (gt * r(2, 2) + gp * r(1, 1)) + 1j * omc * r(3, 1) - 1j * om * r(1, 3),
        (1, 3): -g * (0.5 + n) * r(1, 3) + 1j * omc * (r(1, 1) - r(3, 3)),
        (2, 4): -g * (0.5 + n) * r(2, 4) + 1j * (d - D) * r(2, 4) + 1j * omc * (r(2, 2) - r(4, 4)),
        (1, 2): -g * n * r(1, 2) + 1j * D * r(1, 2) + 1j * om * r(1, 4) - 1j * omc * r(3, 2),
        (1, 4): -g * (0.5 + n) * r(1, 4) + 1j * d * r(1, 4) + 1j * omc * (r(1, 2) - r(3, 4)),
        (2, 3): -g * (0.5 + n) * r(2, 3) - 1j * D * r(2, 3) + 1j * omc * (r(2, 1) - r(4, 3)),
        (3, 4): -g * (1 + n) * r(3, 4) + 1j * d * r(3, 4) + 1j * omc * r(3, 2) - 1j * om * r(1, 4),
    }


class TestParams:
    @pytest.mark.parametrize("kw", [dict(gamma_prime=0), dict(gamma_prime=1, gamma_tilde=-1),
                                    dict(gamma_prime=1, nbar=-0.1)])
    def test_invalid(self, kw):
        with pytest.raises(ValidationError):
            lb.FourLevelParams(**kw)


class TestCollapseOperators:
    def test_count(self):
        assert len(lb.collapse_operators(lb.FourLevelParams(1, 1, 1))) == 8

    def test_zero_temperature_upward_vanish(self):
        ops = lb.collapse_operators(lb.FourLevelParams(1.0, 0.7, 0.0))
        for k in (0, 2, 4, 6):
            assert not np.any(ops[k])
        for k in (1, 3, 5, 7):
            assert np.any(ops[k])

    def test_no_cross_branch(self):
        ops = lb.collapse_operators(lb.FourLevelParams(1.0, 0.0, 0.5))
        allowed = {(2, 0), (0, 2), (3, 1), (1, 3)}
        for op in ops:
            for i, j in zip(*np.nonzero(op)):
                assert (i, j) in allowed

    def test_weight(self):
        c2 = lb.collapse_operators(lb.FourLevelParams(1.0, 0.0, 1.0))[1]
        assert c2[0, 2] == pytest.approx(math.sqrt(2))


class TestLiouvillian:
    def test_dark_ground_state(self):
        L = lb.build_liouvillian(lb.FourLevelParams(1.0, 1.0, 0.0))
        assert np.abs(L(np.diag([0.5, 0.5, 0, 0]))).max() == 0

    @settings(max_examples=60, deadline=None)
    @given(params, st.booleans())
    def test_trace_preserving(self, p, on):
        L = lb.build_liouvillian(p, on)
        left = np.eye(4).reshape(16) @ L.matrix
        assert np.abs(left).max() < 1e-12 * max(1.0, np.abs(L.matrix).max())

    @settings(max_examples=60, deadline=None)
    @given(params, st.booleans(), st.integers(0, 2**32 - 1))
    def test_matches_elementwise_equations(self, p, on, seed):
        rho = random_density(np.random.default_rng(seed))
        drho = lb.build_liouvillian(p, on)(rho)
        scale = max(1.0, np.abs(lb.build_liouvillian(p, on).matrix).max())
        for (i, j), rhs in element_rhs(p, rho, on).items():
            assert abs(drho[i - 1, j - 1] - rhs) < 1e-12 * scale, (i, j)

    def test_spin_relaxation_hook_off_by_default(self):
        assert lb.spin_relaxation_operators(lb.FourLevelParams(1.0)) == []


class TestNumericSteadyState:
    def test_ground_state_degenerate_without_initial(self):
        L = lb.build_liouvillian(lb.FourLevelParams(1.0, 1.0, 0.0))
        with pytest.raises(DegenerateSteadyState):
            lb.steady_state_numeric(L)

    def test_ground_state_with_initial(self):
        L = lb.build_liouvillian(lb.FourLevelParams(1.0, 1.0, 0.0))
        rho = lb.steady_state_numeric(L, I4)
        np.testing.assert_allclose(lb.populations(rho), [0.5, 0.5, 0, 0], atol=1e-12)

    def test_decoupled_sectors_degenerate(self):
        L = lb.build_liouvillian(lb.FourLevelParams(1.0, 0.0, 0.3, omega_rabi=1.0))
        with pytest.raises(DegenerateSteadyState) as exc:
            lb.steady_state_numeric(L)
        assert exc.value.dimension >= 2

    def test_projection_equals_long_time_limit(self):
        p = lb.FourLevelParams(1.0, 0.0, 0.3, omega_rabi=0.8)
        L = lb.build_liouvillian(p)
        rho0 = np.diag([0.7, 0.1, 0.15, 0.05]).astype(complex)
        rho = lb.steady_state_numeric(L, rho0)
        np.testing.assert_allclose(lb.evolve(L, rho0, 200.0), rho, atol=1e-9)

    def test_strong_drive_equalizes(self):
        p = lb.FourLevelParams(1.0, 0.5, 0.2, omega_rabi=1e3)
        rho = lb.steady_state_numeric(lb.build_liouvillian(p))
        np.testing.assert_allclose(lb.populations(rho), 0.25, atol=1e-5)

    def test_field_pumps_into_dark_state(self):
        p = lb.FourLevelParams(1.0, 1.0, 0.0, omega_rabi=5.0, delta_big=5e4)
        rho = lb.steady_state_numeric(lb.build_liouvillian(p, True), I4)
        assert lb.populations(rho)[1] > 0.999

    @settings(max_examples=40, deadline=None)
    @given(params, st.booleans())
    def test_valid_density_matrix(self, p, on):
        assume(p.gamma_tilde > 1e-3 and p.nbar > 1e-3)
        L = lb.build_liouvillian(p, on)
        rho = lb.steady_state_numeric(L)
        assert lb.is_density_matrix(rho, tol=1e-9)
        assert np.abs(L(rho)).max() < 1e-9 * max(1.0, np.abs(L.matrix).max())


class TestAnalyticZeroField:
    def test_undriven(self):
        n = 0.37
        rho = lb.steady_state_analytic_zero_field(lb.FourLevelParams(1.0, 2.0, n))
        pops = lb.populations(rho)
        np.testing.assert_allclose(pops[:2], (1 + n) / (2 * (1 + 2 * n)))
        np.testing.assert_allclose(pops[2:], n / (2 * (1 + 2 * n)))
        assert pops[2] / pops[0] == pytest.approx(n / (1 + n))

    def test_infinite_drive(self):
        rho = lb.steady_state_analytic_zero_field(lb.FourLevelParams(1.0, 1.0, 0.1, omega_rabi=1e8))
        np.testing.assert_allclose(lb.populations(rho), 0.25, atol=1e-12)

    @settings(max_examples=60, deadline=None)
    @given(
        st.floats(0.1, 10), st.floats(0, 3), st.floats(0, 2),
        st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False),
    )
    def test_matches_numeric(self, gp, b, n, om):
        p = lb.FourLevelParams(gp, b * gp, n, om)
        num = lb.steady_state_numeric(lb.build_liouvillian(p), I4)
        ana = lb.steady_state_analytic_zero_field(p)
        np.testing.assert_allclose(lb.populations(num), lb.populations(ana), atol=1e-9)


class TestAnalyticField:
    def test_undriven_is_thermal(self):
        p = lb.FourLevelParams(1.0, 0.4, 0.3, delta_big=10.0)
        np.testing.assert_allclose(
            lb.populations(lb.steady_state_analytic_field(p)),
            lb.populations(lb.steady_state_analytic_zero_field(p)),
            rtol=1e-13,
        )

    def test_polarized(self):
        p = lb.FourLevelParams(1.0, 1.0, 1e-4, omega_rabi=100.0, delta_big=1e7)
        assert lb.populations(lb.steady_state_analytic_field(p))[1] > 0.999

    def test_reference_point(self):
        # R = 1 Hz at nbar = 0.1, gamma' = gamma~ = 1 Hz: |Omega|^2 = R (1 + 2 nbar)(gamma' + gamma~) / 4
        om = math.sqrt(1.0 * 1.2 * 2.0 / 4.0)
        p = lb.FourLevelParams(1.0, 1.0, 0.1, omega_rabi=om, delta_big=1e6 * om)
        assert p.pumping_rate() == pytest.approx(1.0)
        num = lb.steady_state_numeric(lb.build_liouvillian(p, True))
        ana = lb.steady_state_analytic_field(p)
        np.testing.assert_allclose(lb.populations(num), lb.populations(ana), atol=1e-6)

    def test_warns_outside_secular_regime(self):
        p = lb.FourLevelParams(1.0, 1.0, 0.1, omega_rabi=1.0, delta_big=5.0)
        with pytest.warns(ApproximationInvalid):
            lb.steady_state_analytic_field(p)

    def test_no_warning_inside_regime(self):
        p = lb.FourLevelParams(1.0, 1.0, 0.1, omega_rabi=1.0, delta_big=50.0)
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            lb.steady_state_analytic_field(p)

    @settings(max_examples=60, deadline=None)
    @given(st.floats(0.1, 10), st.floats(0, 5), st.floats(0, 3), st.floats(1e-6, 1e3))
    def test_population_trapping_direction(self, gp, b, n, om):
        p = lb.FourLevelParams(gp, b * gp, n, om, delta_big=1e9)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            pops = lb.populations(lb.steady_state_analytic_field(p))
        assert pops[1] >= pops[0] - 1e-15

    def test_discrepancy_grows_as_detuning_shrinks(self):
        om = 1.0
        errs = []
        for ratio in [1e5, 1e4, 1e3, 1e2, 1e1]:
            p = lb.FourLevelParams(1.0, 1.0, 0.5, omega_rabi=om, delta_big=ratio * om)
            num = lb.steady_state_numeric(lb.build_liouvillian(p, True))
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                ana = lb.steady_state_analytic_field(p)
            errs.append(np.abs(lb.populations(num) - lb.populations(ana)).max())
        assert errs[1] < 1e-5
        assert all(a < b for a, b in zip(errs, errs[1:]))


class TestCriticalRabi:
    def test_zero_temperature_value(self):
        p = lb.FourLevelParams(0.6, 0.4, 0.0)
        assert lb.critical_rabi_zero_field(p) == pytest.approx(math.sqrt((SQ2 - 1) / 8))
        assert math.sqrt((SQ2 - 1) / 8) == pytest.approx(0.22754, abs=1e-5)

    def test_nbar_scaling(self):
        a = lb.critical_rabi_zero_field(lb.FourLevelParams(1.0, 1.0, 0.3))
        b = lb.critical_rabi_zero_field(lb.FourLevelParams(1.0, 1.0, 0.6))
        assert (b / a) ** 2 == pytest.approx((2 * 0.6 + 1) ** 2 / (2 * 0.3 + 1) ** 2)

    @pytest.mark.parametrize("n,b", [(0.0, 0.0), (0.1, 1.0), (1.0, 0.3), (2.0, 3.0)])
    def test_zero_field_matches_bisection(self, n, b):
        p = lb.FourLevelParams(1.0, b, n)
        assert lb.critical_rabi_numeric(p, False, I4) == pytest.approx(lb.critical_rabi_zero_field(p), rel=1e-6)

    def test_field_rejects_zero_temperature(self):
        with pytest.raises(ZeroTemperatureSaturation):
            lb.critical_rabi_field(lb.FourLevelParams(1.0, 1.0, 0.0))

    def test_field_matches_analytic_bisection(self):
        p = lb.FourLevelParams(1.0, 1.0, 0.1)
        target = lb.thermal_population_difference(0.1) / SQ2

        def excess(om):
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                return lb.population_difference(lb.steady_state_analytic_field(p.with_omega(om))) - target

        root = optimize.brentq(excess, 1e-9, 10.0, xtol=1e-15, rtol=1e-14)
        assert root == pytest.approx(lb.critical_rabi_field(p), rel=1e-6)

    def test_field_matches_full_numeric(self):
        p = lb.FourLevelParams(1.0, 1.0, 0.1, delta_big=1e6)
        assert lb.critical_rabi_numeric(p, True) == pytest.approx(lb.critical_rabi_field(p), rel=1e-6)

    @pytest.mark.parametrize("field_on", [False, True])
    def test_definition_consistency(self, field_on):
        p = lb.FourLevelParams(1.0, 0.5, 0.4, delta_big=1e7)
        om = lb.critical_rabi_field(p) if field_on else lb.critical_rabi_zero_field(p)
        rho = lb.steady_state_numeric(lb.build_liouvillian(p.with_omega(om), field_on), I4)
        assert lb.population_difference(rho) == pytest.approx(1 / (SQ2 * (4 * 0.4 + 2)), abs=1e-6)

    def test_high_temperature_limit(self):
        b = 0.8
        p = lb.FourLevelParams(1.0, b, 1e4)
        ratio = (lb.critical_rabi_zero_field(p) / lb.critical_rabi_field(p)) ** 2
        assert ratio == pytest.approx(1 + b / 2, rel=1e-6)


class TestSaturationRatio:
    def test_reference_value(self):
        assert lb.saturation_ratio(0.1, 1.0) == pytest.approx(1 + 2 * (1 / (8 * 0.1 * 1.1)) + 0.5, rel=1e-15)
        assert lb.saturation_ratio(0.1, 1.0) == pytest.approx(3.77273, abs=1e-5)

    def test_limit(self):
        assert lb.saturation_ratio(1e6, 2.0) == pytest.approx(2.0, rel=1e-9)

    def test_monotone_in_nbar(self):
        r = [lb.saturation_ratio(n, 1.0) for n in np.geomspace(1e-3, 1e3, 200)]
        assert all(a > b for a, b in zip(r, r[1:]))

    @pytest.mark.parametrize("n", [0.0, -1.0])
    def test_rejects_nonpositive(self, n):
        with pytest.raises(ValidationError):
            lb.saturation_ratio(n, 1.0)

    @settings(max_examples=100, deadline=None)
    @given(st.floats(1e-3, 1e3), st.floats(0, 10))
    def test_greater_than_one_and_equals_rabi_ratio(self, n, b):
        r = lb.saturation_ratio(n, b)
        assert r > 1
        p = lb.FourLevelParams(1.0, b, n)
        assert (lb.critical_rabi_zero_field(p) / lb.critical_rabi_field(p)) ** 2 == pytest.approx(r, rel=1e-9)


class TestThermal:
    def test_reference(self):
        assert lb.nbar_from_temperature(6.1e9, 0.075) == pytest.approx(0.0206, abs=5e-5)

    def test_boltzmann_asymptote(self):
        from acceptorloss import constants as const

        x = const.H * 10e9 / (const.K_B * 0.02)
        assert lb.nbar_from_temperature(10e9, 0.02) == pytest.approx(math.exp(-x), rel=1e-9)

    @settings(max_examples=100, deadline=None)
    @given(st.floats(1e8, 1e11), st.floats(1e-3, 10))
    def test_round_trip(self, f, T):
        n = lb.nbar_from_temperature(f, T)
        assume(n > 1e-300)
        assert lb.temperature_from_nbar(f, n) == pytest.approx(T, rel=1e-9)


class TestEvolve:
    def test_zero_time(self):
        L = lb.build_liouvillian(lb.FourLevelParams(1.0, 1.0, 0.2, 1.0))
        rho0 = random_density(np.random.default_rng(1))
        np.testing.assert_array_equal(lb.evolve(L, rho0, 0.0), rho0)

    @pytest.mark.parametrize("method", ["expm", "ode"])
    def test_long_time_limit(self, method):
        p = lb.FourLevelParams(1.0, 0.5, 0.3, omega_rabi=0.7 + 0.2j, delta_big=3.0, delta_small=1.0)
        L = lb.build_liouvillian(p, True)
        rho = lb.evolve(L, random_density(np.random.default_rng(2)), 80.0, method=method)
        np.testing.assert_allclose(rho, lb.steady_state_numeric(L), atol=1e-6)

    @pytest.mark.parametrize("t", [0.1, 0.5, 2.0, 7.0])
    def test_two_channel_decay(self, t):
        gp, gt = 1.3, 0.4
        L = lb.build_liouvillian(lb.FourLevelParams(gp, gt, 0.0))
        rho0 = np.zeros((4, 4), dtype=complex)
        rho0[2, 2] = 1.0
        rho = lb.evolve(L, rho0, t)
        decay = 1 - math.exp(-(gp + gt) * t)
        assert rho[0, 0].real == pytest.approx(gp / (gp + gt) * decay, abs=1e-12)
        assert rho[1, 1].real == pytest.approx(gt / (gp + gt) * decay, abs=1e-12)

    @settings(max_examples=25, deadline=None)
    @given(params, st.booleans(), st.floats(0.01, 5.0), st.integers(0, 2**32 - 1))
    def test_trajectory_stays_physical(self, p, on, t, seed):
        L = lb.build_liouvillian(p, on)
        rho0 = random_density(np.random.default_rng(seed))
        for ti in np.linspace(0, t, 4):
            rho = lb.evolve(L, rho0, ti)
            assert abs(np.trace(rho) - 1) < 1e-9
            assert np.linalg.norm(rho - rho.conj().T) < 1e-9
            assert np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min() > -1e-8

    def test_methods_agree(self):
        p = lb.FourLevelParams(1.0, 0.5, 0.3, omega_rabi=2.0)
        L = lb.build_liouvillian(p)
        rho0 = random_density(np.random.default_rng(3))
        np.testing.assert_allclose(lb.evolve(L, rho0, 1.5), lb.evolve(L, rho0, 1.5, "ode"), atol=1e-8)

    def test_negative_time(self):
        with pytest.raises(ValidationError):
            lb.evolve(lb.build_liouvillian(lb.FourLevelParams(1.0)), I4, -1.0)


def test_zero_field_grid_smoke():
    # the full 125-point comparison lives in the acceptance suite
    for n, b, w in itertools.product([0.0, 1.0], [0.0, 3.0], [0.0, 10.0]):
        p = lb.FourLevelParams(1.0, b, n, w)
        num = lb.steady_state_numeric(lb.build_liouvillian(p), I4)
        np.testing.assert_allclose(
            lb.populations(num), lb.populations(lb.steady_state_analytic_zero_field(p)), atol=1e-9
        )
