"""
Tests for psi(x, t): closed forms, quadrature paths and derived integrals
"""
import numpy as np
import pytest

from deltawell.eigenbasis import PotentialConfig
from deltawell.errors import ConvergenceError, DomainError, UnsupportedError
from deltawell.propagator import (CLOSED_FORM, CONTOUR, QUADRATURE, ComplexTimeFactor, WaveField,
                                  asymptotic_psi, norm, normalization_c1, psi_closed_form,
                                  psi_square_pulse, region_two_centroid, square_pulse_c1)
from deltawell.spectral import (gaussian, normalization_integral, reconstruct_spectral, square_pulse,
                                tabulated)

SAMPLE_X = np.array([0.5, 2.0, 3.0, 4.5, 6.0, 9.0])
ACCEPTANCE_X = np.array([0.5, 1.5, 2.9, 3.1, 6.0])
ACCEPTANCE_T = [0.0, 0.3, 1.5, 5.0]
RANDOM_TIMES = np.random.default_rng(20).uniform(0.0, 5.0, 10)


class TestClosedForm:
    """Test the gaussian-spectrum closed form"""

    def test_example_value(self, reference_config):
        """Test x = 1 at t = 0 against the hand-evaluated expression"""
        c1 = normalization_c1(0.5, reference_config)
        expected = c1 * np.sqrt(np.pi / 2) * 8 * np.exp(-2.0)
        assert psi_closed_form(1.0, 0.0, 0.5, reference_config, c1) == pytest.approx(expected, rel=1e-14)

    def test_zero_at_wall(self, gaussian_field):
        """Test psi vanishes for x <= 0"""
        np.testing.assert_array_equal(gaussian_field.psi(np.array([-1.0, 0.0]), 0.7), 0)

    @pytest.mark.parametrize('t', [0.0, 0.3, 1.5, 20.0])
    def test_continuous_at_barrier(self, gaussian_field, t):
        """Test both region formulas meet at x = L"""
        below, above = gaussian_field.psi(np.array([3.0 - 1e-9, 3.0 + 1e-9]), t)
        assert below == pytest.approx(above, abs=1e-8)

    @pytest.mark.parametrize('field_name', ['gaussian_field', 'square_field'])
    def test_region_formulas_agree_at_barrier(self, request, field_name):
        """Test the region II formula one ulp past L against region I at L"""
        wf = request.getfixturevalue(field_name)
        just_outside = np.nextafter(3.0, np.inf)
        at_barrier = wf.psi(np.full(RANDOM_TIMES.size, 3.0), RANDOM_TIMES)
        outside = wf.psi(np.full(RANDOM_TIMES.size, just_outside), RANDOM_TIMES)
        np.testing.assert_allclose(outside, at_barrier, rtol=0, atol=1e-10)

    def test_derivative_jump_in_time(self, gaussian_field):
        """Test psi'(L+, t) - psi'(L-, t) = 2 V0 psi(L, t) by one-sided differences"""
        L, h = 3.0, 1e-5
        t = RANDOM_TIMES[None, :]
        right = gaussian_field.psi(np.array([np.nextafter(L, np.inf), L + h, L + 2 * h])[:, None], t)
        left = gaussian_field.psi(np.array([L, L - h, L - 2 * h])[:, None], t)
        slope_right = (-3 * right[0] + 4 * right[1] - right[2]) / (2 * h)
        slope_left = (3 * left[0] - 4 * left[1] + left[2]) / (2 * h)
        jump = 2 * gaussian_field.cfg.V0 * left[0]
        np.testing.assert_allclose(slope_right - slope_left, jump, rtol=0, atol=1e-6)

    def test_complex_time_factor(self):
        """Test a = K^2 + it and its -3/2 power"""
        factor = ComplexTimeFactor(0.5, 2.0)
        assert factor.value == 0.25 + 2j
        assert factor.power() == pytest.approx((0.25 + 2j) ** -1.5)

    def test_broadcast(self, gaussian_field):
        """Test x and t broadcast against each other"""
        values = gaussian_field.psi(SAMPLE_X[:, None], np.array([0.0, 1.0])[None, :])
        assert values.shape == (SAMPLE_X.size, 2)

    def test_normalized(self, gaussian_field):
        """Test the closed-form c1 normalizes the initial state"""
        assert norm(gaussian_field, 0.0) == pytest.approx(1.0, abs=1e-8)

    @pytest.mark.parametrize('t', [0.3, 0.9, 1.5])
    def test_unitary(self, gaussian_field, t):
        """Test the norm is conserved"""
        assert norm(gaussian_field, t) == pytest.approx(1.0, abs=1e-6)

    def test_rejects_bad_k(self, reference_config):
        """Test K <= 0"""
        with pytest.raises(DomainError):
            psi_closed_form(1.0, 0.0, 0.0, reference_config, 1.0)


class TestQuadraturePaths:
    """Test direct and rotated energy quadrature against the closed form"""

    @pytest.mark.parametrize('t', [0.0, 1.5])
    def test_direct_quadrature(self, gaussian_field, t):
        """Test energy quadrature on the sample grid"""
        numeric = gaussian_field.replace(mode=QUADRATURE).psi(SAMPLE_X, t)
        np.testing.assert_allclose(numeric, gaussian_field.psi(SAMPLE_X, t), rtol=0, atol=1e-7)

    @pytest.mark.parametrize('t', ACCEPTANCE_T)
    def test_direct_quadrature_reference_grid(self, gaussian_field, t):
        """Test energy quadrature on the twenty-point (x, t) grid around the barrier"""
        numeric = gaussian_field.replace(mode=QUADRATURE).psi(ACCEPTANCE_X, t)
        np.testing.assert_allclose(numeric, gaussian_field.psi(ACCEPTANCE_X, t), rtol=0, atol=1e-7)

    @pytest.mark.parametrize('t', [1.5, 5.0])
    def test_contour(self, gaussian_field, t):
        """Test the rotated path for t >= 1"""
        numeric = gaussian_field.replace(mode=CONTOUR).psi(SAMPLE_X, t)
        np.testing.assert_allclose(numeric, gaussian_field.psi(SAMPLE_X, t), rtol=0, atol=1e-7)

    @pytest.mark.parametrize('t', [t for t in ACCEPTANCE_T if t >= 1])
    def test_contour_reference_grid(self, gaussian_field, t):
        """Test the rotated path joins on the reference grid"""
        numeric = gaussian_field.replace(mode=CONTOUR).psi(ACCEPTANCE_X, t)
        np.testing.assert_allclose(numeric, gaussian_field.psi(ACCEPTANCE_X, t), rtol=0, atol=1e-7)

    def test_scalar_time_required(self, gaussian_field):
        """Test numeric modes refuse time arrays"""
        with pytest.raises(DomainError):
            gaussian_field.replace(mode=QUADRATURE).psi(1.0, np.array([0.0, 1.0]))

    def test_contour_needs_positive_time(self, gaussian_field):
        """Test t = 0 on the rotated path"""
        with pytest.raises(DomainError):
            gaussian_field.replace(mode=CONTOUR).psi(1.0, 0.0)

    def test_scalar_in_scalar_out(self, gaussian_field):
        """Test scalar x returns a Python complex"""
        value = gaussian_field.replace(mode=QUADRATURE).psi(1.0, 0.0)
        assert isinstance(value, complex)


class TestAsymptotics:
    """Test the t^-3/2 regime"""

    def test_inside_well(self, gaussian_field):
        """Test the leading form inside the well at t = 100"""
        x = np.array([0.5, 1.0, 2.0])
        exact = gaussian_field.psi(x, 100.0)
        leading = asymptotic_psi(x, 100.0, gaussian_field)
        assert np.all(np.abs(exact - leading) / np.abs(leading) < 0.05)

    def test_outside_well(self, gaussian_field):
        """Test the linear shape beyond the barrier at t = 1000"""
        x = np.array([4.0, 6.0, 9.0])
        exact = gaussian_field.psi(x, 1000.0)
        leading = asymptotic_psi(x, 1000.0, gaussian_field)
        assert np.all(np.abs(exact - leading) / np.abs(leading) < 0.05)

    def test_density_scaling(self, gaussian_field):
        """Test doubling t divides the density by eight"""
        ratio = gaussian_field.density(1.0, 2000.0) / gaussian_field.density(1.0, 1000.0)
        assert ratio == pytest.approx(0.125, rel=0.01)

    def test_requires_positive_time(self, gaussian_field):
        """Test t <= 0 is rejected"""
        with pytest.raises(DomainError):
            asymptotic_psi(1.0, 0.0, gaussian_field)


class TestCentroid:
    """Test the region II centroid of the initial density"""

    @pytest.mark.parametrize('K', [0.25, 0.5])
    def test_narrow_packets_sit_at_two_l(self, reference_config, K):
        """Test the bump is centred on 2L"""
        wf = WaveField.build(reference_config, gaussian(K))
        assert region_two_centroid(wf) == pytest.approx(6.0, abs=1e-6)

    def test_wide_packet_shift(self, reference_config):
        """Test K = 1 is pulled slightly inward by the tail of the first lobe"""
        wf = WaveField.build(reference_config, gaussian(1.0))
        assert region_two_centroid(wf) == pytest.approx(6.0 - 8.6e-4, abs=1e-4)


class TestSquarePulse:
    """Test the square-pulse closed form and its regularized quadrature"""

    def test_c1(self, reference_config):
        """Test c1 = [pi/8 (1 + V0^2 L^2 / 6)]^-1/2"""
        assert square_pulse_c1(reference_config) == pytest.approx((np.pi / 8 * 2.5) ** -0.5, rel=1e-15)

    def test_initial_density_shape(self, square_field):
        """Test flat top, empty gap and tent at t = 0"""
        c1, L = square_field.c1, 3.0
        flat = square_field.density(np.linspace(0.1, 1.4, 14), 0.0)
        np.testing.assert_allclose(flat, c1 ** 2 * np.pi / (4 * L), rtol=1e-12)
        gap = square_field.density(np.linspace(0.6 * L, 1.4 * L, 25), 0.0)
        np.testing.assert_allclose(gap, 0.0, atol=1e-20)
        peak = square_field.density(np.array([1.95 * L, 2 * L, 2.05 * L]), 0.0)
        assert peak[1] > peak[0] and peak[1] > peak[2]

    def test_normalized(self, square_field):
        """Test the pulse is normalized at t = 0"""
        assert norm(square_field, 0.0) == pytest.approx(1.0, abs=1e-8)

    def test_small_damping_limit(self, reference_config, square_field):
        """Test t - 2i delta approaches the undamped value"""
        x = np.array([1.0, 3.5, 6.0])
        damped = psi_square_pulse(x, 1.0 - 2e-6j, reference_config, square_field.c1)
        np.testing.assert_allclose(damped, square_field.psi(x, 1.0), atol=1e-4)

    def test_regularized_quadrature(self, reference_config, square_field):
        """Test energy quadrature with damping exp(-2 delta E) against the shifted closed form"""
        delta = 1e-2
        x = np.array([1.0, 3.5, 6.0])
        numeric = square_field.replace(mode=QUADRATURE, regularization=delta).psi(x, 1.0)
        exact = psi_square_pulse(x, 1.0 - 2j * delta, reference_config, square_field.c1)
        np.testing.assert_allclose(numeric, exact, rtol=0, atol=1e-7)

    def test_undamped_quadrature_does_not_converge(self, square_field):
        """Test a 1/E tail without damping"""
        with pytest.raises(ConvergenceError):
            square_field.replace(mode=QUADRATURE).psi(1.0, 1.0)

    def test_extent_only_at_start(self, square_field):
        """Test the density tail bound is unavailable for t > 0"""
        assert square_field.extent(0.0) == 7.5
        with pytest.raises(UnsupportedError):
            square_field.extent(1.0)

    def test_mismatched_length_has_no_closed_form(self, reference_config):
        """Test a pulse built for another L has no closed form"""
        with pytest.raises(DomainError):
            WaveField(cfg=reference_config, sf=square_pulse(2.0), c1=1.0, mode=CLOSED_FORM)


class TestTabulatedField:
    """Test wave fields built from tabulated spectra"""

    @pytest.fixture
    def tabulated_gaussian(self):
        energies = np.linspace(0.0, 200.0, 4001)
        return tabulated(energies, np.exp(-0.25 * energies), decay_exponent=-np.inf)

    def test_no_closed_form(self, reference_config, tabulated_gaussian):
        """Test closed-form mode is refused"""
        with pytest.raises(DomainError):
            WaveField(cfg=reference_config, sf=tabulated_gaussian, c1=1.0, mode=CLOSED_FORM)

    def test_no_contour(self, reference_config, tabulated_gaussian):
        """Test the rotated path needs an analytic continuation"""
        wf = WaveField(cfg=reference_config, sf=tabulated_gaussian, c1=1.0, mode=CONTOUR)
        with pytest.raises(UnsupportedError):
            wf.psi(1.0, 1.0)

    def test_normalization_matches(self, reference_config, tabulated_gaussian):
        """Test the energy-space c1 of sampled data"""
        value = normalization_integral(tabulated_gaussian, reference_config, 1.0, tol_abs=1e-8, tol_rel=1e-8)
        assert value ** -0.5 == pytest.approx(normalization_c1(0.5, reference_config), rel=1e-5)

    @pytest.mark.slow
    def test_reproduces_closed_form(self, reference_config, tabulated_gaussian, gaussian_field):
        """Test quadrature over interpolated data"""
        wf = WaveField.build(reference_config, tabulated_gaussian, tol_abs=1e-7, tol_rel=1e-7)
        assert wf.mode == QUADRATURE
        x = np.array([1.0, 3.0, 6.0])
        np.testing.assert_allclose(wf.psi(x, 0.5), gaussian_field.psi(x, 0.5), atol=1e-4)

    @pytest.mark.slow
    def test_evolves_reconstructed_spectrum(self, reference_config, gaussian_field):
        """Test phi rebuilt from psi(x, 0) on a grid above E = 0 evolves like the closed form"""
        energies = np.linspace(0.05, 80.0, 1600)
        sf = reconstruct_spectral(lambda x: gaussian_field.psi(x, 0.0), reference_config, gaussian_field.c1,
                                  energies, tol_abs=1e-12)
        wf = WaveField.build(reference_config, sf, tol_abs=1e-6, tol_rel=1e-7)
        assert wf.c1 == pytest.approx(gaussian_field.c1, rel=1e-4)
        x = np.array([1.0, 3.0, 6.0])
        np.testing.assert_allclose(wf.psi(x, 0.5), gaussian_field.psi(x, 0.5), atol=1e-4)

    def test_free_particle_field(self):
        """Test V0 = 0 keeps only the first lobe"""
        wf = WaveField.build(PotentialConfig(L=3.0, V0=0.0), gaussian(0.5))
        assert abs(wf.psi(8.0, 0.0)) < 1e-40
