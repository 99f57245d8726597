"""
Tests for the adaptive panel quadrature
"""
import numpy as np
import pytest

from deltawell.errors import ConvergenceError, DomainError
from deltawell.quadrature import integrate, phase_edges


class TestIntegrate:
    """Test adaptive Gauss-Legendre integration"""

    def test_polynomial_is_exact(self):
        """Test a low-degree polynomial on a single panel"""
        result = integrate(lambda x: 3 * x ** 2, [0.0, 2.0])
        assert result.value == pytest.approx(8.0, rel=1e-14)
        assert result.panels == 1

    def test_oscillatory_integrand(self):
        """Test an oscillatory integrand against its antiderivative"""
        edges = np.linspace(0.0, 10.0, 41)
        result = integrate(lambda x: np.cos(20 * x), edges, tol_abs=1e-12)
        assert result.value == pytest.approx(np.sin(200.0) / 20, abs=1e-11)

    def test_batched_values(self):
        """Test that a leading batch axis is integrated independently"""
        scales = np.array([1.0, 2.0, 3.0])
        result = integrate(lambda x: np.exp(-scales[:, None] * x[None, :]), np.linspace(0, 20, 21))
        expected = (1 - np.exp(-20 * scales)) / scales
        np.testing.assert_allclose(result.value, expected, rtol=1e-10)

    def test_complex_integrand(self):
        """Test complex-valued integrands"""
        result = integrate(lambda x: np.exp(1j * x), np.linspace(0, np.pi, 5))
        assert result.value == pytest.approx(2j, abs=1e-12)

    def test_kink_needs_subdivision(self):
        """Test that a kink inside a panel is resolved by bisection"""
        result = integrate(lambda x: np.abs(x - 0.3), [0.0, 1.0], tol_abs=1e-10)
        assert result.value == pytest.approx(0.5 * (0.3 ** 2 + 0.7 ** 2), abs=1e-9)
        assert result.panels > 1

    def test_convergence_error_carries_estimate(self):
        """Test that an impossible tolerance raises with the achieved estimate"""
        with pytest.raises(ConvergenceError) as info:
            integrate(lambda x: np.sqrt(np.abs(x - 0.3)), [0.0, 1.0],
                      tol_abs=1e-30, tol_rel=1e-30, max_subdivisions=50)
        assert np.isfinite(info.value.estimate)
        assert info.value.estimate > 0

    def test_rejects_bad_edges(self):
        """Test that decreasing edges are rejected"""
        with pytest.raises(DomainError):
            integrate(lambda x: x, [1.0, 0.0])

    def test_rejects_bad_order(self):
        """Test that only supported rule orders are accepted"""
        with pytest.raises(DomainError):
            integrate(lambda x: x, [0.0, 1.0], order=7)


class TestPhaseEdges:
    """Test panel placement for oscillatory integrands"""

    def test_phase_per_panel_bounded(self):
        """Test that no panel spans more than pi/4 of phase"""
        edges = phase_edges(16.0, 7.0, 5.0)
        phase = 7.0 * edges + 0.5 * 5.0 * edges ** 2
        assert np.all(np.diff(phase) <= np.pi / 4 + 1e-9)
        assert edges[0] == 0.0 and edges[-1] == 16.0

    def test_width_cap_without_phase(self):
        """Test the width cap when there is no oscillation"""
        edges = phase_edges(3.0, 0.0, 0.0, max_width=0.5)
        assert np.all(np.diff(edges) <= 0.5 + 1e-12)
