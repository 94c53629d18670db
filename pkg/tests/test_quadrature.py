"""Panel quadrature against closed forms computed through erf.

The lattice integrators are checked against exact box probabilities of
the standard normal: with independent coordinates every signed box sum
factorizes, so 2D answers follow from 1D erf differences.
"""

import math

import numpy as np
import pytest

from boxspin import (
    InvalidScale,
    NonFiniteIntegrand,
    QuadratureSpec,
    integrate_lattice_signed,
    integrate_line_signed,
    integrate_rect,
    spec_for_gaussian,
)


def _normal_cdf(x: float) -> float:
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


def _signed_box_sum(l: float, mu: float = 0.0, n_max: int = 400) -> float:
    """sum over n of (-1)**n * P(normal(mu, 1) in [n*l, (n+1)*l)).

    A centered normal gives exactly zero by reflection symmetry, so the
    interesting checks shift the mean.
    """
    total = 0.0
    for n in range(-n_max, n_max):
        sign = 1 - 2 * (n % 2)
        total += sign * (_normal_cdf((n + 1) * l - mu) - _normal_cdf(n * l - mu))
    return total


def _std_normal_2d(u, v):
    return np.exp(-0.5 * (u * u + v * v)) / (2.0 * math.pi)


def _shifted_normal_2d(u, v, mu=0.3):
    return np.exp(-0.5 * ((u - mu) ** 2 + (v - mu) ** 2)) / (2.0 * math.pi)


class TestSpecValidation:
    def test_rejects_tiny_panel_order(self):
        with pytest.raises(InvalidScale):
            QuadratureSpec(panel_order=1, tail_radius=5.0)

    def test_rejects_bad_tail_radius(self):
        with pytest.raises(InvalidScale):
            QuadratureSpec(tail_radius=0.0)
        with pytest.raises(InvalidScale):
            QuadratureSpec(tail_radius=math.inf)

    def test_rejects_nonpositive_tolerance(self):
        with pytest.raises(InvalidScale):
            QuadratureSpec(tail_radius=5.0, abs_tol=0.0)

    def test_spec_for_gaussian_scaling(self):
        spec = spec_for_gaussian(0.5, 2.0)
        assert spec.tail_radius == 16.0  # 8*sigma dominates 3*l
        assert spec.max_panel_width == 0.5  # box is narrower than 2*sigma
        spec = spec_for_gaussian(3.0, 1.0, slice_scale=0.25)
        assert spec.tail_radius == 9.0  # 3*l dominates
        assert spec.max_panel_width == 0.5  # 2*slice_scale caps the panel

    def test_spec_for_gaussian_rejects_bad_inputs(self):
        with pytest.raises(InvalidScale):
            spec_for_gaussian(0.0, 1.0)
        with pytest.raises(InvalidScale):
            spec_for_gaussian(1.0, -1.0)
        with pytest.raises(InvalidScale):
            spec_for_gaussian(1.0, 1.0, slice_scale=0.0)


class TestRect:
    def test_polynomial_is_exact(self):
        spec = QuadratureSpec(tail_radius=10.0)
        res = integrate_rect(lambda u, v: u**3 * v**2, ((0.0, 1.0), (-1.0, 2.0)), spec)
        assert res.value == pytest.approx(0.25 * 3.0, abs=1e-13)

    def test_gaussian_mass_in_square(self):
        spec = QuadratureSpec(max_panel_width=1.0, tail_radius=10.0)
        res = integrate_rect(_std_normal_2d, ((-6.0, 6.0), (-6.0, 6.0)), spec)
        exact = (_normal_cdf(6.0) - _normal_cdf(-6.0)) ** 2
        assert abs(res.value - exact) < 1e-12
        assert abs(res.value - exact) <= res.error_estimate + 1e-15

    def test_panel_splitting_counts(self):
        spec = QuadratureSpec(max_panel_width=0.3, tail_radius=10.0)
        res = integrate_rect(lambda u, v: u * 0 + 1.0, ((0.0, 1.0), (0.0, 1.0)), spec)
        assert res.panels_used == 16  # ceil(1/0.3) = 4 per axis
        assert res.value == pytest.approx(1.0, abs=1e-14)

    def test_rejects_degenerate_rectangle(self):
        spec = QuadratureSpec(tail_radius=10.0)
        with pytest.raises(InvalidScale):
            integrate_rect(_std_normal_2d, ((1.0, 1.0), (0.0, 1.0)), spec)

    def test_nonfinite_integrand_is_an_error(self):
        spec = QuadratureSpec(tail_radius=10.0)
        with pytest.raises(NonFiniteIntegrand):
            integrate_rect(
                lambda u, v: np.full_like(u + v, np.nan), ((0.0, 1.0), (0.0, 1.0)), spec
            )


class TestLatticeSigned:
    def test_total_mass_is_one(self):
        spec = QuadratureSpec(max_panel_width=0.5, tail_radius=9.0)
        res = integrate_lattice_signed(
            _std_normal_2d, 0.75, lambda n, m: np.ones_like(n + m), spec
        )
        assert abs(res.value - 1.0) < 1e-9
        assert abs(res.value - 1.0) <= res.error_estimate

    def test_parity_signs_factorize(self):
        """For independent coordinates the parity sum is the 1D sum squared.

        The box length must be comparable to the width of the Gaussian:
        for boxes much narrower than the density the alternating sum is
        exponentially small and the comparison would be vacuous.
        """
        l = 2.0
        spec = QuadratureSpec(max_panel_width=0.5, tail_radius=9.0)
        res = integrate_lattice_signed(
            _shifted_normal_2d, l, lambda n, m: 1 - 2 * ((n + m) % 2), spec
        )
        expected = _signed_box_sum(l, mu=0.3) ** 2
        assert expected > 1e-3  # the oracle must not be trivially zero
        assert res.value == pytest.approx(expected, abs=1e-10)

    def test_sign_zero_drops_boxes(self):
        """Keeping only even-even box pairs matches the erf closed form."""
        l = 1.25
        spec = QuadratureSpec(max_panel_width=0.5, tail_radius=10.0)
        res = integrate_lattice_signed(
            _std_normal_2d, l, lambda n, m: ((n % 2 == 0) & (m % 2 == 0)).astype(int), spec
        )
        even = sum(
            _normal_cdf((n + 1) * l) - _normal_cdf(n * l)
            for n in range(-40, 40)
            if n % 2 == 0
        )
        assert res.value == pytest.approx(even**2, abs=1e-10)

    def test_sign_values_are_validated(self):
        spec = QuadratureSpec(tail_radius=5.0)
        with pytest.raises(InvalidScale):
            integrate_lattice_signed(
                _std_normal_2d, 1.0, lambda n, m: 2 * np.ones_like(n + m), spec
            )

    def test_tail_radius_must_reach_a_box(self):
        spec = QuadratureSpec(tail_radius=0.4)
        with pytest.raises(InvalidScale):
            integrate_lattice_signed(
                _std_normal_2d, 10.0, lambda n, m: np.ones_like(n + m), spec
            )


class TestLineSigned:
    def test_marginal_mass(self):
        spec = QuadratureSpec(max_panel_width=0.5, tail_radius=9.0)
        res = integrate_line_signed(
            lambda q: np.exp(-0.5 * q * q) / math.sqrt(2.0 * math.pi),
            0.6,
            lambda n: np.ones_like(n),
            spec,
        )
        assert abs(res.value - 1.0) < 1e-9

    def test_alternating_signs_match_erf_sum(self):
        l = 1.5  # wide boxes keep the alternating sum well away from zero
        mu = 0.3
        spec = QuadratureSpec(max_panel_width=0.4, tail_radius=9.0)
        res = integrate_line_signed(
            lambda q: np.exp(-0.5 * (q - mu) ** 2) / math.sqrt(2.0 * math.pi),
            l,
            lambda n: 1 - 2 * (n % 2),
            spec,
        )
        expected = _signed_box_sum(l, mu=mu)
        assert abs(expected) > 1e-3  # the oracle must not be trivially zero
        assert res.value == pytest.approx(expected, abs=1e-11)
        assert abs(res.value - expected) <= res.error_estimate + 1e-14
