"""Collection of tests focused on the symbols module."""

from dataclasses import replace

import numpy as np
import pytest

from ahres.base import DomainError, NumericalError
from ahres.symbols import (CharComponent, CompactifiedPhasePoint, PhasePoint, SpectralParam, char_component,
                           compactified_field, eval_p, eval_p_full, eval_p_semi, hamilton_field, radial_quantities)


def _numeric_field(fun, pt, h=1e-6):
    """Hamilton field from central differences of a scalar symbol."""
    d_xi = (fun(replace(pt, xi=pt.xi + h)) - fun(replace(pt, xi=pt.xi - h))) / (2 * h)
    d_eta = (fun(replace(pt, eta=pt.eta + h)) - fun(replace(pt, eta=pt.eta - h))) / (2 * h)
    d_mu = (fun(replace(pt, mu=pt.mu + h)) - fun(replace(pt, mu=pt.mu - h))) / (2 * h)
    return np.array([d_xi, d_eta, -d_mu, 0])


class TestPoints:
    def test_compactify(self):
        pt = PhasePoint(0.2, 0.1, -4.0, 2.0)

        cpt = pt.compactify()

        assert (cpt.nu, cpt.eta_hat, cpt.sgn) == (0.25, 0.5, -1)
        assert cpt.to_phase_point() == pt

    def test_zero_xi(self):
        with pytest.raises(DomainError):
            PhasePoint(0.2, 0, 0.0, 1.0).compactify()

    @pytest.mark.parametrize("nu, sgn", [(-0.1, 1), (0.1, 0)])
    def test_incorrect_compactified(self, nu, sgn):
        with pytest.raises(DomainError):
            CompactifiedPhasePoint(0.0, 0.0, nu, 0.0, sgn)

    def test_fiber_infinity(self):
        with pytest.raises(DomainError):
            CompactifiedPhasePoint(0.0, 0.0, 0.0, 0.0).to_phase_point()

    def test_nonfinite(self):
        with pytest.raises(DomainError):
            PhasePoint(np.nan, 0, 1, 1)

    def test_spectral_param(self):
        param = SpectralParam(3 - 4j)

        assert param.h == pytest.approx(0.2)
        assert param.z == pytest.approx(0.6 - 0.8j)

        with pytest.raises(DomainError):
            SpectralParam(0).h


class TestEvaluation:
    def test_classical_toy(self, toy_coeffs):
        pt = PhasePoint(-0.5, 0.0, 2.0, 3.0)

        assert eval_p(toy_coeffs, pt) == pytest.approx(-8 + 9)

    def test_full_reduces_to_classical(self, plane_coeffs):
        pt = PhasePoint(0.4, 0.0, 1.3, -0.7)

        assert eval_p_full(plane_coeffs, 0, pt) == pytest.approx(eval_p(plane_coeffs, pt))

    def test_full_real_for_real_sigma(self, plane_coeffs):
        value = eval_p_full(plane_coeffs, 2.5, PhasePoint(-0.3, 0.0, 1.0, 0.5))

        assert value.imag == 0

    @pytest.mark.parametrize("z", [1.0, 0.6 - 0.8j, -0.8 + 0.6j])
    def test_semi_matches_full(self, plane_coeffs, z):
        pt = PhasePoint(0.7, 0.0, -0.4, 1.1)

        re, im = eval_p_semi(plane_coeffs, z, pt)
        expected = eval_p_full(plane_coeffs, z, pt)

        assert re == pytest.approx(expected.real)
        assert im == pytest.approx(expected.imag, abs=1e-12)


class TestHamiltonField:
    def test_classical(self, plane_coeffs):
        pt = PhasePoint(0.3, 0.0, 1.2, 0.7)

        field = hamilton_field(plane_coeffs, pt)
        numeric = _numeric_field(lambda q: eval_p(plane_coeffs, q), pt)

        assert np.allclose(field, numeric, atol=1e-6)

    def test_full(self, cylinder_coeffs):
        pt = PhasePoint(-0.2, 0.0, 0.8, 0.4)
        sigma = 1.7

        field = hamilton_field(cylinder_coeffs, pt, "full", sigma)
        numeric = _numeric_field(lambda q: eval_p_full(cylinder_coeffs, sigma, q).real, pt)

        assert np.allclose(field, numeric, atol=1e-6)

    def test_semiclassical_real_part(self, plane_coeffs):
        pt = PhasePoint(0.5, 0.0, -1.5, 0.3)
        z = 0.6 - 0.8j

        field = hamilton_field(plane_coeffs, pt, "semiclassical", z)
        numeric = _numeric_field(lambda q: eval_p_semi(plane_coeffs, z, q)[0], pt)

        assert np.allclose(field, numeric, atol=1e-6)

    @pytest.mark.parametrize("kind, param", [("classical", None), ("semiclassical", 0.6 - 0.8j)])
    @pytest.mark.parametrize("xi", [2.0, -0.5])
    def test_compactified_is_rescaled(self, plane_coeffs, kind, param, xi):
        pt = PhasePoint(0.4, 0.0, xi, 0.9)
        cpt = pt.compactify()

        h_mu, h_y, h_xi, _ = hamilton_field(plane_coeffs, pt, kind, param)
        field = hamilton_field(plane_coeffs, cpt, kind, param)

        nu, sgn = cpt.nu, cpt.sgn
        expected = [nu * h_mu, nu * h_y, -sgn * nu ** 3 * h_xi, -sgn * pt.eta * nu ** 3 * h_xi]
        assert np.allclose(field, expected)

    def test_compactified_at_fiber_infinity(self, plane_coeffs):
        field = compactified_field(plane_coeffs, np.array([0.0, 0.0, 0.0, 0.0]), 1)

        assert np.allclose(field, 0)

    def test_incorrect_kind(self, plane_coeffs):
        with pytest.raises(ValueError):
            hamilton_field(plane_coeffs, PhasePoint(0.1, 0, 1, 1), "quantum")

    def test_missing_param(self, plane_coeffs):
        with pytest.raises(ValueError):
            hamilton_field(plane_coeffs, PhasePoint(0.1, 0, 1, 1), "full")


class TestRadial:
    def test_radial_set(self, plane_coeffs):
        rho_tilde, rho_0 = radial_quantities(plane_coeffs, CompactifiedPhasePoint(0.0, 0.0, 0.0, 0.0))

        assert rho_tilde == 0
        assert rho_0 == 0

    def test_away(self, toy_coeffs):
        _, rho_0 = radial_quantities(toy_coeffs, CompactifiedPhasePoint(0.25, 0.0, 0.1, 1.0))

        assert rho_0 == pytest.approx(1 + 4)


class TestCharComponent:
    @pytest.mark.parametrize("xi, expected", [(1.0, CharComponent.SigmaPlus), (-1.0, CharComponent.SigmaMinus)])
    def test_classical(self, toy_coeffs, xi, expected):
        assert char_component(toy_coeffs, PhasePoint(-0.25, 0.0, xi, 1.0)) == expected

    def test_not_characteristic(self, toy_coeffs):
        assert char_component(toy_coeffs, PhasePoint(0.5, 0.0, 1.0, 1.0)) == CharComponent.NotCharacteristic

    @pytest.mark.parametrize("pt, expected", [(PhasePoint(0.0, 0.0, 0.0, 1.0), CharComponent.SemiPlus),
                                              (PhasePoint(-1.0, 0.0, -1.0, 1.0), CharComponent.SemiMinus)])
    def test_semiclassical(self, toy_coeffs, pt, expected):
        assert char_component(toy_coeffs, pt, z=1.0) == expected

    def test_separating_hypersurface(self, toy_coeffs):
        with pytest.raises(NumericalError):
            char_component(toy_coeffs, PhasePoint(-1.0, 0.0, -0.5, 0.0), z=1.0)
