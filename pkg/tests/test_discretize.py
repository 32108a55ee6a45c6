"""Collection of tests focused on the discretize module."""

import numpy as np
import pytest
from numpy.polynomial import Polynomial

from ahres.absorption import AbsorptionConfig
from ahres.base import ConstructionError, DomainError
from ahres.discretize import (assemble_pencil, build_grid, build_model_grid, chebyshev_lobatto,
                              clenshaw_curtis_weights, raw_operator, sobolev_norm, sobolev_norm_matrix)
from ahres.extension import derive_extended_coeffs
from ahres.geometry import EvenMetricModel


class TestNodes:
    def test_ascending_with_endpoints(self):
        nodes = chebyshev_lobatto(-0.5, 4.0, 17)

        assert nodes[0] == -0.5
        assert nodes[-1] == 4.0
        assert np.all(np.diff(nodes) > 0)

    @pytest.mark.parametrize("N", [8, 9, 24, 25])
    def test_quadrature(self, N):
        weights = clenshaw_curtis_weights(-0.5, 1.0, N)
        nodes = chebyshev_lobatto(-0.5, 1.0, N)
        p = Polynomial([0.3, -1.0, 2.0, 0.5])
        exact = p.integ()(1.0) - p.integ()(-0.5)

        assert np.all(weights > 0)
        assert np.sum(weights * p(nodes)) == pytest.approx(exact)


class TestGrid:
    def test_differentiation_exact_for_polynomials(self):
        grid = build_grid(-0.5, 1.0, 16)
        p = Polynomial([1.0, -2.0, 0.5, 0.25, -0.1])

        assert np.allclose(grid.D1 @ p(grid.nodes), p.deriv()(grid.nodes))
        assert np.allclose(grid.D2 @ p(grid.nodes), p.deriv(2)(grid.nodes), atol=1e-9)

    def test_spectral_accuracy(self):
        grid = build_grid(-0.5, 1.0, 40)

        error = np.max(np.abs(grid.D1 @ np.sin(3 * grid.nodes) - 3 * np.cos(3 * grid.nodes)))

        assert error < 1e-10

    def test_interpolate(self):
        grid = build_grid(-0.5, 1.0, 30)
        points = np.array([-0.41, 0.0, 0.33, 1.0])

        values = grid.interpolate(np.exp(grid.nodes), points)

        assert np.allclose(values, np.exp(points))

    def test_integrate(self):
        grid = build_grid(0.0, np.pi, 32)

        assert grid.integrate(np.sin(grid.nodes)) == pytest.approx(2)

    def test_properties(self):
        grid = build_grid(-0.5, 2.0, 12)

        assert grid.N == 12
        assert grid.interval == (-0.5, 2.0)

    def test_too_small(self):
        with pytest.raises(ConstructionError):
            build_grid(-0.5, 1.0, 4)

    def test_incorrect_interval(self):
        with pytest.raises(ConstructionError):
            build_grid(1.0, -0.5, 16)

    def test_incorrect_bc(self):
        with pytest.raises(ValueError):
            build_grid(-0.5, 1.0, 16, "neumann")

    def test_model_grid(self, plane, cylinder):
        assert build_model_grid(plane, 16).bc_spec == "center_regularity"
        assert build_model_grid(cylinder, 16).bc_spec == "periodic_double_cover"
        assert build_model_grid(plane, 16, mu_left=-0.3).interval == (-0.3, 4.0)


class TestPencil:
    def test_toy_operator(self, toy_coeffs):
        grid = build_grid(-0.5, 1.0, 24, "none")
        sigma = 1.3 - 0.4j
        u = Polynomial([0.2, 1.0, -0.5, 0.3])
        mu = grid.nodes

        expected = (-4 * mu * u.deriv(2)(mu) + (-4 + 4j * sigma) * u.deriv()(mu)
                    + (4 - sigma ** 2) * u(mu))
        pencil = assemble_pencil(toy_coeffs, grid, 2)

        assert np.allclose(raw_operator(toy_coeffs, grid, 2, sigma) @ u(mu), expected)
        assert np.allclose(pencil.matrix(sigma), raw_operator(toy_coeffs, grid, 2, sigma))
        assert pencil.q_is_polynomial

    def test_dirichlet_row(self, toy_coeffs):
        grid = build_grid(-0.5, 1.0, 16)

        pencil = assemble_pencil(toy_coeffs, grid, 0)
        T = pencil.matrix(0.5)

        assert pencil.bc_rows == (15,)
        assert np.array_equal(T[-1], np.eye(16)[-1])
        assert pencil.transform_rhs(np.ones(16))[-1] == 0
        assert np.allclose(T[:-1], raw_operator(toy_coeffs, grid, 0, 0.5)[:-1])

    @pytest.mark.parametrize("mode_index", [0, 1, 2])
    def test_center_regularity(self, plane, plane_coeffs, mode_index):
        grid = build_model_grid(plane, 32)
        sigma = 0.7 - 0.5j
        k = abs(mode_index)
        t = plane.mu_right - grid.nodes
        v = 1 + 0.3 * grid.nodes - 0.05 * grid.nodes ** 2
        u = t ** k * v

        pencil = assemble_pencil(plane_coeffs, grid, mode_index)
        lhs = pencil.operator(sigma) @ v

        # the original equation away from the center, multiplied by t^(1-k)
        alpha, (b0, b1), (c0, c1, c2) = plane_coeffs.ode_coefficients(mode_index, grid.nodes[:-1])
        du, ddu = (grid.D1 @ u)[:-1], (grid.D2 @ u)[:-1]
        equation = alpha * ddu + (b0 + b1 * sigma) * du + (c0 + c1 * sigma + c2 * sigma ** 2) * u[:-1]
        rhs = t[:-1] ** (1 - k) * equation

        assert np.allclose(lhs[:-1], rhs, atol=1e-7 * np.max(np.abs(rhs)))
        assert pencil.row_scale[-1] == (1 if k == 1 else 0)
        assert np.allclose(pencil.to_solution(v), u)

    @pytest.mark.parametrize("mode_index, kept", [(0, 0.0), (1, 1.0), (-1, 1.0), (2, 0.0)])
    def test_center_rhs(self, plane, plane_coeffs, mode_index, kept):
        grid = build_model_grid(plane, 24)

        pencil = assemble_pencil(plane_coeffs, grid, mode_index)

        assert pencil.transform_rhs(np.ones(24))[-1] == kept

    def test_center_needs_center(self, cylinder_coeffs):
        grid = build_grid(-0.5, 4.0, 16, "center_regularity")

        with pytest.raises(DomainError):
            assemble_pencil(cylinder_coeffs, grid, 0)

    @pytest.mark.parametrize("parity", ["even", "odd"])
    def test_neck_rows(self, cylinder, cylinder_coeffs, parity):
        grid = build_model_grid(cylinder, 16)

        pencil = assemble_pencil(cylinder_coeffs, grid, 1, parity=parity)

        assert pencil.parity == parity
        if parity == "odd":
            assert np.array_equal(pencil.A0[-1], np.eye(16)[-1])
        else:
            assert pencil.A1[-1, -1] == pytest.approx(-1j / 8 + 1j / 20)
            assert np.allclose(pencil.A0[-1, :-1], grid.D1[-1, :-1])

    def test_neck_needs_parity(self, cylinder, cylinder_coeffs):
        with pytest.raises(ValueError):
            assemble_pencil(cylinder_coeffs, build_model_grid(cylinder, 16), 0)

    def test_absorption_rows(self):
        model = EvenMetricModel.custom([1.0, 0.2])
        coeffs = derive_extended_coeffs(model)

        pencil = assemble_pencil(coeffs, build_model_grid(model, 24), 0, absorption=AbsorptionConfig())

        assert not pencil.q_is_polynomial
        assert np.all(pencil.Q_rule(0.8 - 0.3j)[-1] == 0)

    def test_polynomial_derivative(self):
        model = EvenMetricModel.custom([1.0, 0.2])
        coeffs = derive_extended_coeffs(model)
        absorption = AbsorptionConfig(mode="sigma_independent")
        pencil = assemble_pencil(coeffs, build_model_grid(model, 24), 0, absorption=absorption)
        sigma = 0.8 - 0.3j
        h = 1e-4

        numeric = (pencil.matrix(sigma + h) - pencil.matrix(sigma - h)) / (2 * h)

        assert pencil.q_is_polynomial
        assert np.allclose(pencil.derivative(sigma), 2 * pencil.A2 * sigma + pencil.A1)
        assert np.allclose(pencil.derivative(sigma), numeric, atol=1e-6 * np.abs(numeric).max())


class TestSobolev:
    @pytest.fixture()
    def grid(self):
        return build_grid(-0.5, 1.0, 24)

    def test_l2(self, grid):
        assert sobolev_norm(grid, np.ones(grid.N), 0, 0.1) == pytest.approx(np.sqrt(1.5))

    @pytest.mark.parametrize("s", [1, 2, 0.5, 1.5, -1])
    def test_hermitian_positive(self, grid, s):
        M = sobolev_norm_matrix(grid, s, 0.1)

        assert np.allclose(M, M.conj().T, atol=1e-10 * np.abs(M).max())
        assert np.all(np.linalg.eigvalsh((M + M.conj().T) / 2) > 0)

    @pytest.mark.parametrize("low, high", [(0, 1), (1, 2), (0.5, 1.5), (-1, 0)])
    def test_monotone(self, grid, low, high):
        u = np.sin(5 * grid.nodes) + 0.3j * grid.nodes

        assert sobolev_norm(grid, u, low, 0.2) <= sobolev_norm(grid, u, high, 0.2) * (1 + 1e-12)

    def test_first_order_value(self, grid):
        u = grid.nodes
        h = 0.5

        # |u|^2 + h^2 |u'|^2 integrated over [-0.5, 1]
        expected = (1 + 0.125) / 3 + h ** 2 * 1.5

        assert sobolev_norm(grid, u, 1, h) ** 2 == pytest.approx(expected)

    @pytest.mark.parametrize("h", [0, -1, np.inf])
    def test_incorrect_h(self, grid, h):
        with pytest.raises(DomainError):
            sobolev_norm_matrix(grid, 1, h)
