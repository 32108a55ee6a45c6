"""Collection of tests focused on the absorption module."""

import numpy as np
import pytest

from ahres.absorption import (AbsorptionConfig, AbsorptionOperator, assemble_Q, chi_profile, principal_sqrt,
                              q_symbol, spectral_sqrt, verify_sign_conditions)
from ahres.base import BranchError, ConfigError, ConstructionError
from ahres.discretize import build_grid
from ahres.symbols import PhasePoint


@pytest.fixture()
def grid():
    return build_grid(-0.5, 1.0, 40)


class TestConfig:
    def test_defaults(self):
        cfg = AbsorptionConfig()

        assert cfg.mode == "paper_sigma_dependent"
        assert cfg.window == pytest.approx((-0.4, -0.1))

    @pytest.mark.parametrize("kwargs, pointer", [({"mode": "strong"}, "/absorption/mode"),
                                                 ({"mu0": 0.1}, "/absorption/mu0"),
                                                 ({"strength": -1.0}, "/absorption/strength"),
                                                 ({"chi_width": 0.0}, "/absorption/chi_width"),
                                                 ({"interior_window": (2.0, 1.0)}, "/absorption/interior_window")])
    def test_invalid(self, kwargs, pointer):
        with pytest.raises(ConfigError) as excinfo:
            AbsorptionConfig(**kwargs)

        assert excinfo.value.pointer == pointer

    def test_scaled(self):
        cfg = AbsorptionConfig().scaled(2, 1.5)

        assert cfg.strength == 2
        assert cfg.chi_width == pytest.approx(0.225)

    def test_to_dict(self):
        out = AbsorptionConfig(interior_window=(3.0, 3.5)).to_dict()

        assert out["interior_window"] == [3.0, 3.5]
        assert out["cut_constant"] == 5.0


class TestChi:
    def test_support(self):
        cfg = AbsorptionConfig()
        mu = np.linspace(-0.5, 1.0, 301)

        values = chi_profile(mu, cfg)

        assert np.all(values >= 0)
        assert np.all(values[(mu <= -0.4) | (mu >= -0.1)] == 0)
        assert chi_profile(cfg.mu0, cfg) == pytest.approx(1)

    def test_interior_window(self):
        cfg = AbsorptionConfig(interior_window=(0.5, 0.9))

        assert chi_profile(0.7, cfg) == pytest.approx(1)
        assert chi_profile(0.2, cfg) == 0


class TestPrincipalSqrt:
    def test_positive_definite(self):
        rng = np.random.RandomState(0)
        A = rng.normal(size=(6, 6))
        M = A @ A.T + np.eye(6)

        R = principal_sqrt(M)

        assert np.allclose(R @ R, M)
        assert np.all(np.linalg.eigvals(R).real > 0)

    def test_rotation(self):
        R = principal_sqrt(np.array([[0.0, 1.0], [-1.0, 0.0]]))

        assert np.allclose(R @ R, [[0.0, 1.0], [-1.0, 0.0]], atol=1e-12)
        eigenvalues = sorted(np.linalg.eigvals(R), key=lambda v: v.imag)
        assert np.allclose(eigenvalues, np.exp([-0.25j * np.pi, 0.25j * np.pi]))

    def test_on_cut(self):
        with pytest.raises(BranchError):
            principal_sqrt(np.diag([1.0, -2.0]))

    def test_not_square(self):
        with pytest.raises(ValueError):
            principal_sqrt(np.ones((2, 3)))


class TestSpectralSqrt:
    def test_principal_branch(self):
        values = np.array([4.0, 1 + 0j, 0.5 - 2j, -3 + 1e-3j])

        root = spectral_sqrt(values)

        assert np.allclose(root ** 2, values)
        assert np.all(root.real > 0)

    def test_on_cut(self):
        with pytest.raises(BranchError):
            spectral_sqrt(np.array([1.0, -2.0]))


class TestOperator:
    def test_off(self, grid, plane_coeffs):
        Q = assemble_Q(grid, 0, 1.0, plane_coeffs, AbsorptionConfig(mode="off"))

        assert np.all(Q == 0)

    def test_localized(self, grid, plane_coeffs):
        cfg = AbsorptionConfig()
        outside = chi_profile(grid.nodes, cfg) == 0

        Q = assemble_Q(grid, 1, 0.7 - 0.4j, plane_coeffs, cfg)

        assert np.all(Q[outside, :] == 0)
        assert np.abs(Q).max() > 0

    @pytest.mark.parametrize("mode", ["paper_sigma_dependent", "sigma_independent"])
    def test_grid_independent(self, plane_coeffs, mode):
        cfg = AbsorptionConfig(mode=mode)
        # every other node of the fine grid is a node of the coarse one
        coarse, fine = build_grid(-0.5, 1.0, 40), build_grid(-0.5, 1.0, 79)
        sigma = 1.2 - 0.5j

        def image(g):
            return assemble_Q(g, 1, sigma, plane_coeffs, cfg) @ np.cos(3 * g.nodes)

        expected = image(fine)[::2]

        assert np.abs(expected).max() > 0
        assert np.allclose(image(coarse), expected, atol=1e-8 * np.abs(expected).max())

    def test_window_outside_grid(self, plane_coeffs):
        with pytest.raises(ConstructionError):
            AbsorptionOperator(build_grid(-0.3, 1.0, 40), 0, plane_coeffs, AbsorptionConfig())

    def test_interior_window(self, grid, plane_coeffs):
        cfg = AbsorptionConfig(interior_window=(0.5, 0.9))
        operator = AbsorptionOperator(grid, 0, plane_coeffs, cfg)

        Q = operator(1.0 - 0.2j)
        rows = np.abs(Q).max(axis=1) > 0

        assert len(operator.boxes) == 2
        assert np.any(rows & (grid.nodes > 0.5))
        assert np.all(~rows | (chi_profile(grid.nodes, cfg) > 0))
    def test_sigma_dependence(self, grid, plane_coeffs):
        operator = AbsorptionOperator(grid, 0, plane_coeffs, AbsorptionConfig())

        assert not operator.is_polynomial
        assert not np.allclose(operator(0.5), operator(2.0))

    def test_sigma_independent(self, grid, plane_coeffs):
        operator = AbsorptionOperator(grid, 0, plane_coeffs, AbsorptionConfig(mode="sigma_independent"))

        assert operator.is_polynomial
        assert np.array_equal(operator(0.5), operator(3 - 2j))

    def test_cut(self, grid, plane_coeffs):
        operator = AbsorptionOperator(grid, 0, plane_coeffs, AbsorptionConfig())

        with pytest.raises(BranchError):
            operator(-6j)


class TestSymbol:
    def test_zero_outside(self, plane_coeffs):
        assert q_symbol(plane_coeffs, AbsorptionConfig(), PhasePoint(0.3, 0.0, 1.0, 1.0)) == 0

    @pytest.mark.parametrize("xi", [1.0, -1.0])
    def test_sign_on_characteristic_set(self, plane_coeffs, xi):
        mu = -0.2
        eta = np.sqrt(-4 * mu * xi ** 2 * plane_coeffs.w(mu))

        q = q_symbol(plane_coeffs, AbsorptionConfig(), PhasePoint(mu, 0.0, xi, float(eta)))

        assert np.sign(q) == np.sign(xi)

    @pytest.mark.parametrize("mode", ["paper_sigma_dependent", "sigma_independent"])
    def test_sign_conditions(self, plane_coeffs, mode):
        report = verify_sign_conditions(AbsorptionConfig(mode=mode), plane_coeffs, n_samples=200)

        assert report["passed"]
        assert report["classical_violations"] == []
        assert report["ring_min"] > 0

    def test_sign_conditions_off(self, plane_coeffs):
        report = verify_sign_conditions(AbsorptionConfig(mode="off"), plane_coeffs)

        assert report["skipped"]
