"""Collection of tests focused on the oracles module."""

import numpy as np
import pytest

from ahres.geometry import EvenMetricModel
from ahres.oracles import (cylinder_resonances, hyperbolic_plane_resonances, hyperbolic_space_resonances,
                           oracle_resonances, poschl_teller_transmission, transmission_poles, unextended_mode_bvp)


class TestLattices:
    def test_plane(self):
        assert hyperbolic_plane_resonances(0, -3) == [-0.5j, -1.5j, -2.5j]
        assert hyperbolic_plane_resonances(-2, -3) == [-2.5j]

    def test_space(self):
        assert hyperbolic_space_resonances(0, -10) == []

    def test_cylinder(self):
        values = cylinder_resonances(2 * np.pi, 2, -2)

        assert values == [(-2 - 0.5j, "even", 1), (2 - 0.5j, "even", 1), (-2 - 1.5j, "odd", 1),
                          (2 - 1.5j, "odd", 1)]

    def test_cylinder_mode_zero_double(self):
        values = cylinder_resonances(2 * np.pi, 0, -2, parity="odd")

        assert values == [(-1.5j, "odd", 2)]

    def test_cylinder_length(self):
        values = cylinder_resonances(np.pi, 1, -1, re_range=(0, 5))

        assert values[0][0] == pytest.approx(2 - 0.5j)

    def test_window(self, plane):
        assert oracle_resonances(plane, 1, (-1, 1), (-2, -1)) == [-1.5j]

    def test_funnel_uses_its_parity(self):
        funnel = EvenMetricModel.funnel(2 * np.pi, neck_parity="odd")

        assert oracle_resonances(funnel, 1, (-2, 2), (-2, 0)) == [-1 - 1.5j, 1 - 1.5j]

    def test_custom_unknown(self):
        with pytest.raises(ValueError):
            oracle_resonances(EvenMetricModel.custom([1.0]), 0, (-1, 1), (-1, 0))


class TestTransmission:
    def test_poles_match_lattice(self):
        poles = transmission_poles(1.0, 1)
        lattice = [s for s, _, _ in cylinder_resonances(2 * np.pi, 1, -2)]

        assert sorted(poles, key=lambda s: (s.imag, s.real)) == sorted(lattice, key=lambda s: (s.imag, s.real))

    @pytest.mark.parametrize("pole", [1 - 0.5j, -1 - 1.5j])
    def test_blows_up_near_pole(self, pole):
        near = abs(poschl_teller_transmission(pole + 1e-6, 1.0))
        far = abs(poschl_teller_transmission(pole + 0.3, 1.0))

        assert near > 1e3 * far


class TestUnextended:
    def test_constant_solution(self, plane):
        # on H^2 mode 0 the constant solves (Delta - 1/4 - sigma^2) u = -(1/4 + sigma^2) u
        sigma = 0.5 - 0.2j

        mu, u = unextended_mode_bvp(plane, 0, sigma, lambda m: -(0.25 + sigma ** 2) * np.ones_like(m), 0.5, 2.0,
                                    1.0, 1.0, N=32)

        assert np.allclose(u, 1)

    def test_outside(self, plane):
        with pytest.raises(ValueError):
            unextended_mode_bvp(plane, 0, 1.0, np.ones_like, -0.1, 1.0, 0, 0)
