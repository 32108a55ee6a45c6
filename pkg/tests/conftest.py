import matplotlib
import numpy as np
import pytest

from ahres.config import RunConfig
from ahres.extension import ExtendedCoeffs, derive_extended_coeffs
from ahres.geometry import EvenMetricModel

matplotlib.use("Agg")


def _zero(mu):
    return np.zeros_like(np.asarray(mu, dtype=float))


def _one(mu):
    return np.ones_like(np.asarray(mu, dtype=float))


@pytest.fixture()
def toy_coeffs():
    """Coefficients with a_j = b_j = 0 and w = 1 (flat cross section, mode weight m^2)."""
    return ExtendedCoeffs(a1=_zero, a2=_zero, a3=_zero, b1=_zero, b2=_zero, c1=_zero, gamma=_zero,
                          da1=_zero, da2=_zero, da3=_zero, w=_one, dw=_zero, n=2, model=None)


@pytest.fixture()
def plane():
    """Hyperbolic plane with the default extension."""
    return EvenMetricModel.hyperbolic_plane()


@pytest.fixture()
def plane_coeffs(plane):
    return derive_extended_coeffs(plane)


@pytest.fixture()
def cylinder():
    """Hyperbolic cylinder with closed geodesic of length 2 pi."""
    return EvenMetricModel.cylinder(2 * np.pi)


@pytest.fixture()
def cylinder_coeffs(cylinder):
    return derive_extended_coeffs(cylinder)


@pytest.fixture(params=["hyperbolic-plane", "hyperbolic-space-3", "cylinder", "funnel"])
def model(request):
    """All built in models."""
    name = request.param

    if name == "hyperbolic-plane":
        return EvenMetricModel.hyperbolic_plane()
    elif name == "hyperbolic-space-3":
        return EvenMetricModel.hyperbolic_space_3()
    elif name == "cylinder":
        return EvenMetricModel.cylinder(2 * np.pi)
    elif name == "funnel":
        return EvenMetricModel.funnel(2 * np.pi)
    else:
        raise ValueError("Invalid model {}".format(name))


@pytest.fixture()
def default_config():
    return RunConfig()
