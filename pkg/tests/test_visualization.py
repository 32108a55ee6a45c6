"""Collection of tests focused on the `visualization` module."""

import matplotlib.pyplot as plt
import numpy as np
import pytest
from matplotlib.animation import ArtistAnimation

from ahres.flow import Terminal, Trajectory
from ahres.solver import ResonanceEntry, ResonanceResult
from ahres.visualization import create_animation, plot_resonances, plot_trajectory


@pytest.fixture()
def trajectory():
    times = np.linspace(0, 2, 11)
    states = np.column_stack([0.5 * np.exp(-times), np.zeros_like(times), np.exp(-times), np.zeros_like(times)])
    return Trajectory(times, states, 1, 1, Terminal.ConvergedLPlus)


@pytest.fixture(autouse=True)
def close_figures():
    yield
    plt.close("all")


class TestPlotResonances:
    def test_overall(self):
        result = ResonanceResult([ResonanceEntry(-0.5j, 0, 1e-12), ResonanceEntry(1 - 0.5j, 1, 1e-12)])

        ax = plot_resonances(result, oracle=[-0.5j])

        assert len(ax.collections) == 3
        assert ax.get_legend() is not None

    def test_empty(self):
        _, ax = plt.subplots()

        assert plot_resonances(ResonanceResult([]), ax=ax) is ax
        assert ax.get_legend() is None


class TestPlotTrajectory:
    def test_overall(self, trajectory):
        ax = plot_trajectory(trajectory)

        assert len(ax.lines) == 3
        assert ax.get_ylabel() == "nu"
        np.testing.assert_allclose(ax.lines[0].get_xdata(), trajectory.states[:, 0])


class TestCreateAnimation:
    """Collection of tests focused on the `create_animation` function."""

    def test_overall(self, trajectory):
        ani = create_animation(trajectory, fps=2, n_seconds=1)

        assert isinstance(ani, ArtistAnimation)
