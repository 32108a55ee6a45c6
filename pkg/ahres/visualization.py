"""Collection of tools for visualization."""

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.animation import ArtistAnimation


def plot_resonances(result, oracle=None, ax=None, figsize=(6, 6)):
    """Scatter computed resonances in the complex plane.

    Parameters
    ----------
    result : ResonanceResult
        Computed resonances, colored by mode.

    oracle : list or None
        Exact resonances drawn as crosses.

    ax : matplotlib.axes.Axes or None
        Axes to draw into, a new figure is created if None.

    figsize : tuple
        Size of a newly created figure.

    Returns
    -------
    ax : matplotlib.axes.Axes
        Axes with the plot.

    """
    if ax is None:
        _, ax = plt.subplots(figsize=figsize)

    modes = sorted({e.mode_index for e in result.entries})
    for mode in modes:
        sigmas = np.array([e.sigma for e in result.entries if e.mode_index == mode])
        ax.scatter(sigmas.real, sigmas.imag, label="m = {}".format(mode), s=30)

    if oracle:
        oracle = np.asarray(oracle, dtype=complex)
        ax.scatter(oracle.real, oracle.imag, marker="x", color="k", label="exact")

    ax.axhline(0, color="gray", linewidth=0.5)
    ax.set_xlabel("Re sigma")
    ax.set_ylabel("Im sigma")
    if modes or oracle is not None:
        ax.legend()
    return ax


def plot_trajectory(trajectory, ax=None, figsize=(6, 4)):
    """Plot a bicharacteristic in the ``(mu, nu)`` plane (``(mu, xi)`` for standard coordinates)."""
    if ax is None:
        _, ax = plt.subplots(figsize=figsize)
    states = trajectory.states
    ax.plot(states[:, 0], states[:, 2], "-")
    ax.plot(states[0, 0], states[0, 2], "o", label="start")
    ax.plot(states[-1, 0], states[-1, 2], "s", label=trajectory.terminal.value)
    ax.set_xlabel("mu")
    ax.set_ylabel("nu" if trajectory.coordinates == "compactified" else "xi")
    ax.legend()
    return ax


def create_animation(trajectory, fps=24, n_seconds=2, figsize=(6, 4), repeat=True):
    """Create an animation of a bicharacteristic being traced out.

    Parameters
    ----------
    trajectory : Trajectory
        Integrated bicharacteristic with dense output.

    fps : int
        Frames per second.

    n_seconds : int
        Length of the animation.

    figsize : tuple
        Size of the figure.

    repeat : bool
        If True, then animation always replayed at the end.

    Returns
    -------
    ani : matplotlib.animation.ArtistAnimation
        Animation showing the trajectory.

    """
    n_frames = int(n_seconds * fps)
    interval = (1 / fps) * 1000
    times = np.linspace(0, trajectory.times[-1], n_frames + 1)
    states = trajectory.evaluate(times)

    fig = plt.figure(figsize=figsize)
    plt.xlabel("mu")
    frames = []
    for i in range(1, n_frames + 2):
        line, = plt.plot(states[:i, 0], states[:i, 2], color="C0")
        frames.append([line])

    return ArtistAnimation(fig, frames, interval=interval, repeat=repeat)
