"""Collection of utilities."""

import hashlib
import json
import math

import numpy as np


def smooth_step(t):
    """Evaluate a C-infinity step that is 0 for t <= 0 and 1 for t >= 1.

    Parameters
    ----------
    t : float or np.ndarray
        Points of evaluation.

    Returns
    -------
    values : np.ndarray
        Values in [0, 1], monotone in `t`.

    """
    t = np.asarray(t, dtype=float)

    def psi(s):
        out = np.zeros_like(s)
        pos = s > 0
        out[pos] = np.exp(-1 / s[pos])
        return out

    a = psi(t)
    b = psi(1 - t)
    return a / (a + b)


def smooth_bump(x, left, right):
    """Smooth compactly supported bump on ``(left, right)`` equal to 1 on the inner half.

    Parameters
    ----------
    x : float or np.ndarray
        Points of evaluation.

    left, right : float
        Support of the bump, ``left < right``.

    Returns
    -------
    values : np.ndarray
        Values in [0, 1]. Exactly zero outside of ``(left, right)``.

    """
    if not left < right:
        raise ValueError("The bump needs left < right, got ({}, {}).".format(left, right))

    x = np.asarray(x, dtype=float)
    center = (left + right) / 2
    half = (right - left) / 2
    t = np.abs(x - center) / half  # 0 at the center, 1 at the edge

    return smooth_step(2 * (1 - t))


def quintic_blend(t):
    """Monotone quintic 6t^5 - 15t^4 + 10t^3 clipped to [0, 1].

    Returns the value and the first derivative.
    """
    t = np.clip(np.asarray(t, dtype=float), 0, 1)
    value = t ** 3 * (10 - 15 * t + 6 * t ** 2)
    deriv = 30 * t ** 2 * (1 - t) ** 2
    return value, deriv


def extrapolate_to_zero(fun, delta=1e-2, order=6):
    """Estimate ``lim_{t -> 0+} fun(t)`` by polynomial extrapolation.

    Parameters
    ----------
    fun : callable
        Function of one positive real variable, may return complex numbers or arrays.

    delta : float
        Spacing of the samples ``t_j = j * delta, j = 1..order``.

    order : int
        Number of samples. The extrapolation error is of order ``delta ** order``.

    Returns
    -------
    limit : complex or np.ndarray
        Lagrange interpolant of the samples evaluated at 0.

    """
    nodes = delta * np.arange(1, order + 1)
    samples = [np.asarray(fun(t)) for t in nodes]

    # Lagrange weights at 0
    weights = []
    for j, tj in enumerate(nodes):
        others = np.delete(nodes, j)
        weights.append(np.prod(others / (others - tj)))

    return sum(w * s for w, s in zip(weights, samples))


def parse_complex(text):
    """Parse strings like ``2-0.5i``, ``3i`` or ``1.5`` into a complex number."""
    if isinstance(text, (int, float, complex)):
        return complex(text)
    cleaned = text.strip().replace(" ", "").replace("i", "j")
    if cleaned.endswith("j") and cleaned[:-1] in ("", "+", "-"):
        cleaned = cleaned[:-1] + "1j"
    try:
        return complex(cleaned)
    except ValueError:
        raise ValueError("Cannot parse {} as a complex number.".format(text))


def round_floats(obj, digits=17):
    """Recursively represent floats with `digits` significant digits."""
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return str(obj)
        return float("{:.{}g}".format(obj, digits))
    if isinstance(obj, (np.floating, np.integer)):
        return round_floats(obj.item(), digits)
    if isinstance(obj, dict):
        return {k: round_floats(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_floats(v, digits) for v in obj]
    return obj


def canonical_json(obj):
    """Deterministic JSON text (sorted keys, 17 significant digits, trailing newline)."""
    return json.dumps(round_floats(obj), sort_keys=True, indent=2) + "\n"


def config_hash(config_dict):
    """SHA-256 of the canonical JSON of a configuration dictionary."""
    return hashlib.sha256(canonical_json(config_dict).encode("utf-8")).hexdigest()
