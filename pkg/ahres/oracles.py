"""Exact resonance sets and independent reference solutions.

The hyperbolic plane has resonances ``-i(k + 1/2)`` on the mode ``m`` for
``k >= |m|``; the resolvent of hyperbolic 3-space has no poles; the
hyperbolic cylinder with closed geodesic of length ``ell`` has the lattice
``+-|m| / ell_tilde - i(k + 1/2)``, ``ell_tilde = ell / 2 pi``, whose
resonant states are even across the neck for even k and odd for odd k.
"""

import numpy as np
from scipy.special import gamma as gamma_fn

from ahres.discretize import build_grid
from ahres.extension import derive_extended_coeffs


def hyperbolic_plane_resonances(mode_index, im_min):
    """Resonances of one mode of the hyperbolic plane with ``Im sigma >= im_min``."""
    out = []
    k = abs(int(mode_index))
    while -(k + 0.5) >= im_min:
        out.append(complex(0, -(k + 0.5)))
        k += 1
    return out


def hyperbolic_space_resonances(mode_index, im_min):
    """Hyperbolic 3-space: the resolvent continues to an entire family."""
    return []


def cylinder_resonances(ell, mode_index, im_min, parity=None, re_range=None):
    """Resonance lattice of one mode of the hyperbolic cylinder.

    Parameters
    ----------
    ell : float
        Length of the closed geodesic.

    mode_index : int
        Angular mode m.

    im_min : float
        Lower bound of the imaginary part.

    parity : str or None
        Restrict to the ``"even"`` or ``"odd"`` sector across the neck.

    re_range : tuple or None
        Optional bounds on the real part.

    Returns
    -------
    resonances : list
        Tuples ``(sigma, parity, multiplicity)``; mode 0 gives double points.

    """
    shift = abs(mode_index) / (ell / (2 * np.pi))
    out = []
    k = 0
    while -(k + 0.5) >= im_min:
        sector = "even" if k % 2 == 0 else "odd"
        if parity in (None, sector):
            reals = [shift] if shift == 0 else [-shift, shift]
            for re in reals:
                if re_range is None or re_range[0] <= re <= re_range[1]:
                    out.append((complex(re, -(k + 0.5)), sector, 2 if shift == 0 else 1))
        k += 1
    return out


def oracle_resonances(model, mode_index, re_range, im_range, parity=None):
    """Exact resonances of a built-in model inside a window, as a list of complex numbers."""
    (a, b), (c, d) = re_range, im_range
    if model.name == "hyperbolic-plane":
        values = hyperbolic_plane_resonances(mode_index, c)
    elif model.name == "hyperbolic-space-3":
        values = hyperbolic_space_resonances(mode_index, c)
    elif model.name in ("cylinder", "funnel"):
        if parity is None and model.name == "funnel":
            parity = model.neck_parity
        values = [s for s, _, _ in cylinder_resonances(model.params["ell"], mode_index, c, parity, re_range)]
    else:
        raise ValueError("No exact resonances known for model {}.".format(model.name))
    return [s for s in values if a <= s.real <= b and c <= s.imag <= d]


def poschl_teller_transmission(sigma, nu):
    """Transmission coefficient of the cylinder mode problem up to a pole-free factor.

    ``Gamma(1/2 - i sigma + i nu) Gamma(1/2 - i sigma - i nu) / (Gamma(-i sigma) Gamma(1 - i sigma))``
    with ``nu = |m| / ell_tilde``; its poles are the resonance lattice.
    """
    sigma = complex(sigma)
    numerator = gamma_fn(0.5 - 1j * sigma + 1j * nu) * gamma_fn(0.5 - 1j * sigma - 1j * nu)
    return numerator / (gamma_fn(-1j * sigma) * gamma_fn(1 - 1j * sigma))


def transmission_poles(nu, k_max):
    """Poles ``+-nu - i(k + 1/2)`` of the transmission coefficient, ``k = 0..k_max``."""
    return sorted({complex(sign * nu, -(k + 0.5)) for k in range(k_max + 1) for sign in (1, -1)},
                  key=lambda s: (-s.imag, s.real))


def unextended_mode_bvp(model, mode_index, sigma, f, mu_a, mu_b, left_value, right_value, N=96):
    """Solve ``(Delta - (n-1)^2/4 - sigma^2) u = f`` on ``[mu_a, mu_b]`` inside ``mu > 0`` with Dirichlet data.

    In mu the mode Laplacian reads
    ``-4 mu^2 u'' + ((2n - 6) mu - 2 mu^2 gamma) u' + mu lambda / w u``.

    Returns
    -------
    mu : np.ndarray
        Collocation nodes.

    u : np.ndarray
        Solution values.

    """
    if not 0 < mu_a < mu_b <= model.mu_right:
        raise ValueError("The unextended problem lives in 0 < mu_a < mu_b <= mu_right.")
    sigma = complex(sigma)
    n = model.n
    coeffs = derive_extended_coeffs(model)
    grid = build_grid(mu_a, mu_b, N, "none")
    mu = grid.nodes
    lam = model.mode_eigenvalue(mode_index)

    L = (np.diag(-4 * mu ** 2) @ grid.D2 + np.diag((2 * n - 6) * mu - 2 * mu ** 2 * coeffs.gamma(mu)) @ grid.D1
         + np.diag(mu * lam / coeffs.w(mu) - (n - 1) ** 2 / 4 - sigma ** 2))
    L = L.astype(complex)
    rhs = np.asarray(f(mu), dtype=complex)
    for row, value in ((0, left_value), (N - 1, right_value)):
        L[row] = 0
        L[row, row] = 1
        rhs[row] = value
    return mu, np.linalg.solve(L, rhs)
