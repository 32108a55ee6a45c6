"""Extended, conjugated operator and the interior phase weight.

With ``D = -i d/dmu`` the extended operator on a mode reads

    P_sigma = 4(1+a1) mu D^2 - 4(1+a2) sigma D - (1+a3) sigma^2 + lambda/w
              - 4i D + b1 mu D + b2 sigma + c1

and equals ``(1+mu)^(-i sigma/4) mu^(-1/2-s) (Delta - (n-1)^2/4 - sigma^2)
mu^(s-1/2) (1+mu)^(i sigma/4)`` with ``s = -i sigma/2 + (n+1)/4`` in ``mu > 0``.
Here ``gamma = (n-1) w'/w`` so the Laplacian in mu is
``4(mu D)^2 + 2i(n-1-mu gamma)(mu D) + mu Delta_h``.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.polynomial import Polynomial
from numpy.polynomial.legendre import leggauss

from ahres.base import ConstructionError, DomainError
from ahres.utils import quintic_blend


@dataclass(frozen=True)
class ExtendedCoeffs:
    """Coefficient functions of the extended operator.

    Every field is a vectorized function of mu. ``da*`` are the analytic
    mu-derivatives of ``a*``; ``w`` and ``dw`` are the warp and its derivative.
    """

    a1: Callable
    a2: Callable
    a3: Callable
    b1: Callable
    b2: Callable
    c1: Callable
    gamma: Callable
    da1: Callable
    da2: Callable
    da3: Callable
    w: Callable
    dw: Callable
    n: int
    model: object = None

    def mode_weight(self, mode_index):
        """Eigenvalue of the cross section Laplacian on the mode."""
        if self.model is None:
            return float(mode_index) ** 2
        return self.model.mode_eigenvalue(mode_index)

    def ode_coefficients(self, mode_index, mu):
        """Coefficients of ``P_sigma u = alpha u'' + beta u' + c u`` grouped by powers of sigma.

        Parameters
        ----------
        mode_index : int
            Angular mode.

        mu : float or np.ndarray
            Points of evaluation.

        Returns
        -------
        alpha : np.ndarray
            Real second order coefficient ``-4(1+a1) mu``.

        beta : tuple
            ``(beta0, beta1)`` with ``beta = beta0 + beta1 sigma``.

        c : tuple
            ``(c0, c1, c2)`` with ``c = c0 + c1 sigma + c2 sigma^2``.

        """
        mu = np.asarray(mu, dtype=float)
        lam = self.mode_weight(mode_index)
        # D = -i d/dmu turns b1 mu D into -i b1 mu d/dmu
        alpha = -4 * (1 + self.a1(mu)) * mu
        beta0 = -4 + (-1j * self.b1(mu)) * mu
        beta1 = 4j * (1 + self.a2(mu))
        c0 = lam / self.w(mu) + self.c1(mu)
        c1 = self.b2(mu) + 0 * mu
        c2 = -(1 + self.a3(mu))
        return alpha, (beta0 + 0j, beta1 + 0j), (c0 + 0j, c1 + 0j, c2 + 0j)


def derive_extended_coeffs(model):
    """Coefficients of the extended operator for a warped product model.

    Parameters
    ----------
    model : EvenMetricModel
        Metric model.

    Returns
    -------
    coeffs : ExtendedCoeffs
        Closed form coefficients, ``a1 = 0`` and ``a2(0) = a3(0) = 0``.

    """
    n = model.n
    warp = model.warp

    def gamma(mu):
        return (n - 1) * warp.derivative(mu) / warp(mu)

    def a1(mu):
        return np.zeros_like(np.asarray(mu, dtype=float))

    def a2(mu):
        mu = np.asarray(mu, dtype=float)
        return -mu / (2 * (1 + mu))

    def a3(mu):
        mu = np.asarray(mu, dtype=float)
        return -mu * (5 + 4 * mu) / (4 * (1 + mu) ** 2)

    def da2(mu):
        mu = np.asarray(mu, dtype=float)
        return -1 / (2 * (1 + mu) ** 2)

    def da3(mu):
        mu = np.asarray(mu, dtype=float)
        return -1 / (1 + mu) ** 2 - (1 - mu) / (4 * (1 + mu) ** 3)

    def b1(mu):
        return -2j * gamma(mu)

    def b2(mu):
        mu = np.asarray(mu, dtype=float)
        return -1j / (1 + mu) ** 2 + 1j * gamma(mu) * (2 + mu) / (2 * (1 + mu))

    def c1(mu):
        return -(n - 1) * gamma(mu) / 2 + 0j

    return ExtendedCoeffs(a1=a1, a2=a2, a3=a3, b1=b1, b2=b2, c1=c1, gamma=gamma,
                          da1=a1, da2=da2, da3=da3, w=warp, dw=warp.derivative, n=n, model=model)


def _as_polynomial(test_fn):
    if isinstance(test_fn, Polynomial):
        return test_fn
    if np.isscalar(test_fn):
        return Polynomial([test_fn])
    if hasattr(test_fn, "deriv"):
        return test_fn
    raise TypeError("test_fn needs analytic derivatives, pass a numpy Polynomial.")


def verify_conjugation_identity(coeffs, model, sigma, test_fn, mu, mode_index=0):
    """Compare the assembled extended operator with the literal conjugated Laplacian.

    Parameters
    ----------
    coeffs : ExtendedCoeffs
        Coefficients under test.

    model : EvenMetricModel
        Metric model the Laplacian is built from.

    sigma : complex
        Spectral parameter.

    test_fn : numpy.polynomial.Polynomial or scalar
        Smooth test function of mu.

    mu : float
        Point in ``(0, mu_right)``.

    mode_index : int
        Angular mode.

    Returns
    -------
    residual : float
        ``|L - R| / max(|L|, |R|)`` where L is the assembled operator applied to
        the test function and R the literal composition.

    """
    if not 0 < mu < model.mu_right:
        raise DomainError("The literal composition needs 0 < mu < mu_right, got {}.".format(mu))

    sigma = complex(sigma)
    f0 = _as_polynomial(test_fn)
    f1 = f0.deriv()
    f2 = f1.deriv()
    f, df, ddf = complex(f0(mu)), complex(f1(mu)), complex(f2(mu))

    # assembled side
    alpha, (beta0, beta1), (c0, c1, c2) = coeffs.ode_coefficients(mode_index, mu)
    beta = beta0 + beta1 * sigma
    c = c0 + c1 * sigma + c2 * sigma ** 2
    left = complex(alpha * ddf + beta * df + c * f)

    # literal side: g = mu^t (1+mu)^e f with t = s - 1/2, e = i sigma / 4
    n = model.n
    t = -1j * sigma / 2 + (n + 1) / 4 - 0.5
    e = 1j * sigma / 4
    A, A1, A2 = mu ** t, t * mu ** (t - 1), t * (t - 1) * mu ** (t - 2)
    B, B1, B2 = (1 + mu) ** e, e * (1 + mu) ** (e - 1), e * (e - 1) * (1 + mu) ** (e - 2)

    g = A * B * f
    dg = A1 * B * f + A * B1 * f + A * B * df
    ddg = (A2 * B * f + A * B2 * f + A * B * ddf
           + 2 * A1 * B1 * f + 2 * A1 * B * df + 2 * A * B1 * df)

    # x-form of the Laplacian, x = sqrt(mu), G(x) = g(x^2)
    x = np.sqrt(mu)
    w = float(model.warp(mu))
    dw_dx = 2 * x * float(model.warp.derivative(mu))
    dlog_sqrt_det_dx = (n - 1) / 2 * dw_dx / w
    g_x = 2 * x * dg
    g_xx = 2 * dg + 4 * mu * ddg
    lam = model.mode_eigenvalue(mode_index)

    laplacian = -x ** 2 * g_xx + (n - 2) * x * g_x - x ** 2 * dlog_sqrt_det_dx * g_x + x ** 2 * lam / w * g
    shifted = laplacian - (n - 1) ** 2 / 4 * g - sigma ** 2 * g
    right = complex(mu ** (-t - 1) * (1 + mu) ** (-e) * shifted)

    scale = max(abs(left), abs(right), 1e-300)
    return abs(left - right) / scale


def indicial_roots(sigma, n):
    """Boundary exponents at ``mu = 0``.

    Returns
    -------
    roots : dict
        ``extended``: exponents ``(0, i sigma)`` of the extended operator, the
        first one smooth. ``original``: matching exponents of the Laplacian,
        ``-i sigma/2 + (n-1)/4`` (allowed) and ``i sigma/2 + (n-1)/4`` (excluded).

    """
    sigma = complex(sigma)
    return {
        "extended": (0j, 1j * sigma),
        "original": (-1j * sigma / 2 + (n - 1) / 4, 1j * sigma / 2 + (n - 1) / 4),
    }


def _boundary_phi(mu):
    mu = np.asarray(mu, dtype=float)
    return 0.5 * np.log(mu) - 0.25 * np.log1p(mu)


def _boundary_dphi(mu):
    mu = np.asarray(mu, dtype=float)
    return 1 / (2 * mu) - 1 / (4 * (1 + mu))


@dataclass(frozen=True)
class PhaseWeight:
    """Phase ``phi`` on the interior with ``e^phi = mu^(1/2) (1+mu)^(-1/4)`` near the boundary.

    The derivative is ``(1 - B) d(phi_b)`` where ``phi_b`` is the boundary
    form and ``B`` the quintic blend from ``mu_match`` to ``plateau[0]``, so
    ``|d phi|_G0 = 2 mu phi'`` never exceeds the boundary value.
    """

    mu_match: float
    plateau: tuple
    max_norm: float

    def boundary_form(self, mu):
        """Closed form ``mu^(1/2) (1+mu)^(-1/4)``."""
        mu = np.asarray(mu, dtype=float)
        return np.sqrt(mu) * (1 + mu) ** -0.25

    def blend(self, mu):
        """Quintic blend parameter in [0, 1] and its mu derivative."""
        width = self.plateau[0] - self.mu_match
        value, deriv = quintic_blend((np.asarray(mu, dtype=float) - self.mu_match) / width)
        return value, deriv / width

    def dphi(self, mu):
        """Derivative of phi with respect to mu."""
        value, _ = self.blend(mu)
        return (1 - value) * _boundary_dphi(mu)

    def phi(self, mu):
        """Evaluate phi for ``mu > 0``."""
        mu = np.atleast_1d(np.asarray(mu, dtype=float))
        out = _boundary_phi(np.minimum(mu, self.mu_match))
        nodes, weights = leggauss(24)
        upper = np.minimum(mu, self.plateau[0])
        for i in np.nonzero(upper > self.mu_match)[0]:
            a, b = self.mu_match, upper[i]
            pts = (b - a) / 2 * nodes + (a + b) / 2
            out[i] += (b - a) / 2 * np.sum(weights * self.dphi(pts))
        return out

    def norm_dphi_sq(self, mu):
        """``|d phi|^2`` with respect to the dual metric, ``(2 mu phi')^2``."""
        mu = np.asarray(mu, dtype=float)
        return (2 * mu * self.dphi(mu)) ** 2


def build_phase_weight(model, plateau=(1.5, None), mu_match=0.5, n_samples=1000):
    """Construct and certify the interior phase weight.

    Parameters
    ----------
    model : EvenMetricModel
        Metric model, only its interior ``(0, mu_right]`` is used.

    plateau : tuple
        ``(start, end)`` of the region where phi is constant. ``end = None``
        means ``mu_right``.

    mu_match : float
        Up to this point phi equals the boundary form.

    n_samples : int
        Number of sample points for the certification ``|d phi| < 1``.

    Returns
    -------
    weight : PhaseWeight
        Certified phase weight.

    """
    start, end = plateau
    end = model.mu_right if end is None else end
    if not 0 < mu_match < start <= end <= model.mu_right:
        raise ConstructionError("Need 0 < mu_match < plateau start <= plateau end <= mu_right.",
                                {"mu_match": mu_match, "plateau": [start, end], "mu_right": model.mu_right})

    weight = PhaseWeight(mu_match=float(mu_match), plateau=(float(start), float(end)), max_norm=np.nan)

    samples = np.linspace(0, model.mu_right, n_samples + 1)[1:]
    norms = weight.norm_dphi_sq(samples)
    worst = int(np.argmax(norms))
    if not norms[worst] < 1:
        raise ConstructionError("|d phi| >= 1 at a sample point.",
                                {"mu": float(samples[worst]), "norm_sq": float(norms[worst])})

    return PhaseWeight(mu_match=weight.mu_match, plateau=weight.plateau, max_norm=float(np.sqrt(norms[worst])))
