"""Principal symbols, Hamilton vector fields and radial set quantities.

Covectors are written ``xi dmu + eta dy``. The dual metric pairing on a mode
is ``|eta|^2 = eta^2 / w(mu)``. Fiber compactified coordinates near the radial
sets are ``nu = 1/|xi|`` and ``eta_hat = eta/|xi|`` with the sign of xi kept
separately.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from ahres.base import DEFAULT_CHAR_TOL, DomainError, NumericalError

KINDS = ("classical", "full", "semiclassical")


@dataclass(frozen=True)
class PhasePoint:
    """Point ``(mu, y, xi, eta)`` of the cotangent bundle."""

    mu: float
    y: float
    xi: float
    eta: float

    def __post_init__(self):
        """Validate."""
        if not np.all(np.isfinite([self.mu, self.y, self.xi, self.eta])):
            raise DomainError("Phase point entries have to be finite.")

    def compactify(self):
        """Projective coordinates, requires ``xi != 0``."""
        if self.xi == 0:
            raise DomainError("Compactified coordinates need xi != 0.")
        nu = 1 / abs(self.xi)
        return CompactifiedPhasePoint(self.mu, self.y, nu, self.eta * nu, int(np.sign(self.xi)))


@dataclass(frozen=True)
class CompactifiedPhasePoint:
    """Point ``(mu, y, nu, eta_hat)`` with ``sgn`` the sign of xi, ``nu = 0`` is fiber infinity."""

    mu: float
    y: float
    nu: float
    eta_hat: float
    sgn: int = 1

    def __post_init__(self):
        """Validate."""
        if self.nu < 0:
            raise DomainError("nu = 1/|xi| has to be non-negative, got {}.".format(self.nu))
        if self.sgn not in (1, -1):
            raise DomainError("sgn has to be +1 or -1.")

    def to_phase_point(self):
        """Inverse of ``PhasePoint.compactify``, requires ``nu > 0``."""
        if self.nu == 0:
            raise DomainError("A point at fiber infinity has no finite representative.")
        return PhasePoint(self.mu, self.y, self.sgn / self.nu, self.eta_hat / self.nu)

    def as_array(self):
        """State vector ``(mu, y, nu, eta_hat)``."""
        return np.array([self.mu, self.y, self.nu, self.eta_hat], dtype=float)


@dataclass(frozen=True)
class SpectralParam:
    """Spectral parameter with its semiclassical rescaling ``h = 1/|sigma|``, ``z = sigma h``."""

    sigma: complex

    @property
    def h(self):
        """Semiclassical parameter."""
        if self.sigma == 0:
            raise DomainError("sigma = 0 has no semiclassical rescaling.")
        return 1 / abs(self.sigma)

    @property
    def z(self):
        """Unit spectral parameter."""
        return complex(self.sigma) * self.h


class CharComponent(Enum):
    """Components of the (semiclassical) characteristic set."""

    SigmaPlus = "SigmaPlus"
    SigmaMinus = "SigmaMinus"
    SemiPlus = "SemiPlus"
    SemiMinus = "SemiMinus"
    NotCharacteristic = "NotCharacteristic"


def _eta_sq(coeffs, mu, eta):
    return eta ** 2 / coeffs.w(mu)


def eval_p(coeffs, pt):
    """Classical principal symbol ``4(1+a1) mu xi^2 + |eta|^2``."""
    mu = pt.mu
    return float(4 * (1 + coeffs.a1(mu)) * mu * pt.xi ** 2 + _eta_sq(coeffs, mu, pt.eta))


def eval_p_full(coeffs, sigma, pt):
    """High energy principal symbol including the sigma terms.

    ``4(1+a1) mu xi^2 - 4(1+a2) sigma xi - (1+a3) sigma^2 + |eta|^2``, real for real sigma.
    """
    mu = pt.mu
    sigma = complex(sigma)
    value = (4 * (1 + coeffs.a1(mu)) * mu * pt.xi ** 2 - 4 * (1 + coeffs.a2(mu)) * sigma * pt.xi
             - (1 + coeffs.a3(mu)) * sigma ** 2 + _eta_sq(coeffs, mu, pt.eta))
    value = complex(value)
    if sigma.imag == 0:
        assert value.imag == 0
    return value


def eval_p_semi(coeffs, z, pt):
    """Semiclassical principal symbol split into real and imaginary part.

    Returns
    -------
    re, im : float
        ``im = -2 Im z (2(1+a2) xi + (1+a3) Re z)``.

    """
    mu = pt.mu
    z = complex(z)
    a1, a2, a3 = coeffs.a1(mu), coeffs.a2(mu), coeffs.a3(mu)
    re = (4 * (1 + a1) * mu * pt.xi ** 2 - 4 * (1 + a2) * z.real * pt.xi
          - (1 + a3) * (z.real ** 2 - z.imag ** 2) + _eta_sq(coeffs, mu, pt.eta))
    im = -2 * z.imag * (2 * (1 + a2) * pt.xi + (1 + a3) * z.real)
    return float(re), float(im)


def _symbol_partials(coeffs, mu, xi, eta, s):
    """Partial derivatives ``(d_mu p, d_xi p, d_eta p)`` of the symbol with spectral value s.

    s is sigma for the full symbol, Re z for the semiclassical one (whose real
    part uses Re(z^2)), and 0 for the classical symbol.
    """
    a1, a2, a3 = coeffs.a1(mu), coeffs.a2(mu), coeffs.a3(mu)
    da1, da2, da3 = coeffs.da1(mu), coeffs.da2(mu), coeffs.da3(mu)
    w, dw = coeffs.w(mu), coeffs.dw(mu)
    s_sq = s[1] if isinstance(s, tuple) else s ** 2
    s = s[0] if isinstance(s, tuple) else s

    d_xi = 8 * (1 + a1) * mu * xi - 4 * (1 + a2) * s
    d_eta = 2 * eta / w
    d_mu = 4 * (1 + a1 + mu * da1) * xi ** 2 - 4 * da2 * s * xi - da3 * s_sq - eta ** 2 * dw / w ** 2
    return d_mu, d_xi, d_eta


def _spectral_value(kind, param):
    if kind not in KINDS:
        raise ValueError("Unknown kind {}, choose from {}.".format(kind, KINDS))
    if kind == "classical":
        return 0.0
    if param is None:
        raise ValueError("Kind {} needs a spectral parameter.".format(kind))
    param = complex(param)
    if kind == "full":
        return param
    # Hamilton field of the real part of the semiclassical symbol
    return (param.real, (param ** 2).real)


def hamilton_field(coeffs, pt, kind="classical", param=None):
    """Hamilton vector field of a principal symbol.

    Parameters
    ----------
    coeffs : ExtendedCoeffs
        Coefficients of the extended operator.

    pt : PhasePoint or CompactifiedPhasePoint
        Base point. For compactified points the rescaled field
        ``W = nu H_p`` in coordinates ``(mu, y, nu, eta_hat)`` is returned,
        which is smooth up to fiber infinity.

    kind : str
        ``"classical"``, ``"full"`` (needs sigma) or ``"semiclassical"`` (needs z).

    param : complex or None
        sigma or z.

    Returns
    -------
    field : np.ndarray
        Components ``(mu, y, xi, eta)`` or ``(mu, y, nu, eta_hat)``.

    """
    s = _spectral_value(kind, param)

    if isinstance(pt, CompactifiedPhasePoint):
        if kind == "full":
            raise ValueError("The compactified field is defined for the classical and semiclassical symbols.")
        return compactified_field(coeffs, pt.as_array(), pt.sgn, s)

    d_mu, d_xi, d_eta = _symbol_partials(coeffs, pt.mu, pt.xi, pt.eta, s)
    # warped products: p does not depend on y, so eta is conserved
    return np.array([d_xi, d_eta, -d_mu, 0 * d_mu])


def compactified_field(coeffs, state, sgn, s=0.0):
    """Rescaled field ``W = nu H_p`` at ``state = (mu, y, nu, eta_hat)``.

    ``s`` is 0 for the classical symbol or ``(Re z, Re z^2)`` for the
    semiclassical one.
    """
    mu, _, nu, eta_hat = state
    if nu < 0:
        raise DomainError("nu = 1/|xi| has to be non-negative, got {}.".format(nu))
    if isinstance(s, tuple):
        re_z, re_z_sq = s
    else:
        re_z, re_z_sq = float(np.real(s)), float(np.real(s) ** 2)

    a1, a2 = coeffs.a1(mu), coeffs.a2(mu)
    da1, da2, da3 = coeffs.da1(mu), coeffs.da2(mu), coeffs.da3(mu)
    w, dw = coeffs.w(mu), coeffs.dw(mu)

    bracket = (4 * (1 + a1 + mu * da1) - 4 * da2 * re_z * sgn * nu - da3 * re_z_sq * nu ** 2
               - eta_hat ** 2 * dw / w ** 2)
    d_mu = 8 * (1 + a1) * mu * sgn - 4 * (1 + a2) * re_z * nu
    d_y = 2 * eta_hat / w
    d_nu = sgn * nu * bracket
    d_eta_hat = sgn * eta_hat * bracket
    return np.array([d_mu, d_y, d_nu, d_eta_hat], dtype=float)


def radial_quantities(coeffs, cpt):
    """Quadratic defining functions of the radial sets.

    Returns
    -------
    rho_tilde : float
        ``nu``.

    rho_0 : float
        ``eta_hat^2 + p_hat^2`` with ``p_hat = nu^2 p = 4(1+a1) mu + eta_hat^2 / w``.

    """
    mu = cpt.mu
    p_hat = 4 * (1 + coeffs.a1(mu)) * mu + cpt.eta_hat ** 2 / coeffs.w(mu)
    return float(cpt.nu), float(cpt.eta_hat ** 2 + p_hat ** 2)


def char_component(coeffs, pt, z=None, tol=DEFAULT_CHAR_TOL):
    """Classify a phase point with respect to the characteristic set.

    Parameters
    ----------
    coeffs : ExtendedCoeffs
        Coefficients.

    pt : PhasePoint
        Point to classify.

    z : complex or None
        If given, the semiclassical characteristic set of ``p_{h,z}`` is used.

    tol : float
        Threshold on ``|p| / (1 + xi^2 + eta^2)``.

    Returns
    -------
    component : CharComponent
        Component containing the point.

    """
    scale = 1 + pt.xi ** 2 + pt.eta ** 2

    if z is None:
        if pt.xi == 0 or abs(eval_p(coeffs, pt)) / scale >= tol:
            return CharComponent.NotCharacteristic
        return CharComponent.SigmaPlus if pt.xi > 0 else CharComponent.SigmaMinus

    re, im = eval_p_semi(coeffs, z, pt)
    if np.hypot(re, im) / scale >= tol:
        return CharComponent.NotCharacteristic

    mu = pt.mu
    separator = 2 * (1 + coeffs.a2(mu)) * pt.xi + (1 + coeffs.a3(mu)) * complex(z).real
    if abs(separator) < tol:
        raise NumericalError("Characteristic point on the separating hypersurface.",
                             {"mu": pt.mu, "xi": pt.xi, "eta": pt.eta})
    return CharComponent.SemiPlus if separator > 0 else CharComponent.SemiMinus
