"""Even asymptotically hyperbolic metric models.

A model is a warped product ``g0 = (dx^2 + w(mu) h0) / x^2`` written in the
even coordinate ``mu = x^2`` and continued analytically to ``mu < 0``.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import Polynomial

from ahres.base import DEFAULT_MU_LEFT, DomainError, EvaluationError

CROSS_SECTIONS = ("circle", "sphere")


class Warp(ABC):
    """Conformal factor ``w(mu)`` of the boundary metric family ``h = w(mu) h0``."""

    @abstractmethod
    def __call__(self, mu):
        """Evaluate w."""

    def derivative(self, mu):
        """Evaluate dw/dmu.

        Subclasses override this with the analytic derivative. The default uses
        a sixth order central difference, relative accuracy around 1e-11 for
        analytic warps.
        """
        mu = np.asarray(mu, dtype=float)
        h = 1e-2 * np.maximum(1, np.abs(mu))
        c = (1 / 60, -3 / 20, 3 / 4)
        total = 0
        for k, ck in zip((3, 2, 1), c):
            total = total + ck * (self(mu + k * h) - self(mu - k * h))
        return total / h


class HyperbolicWarp(Warp):
    """``w = (1 - mu/4)^2``, the warp of hyperbolic space in geodesic polar form."""

    def __call__(self, mu):
        """Evaluate w."""
        return (1 - np.asarray(mu, dtype=float) / 4) ** 2

    def derivative(self, mu):
        """Evaluate dw/dmu."""
        return -(1 - np.asarray(mu, dtype=float) / 4) / 2


class CylinderWarp(Warp):
    """``w = ell_t^2 (1 + mu/4)^2``, the hyperbolic cylinder with neck at ``mu = 4``.

    Parameters
    ----------
    ell_tilde : float
        Closed geodesic length divided by 2 pi.

    """

    def __init__(self, ell_tilde=1.0):
        """Construct."""
        if not ell_tilde > 0:
            raise ValueError("ell_tilde has to be positive.")
        self.ell_tilde = float(ell_tilde)

    def __call__(self, mu):
        """Evaluate w."""
        return self.ell_tilde ** 2 * (1 + np.asarray(mu, dtype=float) / 4) ** 2

    def derivative(self, mu):
        """Evaluate dw/dmu."""
        return self.ell_tilde ** 2 * (1 + np.asarray(mu, dtype=float) / 4) / 2


class PolynomialWarp(Warp):
    """Warp given by polynomial coefficients in mu (lowest degree first)."""

    def __init__(self, coefficients):
        """Construct."""
        coefficients = np.asarray(coefficients, dtype=float)
        if coefficients.ndim != 1 or len(coefficients) == 0:
            raise ValueError("Polynomial warp needs a non-empty 1D list of coefficients.")
        self.polynomial = Polynomial(coefficients)
        self._deriv = self.polynomial.deriv()

    def __call__(self, mu):
        """Evaluate w."""
        return self.polynomial(np.asarray(mu, dtype=float))

    def derivative(self, mu):
        """Evaluate dw/dmu."""
        return self._deriv(np.asarray(mu, dtype=float))


@dataclass(frozen=True)
class EvenMetricModel:
    """Even conformally compact warped product on an extended mu interval.

    Parameters
    ----------
    n : int
        Dimension of X0, at least 2.

    cross_section : str
        Either ``"circle"`` (n = 2) or ``"sphere"`` (round S^{n-1}).

    warp : Warp
        Conformal factor of the boundary metric family.

    mu_left, mu_right : float
        Extended interval, ``mu_left < 0 < mu_right``.

    trapping_flag : bool
        Whether the model has trapped geodesics.

    name : str
        Model type used in configs and reports.

    center : bool
        If True, ``mu_right`` is a polar center where ``w`` vanishes.

    neck_parity : str or None
        For cylinder type models the parity sectors across the neck at
        ``mu_right``: ``"even"``, ``"odd"`` or ``"both"``.

    """

    n: int
    cross_section: str
    warp: Warp
    mu_left: float
    mu_right: float
    trapping_flag: bool = False
    name: str = "custom"
    center: bool = False
    neck_parity: str = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        """Validate."""
        if int(self.n) != self.n or self.n < 2:
            raise ValueError("Dimension n has to be an integer >= 2, got {}.".format(self.n))
        if self.cross_section not in CROSS_SECTIONS:
            raise ValueError("Unknown cross section {}.".format(self.cross_section))
        if self.cross_section == "circle" and self.n != 2:
            raise ValueError("The circle cross section requires n = 2.")
        if not self.mu_left < 0 < self.mu_right:
            raise ValueError("Need mu_left < 0 < mu_right, got [{}, {}].".format(self.mu_left, self.mu_right))
        if self.neck_parity not in (None, "even", "odd", "both"):
            raise ValueError("Unknown neck parity {}.".format(self.neck_parity))

        # the polar center is the only place where w may vanish
        right = self.mu_right - 1e-6 if self.center else self.mu_right
        samples = np.linspace(self.mu_left, right, 257)
        values = self.warp(samples)
        if not np.all(np.isfinite(values)):
            raise EvaluationError("Warp has non-finite samples on the extended interval.")
        if not np.all(values > 0):
            bad = float(samples[np.argmin(values)])
            raise ValueError("Warp has to be positive on the extended interval, fails at mu = {}.".format(bad))

    @classmethod
    def hyperbolic_plane(cls, mu_left=DEFAULT_MU_LEFT):
        """Hyperbolic plane with the polar center at ``mu = 4``."""
        return cls(2, "circle", HyperbolicWarp(), mu_left, 4.0, False, "hyperbolic-plane", center=True)

    @classmethod
    def hyperbolic_space_3(cls, mu_left=DEFAULT_MU_LEFT):
        """Hyperbolic 3-space with the polar center at ``mu = 4``."""
        return cls(3, "sphere", HyperbolicWarp(), mu_left, 4.0, False, "hyperbolic-space-3", center=True)

    @classmethod
    def cylinder(cls, ell=2 * np.pi, mu_left=DEFAULT_MU_LEFT, neck_parity="both"):
        """Hyperbolic cylinder with closed geodesic of length `ell`, half up to the neck."""
        return cls(2, "circle", CylinderWarp(ell / (2 * np.pi)), mu_left, 4.0, True, "cylinder",
                   neck_parity=neck_parity, params={"ell": float(ell)})

    @classmethod
    def funnel(cls, ell=2 * np.pi, mu_left=DEFAULT_MU_LEFT, neck_parity="even"):
        """Hyperbolic funnel, the cylinder end cut at the neck with a single parity sector."""
        if neck_parity not in ("even", "odd"):
            raise ValueError("A funnel uses a single neck parity, got {}.".format(neck_parity))
        return cls(2, "circle", CylinderWarp(ell / (2 * np.pi)), mu_left, 4.0, True, "funnel",
                   neck_parity=neck_parity, params={"ell": float(ell)})

    @classmethod
    def custom(cls, coefficients, n=2, mu_left=DEFAULT_MU_LEFT, mu_right=1.0, cross_section=None,
               trapping_flag=False):
        """Model with a polynomial warp in mu and no special right end."""
        cross_section = cross_section or ("circle" if n == 2 else "sphere")
        return cls(n, cross_section, PolynomialWarp(coefficients), mu_left, mu_right, trapping_flag, "custom",
                   params={"custom_warp": [float(c) for c in coefficients]})

    def check_domain(self, mu):
        """Raise ``DomainError`` if any mu lies outside the extended interval."""
        mu = np.asarray(mu, dtype=float)
        if np.any(mu < self.mu_left - 1e-12) or np.any(mu > self.mu_right + 1e-12):
            raise DomainError("mu outside of the extended interval [{}, {}].".format(self.mu_left, self.mu_right),
                              {"mu_left": self.mu_left, "mu_right": self.mu_right})

    def mode_eigenvalue(self, mode_index):
        """Eigenvalue of the cross section Laplacian for a given mode.

        Circle: ``m^2`` for integer m. Sphere: ``l(l + n - 2)`` for ``l >= 0``.
        """
        if int(mode_index) != mode_index:
            raise DomainError("Mode index has to be an integer, got {}.".format(mode_index))
        mode_index = int(mode_index)
        if self.cross_section == "circle":
            return float(mode_index ** 2)
        if mode_index < 0:
            raise DomainError("Sphere modes are indexed by l >= 0, got {}.".format(mode_index))
        return float(mode_index * (mode_index + self.n - 2))

    def regularity_order(self, mode_index):
        """Vanishing order ``k`` of regular solutions at the polar center."""
        return abs(int(mode_index))

    def default_bc(self):
        """Right end treatment: ``center_regularity``, ``periodic_double_cover`` or ``dirichlet_right``."""
        if self.center:
            return "center_regularity"
        if self.neck_parity is not None:
            return "periodic_double_cover"
        return "dirichlet_right"

    def to_dict(self):
        """JSON description used in provenance blocks."""
        out = {"type": self.name, "n": self.n, "cross_section": self.cross_section,
               "mu_left": self.mu_left, "mu_right": self.mu_right, "trapping": self.trapping_flag}
        out.update(self.params)
        if self.neck_parity is not None:
            out["neck_parity"] = self.neck_parity
        return out


def gamma_from_metric(model, mu):
    """First order coefficient ``gamma = 2 d/dmu log sqrt(det h) = (n-1) w'/w``.

    Parameters
    ----------
    model : EvenMetricModel
        Metric model.

    mu : float or np.ndarray
        Points in the extended interval.

    Returns
    -------
    gamma : float or np.ndarray
        Values of gamma.

    """
    model.check_domain(mu)
    return (model.n - 1) * model.warp.derivative(mu) / model.warp(mu)


def mode_laplacian_coeff(model, mode_index, mu):
    """Scalar ``lambda_mode / w(mu)`` replacing the boundary Laplacian on a mode."""
    model.check_domain(mu)
    return model.mode_eigenvalue(mode_index) / model.warp(mu)


@dataclass
class EvennessReport:
    """Outcome of ``validate_evenness``."""

    passed: bool
    odd_coefficients: list
    even_coefficients: list
    offending: list

    def to_dict(self):
        """JSON representation."""
        return {"passed": self.passed, "odd_coefficients": self.odd_coefficients,
                "even_coefficients": self.even_coefficients, "offending": self.offending}


def validate_evenness(user_h, tolerance=1e-6, radius=0.1, n_samples=16):
    """Check that a function of x only has even Taylor coefficients at 0.

    Parameters
    ----------
    user_h : callable
        Function of x, vectorized over numpy arrays.

    tolerance : float
        Relative threshold for the first two odd coefficients.

    radius : float
        Half width of the symmetric sampling window.

    n_samples : int
        Number of positive sample points.

    Returns
    -------
    report : EvennessReport
        Estimated coefficients of x, x^3 and of 1, x^2, x^4 together with the
        list of offending odd powers.

    """
    x = radius * np.arange(1, n_samples + 1) / n_samples
    plus = np.asarray(user_h(x), dtype=float)
    minus = np.asarray(user_h(-x), dtype=float)
    if not (np.all(np.isfinite(plus)) and np.all(np.isfinite(minus))):
        raise EvaluationError("User metric returned non-finite samples near x = 0.")

    odd = (plus - minus) / 2
    even = (plus + minus) / 2

    odd_basis = np.stack([x, x ** 3, x ** 5, x ** 7], axis=1)
    even_basis = np.stack([np.ones_like(x), x ** 2, x ** 4, x ** 6], axis=1)
    odd_coef = np.linalg.lstsq(odd_basis, odd, rcond=None)[0]
    even_coef = np.linalg.lstsq(even_basis, even, rcond=None)[0]

    scale = max(1.0, float(np.max(np.abs(even_coef[:3]))))
    offending = [2 * j + 1 for j in range(2) if abs(odd_coef[j]) > tolerance * scale]

    return EvennessReport(passed=not offending,
                          odd_coefficients=[float(c) for c in odd_coef[:2]],
                          even_coefficients=[float(c) for c in even_coef[:3]],
                          offending=offending)
