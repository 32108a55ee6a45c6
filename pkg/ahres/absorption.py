"""Complex absorbing operator beyond the boundary.

Three modes are supported. ``paper_sigma_dependent`` quantizes the full symbol
``2(2(1+a2) xi + (1+a3) sigma) (xi^2 + |eta|^2 + sigma^2 + C^2)^(1/2) chi``,
``sigma_independent`` quantizes ``chi xi (xi^2 + |eta|^2 + 1)^(1/2)`` so that
``P - iQ`` stays a quadratic pencil, and ``off`` gives a zero matrix.

The symbols are quantized with Fourier multipliers on a periodic box around
each window of chi, so Q maps smooth functions to smooth functions supported
in the window and leaves the region ``mu > 0`` decoupled.
"""

import logging
from dataclasses import asdict, dataclass

import numpy as np
import scipy.linalg

from ahres.base import BranchError, ConfigError, ConstructionError, NumericalError
from ahres.symbols import CharComponent, PhasePoint, char_component
from ahres.utils import smooth_bump

logger = logging.getLogger(__name__)

MODES = ("paper_sigma_dependent", "sigma_independent", "off")


@dataclass(frozen=True)
class AbsorptionConfig:
    """Absorption settings.

    Parameters
    ----------
    mode : str
        One of ``MODES``.

    mu0 : float
        Negative threshold, chi is supported in ``[mu0/2 - 2 chi_width, mu0/2]``.

    strength : float
        Positive overall factor.

    chi_width : float
        Half width of the support of chi.

    interior_window : tuple or None
        Additional support ``(a, b)`` inside ``mu > 0``, needed for high energy
        estimates on trapping models. It changes the operator on the original
        space, so resonance runs leave it unset.

    cut_constant : float
        Constant C moving the square root cut to ``sigma in +-i[C, oo)``.

    """

    mode: str = "paper_sigma_dependent"
    mu0: float = -0.2
    strength: float = 1.0
    chi_width: float = 0.15
    interior_window: tuple = None
    cut_constant: float = 5.0

    def __post_init__(self):
        """Validate."""
        if self.mode not in MODES:
            raise ConfigError("Unknown absorption mode {}, choose from {}.".format(self.mode, MODES),
                              "/absorption/mode")
        if not self.mu0 < 0:
            raise ConfigError("mu0 has to be negative.", "/absorption/mu0")
        if not self.strength > 0:
            raise ConfigError("strength has to be positive.", "/absorption/strength")
        if not self.chi_width > 0:
            raise ConfigError("chi_width has to be positive.", "/absorption/chi_width")
        if not self.cut_constant > 0:
            raise ConfigError("cut_constant has to be positive.", "/absorption/cut_constant")
        if self.interior_window is not None:
            a, b = self.interior_window
            if not 0 < a < b:
                raise ConfigError("interior_window has to satisfy 0 < a < b.", "/absorption/interior_window")
            object.__setattr__(self, "interior_window", (float(a), float(b)))

    @property
    def window(self):
        """Support of chi beyond the boundary."""
        right = self.mu0 / 2
        return (right - 2 * self.chi_width, right)

    def scaled(self, strength_factor=1.0, width_factor=1.0):
        """Copy with rescaled strength and width, used by independence checks."""
        return AbsorptionConfig(self.mode, self.mu0, self.strength * strength_factor,
                                self.chi_width * width_factor, self.interior_window, self.cut_constant)

    def to_dict(self):
        """JSON friendly representation."""
        out = asdict(self)
        out["interior_window"] = None if self.interior_window is None else list(self.interior_window)
        return out


def windows(cfg):
    """Disjoint supports of chi, the exterior window first."""
    out = [cfg.window]
    if cfg.interior_window is not None:
        out.append(cfg.interior_window)
    return out


def chi_profile(mu, cfg):
    """Absorption profile, smooth, non-negative and 1 on the inner half of every window."""
    mu = np.asarray(mu, dtype=float)
    values = smooth_bump(mu, *cfg.window)
    if cfg.interior_window is not None:
        values = np.maximum(values, smooth_bump(mu, *cfg.interior_window))
    return values


def angular_weight(coeffs, mode_index, window):
    """``|eta|^2`` of the mode with w frozen at the center of `window`."""
    center = (window[0] + window[1]) / 2
    return coeffs.mode_weight(mode_index) / float(coeffs.w(center))


def spectral_sqrt(values, tol=1e-10):
    """Principal square root of a Fourier multiplier, refusing values on the cut ``(-oo, 0]``.

    Parameters
    ----------
    values : np.ndarray
        Multiplier values.

    tol : float
        Relative distance from the cut below which the root is refused.

    Returns
    -------
    root : np.ndarray
        Roots with positive real part.

    """
    values = np.asarray(values, dtype=complex)
    scale = max(np.max(np.abs(values)), 1.0)
    on_cut = (np.abs(values.imag) <= tol * scale) & (values.real <= tol * scale)
    if np.any(on_cut):
        raise BranchError("Symbol touches the cut (-oo, 0] of the square root.",
                          {"values": [[float(v.real), float(v.imag)] for v in values[on_cut][:5]]})
    return np.sqrt(values)


def principal_sqrt(M, tol=1e-10, residual_tol=1e-10):
    """Principal square root of a matrix with spectrum off ``(-oo, 0]``.

    Parameters
    ----------
    M : np.ndarray
        Square matrix.

    tol : float
        Relative distance of an eigenvalue from the cut below which the root
        is refused.

    residual_tol : float
        Bound on ``||R^2 - M|| / ||M||``.

    Returns
    -------
    R : np.ndarray
        Square root with every eigenvalue in the open right half plane.

    """
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("Expected a square matrix, got shape {}.".format(M.shape))

    eigenvalues = scipy.linalg.eigvals(M)
    scale = max(np.max(np.abs(eigenvalues)), 1.0)
    on_cut = (np.abs(eigenvalues.imag) <= tol * scale) & (eigenvalues.real <= tol * scale)
    if np.any(on_cut):
        raise BranchError("Spectrum touches the cut (-oo, 0] of the square root.",
                          {"eigenvalues": [[float(v.real), float(v.imag)] for v in eigenvalues[on_cut][:5]]})

    R = scipy.linalg.sqrtm(M)
    if isinstance(R, tuple):
        R = R[0]
    norm = max(np.linalg.norm(M, 2), np.finfo(float).tiny)
    residual = np.linalg.norm(R @ R - M, 2) / norm
    if not residual < residual_tol:
        raise NumericalError("Matrix square root is inaccurate.", {"residual": float(residual)})

    if np.any(scipy.linalg.eigvals(R).real <= 0):
        raise BranchError("Square root left the principal branch.", {"residual": float(residual)})
    return R


class _FourierBox:
    """Periodic box around one window of chi.

    Functions on the collocation grid are interpolated to ``M`` uniform points
    of the box, cut off by ``sqrt(chi)``, acted on by Fourier multipliers and
    cut off again, then interpolated back with the trigonometric interpolant.
    Since ``sqrt(chi)`` vanishes to infinite order at the window ends, every
    step maps smooth functions to smooth periodic ones.
    """

    def __init__(self, grid, window, coeffs, mode_index):
        left, right = window
        g_left, g_right = grid.interval
        if left < g_left - 1e-12 or right > g_right + 1e-12:
            raise ConstructionError("Absorption window [{}, {}] is not inside the grid [{}, {}].".format(
                left, right, g_left, g_right))

        pad = (right - left) / 4
        a, b = max(left - pad, g_left), min(right + pad, g_right)
        M = 2 * max(64, (grid.N + 32) // 2) + 1
        x = a + (b - a) * np.arange(M) / M
        self.k = 2 * np.pi * np.fft.fftfreq(M, d=(b - a) / M)
        self.forward = np.fft.fft(np.eye(M), axis=0)
        self.inverse = np.fft.ifft(np.eye(M), axis=0)
        self.D = self.inverse @ (self.k[:, None] * self.forward)
        self.one_plus_a2 = (1 + coeffs.a2(x))[:, None]
        self.one_plus_a3 = 1 + coeffs.a3(x)
        self.eta_sq = angular_weight(coeffs, mode_index, window)

        root_chi = np.sqrt(smooth_bump(x, left, right))
        nodes = grid.nodes
        self.rows = np.nonzero((nodes > left) & (nodes < right))[0]
        trig = np.exp(1j * np.outer(nodes[self.rows] - a, self.k)) @ self.forward / M
        self.back = trig * root_chi[None, :]
        self.to_box = root_chi[:, None] * grid.interpolation_matrix(x)

    def symbol_matrix(self, shift):
        """``D^2 + |eta|^2 + shift`` as a matrix on the box."""
        return self.inverse @ ((self.k ** 2 + self.eta_sq + shift)[:, None] * self.forward)

    def multiplier(self, shift):
        """``(D^2 + |eta|^2 + shift)^(1/2)`` as a matrix on the box."""
        root = spectral_sqrt(self.k ** 2 + self.eta_sq + shift)
        return self.inverse @ (root[:, None] * self.forward)

    def embed(self, box_operator, size):
        """Grid matrix ``back @ box_operator @ to_box`` with rows outside the window set to zero."""
        out = np.zeros((size, size), dtype=complex)
        out[self.rows] = self.back @ box_operator @ self.to_box
        return out


class AbsorptionOperator:
    """Precomputed pieces of Q for one grid and mode, evaluated per sigma.

    Each window of chi gets its own periodic box, see ``_FourierBox``. The
    angular weight ``|eta|^2 = lambda / w`` is frozen at the window center
    so that the square root is a Fourier multiplier.

    Parameters
    ----------
    grid : Grid
        Collocation grid.

    mode_index : int
        Angular mode.

    coeffs : ExtendedCoeffs
        Coefficients.

    cfg : AbsorptionConfig
        Settings.

    """

    def __init__(self, grid, mode_index, coeffs, cfg):
        """Construct."""
        self.cfg = cfg
        self.mode_index = mode_index
        self.size = grid.N
        self.boxes = [] if cfg.mode == "off" else [_FourierBox(grid, w, coeffs, mode_index) for w in windows(cfg)]

        self._static = None
        if cfg.mode == "sigma_independent":
            self._static = cfg.strength * sum(self._independent(box) for box in self.boxes)
        elif cfg.mode == "off":
            self._static = np.zeros((self.size, self.size), dtype=complex)

    def _independent(self, box):
        S0 = principal_sqrt(box.symbol_matrix(1.0), residual_tol=1e-8)
        return box.embed(0.5 * (box.D @ S0 + S0 @ box.D), self.size)

    def _dependent(self, box, sigma):
        C = self.cfg.cut_constant
        S = box.multiplier(sigma ** 2 + C ** 2)
        B = 2 * (2 * box.one_plus_a2 * box.D + sigma * np.diag(box.one_plus_a3))
        return box.embed(0.5 * (B @ S + S @ B), self.size)

    @property
    def is_polynomial(self):
        """True if Q does not depend on sigma."""
        return self._static is not None

    def __call__(self, sigma):
        """Q at `sigma`."""
        if self._static is not None:
            return self._static

        sigma = complex(sigma)
        C = self.cfg.cut_constant
        if abs(sigma.real) < 1e-12 and abs(sigma.imag) >= C:
            raise BranchError("sigma lies on the cut +-i[C, oo) of the absorbing symbol.",
                              {"sigma": [sigma.real, sigma.imag], "C": C})
        return self.cfg.strength * sum(self._dependent(box, sigma) for box in self.boxes)


def assemble_Q(grid, mode_index, sigma, coeffs, cfg):
    """Absorbing operator matrix at `sigma` for one mode."""
    return AbsorptionOperator(grid, mode_index, coeffs, cfg)(sigma)


def q_symbol(coeffs, cfg, pt, z=None, h=0.0):
    """Principal (or semiclassical, if z is given) symbol of Q at a phase point.

    The angular part uses w at the center of the window containing ``pt.mu``,
    as the assembled operator does.
    """
    mu = pt.mu
    chi = float(chi_profile(mu, cfg))
    if cfg.mode == "off" or chi == 0:
        return 0.0
    window = next(w for w in windows(cfg) if w[0] < mu < w[1])
    eta_sq = pt.eta ** 2 / float(coeffs.w((window[0] + window[1]) / 2))
    if cfg.mode == "sigma_independent":
        return float(cfg.strength * chi * pt.xi * np.sqrt(pt.xi ** 2 + eta_sq + h ** 2))
    s = 0.0 if z is None else float(np.real(z))
    radius = np.sqrt(pt.xi ** 2 + eta_sq + s ** 2 + (cfg.cut_constant * h) ** 2)
    return float(cfg.strength * chi * 2 * (2 * (1 + coeffs.a2(mu)) * pt.xi + (1 + coeffs.a3(mu)) * s) * radius)


def verify_sign_conditions(cfg, coeffs, z=1.0, n_samples=1000, rng_seed=0, ring_size=360):
    """Check the sign of q on the characteristic set and ellipticity of ``p - iq``.

    Parameters
    ----------
    cfg : AbsorptionConfig
        Absorption settings.

    coeffs : ExtendedCoeffs
        Coefficients.

    z : float
        Real unit spectral parameter for the semiclassical samples.

    n_samples : int
        Number of classical and of semiclassical samples.

    rng_seed : int
        Seed of the random generator.

    ring_size : int
        Number of directions on the fiber infinity ring over ``mu0``.

    Returns
    -------
    report : dict
        Violations of ``+-q >= 0`` on the classical and semiclassical
        components and the smallest ``|p - iq| / (xi^2 + |eta|^2)`` on the ring.

    """
    if cfg.mode == "off":
        return {"passed": True, "skipped": True, "mode": cfg.mode}

    rng = np.random.RandomState(rng_seed)
    left, right = cfg.window
    classical, semiclassical = [], []
    checked_semi = 0

    for _ in range(n_samples):
        mu = rng.uniform(left, right)
        xi = rng.choice([-1, 1]) * np.exp(rng.uniform(-2, 3))
        eta = np.sqrt(-4 * (1 + coeffs.a1(mu)) * mu * xi ** 2 * coeffs.w(mu))
        pt = PhasePoint(mu, 0.0, xi, float(eta))
        component = char_component(coeffs, pt, tol=1e-8)
        q = q_symbol(coeffs, cfg, pt)
        sign = 1 if component == CharComponent.SigmaPlus else -1
        if sign * q < 0:
            classical.append({"mu": mu, "xi": xi, "q": q})

    for _ in range(n_samples):
        mu = rng.uniform(left, right)
        xi = rng.uniform(-5, 5)
        eta_sq = coeffs.w(mu) * (-4 * (1 + coeffs.a1(mu)) * mu * xi ** 2 + 4 * (1 + coeffs.a2(mu)) * z * xi
                                 + (1 + coeffs.a3(mu)) * z ** 2)
        if not eta_sq >= 0:
            continue
        pt = PhasePoint(mu, 0.0, xi, float(np.sqrt(eta_sq)))
        try:
            component = char_component(coeffs, pt, z=z, tol=1e-8)
        except NumericalError:
            continue
        checked_semi += 1
        q = q_symbol(coeffs, cfg, pt, z=z)
        sign = 1 if component == CharComponent.SemiPlus else -1
        if sign * q < 0:
            semiclassical.append({"mu": mu, "xi": xi, "q": q})

    ring_min = np.inf
    mu = cfg.mu0
    w = coeffs.w(mu)
    for theta in np.linspace(0, 2 * np.pi, ring_size, endpoint=False):
        pt = PhasePoint(mu, 0.0, np.cos(theta), np.sin(theta) * np.sqrt(w))
        p = 4 * (1 + coeffs.a1(mu)) * mu * pt.xi ** 2 + pt.eta ** 2 / w
        q = q_symbol(coeffs, cfg, pt)
        ring_min = min(ring_min, abs(p - 1j * q))

    # sigma independent absorption is not controlled semiclassically
    semi_ok = not semiclassical or cfg.mode == "sigma_independent"
    return {"passed": not classical and semi_ok and ring_min > 0, "skipped": False, "mode": cfg.mode,
            "classical_violations": classical, "semiclassical_violations": semiclassical,
            "semiclassical_checked": checked_semi, "ring_min": float(ring_min)}
