"""Bicharacteristic flow on the fiber compactified cotangent bundle.

Integration happens in ``(mu, y, nu, eta_hat)`` with the sign of xi tracked
discretely. The rescaled fields are smooth up to fiber infinity ``nu = 0``
where the radial sets ``L+`` (source) and ``L-`` (sink) sit over ``mu = 0``.
"""

import logging
import warnings
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.integrate import solve_ivp

from ahres.base import DEFAULT_CONVERGENCE_TOL, DEFAULT_MAX_TIME, DEFAULT_RTOL, IntegrationError
from ahres.symbols import (CharComponent, CompactifiedPhasePoint, PhasePoint, char_component, compactified_field,
                           hamilton_field, radial_quantities)

logger = logging.getLogger(__name__)


class Terminal(Enum):
    """How an integrated bicharacteristic ended."""

    ConvergedLPlus = "ConvergedLPlus"
    ConvergedLMinus = "ConvergedLMinus"
    ExitMuLeft = "ExitMuLeft"
    ExitMuRight = "ExitMuRight"
    Trapped = "Trapped"


@dataclass(frozen=True)
class Stops:
    """Stopping rules.

    Parameters
    ----------
    eps0 : float
        Exit to the left once ``mu < -eps0``.

    eps1 : float
        Convergence to ``L+-`` once ``nu^2 + rho_0 < eps1``.

    max_time : float
        Normalized time after which the trajectory counts as trapped.

    mu_right : float or None
        Exit to the right once ``mu > mu_right``, defaults to ``eps0``.

    """

    eps0: float = 0.1
    eps1: float = DEFAULT_CONVERGENCE_TOL
    max_time: float = DEFAULT_MAX_TIME
    mu_right: float = None

    def __post_init__(self):
        """Validate."""
        if not (self.eps0 > 0 and self.eps1 > 0 and self.max_time > 0):
            raise ValueError("eps0, eps1 and max_time have to be positive.")

    @property
    def mu_high(self):
        """Right exit threshold."""
        return self.eps0 if self.mu_right is None else self.mu_right


@dataclass
class Trajectory:
    """Integrated bicharacteristic.

    ``times`` are non-negative flow times in the chosen direction. ``states``
    are rows ``(mu, y, nu, eta_hat)`` for compactified integration and
    ``(mu, y, xi, eta)`` for ``coordinates == "standard"``.
    """

    times: np.ndarray
    states: np.ndarray
    sgn: int
    direction: int
    terminal: Terminal
    diagnostics: dict = field(default_factory=dict)
    dense: object = None
    coordinates: str = "compactified"

    @property
    def samples(self):
        """List of ``(time, point)`` with compactified or standard phase points."""
        if self.coordinates == "standard":
            return [(float(t), PhasePoint(*s)) for t, s in zip(self.times, self.states)]
        return [(float(t), CompactifiedPhasePoint(s[0], s[1], max(s[2], 0.0), s[3], self.sgn))
                for t, s in zip(self.times, self.states)]

    def evaluate(self, t):
        """States at times `t` (dense output), shape ``(len(t), 4)``."""
        t = np.atleast_1d(t)
        if self.dense is None:
            return np.array([np.interp(t, self.times, self.states[:, j]) for j in range(4)]).T
        return self.dense(t).T

    def to_rows(self):
        """Rows ``(time, *state)`` for CSV export."""
        return np.column_stack([self.times, self.states])


def _spectral(kind, z):
    if kind == "classical":
        return 0.0
    if kind != "semiclassical":
        raise ValueError("Unknown kind {}.".format(kind))
    if z is None:
        raise ValueError("The semiclassical flow needs z.")
    z = complex(z)
    return (z.real, (z ** 2).real)


def _rho(coeffs, state, sgn):
    cpt = CompactifiedPhasePoint(state[0], state[1], max(state[2], 0.0), state[3], sgn)
    rho_tilde, rho_0 = radial_quantities(coeffs, cpt)
    return rho_tilde ** 2 + rho_0


def _monotone(values):
    diffs = np.diff(values)
    return bool(np.all(diffs <= 1e-14 * (1 + np.abs(values[1:]))) or np.all(diffs >= -1e-14 * (1 + np.abs(values[1:]))))


def _rho_standard(coeffs, state):
    mu, _, xi, eta = state
    if xi == 0:
        return 1e300
    nu = 1 / abs(xi)
    eta_hat = eta * nu
    p_hat = 4 * (1 + coeffs.a1(mu)) * mu + eta_hat ** 2 / coeffs.w(mu)
    return float(nu ** 2 + eta_hat ** 2 + p_hat ** 2)


def integrate_bicharacteristic(coeffs, start, direction=1, kind="classical", z=None, stops=None):
    """Integrate the rescaled Hamilton field from a phase point.

    Compactified starts are integrated with ``W = nu H_p`` in
    ``(mu, y, nu, eta_hat)``. Finite starts (``PhasePoint``) use
    ``H_p / <(xi, eta)>`` in ``(mu, y, xi, eta)``, which allows xi to change
    sign; they converge to ``L+-`` through the same criterion on
    ``nu^2 + rho_0`` with ``nu = 1/|xi|``.

    Parameters
    ----------
    coeffs : ExtendedCoeffs
        Coefficients of the extended operator.

    start : CompactifiedPhasePoint or PhasePoint
        Initial point.

    direction : int
        +1 forward, -1 backward.

    kind : str
        ``"classical"`` or ``"semiclassical"``.

    z : complex or None
        Unit spectral parameter for the semiclassical flow.

    stops : Stops or None
        Stopping rules.

    Returns
    -------
    trajectory : Trajectory
        Samples, terminal classification and diagnostics.

    """
    if direction not in (1, -1):
        raise ValueError("direction has to be +1 or -1.")
    stops = stops or Stops()
    s = _spectral(kind, z)
    compact = isinstance(start, CompactifiedPhasePoint)
    y0 = start.as_array() if compact else np.array([start.mu, start.y, start.xi, start.eta], dtype=float)
    coordinates = "compactified" if compact else "standard"

    if compact:
        sgn = start.sgn

        def rho(state):
            return _rho(coeffs, state, sgn)

        def rhs(t, y):
            state = np.array(y, dtype=float)
            state[2] = max(state[2], 0.0)
            return direction * compactified_field(coeffs, state, sgn, s)
    else:
        sgn = 1 if start.xi >= 0 else -1
        param = None if kind == "classical" else z

        def rho(state):
            return _rho_standard(coeffs, state)

        def rhs(t, y):
            pt = PhasePoint(*y)
            scale = np.sqrt(1 + pt.xi ** 2 + pt.eta ** 2 / coeffs.w(pt.mu))
            return direction * hamilton_field(coeffs, pt, kind, param) / scale

    def converged_terminal(state):
        positive = sgn > 0 if compact else state[2] > 0
        return Terminal.ConvergedLPlus if positive else Terminal.ConvergedLMinus

    def done(terminal):
        return Trajectory(np.array([0.0]), y0[None, :], sgn, direction, terminal,
                          {"mu_monotone": True, "rho_monotone": True}, coordinates=coordinates)

    if rho(y0) < stops.eps1:
        return done(converged_terminal(y0))
    if y0[0] < -stops.eps0:
        return done(Terminal.ExitMuLeft)
    if y0[0] > stops.mu_high:
        return done(Terminal.ExitMuRight)

    def exit_left(t, y):
        return y[0] + stops.eps0

    def exit_right(t, y):
        return y[0] - stops.mu_high

    def converge(t, y):
        return np.log(min(max(rho(y), 1e-300), 1e300)) - np.log(stops.eps1)

    for event in (exit_left, exit_right, converge):
        event.terminal = True
    exit_left.direction = -1
    exit_right.direction = 1
    converge.direction = -1

    sol = solve_ivp(rhs, (0.0, stops.max_time), y0, method="DOP853", rtol=DEFAULT_RTOL, atol=1e-15,
                    events=(exit_left, exit_right, converge), dense_output=True)
    if not sol.success:
        raise IntegrationError("Integrator failed: {}".format(sol.message), sol.y[:, -1])

    states = sol.y.T
    if sol.status == 1:
        fired = [len(ev) > 0 for ev in sol.t_events]
        terminal = [Terminal.ExitMuLeft, Terminal.ExitMuRight, converged_terminal(states[-1])][fired.index(True)]
    else:
        terminal = Terminal.Trapped

    if not compact:
        sgn = 1 if states[-1, 2] >= 0 else -1
    rho_values = np.array([rho(st) for st in states])
    diagnostics = {"mu_monotone": _monotone(states[:, 0]), "rho_monotone": _monotone(rho_values),
                   "n_steps": int(len(sol.t)), "final_time": float(sol.t[-1])}
    logger.debug("Bicharacteristic ended with %s after t = %.3g", terminal.value, sol.t[-1])

    return Trajectory(sol.t, states, sgn, direction, terminal, diagnostics, sol.sol, coordinates)


def _fit_rate(times, values):
    """Exponential decay rate of positive `values` in `times`."""
    slope = np.polyfit(times, np.log(values), 1)[0]
    return -slope


def check_source_sink(coeffs, radius=1e-3, n_samples=200, rng_seed=0, stops=None, slack=0.05):
    """Seed points near the radial sets and measure the convergence rates.

    Points near ``L+`` are integrated backward, points near ``L-`` forward.
    The decay rates of ``rho_0`` and of ``nu`` are fitted on the second half
    of every trajectory where ``eta_hat^2`` dominates ``rho_0``.

    Parameters
    ----------
    coeffs : ExtendedCoeffs
        Coefficients.

    radius : float
        Distance of the seeds from the radial sets.

    n_samples : int
        Total number of seeds, split evenly between ``L+`` and ``L-``.

    rng_seed : int
        Seed of the random generator.

    stops : Stops or None
        Stopping rules.

    slack : float
        Relative slack of the rate bound 8 and of the ratio 4:8.

    Returns
    -------
    report : dict
        Fitted rates, fraction converging to the expected radial set and the
        list of seeds that did not.

    """
    rng = np.random.RandomState(rng_seed)
    stops = stops or Stops()
    rho_rates, nu_rates, failures = [], [], []
    n_conv = 0

    for i in range(n_samples):
        sgn = 1 if i % 2 == 0 else -1
        mu = radius * 0.25 * rng.uniform(-1, 1)
        eta_hat = radius * rng.uniform(0.5, 1) * rng.choice([-1, 1])
        nu = radius * rng.uniform(0.5, 1)
        start = CompactifiedPhasePoint(mu, 0.0, nu, eta_hat, sgn)
        direction = -1 if sgn > 0 else 1
        expected = Terminal.ConvergedLPlus if sgn > 0 else Terminal.ConvergedLMinus

        traj = integrate_bicharacteristic(coeffs, start, direction, "classical", stops=stops)
        if traj.terminal != expected:
            failures.append({"seed": [mu, 0.0, nu, eta_hat, sgn], "terminal": traj.terminal.value})
            continue
        n_conv += 1

        t_end = traj.times[-1]
        t = np.linspace(t_end / 2, t_end, 40)
        states = traj.evaluate(t)
        rho_0 = np.array([radial_quantities(coeffs, CompactifiedPhasePoint(s[0], s[1], max(s[2], 0.0), s[3], sgn))[1]
                          for s in states])
        rho_rates.append(_fit_rate(t, rho_0))
        nu_rates.append(_fit_rate(t, np.maximum(states[:, 2], 1e-300)))

    min_rho_rate = float(np.min(rho_rates)) if rho_rates else float("nan")
    mean_ratio = float(np.mean(np.array(nu_rates) / np.array(rho_rates))) if rho_rates else float("nan")
    fraction = n_conv / n_samples

    passed = fraction == 1 and min_rho_rate >= 8 * (1 - slack) and abs(mean_ratio - 0.5) <= 0.5 * slack
    return {"passed": bool(passed), "fraction_converged": fraction, "min_rho0_rate": min_rho_rate,
            "mean_nu_rate": float(np.mean(nu_rates)) if nu_rates else float("nan"),
            "rate_ratio": mean_ratio, "nonconvergent": failures, "radius": radius}


def check_escape_function(coeffs, eps0=0.1, n_samples=1000, rng_seed=0):
    """Check that mu is monotone along the classical flow on the characteristic set in ``mu < 0``.

    Characteristic points are sampled with ``mu`` in ``[-eps0, 0)``. On
    ``Sigma+`` the field must decrease mu, on ``Sigma-`` increase it.
    """
    rng = np.random.RandomState(rng_seed)
    violations = []
    for _ in range(n_samples):
        mu = -eps0 * rng.uniform(1e-3, 1)
        xi = rng.choice([-1, 1]) * np.exp(rng.uniform(-2, 2))
        eta_sq = -4 * (1 + coeffs.a1(mu)) * mu * xi ** 2 * coeffs.w(mu)
        pt = PhasePoint(mu, 0.0, xi, float(np.sqrt(eta_sq)) * rng.choice([-1, 1]))

        component = char_component(coeffs, pt, tol=1e-8)
        h_mu = hamilton_field(coeffs, pt)[0]
        expected = CharComponent.SigmaPlus if xi > 0 else CharComponent.SigmaMinus
        if component != expected or np.sign(h_mu) != -np.sign(xi):
            violations.append({"mu": mu, "xi": xi, "H_mu": float(h_mu), "component": component.value})

    radial = float(hamilton_field(coeffs, PhasePoint(0.0, 0.0, 1.0, 0.0))[0])
    return {"passed": not violations and radial == 0, "n_samples": n_samples, "violations": violations,
            "H_mu_at_radial_point": radial}


def glancing_point(coeffs, mu, z=1.0):
    """Point over `mu` where ``p_{h,z} = 0`` and ``H mu = 0``, or None if there is none.

    ``H mu = 4(2(1+a1) mu xi - (1+a2) z)`` vanishes at ``xi = (1+a2) z / (2(1+a1) mu)``;
    ``eta`` is then fixed by the characteristic equation.
    """
    a1, a2, a3 = coeffs.a1(mu), coeffs.a2(mu), coeffs.a3(mu)
    xi = (1 + a2) * z / (2 * (1 + a1) * mu)
    eta_sq = coeffs.w(mu) * (4 * (1 + a2) * z * xi + (1 + a3) * z ** 2 - 4 * (1 + a1) * mu * xi ** 2)
    if not eta_sq > 0:
        return None
    return PhasePoint(float(mu), 0.0, float(xi), float(np.sqrt(eta_sq)))


def second_derivative_mu(coeffs, pt, z=1.0):
    """``H^2 mu`` for the real semiclassical symbol by the chain rule."""
    mu, xi = pt.mu, pt.xi
    field_ = hamilton_field(coeffs, pt, "semiclassical", z)
    h_mu, h_xi = field_[0], field_[2]
    a1, da1, da2 = coeffs.a1(mu), coeffs.da1(mu), coeffs.da2(mu)
    # H mu = 8(1+a1) mu xi - 4(1+a2) z, differentiate along H
    d_dmu = 8 * (1 + a1 + mu * da1) * xi - 4 * da2 * z
    d_dxi = 8 * (1 + a1) * mu
    return float(h_mu * d_dmu + h_xi * d_dxi)


def check_glancing_convexity(coeffs, z=1.0, eps0=0.1, n_samples=1000, rng_seed=0, constant_mode=False):
    """Check ``H^2 mu < 0`` at glancing points of the semiclassical flow with ``0 < mu < eps0``.

    Parameters
    ----------
    coeffs : ExtendedCoeffs
        Coefficients.

    z : float
        Real unit spectral parameter.

    eps0 : float
        Upper bound of the sampled mu.

    n_samples : int
        Number of samples.

    rng_seed : int
        Seed of the random generator.

    constant_mode : bool
        Restrict to ``eta = 0``. Glancing points need ``eta != 0`` so every
        sample is skipped.

    Returns
    -------
    report : dict
        Number of checked and skipped samples, the largest ``H^2 mu`` and the
        violations.

    """
    rng = np.random.RandomState(rng_seed)
    z = float(np.real(z))
    violations, skipped, worst = [], 0, -np.inf
    for _ in range(n_samples):
        mu = eps0 * rng.uniform(1e-3, 1)
        pt = None if constant_mode else glancing_point(coeffs, mu, z)
        if pt is None:
            skipped += 1
            continue
        value = second_derivative_mu(coeffs, pt, z)
        h_xi = hamilton_field(coeffs, pt, "semiclassical", z)[2]
        worst = max(worst, value)
        if not (value < 0 and h_xi < 0):
            violations.append({"mu": mu, "xi": pt.xi, "eta": pt.eta, "H2_mu": value, "H_xi": float(h_xi)})

    if skipped:
        warnings.warn("{} glancing samples skipped, no glancing point over the sampled mu.".format(skipped))

    checked = n_samples - skipped
    return {"passed": checked > 0 and not violations, "checked": checked, "skipped": skipped,
            "max_H2_mu": float(worst), "violations": violations}


def neck_trapped_point(coeffs, z=1.0, mu=None):
    """Lift of the neck geodesic of a cylinder to the semiclassical characteristic set.

    At the neck ``d_mu p_{h,z}`` vanishes at the glancing point, so the point is
    a relative equilibrium of the flow (only ``y`` moves).
    """
    mu = coeffs.model.mu_right if mu is None else mu
    return glancing_point(coeffs, mu, z)


def symbol_drift(coeffs, trajectory):
    """Largest ``|p| / (1 + xi^2)`` along a classical trajectory, evaluated as ``|p_hat| / (nu^2 + 1)``."""
    worst = 0.0
    for _, cpt in trajectory.samples:
        p_hat = 4 * (1 + coeffs.a1(cpt.mu)) * cpt.mu + cpt.eta_hat ** 2 / coeffs.w(cpt.mu)
        worst = max(worst, abs(p_hat) / (cpt.nu ** 2 + 1))
    return float(worst)


def classify_start(coeffs, cpt, z=None):
    """Characteristic component of a compactified point with ``nu > 0``."""
    return char_component(coeffs, cpt.to_phase_point(), z=z, tol=1e-8)


__all__ = ["Terminal", "Stops", "Trajectory", "integrate_bicharacteristic", "check_source_sink",
           "check_escape_function", "check_glancing_convexity", "glancing_point", "second_derivative_mu",
           "neck_trapped_point", "symbol_drift", "classify_start"]
