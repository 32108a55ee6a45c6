"""Invariant suites behind ``ahres check``.

Every suite takes a ``RunConfig`` and a thread count and returns a JSON
serializable report with a boolean ``passed``.
"""

import logging

import numpy as np
from numpy.polynomial import Polynomial

from ahres.absorption import AbsorptionOperator, verify_sign_conditions
from ahres.discretize import build_grid, raw_operator
from ahres.extension import build_phase_weight, derive_extended_coeffs, verify_conjugation_identity
from ahres.flow import (Stops, Terminal, check_escape_function, check_glancing_convexity, check_source_sink,
                        integrate_bicharacteristic)
from ahres.geometry import EvenMetricModel, validate_evenness
from ahres.oracles import oracle_resonances
from ahres.solver import resonances_in_window, varied_absorption
from ahres.symbols import (CharComponent, PhasePoint, char_component, eval_p, eval_p_full, eval_p_semi,
                           hamilton_field)

logger = logging.getLogger(__name__)


def conjugation_suite(config, threads=1, n_samples=20, tol=1e-10):
    """Assembled extended operator against the literal conjugated Laplacian on H2 and the cylinder."""
    rng = np.random.RandomState(config.seed)
    test_fn = Polynomial([1.0, 0.3, -0.2, 0.05])
    worst = {}
    for model in (EvenMetricModel.hyperbolic_plane(), EvenMetricModel.cylinder()):
        coeffs = derive_extended_coeffs(model)
        residuals = []
        for _ in range(n_samples):
            sigma = complex(rng.uniform(-3, 3), rng.uniform(-2, 3))
            mu = rng.uniform(0.05, 1)
            mode = rng.randint(0, 3)
            residuals.append(verify_conjugation_identity(coeffs, model, sigma, test_fn, mu, mode))
        worst[model.name] = float(np.max(residuals))
    return {"passed": all(v < tol for v in worst.values()), "max_residual": worst, "tol": tol}


def _finite_difference_gradient(fun, point, step=1e-6):
    grad = []
    for j in range(len(point)):
        shift = np.zeros(len(point))
        shift[j] = step
        grad.append((fun(point + shift) - fun(point - shift)) / (2 * step))
    return np.array(grad)


def symbol_suite(config, threads=1, n_samples=1000):
    """Identities of the principal symbols and their Hamilton fields."""
    rng = np.random.RandomState(config.seed)
    coeffs = derive_extended_coeffs(config.model.build())
    im_error, field_error, n_char_checked = 0.0, 0.0, 0

    for _ in range(n_samples):
        mu = rng.uniform(-0.4, 0.9)
        xi, eta = rng.normal(size=2) * 3
        pt = PhasePoint(mu, 0.0, xi, eta)
        angle = rng.uniform(-np.pi, np.pi)
        z = np.exp(1j * angle)
        _, im = eval_p_semi(coeffs, z, pt)
        im_error = max(im_error, abs(im - eval_p_full(coeffs, z, pt).imag))

        sigma = rng.uniform(-3, 3)
        eval_p_full(coeffs, sigma, pt)

        def p_of(v):
            return eval_p_full(coeffs, sigma, PhasePoint(v[0], 0.0, v[1], v[2])).real

        grad = _finite_difference_gradient(p_of, np.array([mu, xi, eta]))
        expected = np.array([grad[1], grad[2], -grad[0]])
        field_ = hamilton_field(coeffs, pt, "full", sigma)
        scale = max(np.max(np.abs(expected)), 1.0)
        field_error = max(field_error, np.max(np.abs(field_[[0, 1, 2]] - expected)) / scale)

        if char_component(coeffs, pt) != CharComponent.NotCharacteristic:
            n_char_checked += 1

    xi = 1.7
    radial_value = eval_p(coeffs, PhasePoint(0.0, 0.0, xi, 0.0))
    grad = _finite_difference_gradient(lambda v: eval_p(coeffs, PhasePoint(v[0], 0.0, v[1], v[2])),
                                       np.array([0.0, xi, 0.0]))
    dp_error = float(np.max(np.abs(grad - np.array([4 * xi ** 2, 0.0, 0.0]))))

    passed = im_error < 1e-12 and field_error < 1e-6 and radial_value == 0 and dp_error < 1e-8
    return {"passed": bool(passed), "im_identity_error": float(im_error), "hamilton_field_error": float(field_error),
            "p_at_radial_point": float(radial_value), "dp_at_radial_point_error": dp_error}


def _stops(config):
    return Stops(eps0=config.flow.eps0, eps1=config.flow.eps1, max_time=config.flow.max_time)


def radial_suite(config, threads=1):
    """Source and sink behavior near ``L+-``."""
    coeffs = derive_extended_coeffs(config.model.build())
    return check_source_sink(coeffs, config.flow.radius, config.flow.n_samples, config.seed, _stops(config))


def escape_suite(config, threads=1, n_samples=1000):
    """Escape function in ``mu < 0`` and convexity at glancing points in ``mu > 0``."""
    coeffs = derive_extended_coeffs(config.model.build())
    escape = check_escape_function(coeffs, config.flow.eps0, n_samples, config.seed)
    convexity = check_glancing_convexity(coeffs, 1.0, config.flow.eps0, n_samples, config.seed)
    return {"passed": escape["passed"] and convexity["passed"], "escape": escape, "convexity": convexity}


def dichotomy_suite(config, threads=1, n_samples=1000, z=1.0):
    """Semiclassical bicharacteristics from finite characteristic seeds end at ``L+-`` or leave ``|mu| < eps0``."""
    model = config.model.build()
    coeffs = derive_extended_coeffs(model)
    rng = np.random.RandomState(config.seed)
    stops = _stops(config)
    eps0 = stops.eps0
    allowed = {
        (CharComponent.SemiPlus, 1): {Terminal.ExitMuLeft, Terminal.ExitMuRight},
        (CharComponent.SemiPlus, -1): {Terminal.ConvergedLPlus, Terminal.ExitMuLeft, Terminal.ExitMuRight},
        (CharComponent.SemiMinus, 1): {Terminal.ConvergedLMinus, Terminal.ExitMuLeft, Terminal.ExitMuRight},
        (CharComponent.SemiMinus, -1): {Terminal.ExitMuLeft, Terminal.ExitMuRight},
    }
    violations, checked, trapped = [], 0, 0
    while checked < n_samples:
        mu = rng.uniform(-eps0, eps0)
        xi = rng.normal() * 4
        eta_sq = coeffs.w(mu) * (-4 * mu * xi ** 2 + 4 * (1 + coeffs.a2(mu)) * z * xi + (1 + coeffs.a3(mu)) * z ** 2)
        if not eta_sq > 0:
            continue
        pt = PhasePoint(mu, 0.0, xi, float(np.sqrt(eta_sq)))
        component = char_component(coeffs, pt, z=z, tol=1e-8)
        checked += 1
        for direction in (1, -1):
            traj = integrate_bicharacteristic(coeffs, pt, direction, "semiclassical", z, stops)
            if traj.terminal == Terminal.Trapped and model.trapping_flag:
                trapped += 1
            elif traj.terminal not in allowed[(component, direction)]:
                violations.append({"seed": [mu, xi, pt.eta], "component": component.value,
                                   "direction": direction, "terminal": traj.terminal.value})
    return {"passed": not violations, "checked": checked, "trapped": trapped, "violations": violations}


def absorption_suite(config, threads=1):
    """Sign conditions of q and holomorphy of the assembled absorbing operator."""
    model = config.model.build()
    coeffs = derive_extended_coeffs(model)
    signs = verify_sign_conditions(config.absorption, coeffs, rng_seed=config.seed)

    grid = build_grid(model.mu_left, model.mu_right, 48, "none")
    op = AbsorptionOperator(grid, 0, coeffs, config.absorption)
    sigma0, radius, n = complex(1.0, -0.5), 0.1, 32
    mean = sum(op(sigma0 + radius * np.exp(2j * np.pi * k / n)) for k in range(n)) / n
    reference = op(sigma0)
    scale = max(np.linalg.norm(reference), 1e-300)
    cauchy_error = float(np.linalg.norm(mean - reference) / scale) if np.any(reference) else 0.0
    return {"passed": signs["passed"] and cauchy_error < 1e-8, "signs": signs, "cauchy_error": cauchy_error}


def discretization_suite(config, threads=1):
    """Symmetry, spectral convergence and the subprincipal symbol at ``mu = 0``."""
    model = EvenMetricModel.hyperbolic_plane()
    coeffs = derive_extended_coeffs(model)
    mu_left, mu_right = model.mu_left, 3.0

    # symmetry for real sigma against sine functions vanishing at the ends
    grid = build_grid(mu_left, mu_right, 96, "none")
    P = raw_operator(coeffs, grid, 0, 1.0)
    x = (grid.nodes - mu_left) / (mu_right - mu_left)
    V = np.column_stack([np.sin(np.pi * k * x) for k in range(1, 9)])
    M = grid.quad_weights * coeffs.w(grid.nodes) ** ((model.n - 1) / 2)
    B = V.T @ (M[:, None] * (P @ V))
    asymmetry = float(np.linalg.norm(B - B.conj().T) / np.linalg.norm(B))

    # spectral convergence on cos(6 mu), relative to the size of the exact image
    errors = []
    for N in (24, 40, 64):
        g = build_grid(mu_left, mu_right, N, "none")
        alpha, (b0, b1), (c0, c1, c2) = coeffs.ode_coefficients(0, g.nodes)
        sigma = complex(2, -1)
        f, df, ddf = np.cos(6 * g.nodes), -6 * np.sin(6 * g.nodes), -36 * np.cos(6 * g.nodes)
        exact = alpha * ddf + (b0 + b1 * sigma) * df + (c0 + c1 * sigma + c2 * sigma ** 2) * f
        error = np.max(np.abs(raw_operator(coeffs, g, 0, sigma) @ f - exact)) / np.max(np.abs(exact))
        errors.append(float(error))

    subprincipal = subprincipal_rayleigh(coeffs)
    passed = (asymmetry < 1e-6 and errors[1] < errors[0] and errors[2] < 1e-7
              and subprincipal["errors"][-1] < subprincipal["errors"][0])
    return {"passed": bool(passed), "asymmetry": asymmetry, "convergence_errors": errors,
            "subprincipal": subprincipal}


def subprincipal_rayleigh(coeffs, sigma=complex(1, -0.5), xi=1.0, exponents=(5, 6, 7, 8), N=400):
    """Rayleigh quotients of ``(P - P^*)/(2i)`` on wave packets at ``mu = 0`` compared with ``-4 Im(sigma) xi``."""
    grid = build_grid(-0.5, 0.5, N, "none")
    mu = grid.nodes
    P = raw_operator(coeffs, grid, 0, sigma)
    weight = grid.quad_weights * coeffs.w(mu) ** ((coeffs.n - 1) / 2)
    target = -4 * complex(sigma).imag * xi
    hs, quotients, errors = [], [], []
    for e in exponents:
        h = 2.0 ** -e
        u = np.exp(1j * xi * mu / h - mu ** 2 / (2 * h))
        value = np.imag(np.sum(weight * u.conj() * (P @ u))) / np.sum(weight * np.abs(u) ** 2)
        hs.append(h)
        quotients.append(float(h * value))
        errors.append(float(abs(h * value - target)))
    rate = float(np.polyfit(np.log(hs), np.log(errors), 1)[0])
    return {"target": target, "h": hs, "scaled_quotients": quotients, "errors": errors, "observed_rate": rate}


def phase_weight_suite(config, threads=1):
    """Interior phase weight with ``|d phi| < 1`` and evenness of the boundary family."""
    model = config.model.build()
    plateau = config.extension.plateau
    weight = build_phase_weight(model, plateau, config.extension.mu_match)
    evenness = validate_evenness(lambda x: model.warp(x ** 2))
    return {"passed": weight.max_norm < 1 and evenness.passed, "max_norm": weight.max_norm,
            "evenness": evenness.to_dict()}


def resonance_suite(config, threads=1):
    """Filtered resonances against exact values, repeated with a rescaled absorption."""
    model = config.model.build()
    window = config.solver.window
    re_range, im_range = tuple(window["re"]), tuple(window["im"])
    kwargs = dict(N=config.grid.N, method=config.solver.method, n_nodes=config.solver.n_nodes,
                  probe_rank=config.solver.probe_rank, rng_seed=config.seed, filter_tol=config.solver.filter_tol,
                  residual_tol=config.solver.residual_tol, threads=threads)

    report = {"passed": True, "runs": {}}
    rescaled = varied_absorption(config.absorption, model.mu_left)
    for label, absorption in (("base", config.absorption), ("rescaled", rescaled)):
        result = resonances_in_window(model, list(config.modes), re_range, im_range, absorption=absorption,
                                      **kwargs)
        mismatches = []
        for mode in config.modes:
            found = sorted([e.sigma for e in result.entries if e.mode_index == mode], key=lambda s: (s.imag, s.real))
            try:
                expected = oracle_resonances(model, mode, re_range, im_range)
            except ValueError:
                continue
            expected = sorted(set(expected), key=lambda s: (s.imag, s.real))
            tol = 1e-4 if model.name in ("cylinder", "funnel") and mode == 0 else 1e-6
            unmatched = [s for s in expected if not any(abs(s - f) < tol for f in found)]
            extra = [f for f in found if not any(abs(s - f) < tol for s in expected)]
            if unmatched or extra:
                mismatches.append({"mode": mode, "missing": [[s.real, s.imag] for s in unmatched],
                                   "extra": [[s.real, s.imag] for s in extra]})
        report["runs"][label] = {"n_entries": len(result.entries), "mismatches": mismatches}
        report["passed"] = report["passed"] and not mismatches
    return report


SUITES = {
    "conjugation": conjugation_suite,
    "symbols": symbol_suite,
    "radial": radial_suite,
    "escape": escape_suite,
    "dichotomy": dichotomy_suite,
    "absorption": absorption_suite,
    "discretization": discretization_suite,
    "phase-weight": phase_weight_suite,
    "resonances": resonance_suite,
}

FLOW_SUITES = ("radial", "escape", "dichotomy")


def run_suites(config, names, threads=1):
    """Run the named suites, the report passes if every suite passes."""
    report = {"suites": {}}
    for name in names:
        logger.info("Running check suite %s", name)
        report["suites"][name] = SUITES[name](config, threads)
    report["passed"] = all(s["passed"] for s in report["suites"].values())
    return report
