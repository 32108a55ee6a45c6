"""Resolvent solves, resonance eigensolvers and high energy sweeps.

Resonances are the poles of ``sigma -> T(sigma)^{-1}`` with
``T(sigma) = P(sigma) - i Q(sigma)`` the assembled mode pencil. Two methods
locate them: a contour integral (moment) method that works for any
holomorphic family and a companion linearization for polynomial Q.
"""

import logging
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.stats
from numpy.polynomial.chebyshev import chebvander
from numpy.polynomial.legendre import leggauss

from ahres.base import ConfigError, NearPoleError, NumericalError
from ahres.discretize import assemble_pencil, build_model_grid, sobolev_norm_matrix
from ahres.extension import derive_extended_coeffs
from ahres.utils import smooth_bump

logger = logging.getLogger(__name__)

DEFAULT_RCOND_TOL = 1e-15


@dataclass
class ResonanceEntry:
    """One computed resonance."""

    sigma: complex
    mode_index: int
    residual: float
    refine_err: float = None
    contour_id: int = None
    parity: str = None
    multiplicity: int = 1
    flags: list = field(default_factory=list)

    def to_dict(self):
        """JSON representation."""
        out = {"re": float(self.sigma.real), "im": float(self.sigma.imag), "mode": int(self.mode_index),
               "residual": float(self.residual), "multiplicity": int(self.multiplicity)}
        out["refine_err"] = None if self.refine_err is None else float(self.refine_err)
        if self.parity is not None:
            out["parity"] = self.parity
        if self.flags:
            out["flags"] = list(self.flags)
        return out


def _sort_key(entry):
    return (entry.mode_index, entry.parity or "", round(entry.sigma.real, 9), round(entry.sigma.imag, 9))


@dataclass
class ResonanceResult:
    """Collection of resonances found in a window."""

    entries: list
    window: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def sorted(self):
        """Copy sorted by ``(mode, parity, Re sigma, Im sigma)``."""
        return ResonanceResult(sorted(self.entries, key=_sort_key), dict(self.window), list(self.notes))

    @property
    def sigmas(self):
        """Array of the resonances."""
        return np.array([e.sigma for e in self.entries], dtype=complex)

    def to_dict(self):
        """JSON representation."""
        return {"entries": [e.to_dict() for e in self.sorted().entries], "window": self.window,
                "notes": list(self.notes)}


@dataclass
class SweepResult:
    """Norm ratios along a line in the lower half plane with the fitted log-log slope."""

    rows: list
    slope: float
    intercept: float
    confidence_interval: tuple
    max_scaled_ratio: float

    def to_dict(self):
        """JSON representation of the fit."""
        return {"slope": self.slope, "intercept": self.intercept,
                "confidence_interval": list(self.confidence_interval),
                "max_ratio_times_abs_sigma": self.max_scaled_ratio, "n_points": len(self.rows)}


@dataclass(frozen=True)
class Contour:
    """Circle ``center + radius e^{i theta}`` sampled at `n_nodes` equispaced angles."""

    center: complex
    radius: float
    n_nodes: int = 32

    def __post_init__(self):
        """Validate."""
        if not self.radius > 0 or self.n_nodes < 4:
            raise ValueError("A contour needs radius > 0 and at least 4 nodes.")

    def contains(self, sigma, slack=0.0):
        """Whether `sigma` lies inside the circle."""
        return abs(complex(sigma) - self.center) < self.radius * (1 + slack)

    def to_dict(self):
        """JSON representation."""
        return {"center": [self.center.real, self.center.imag], "radius": self.radius, "n_nodes": self.n_nodes}


def tile_window(re_range, im_range, n_nodes=32, max_side=1.0):
    """Cover a rectangle by circles of radius equal to the side of square-ish cells of side at most `max_side`.

    Every point of the rectangle lies well inside at least one circle.
    """
    (a, b), (c, d) = re_range, im_range
    n_re = max(1, int(math.ceil((b - a) / max_side)))
    n_im = max(1, int(math.ceil((d - c) / max_side)))
    side_re, side_im = (b - a) / n_re, (d - c) / n_im
    radius = max(side_re, side_im)
    contours = []
    for i in range(n_re):
        for j in range(n_im):
            center = complex(a + (i + 0.5) * side_re, c + (j + 0.5) * side_im)
            contours.append(Contour(center, radius, n_nodes))
    return contours


def _factorize(T):
    """LU factorization with a LAPACK reciprocal condition estimate in the 1-norm."""
    lu, piv = scipy.linalg.lu_factor(T, check_finite=False)
    gecon, = scipy.linalg.get_lapack_funcs(("gecon",), (lu,))
    rcond, _ = gecon(lu, np.linalg.norm(T, 1), norm="1")
    return lu, piv, float(rcond)


def solve_resolvent(pencil, sigma, f, rcond_tol=DEFAULT_RCOND_TOL, refine_steps=2, return_info=False):
    """Solve ``(P(sigma) - i Q(sigma)) u = f`` on the grid.

    Parameters
    ----------
    pencil : ModeOperatorPencil
        Assembled mode pencil.

    sigma : complex
        Spectral parameter.

    f : np.ndarray
        Nodal values of the right hand side.

    rcond_tol : float
        Reciprocal condition number below which `sigma` counts as a pole.

    refine_steps : int
        Steps of iterative refinement.

    return_info : bool
        If True, also return residual and condition estimate.

    Returns
    -------
    u : np.ndarray
        Nodal values of the solution.

    info : dict
        Only if `return_info`. Keys ``residual`` and ``rcond``.

    """
    T = pencil.matrix(sigma)
    lu, piv, rcond = _factorize(T)
    if rcond < rcond_tol:
        raise NearPoleError("Matrix is singular to tolerance, sigma is close to a pole.", rcond,
                            {"sigma": [float(np.real(sigma)), float(np.imag(sigma))]})

    b = pencil.transform_rhs(f)
    v = scipy.linalg.lu_solve((lu, piv), b)
    for _ in range(refine_steps):
        v = v + scipy.linalg.lu_solve((lu, piv), b - T @ v)

    norm_b = np.linalg.norm(b)
    residual = np.linalg.norm(T @ v - b) / norm_b if norm_b > 0 else 0.0
    u = pencil.to_solution(v)
    if return_info:
        return u, {"residual": float(residual), "rcond": rcond}
    return u


def backward_error(pencil, sigma, v, T=None):
    """Normwise backward error ``||T v|| / ((|s|^2 ||A2|| + |s| ||A1|| + ||A0 - iQ||) ||v||)``."""
    sigma = complex(sigma)
    T = pencil.matrix(sigma) if T is None else T
    scale = (abs(sigma) ** 2 * np.linalg.norm(pencil.A2, 2) + abs(sigma) * np.linalg.norm(pencil.A1, 2)
             + np.linalg.norm(pencil.A0 - 1j * pencil.Q_rule(sigma), 2))
    return float(np.linalg.norm(T @ v) / (scale * np.linalg.norm(v)))


def smallest_singular_triplet(T):
    """``(s_min, u, v)`` of a square matrix."""
    U, s, Vh = scipy.linalg.svd(T)
    return s[-1], U[:, -1], Vh[-1].conj()


def newton_refine(pencil, sigma, max_steps=8, tol=1e-13):
    """Refine an approximate eigenvalue by Newton steps on ``u^H T(sigma) v`` with the smallest singular pair.

    Returns the refined sigma, the right singular vector and the backward error.
    """
    sigma = complex(sigma)
    for _ in range(max_steps):
        s_min, u, v = smallest_singular_triplet(pencil.matrix(sigma))
        denominator = u.conj() @ pencil.derivative(sigma) @ v
        if denominator == 0:
            break
        step = s_min / denominator
        sigma = sigma - step
        if abs(step) < tol * (1 + abs(sigma)):
            break
    _, _, v = smallest_singular_triplet(pencil.matrix(sigma))
    return sigma, v, backward_error(pencil, sigma, v)


def _node_inverse_probe(pencil, sigma, V):
    T = pencil.matrix(sigma)
    lu, piv, rcond = _factorize(T)
    if rcond < DEFAULT_RCOND_TOL:
        raise NearPoleError("Contour node is too close to a pole.", rcond,
                            {"sigma": [sigma.real, sigma.imag]})
    return scipy.linalg.lu_solve((lu, piv), V)


def _cluster(values, tol):
    """Group complex values closer than `tol`, returning ``(mean, size)`` pairs."""
    clusters = []
    for value in values:
        for cluster in clusters:
            if abs(cluster[0] - value) < tol:
                cluster[1].append(value)
                break
        else:
            clusters.append([value, [value]])
    return [(complex(np.mean(members)), len(members)) for _, members in clusters]


def find_resonances_contour(pencil, contour, probe_rank=8, rng_seed=0, rank_tol=1e-8, rank_gap=1e6,
                            residual_tol=1e-8, cluster_tol=1e-5, contour_id=0, threads=1):
    """Eigenvalues of a holomorphic pencil inside a circle via the moment method.

    The moments ``(1/2 pi i) oint T^{-1} V ((sigma - c)/r)^k d sigma`` for
    ``k = 0, 1`` are computed with the trapezoidal rule. A reduced SVD of the
    zeroth moment with a relative rank cutoff yields a small matrix whose
    eigenvalues approximate the poles; each one is polished by Newton steps.

    Parameters
    ----------
    pencil : ModeOperatorPencil
        Holomorphic family ``T(sigma)``.

    contour : Contour
        Circle to search in.

    probe_rank : int
        Width of the random probe block.

    rng_seed : int
        Seed of the probe block.

    rank_tol : float
        Singular values of the zeroth moment below ``rank_tol`` times the
        largest probe response are discarded.

    rank_gap : float
        Minimal ratio between the last kept and the first discarded singular
        value below which a warning is emitted.

    residual_tol : float
        Bound on the backward error of reported entries.

    cluster_tol : float
        Refined candidates closer than this count as one entry with multiplicity.

    contour_id : int
        Label stored in the entries.

    threads : int
        Workers for the node solves.

    Returns
    -------
    result : ResonanceResult
        Entries inside the contour, with notes on jittered nodes.

    """
    rng = np.random.RandomState(rng_seed)
    size = pencil.size
    rank = min(probe_rank, size)
    V = rng.randn(size, rank) + 1j * rng.randn(size, rank)
    notes = []
    c, r, n = complex(contour.center), contour.radius, contour.n_nodes
    thetas = 2 * np.pi * np.arange(n) / n

    def node_solve(theta):
        sigma = c + r * np.exp(1j * theta)
        try:
            return theta, _node_inverse_probe(pencil, sigma, V), False
        except NearPoleError:
            # single tangential shift by radius / (4 n) along the circle
            theta = theta + 1 / (4 * n)
            sigma = c + r * np.exp(1j * theta)
            try:
                return theta, _node_inverse_probe(pencil, sigma, V), True
            except NearPoleError as err:
                raise NumericalError("Contour node stays singular after jitter.",
                                     {"sigma": [sigma.real, sigma.imag], "rcond": err.rcond})

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            solves = list(pool.map(node_solve, thetas))
    else:
        solves = [node_solve(theta) for theta in thetas]

    A0 = np.zeros((size, rank), dtype=complex)
    A1 = np.zeros((size, rank), dtype=complex)
    scale = 0.0
    for theta, X, jittered in solves:
        if jittered:
            notes.append("jittered contour node at angle {:.6f}".format(theta))
            logger.info("Jittered contour node of contour %d to angle %.6f", contour_id, theta)
        z = np.exp(1j * theta)
        A0 += X * z / n
        A1 += X * z ** 2 / n
        scale = max(scale, np.linalg.norm(X, 2))

    V0, s, W0h = scipy.linalg.svd(A0, full_matrices=False)
    normalized = s / scale if scale > 0 else s
    k = int(np.sum(normalized > rank_tol))
    if 0 < k < len(s) and normalized[k - 1] / max(normalized[k], 1e-300) < rank_gap:
        warnings.warn("Ambiguous rank cutoff in contour {}: singular values {}.".format(
            contour_id, np.array2string(normalized[:k + 2], precision=2)))
    if k == rank:
        warnings.warn("Probe rank {} saturated in contour {}, increase probe_rank.".format(rank, contour_id))

    entries = []
    if k > 0:
        B = V0[:, :k].conj().T @ A1 @ W0h[:k].conj().T / s[:k]
        candidates = c + r * scipy.linalg.eigvals(B)
        refined = []
        for candidate in candidates:
            sigma, _, error = newton_refine(pencil, candidate)
            if contour.contains(sigma) and error < residual_tol:
                refined.append((sigma, error))
        for sigma, count in _cluster([s_ for s_, _ in refined], cluster_tol):
            error = min(e for s_, e in refined if abs(s_ - sigma) < cluster_tol)
            entries.append(ResonanceEntry(sigma, pencil.mode_index, error, contour_id=contour_id,
                                          parity=pencil.parity, multiplicity=count))

    logger.debug("Contour %d: rank %d, %d entries", contour_id, k, len(entries))
    return ResonanceResult(entries, {"contours": [contour.to_dict()]}, notes)


def merge_results(results, tol=1e-6):
    """Union of results with entries closer than `tol` (same mode and parity) merged."""
    merged, notes, contours = [], [], []
    for result in results:
        notes.extend(result.notes)
        contours.extend(result.window.get("contours", []))
        for entry in result.entries:
            for other in merged:
                same = other.mode_index == entry.mode_index and other.parity == entry.parity
                if same and abs(other.sigma - entry.sigma) < tol:
                    other.multiplicity = max(other.multiplicity, entry.multiplicity)
                    if entry.residual < other.residual:
                        other.sigma, other.residual = entry.sigma, entry.residual
                    break
            else:
                merged.append(entry)
    return ResonanceResult(merged, {"contours": contours}, notes).sorted()


def find_resonances_linearized(pencil, re_range=None, im_range=None, residual_tol=1e-8):
    """All finite eigenvalues of a polynomial pencil by companion linearization.

    Parameters
    ----------
    pencil : ModeOperatorPencil
        Pencil with ``q_is_polynomial``.

    re_range, im_range : tuple or None
        Window to report.

    residual_tol : float
        Bound on the backward error of reported entries.

    Returns
    -------
    result : ResonanceResult
        Finite eigenvalues in the window.

    """
    if not pencil.q_is_polynomial:
        raise ValueError("The companion linearization needs a sigma independent absorption.")

    size = pencil.size
    K0 = pencil.A0 - 1j * pencil.Q_rule(0.0)
    identity = np.eye(size)
    zero = np.zeros((size, size))
    # [[0, I], [-K0, -A1]] x = sigma [[I, 0], [0, A2]] x with x = (v, sigma v)
    C = np.block([[zero, identity], [-K0, -pencil.A1]])
    D = np.block([[identity, zero], [zero, pencil.A2]])
    # A2 is singular on boundary rows, the homogeneous form separates infinite eigenvalues
    try:
        (alpha, beta), vectors = scipy.linalg.eig(C, D, homogeneous_eigvals=True)
    except scipy.linalg.LinAlgError as err:
        raise NumericalError("Generalized eigensolver failed: {}".format(err))

    finite = np.abs(beta) > 1e-12 * (np.abs(alpha) + np.abs(beta))
    values = alpha[finite] / beta[finite]
    entries = []
    for sigma, vector in zip(values, vectors[:, finite].T):
        if re_range is not None and not re_range[0] <= sigma.real <= re_range[1]:
            continue
        if im_range is not None and not im_range[0] <= sigma.imag <= im_range[1]:
            continue
        error = backward_error(pencil, sigma, vector[:size])
        if error < residual_tol:
            entries.append(ResonanceEntry(complex(sigma), pencil.mode_index, error, parity=pencil.parity))

    window = {}
    if re_range is not None:
        window["re"] = list(re_range)
    if im_range is not None:
        window["im"] = list(im_range)
    return ResonanceResult(entries, window).sorted()


def _nearest(entry, candidates):
    same = [c for c in candidates if c.mode_index == entry.mode_index and c.parity == entry.parity]
    if not same:
        return None, np.inf
    distances = [abs(c.sigma - entry.sigma) for c in same]
    i = int(np.argmin(distances))
    return same[i], distances[i]


def filter_spurious(res_N, res_refined, filter_tol=1e-6):
    """Keep entries that reappear on the refined grid within `filter_tol`."""
    kept = []
    for entry in res_N.entries:
        _, distance = _nearest(entry, res_refined.entries)
        if distance < filter_tol:
            entry.refine_err = float(distance)
            kept.append(entry)
        else:
            logger.debug("Dropped unstable candidate %s under refinement (%.2e)", entry.sigma, distance)
    return ResonanceResult(kept, res_N.window, res_N.notes).sorted()


def separate_absorption_resonances(result, result_varied, filter_tol=1e-6):
    """Split off entries that move by more than `filter_tol` when the absorption is changed.

    Returns
    -------
    physical : ResonanceResult
        Entries independent of the absorption.

    flagged : ResonanceResult
        Entries flagged as ``"absorption-window resonance"``.

    """
    physical, flagged = [], []
    for entry in result.entries:
        _, distance = _nearest(entry, result_varied.entries)
        if distance < filter_tol:
            physical.append(entry)
        else:
            entry.flags.append("absorption-window resonance")
            flagged.append(entry)
    return (ResonanceResult(physical, result.window, result.notes).sorted(),
            ResonanceResult(flagged, result.window, result.notes).sorted())


def _parities(model):
    if model.default_bc() != "periodic_double_cover":
        return [None]
    if model.neck_parity == "both":
        return ["even", "odd"]
    return [model.neck_parity]


def mode_pencils(model, mode_index, N, absorption=None, coeffs=None, bc_spec="auto", mu_left=None):
    """Pencils of one mode at grid size N, one per neck parity sector."""
    coeffs = derive_extended_coeffs(model) if coeffs is None else coeffs
    grid = build_model_grid(model, N, bc_spec, mu_left)
    return [assemble_pencil(coeffs, grid, mode_index, model, absorption, parity) for parity in _parities(model)]


def varied_absorption(absorption, mu_left):
    """Absorption with doubled strength and a wider window that still fits in ``[mu_left, 0)``."""
    room = (absorption.mu0 / 2 - mu_left) / (2 * absorption.chi_width)
    return absorption.scaled(2.0, min(1.5, room))


def resonances_in_window(model, modes, re_range, im_range, N=128, absorption=None, method="contour",
                         n_nodes=32, probe_rank=8, rng_seed=0, filter_tol=1e-6, residual_tol=1e-8, threads=1):
    """Filtered resonances of several modes in a rectangular window.

    Each mode is solved at N and ``ceil(1.25 N)`` and only entries stable under
    the refinement are kept. With absorption on, every mode is solved once more
    at N with ``varied_absorption``; entries that move are resonances of the
    absorbing layer, they are dropped and listed in the notes.

    Parameters
    ----------
    model : EvenMetricModel
        Metric model.

    modes : list
        Mode indices.

    re_range, im_range : tuple
        Window.

    N : int
        Base grid size.

    absorption : AbsorptionConfig or None
        Absorption settings.

    method : str
        ``"contour"`` or ``"linearized"``.

    n_nodes, probe_rank, rng_seed : int
        Contour settings.

    filter_tol, residual_tol : float
        Refinement and residual bounds.

    threads : int
        Worker threads, modes run in parallel.

    Returns
    -------
    result : ResonanceResult
        Filtered entries sorted by mode and position.

    """
    if method not in ("contour", "linearized"):
        raise ValueError("Unknown method {}.".format(method))
    coeffs = derive_extended_coeffs(model)
    contours = tile_window(re_range, im_range, n_nodes)
    N_refined = int(math.ceil(1.25 * N))

    def in_window(entry):
        return re_range[0] <= entry.sigma.real <= re_range[1] and im_range[0] <= entry.sigma.imag <= im_range[1]

    def solve(pencil):
        if method == "linearized":
            return find_resonances_linearized(pencil, re_range, im_range, residual_tol)
        parts = [find_resonances_contour(pencil, contour, probe_rank, rng_seed, residual_tol=residual_tol,
                                         contour_id=i)
                 for i, contour in enumerate(contours)]
        merged = merge_results(parts, filter_tol)
        merged.entries = [e for e in merged.entries if in_window(e)]
        return merged

    absorbing = absorption is not None and absorption.mode != "off"
    varied = varied_absorption(absorption, model.mu_left) if absorbing else None

    def run_mode(mode_index):
        coarse = [solve(p) for p in mode_pencils(model, mode_index, N, absorption, coeffs)]
        fine = [solve(p) for p in mode_pencils(model, mode_index, N_refined, absorption, coeffs)]
        logger.info("Mode %d: %d candidates at N = %d", mode_index, sum(len(r.entries) for r in coarse), N)
        result = filter_spurious(merge_results(coarse, filter_tol), merge_results(fine, filter_tol), filter_tol)
        if varied is None:
            return result

        moved = merge_results([solve(p) for p in mode_pencils(model, mode_index, N, varied, coeffs)], filter_tol)
        physical, flagged = separate_absorption_resonances(result, moved, filter_tol)
        for entry in flagged.entries:
            logger.warning("Mode %d: %s moves with the absorption, dropped", mode_index, entry.sigma)
            physical.notes.append("absorption-window resonance dropped: mode {}, sigma {:.10g}{:+.10g}j".format(
                mode_index, entry.sigma.real, entry.sigma.imag))
        return physical

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            per_mode = list(pool.map(run_mode, modes))
    else:
        per_mode = [run_mode(m) for m in modes]

    entries = [e for r in per_mode for e in r.entries]
    notes = [note for r in per_mode for note in r.notes]
    window = {"re": list(re_range), "im": list(im_range), "method": method, "N": N, "N_refined": N_refined}
    if varied is not None:
        window["absorption_varied"] = varied.to_dict()
    return ResonanceResult(entries, window, notes).sorted()


def characteristic_phase_derivative(coeffs, mu):
    """Smooth root ``psi'`` of ``4 mu psi'^2 - 4 (1+a2) psi' - (1+a3) = 0``."""
    mu = np.asarray(mu, dtype=float)
    a, b = 1 + coeffs.a2(mu), 1 + coeffs.a3(mu)
    return -b / (2 * (a + np.sqrt(a ** 2 + mu * b)))


def characteristic_phase(coeffs, mu, base_point):
    """``psi(mu) = int_{base_point}^{mu} psi'``, Gauss-Legendre per point."""
    mu = np.atleast_1d(np.asarray(mu, dtype=float))
    nodes, weights = leggauss(32)
    out = np.empty(len(mu))
    for i, point in enumerate(mu):
        half = (point - base_point) / 2
        pts = half * nodes + (point + base_point) / 2
        out[i] = half * np.sum(weights * characteristic_phase_derivative(coeffs, pts))
    return out


def sweep_source(coeffs, mu, sigma, center=1.0, width=1.0, oscillation="characteristic"):
    """Bump on ``[center - width/2, center + width/2]``, optionally modulated by ``e^{i sigma psi}``."""
    bump = smooth_bump(mu, center - width / 2, center + width / 2).astype(complex)
    if oscillation == "none":
        return bump
    if oscillation != "characteristic":
        raise ValueError("Unknown oscillation {}.".format(oscillation))
    support = bump != 0
    bump[support] *= np.exp(1j * complex(sigma) * characteristic_phase(coeffs, mu[support], center))
    return bump


def sweep_grid_size(sigma, n_min=96, n_max=400, per_unit=2.5):
    """Grid size growing linearly with ``|sigma|``."""
    return int(np.clip(math.ceil(per_unit * abs(sigma)), n_min, n_max))


def sweep_norm_estimate(model, im_sigma, re_values, s=2.0, absorption=None, source_center=1.0, source_width=1.0,
                        oscillation="characteristic", dual_order=None, mode_index=0, n_min=96, threads=1):
    """Measure ``||R(sigma) f||_{H^s_h} / ||f||_{H^{s-1}_h}`` along ``Im sigma = im_sigma``.

    Parameters
    ----------
    model : EvenMetricModel
        Metric model; trapping models need an interior absorption window.

    im_sigma : float
        Imaginary part of the line.

    re_values : sequence
        Real parts, at least three.

    s : float
        Sobolev order of the solution, ``s > 1/2 + |im_sigma|``.

    absorption : AbsorptionConfig or None
        Absorption settings.

    source_center, source_width : float
        Support of the source bump.

    oscillation : str
        ``"characteristic"`` or ``"none"``.

    dual_order : float or None
        Order of the norm on f, ``s - 1`` by default.

    mode_index : int
        Angular mode.

    n_min : int
        Smallest grid size.

    threads : int
        Worker threads over the sweep points.

    Returns
    -------
    result : SweepResult
        Table rows and fitted log-log slope with a 95% confidence interval.

    """
    if model.trapping_flag and (absorption is None or absorption.interior_window is None):
        raise ConfigError("Trapping model: high energy estimates need complex absorption inside X0, "
                          "set absorption.interior_window.", "/absorption/interior_window")
    if not s > 0.5 + abs(min(im_sigma, 0.0)):
        raise ConfigError("Sweep order s = {} violates s > 1/2 + |Im sigma|.".format(s), "/sweep/s")
    if len(re_values) < 3:
        raise ValueError("A slope fit needs at least three sweep points.")

    dual_order = s - 1 if dual_order is None else dual_order
    coeffs = derive_extended_coeffs(model)

    def run_point(re_sigma):
        sigma = complex(re_sigma, im_sigma)
        N = sweep_grid_size(sigma, n_min)
        pencil = mode_pencils(model, mode_index, N, absorption, coeffs)[0]
        grid = pencil.grid
        f = sweep_source(coeffs, grid.nodes, sigma, source_center, source_width, oscillation)
        u = solve_resolvent(pencil, sigma, f)
        h = 1 / abs(sigma)
        norm_u = np.sqrt(np.real(u.conj() @ sobolev_norm_matrix(grid, s, h) @ u))
        norm_f = np.sqrt(np.real(f.conj() @ sobolev_norm_matrix(grid, dual_order, h) @ f))
        logger.info("Sweep point sigma = %s, N = %d", sigma, N)
        return {"re_sigma": float(sigma.real), "im_sigma": float(sigma.imag), "ratio": float(norm_u / norm_f),
                "s": float(s), "h": float(h), "N": N}

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(run_point, re_values))
    else:
        rows = [run_point(x) for x in re_values]

    abs_sigma = np.array([abs(complex(r["re_sigma"], r["im_sigma"])) for r in rows])
    ratios = np.array([r["ratio"] for r in rows])
    if not np.all(np.isfinite(ratios)):
        raise NumericalError("Non-finite norm ratio in the sweep.", {"rows": rows})

    fit = scipy.stats.linregress(np.log(abs_sigma), np.log(ratios))
    quantile = scipy.stats.t.ppf(0.975, len(rows) - 2)
    interval = (float(fit.slope - quantile * fit.stderr), float(fit.slope + quantile * fit.stderr))
    return SweepResult(rows, float(fit.slope), float(fit.intercept), interval, float(np.max(ratios * abs_sigma)))


def resolvent_on_x0(model, sigma, f, N=128, absorption=None, mode_index=0, parity=None, return_grid=False):
    """Resolvent of ``Delta - (n-1)^2/4 - sigma^2`` on the original space via the extended problem.

    ``f`` is a function of mu supported in ``mu > 0``. The extended problem is
    solved with ``mu^(i sigma/2 - (n+1)/4 - 1/2) (1+mu)^(-i sigma/4) f`` and the
    solution is mapped back with ``mu^(-i sigma/2 + (n+1)/4 - 1/2) (1+mu)^(i sigma/4)``.

    Returns
    -------
    mu : np.ndarray
        Grid nodes with ``mu > 0``.

    u : np.ndarray
        Resolvent applied to f at these nodes.

    """
    sigma = complex(sigma)
    n = model.n
    pencils = mode_pencils(model, mode_index, N, absorption)
    pencil = pencils[0] if parity is None else [p for p in pencils if p.parity == parity][0]
    mu = pencil.grid.nodes
    positive = mu > 0

    f_tilde = np.zeros(len(mu), dtype=complex)
    mp = mu[positive]
    f_tilde[positive] = mp ** (1j * sigma / 2 - (n + 1) / 4 - 0.5) * (1 + mp) ** (-1j * sigma / 4) * f(mp)
    u_tilde = solve_resolvent(pencil, sigma, f_tilde)
    u = mp ** (-1j * sigma / 2 + (n + 1) / 4 - 0.5) * (1 + mp) ** (1j * sigma / 4) * u_tilde[positive]
    if return_grid:
        return mp, u, pencil.grid, u_tilde
    return mp, u


def indicial_branch_coefficients(grid, u, sigma, mu_max=0.15, smooth_degree=12, singular_degree=3,
                                 n_samples=60):
    """Split a solution near ``mu = 0+`` into a smooth and a ``mu^(i sigma)`` branch.

    The nodal values are interpolated to `n_samples` points in ``(0, mu_max]``
    and fitted by least squares against ``T_j(2t - 1)`` and
    ``t^(i sigma) T_j(2t - 1)`` with ``t = mu / mu_max`` and Chebyshev
    polynomials ``T_j``. The singular block is solved on the orthogonal
    complement of the smooth columns, so round off in a smooth solution does
    not leak into the singular coefficients.

    Returns
    -------
    report : dict
        Norms of the smooth and singular coefficient vectors and their ratio.

    """
    sigma = complex(sigma)
    mu = np.linspace(mu_max / n_samples, mu_max, n_samples)
    values = grid.interpolate(u, mu)
    t = mu / mu_max
    smooth = chebvander(2 * t - 1, smooth_degree).astype(complex)
    singular = t[:, None] ** (1j * sigma) * chebvander(2 * t - 1, singular_degree)

    basis, _ = np.linalg.qr(smooth)
    project = np.eye(len(mu)) - basis @ basis.conj().T
    singular_coefficients = np.linalg.lstsq(project @ singular, project @ values, rcond=None)[0]
    smooth_coefficients = np.linalg.lstsq(smooth, values - singular @ singular_coefficients, rcond=None)[0]
    smooth_norm = float(np.linalg.norm(smooth_coefficients))
    singular_norm = float(np.linalg.norm(singular_coefficients))
    return {"smooth_norm": smooth_norm, "singular_norm": singular_norm,
            "ratio": singular_norm / smooth_norm if smooth_norm > 0 else np.inf}


def pole_zero_dip(pencil, sigma, radius=1e-2, n_points=16):
    """Orders of magnitude by which the smallest singular value dips at `sigma` relative to a small circle."""
    sigma = complex(sigma)
    center = scipy.linalg.svdvals(pencil.matrix(sigma))[-1]
    ring = [scipy.linalg.svdvals(pencil.matrix(sigma + radius * np.exp(2j * np.pi * k / n_points)))[-1]
            for k in range(n_points)]
    ring_max = float(np.max(ring))
    return {"center": float(center), "ring_max": ring_max,
            "dip": float(np.log10(ring_max / max(center, 1e-300)))}
