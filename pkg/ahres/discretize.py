"""Spectral collocation of the extended operator on one angular mode.

A single Chebyshev-Lobatto grid covers ``[mu_left, mu_right]`` with ``mu = 0``
an ordinary interior point. With ``D = -i d/dmu`` and ``D1`` the collocation
derivative, ``D = -1j * D1``. The operator is stored as a quadratic pencil
``P(sigma) = A2 sigma^2 + A1 sigma + A0`` minus ``i Q(sigma)``.
"""

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg

from ahres.absorption import AbsorptionOperator
from ahres.base import ConstructionError, DomainError
from ahres.utils import extrapolate_to_zero

logger = logging.getLogger(__name__)

BC_SPECS = ("dirichlet_right", "center_regularity", "periodic_double_cover", "none")


def chebyshev_lobatto(a, b, N):
    """Ascending Chebyshev-Lobatto nodes on ``[a, b]``."""
    x = -np.cos(np.pi * np.arange(N) / (N - 1))
    nodes = a + (b - a) * (x + 1) / 2
    nodes[0], nodes[-1] = a, b
    return nodes


def differentiation_matrix(nodes):
    """Barycentric first derivative matrix for Chebyshev-Lobatto nodes.

    The diagonal uses the negative sum trick so constants are differentiated
    to zero up to rounding.
    """
    N = len(nodes)
    weights = (-1.0) ** np.arange(N)
    weights[0] *= 0.5
    weights[-1] *= 0.5

    diff = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(diff, 1)
    D = (weights[None, :] / weights[:, None]) / diff
    np.fill_diagonal(D, 0)
    np.fill_diagonal(D, -D.sum(axis=1))
    return D


def clenshaw_curtis_weights(a, b, N):
    """Clenshaw-Curtis quadrature weights on the Chebyshev-Lobatto nodes of ``[a, b]``."""
    n = N - 1
    theta = np.pi * np.arange(n + 1) / n
    w = np.zeros(n + 1)
    inner = slice(1, n)
    v = np.ones(n - 1)
    if n % 2 == 0:
        w[0] = w[n] = 1 / (n ** 2 - 1)
        for k in range(1, n // 2):
            v -= 2 * np.cos(2 * k * theta[inner]) / (4 * k ** 2 - 1)
        v -= np.cos(n * theta[inner]) / (n ** 2 - 1)
    else:
        w[0] = w[n] = 1 / n ** 2
        for k in range(1, (n - 1) // 2 + 1):
            v -= 2 * np.cos(2 * k * theta[inner]) / (4 * k ** 2 - 1)
    w[inner] = 2 * v / n
    # symmetric, so the ascending order needs no flip
    return w * (b - a) / 2


@dataclass(frozen=True)
class Grid:
    """Collocation grid with differentiation and quadrature.

    Attributes
    ----------
    nodes : np.ndarray
        Strictly increasing nodes, ``nodes[0] = mu_left`` and ``nodes[-1] = mu_right``.

    D1, D2 : np.ndarray
        First and second derivative matrices in mu.

    quad_weights : np.ndarray
        Positive Clenshaw-Curtis weights.

    bc_spec : str
        Right end treatment, one of ``BC_SPECS``.

    """

    nodes: np.ndarray
    D1: np.ndarray
    D2: np.ndarray
    quad_weights: np.ndarray
    bc_spec: str

    @property
    def N(self):
        """Number of nodes."""
        return len(self.nodes)

    @property
    def interval(self):
        """End points."""
        return float(self.nodes[0]), float(self.nodes[-1])

    def integrate(self, values):
        """Quadrature of nodal values."""
        return np.sum(self.quad_weights * values)

    def interpolation_matrix(self, mu):
        """Matrix E with ``E @ values`` the barycentric interpolant of nodal values at the points `mu`."""
        mu = np.atleast_1d(np.asarray(mu, dtype=float))
        weights = (-1.0) ** np.arange(self.N)
        weights[0] *= 0.5
        weights[-1] *= 0.5
        E = np.zeros((len(mu), self.N))
        for i, point in enumerate(mu):
            diff = point - self.nodes
            hit = np.nonzero(diff == 0)[0]
            if len(hit):
                E[i, hit[0]] = 1.0
                continue
            ratio = weights / diff
            E[i] = ratio / np.sum(ratio)
        return E

    def interpolate(self, values, mu):
        """Barycentric interpolation of nodal values to the points `mu`."""
        return self.interpolation_matrix(mu) @ np.asarray(values)


def build_grid(mu_left, mu_right, N, bc_spec="dirichlet_right"):
    """Build a Chebyshev-Lobatto collocation grid.

    Parameters
    ----------
    mu_left, mu_right : float
        End points, ``mu_left < mu_right``.

    N : int
        Number of nodes, at least 8.

    bc_spec : str
        Right end treatment, one of ``BC_SPECS``.

    Returns
    -------
    grid : Grid
        The grid.

    """
    if int(N) != N or N < 8:
        raise ConstructionError("A grid needs N >= 8 nodes, got {}.".format(N))
    if not mu_left < mu_right:
        raise ConstructionError("Need mu_left < mu_right.")
    if bc_spec not in BC_SPECS:
        raise ValueError("Unknown bc_spec {}, choose from {}.".format(bc_spec, BC_SPECS))

    N = int(N)
    nodes = chebyshev_lobatto(mu_left, mu_right, N)
    D1 = differentiation_matrix(nodes)
    D2 = D1 @ D1
    weights = clenshaw_curtis_weights(mu_left, mu_right, N)
    logger.debug("Built grid with N = %d on [%.3g, %.3g]", N, mu_left, mu_right)
    return Grid(nodes=nodes, D1=D1, D2=D2, quad_weights=weights, bc_spec=bc_spec)


def build_model_grid(model, N, bc_spec="auto", mu_left=None):
    """Grid over the extended interval of `model` with its default right end treatment."""
    bc_spec = model.default_bc() if bc_spec == "auto" else bc_spec
    mu_left = model.mu_left if mu_left is None else mu_left
    return build_grid(mu_left, model.mu_right, N, bc_spec)


@dataclass
class ModeOperatorPencil:
    """Discretized ``P(sigma) - i Q(sigma)`` on one mode.

    The unknown is ``v`` with ``u = col_scale * v`` and the equations are
    rows of the original equation multiplied by ``row_scale``. Both scales are
    1 unless the right end is a polar center. Rows listed in ``bc_rows`` carry
    boundary conditions instead of the equation.
    """

    A0: np.ndarray
    A1: np.ndarray
    A2: np.ndarray
    Q_rule: Callable
    q_is_polynomial: bool
    grid: Grid
    mode_index: int
    parity: str = None
    row_scale: np.ndarray = None
    col_scale: np.ndarray = None
    bc_rows: tuple = ()

    @property
    def size(self):
        """Matrix dimension."""
        return self.A0.shape[0]

    def operator(self, sigma):
        """Pencil value ``A2 sigma^2 + A1 sigma + A0`` without absorption."""
        sigma = complex(sigma)
        return self.A2 * sigma ** 2 + self.A1 * sigma + self.A0

    def matrix(self, sigma):
        """``T(sigma) = P(sigma) - i Q(sigma)``."""
        return self.operator(sigma) - 1j * self.Q_rule(sigma)

    def derivative(self, sigma, step=1e-6):
        """``T'(sigma)``, Q is differentiated by a central difference unless it is constant."""
        sigma = complex(sigma)
        value = 2 * self.A2 * sigma + self.A1
        if self.q_is_polynomial:
            return value
        dq = (self.Q_rule(sigma + step) - self.Q_rule(sigma - step)) / (2 * step)
        return value - 1j * dq

    def transform_rhs(self, f):
        """Right hand side for the scaled system, zero on boundary rows."""
        out = np.asarray(f, dtype=complex) * self.row_scale
        out[list(self.bc_rows)] = 0
        return out

    def to_solution(self, v):
        """Map the unknown back to nodal values of u."""
        return self.col_scale * v


def _equation_rows(grid, second, first, zeroth):
    return np.diag(second) @ grid.D2 + np.diag(first) @ grid.D1 + np.diag(zeroth)


def _center_coefficients(coeffs, mode_index, mu_right, k, t):
    """Coefficients of the equation for v with ``u = t^k v``, ``t = mu_right - mu``, times ``t^(1-k)``.

    Returned per power of sigma as ``(second, first, zeroth)`` order coefficients.
    """
    mu = mu_right - t
    alpha, (b0, b1), (c0, c1, c2) = coeffs.ode_coefficients(mode_index, mu)
    return np.array([
        [alpha * t, t * b0 - 2 * k * alpha, t * c0 - k * b0 + k * (k - 1) * alpha / t],
        [0 * t, t * b1, t * c1 - k * b1],
        [0 * t, 0 * t, t * c2],
    ], dtype=complex)


def raw_operator(coeffs, grid, mode_index, sigma):
    """Collocated ``P_sigma`` without boundary rows or scaling, all coefficients evaluated at the nodes."""
    alpha, (b0, b1), (c0, c1, c2) = coeffs.ode_coefficients(mode_index, grid.nodes)
    sigma = complex(sigma)
    return _equation_rows(grid, alpha, b0 + b1 * sigma, c0 + c1 * sigma + c2 * sigma ** 2)


def assemble_pencil(coeffs, grid, mode_index, model=None, absorption=None, parity=None):
    """Assemble the pencil of the extended operator on one mode.

    Parameters
    ----------
    coeffs : ExtendedCoeffs
        Coefficients of the extended operator.

    grid : Grid
        Collocation grid; its ``bc_spec`` selects the right end treatment.

    mode_index : int
        Angular mode.

    model : EvenMetricModel or None
        Model, defaults to ``coeffs.model``.

    absorption : AbsorptionConfig or None
        Absorbing operator settings, None means no absorption.

    parity : str or None
        ``"even"`` or ``"odd"`` for ``periodic_double_cover``.

    Returns
    -------
    pencil : ModeOperatorPencil
        Matrices ``A0, A1, A2`` and the rule ``sigma -> Q(sigma)``.

    """
    model = coeffs.model if model is None else model
    mu = grid.nodes
    N = grid.N
    last = N - 1
    row_scale = np.ones(N)
    col_scale = np.ones(N)
    bc_rows = ()

    if grid.bc_spec == "center_regularity":
        if model is None or not model.center:
            raise DomainError("center_regularity needs a model with a polar center.")
        k = model.regularity_order(mode_index)
        t = model.mu_right - mu
        t[last] = 0.0
        blocks = np.empty((3, 3, N), dtype=complex)
        blocks[..., :last] = _center_coefficients(coeffs, mode_index, model.mu_right, k, t[:last])
        blocks[..., last] = extrapolate_to_zero(
            lambda s: _center_coefficients(coeffs, mode_index, model.mu_right, k, np.array([s]))[..., 0])
        A0, A1, A2 = (_equation_rows(grid, *blocks[p]) for p in range(3))
        row_scale[:last] = t[:last] ** (1 - k)
        # the extrapolated last row is the plain equation only for k = 1
        row_scale[last] = 1.0 if k == 1 else 0.0
        col_scale = t ** k
    else:
        alpha, (b0, b1), (c0, c1, c2) = coeffs.ode_coefficients(mode_index, mu)
        zero = np.zeros(N)
        A0 = _equation_rows(grid, alpha, b0, c0)
        A1 = _equation_rows(grid, zero, b1, c1)
        A2 = _equation_rows(grid, zero, zero, c2)

        if grid.bc_spec == "dirichlet_right":
            A0[last], A1[last], A2[last] = 0, 0, 0
            A0[last, last] = 1
            bc_rows = (last,)
        elif grid.bc_spec == "periodic_double_cover":
            if parity not in ("even", "odd"):
                raise ValueError("periodic_double_cover needs parity 'even' or 'odd', got {}.".format(parity))
            A0[last], A1[last], A2[last] = 0, 0, 0
            if parity == "odd":
                A0[last, last] = 1
            else:
                # (F u)' = 0 with F = mu^(s - 1/2) (1 + mu)^(i sigma / 4)
                mu_r = mu[last]
                A0[last] = grid.D1[last]
                A0[last, last] += ((coeffs.n + 1) / 4 - 0.5) / mu_r
                A1[last, last] = -1j / (2 * mu_r) + 1j / (4 * (1 + mu_r))
            bc_rows = (last,)

    if absorption is None or absorption.mode == "off":
        size = N

        def q_rule(sigma):
            return np.zeros((size, size), dtype=complex)

        q_is_polynomial = True
    else:
        op = AbsorptionOperator(grid, mode_index, coeffs, absorption)
        keep = np.ones(N)
        keep[list(bc_rows)] = 0
        left = row_scale * keep
        right = col_scale

        def q_rule(sigma):
            return left[:, None] * op(sigma) * right[None, :]

        q_is_polynomial = op.is_polynomial

    logger.debug("Assembled pencil for mode %d, N = %d, bc = %s", mode_index, N, grid.bc_spec)
    return ModeOperatorPencil(A0=A0, A1=A1, A2=A2, Q_rule=q_rule, q_is_polynomial=q_is_polynomial, grid=grid,
                              mode_index=mode_index, parity=parity, row_scale=row_scale, col_scale=col_scale,
                              bc_rows=bc_rows)


def sobolev_norm_matrix(grid, s, h):
    """Matrix M with ``||u||^2_{H^s_h} = Re(u^H M u)``.

    Parameters
    ----------
    grid : Grid
        Collocation grid.

    s : float
        Order. Integers use ``sum_{j <= s} h^(2j) (D1^j)^H W D1^j``, other
        positive orders a power of the order one matrix, negative orders the
        dual ``W M_{|s|}^{-1} W``.

    h : float
        Semiclassical parameter.

    Returns
    -------
    M : np.ndarray
        Hermitian positive definite matrix.

    """
    if not np.isfinite(h) or h <= 0:
        raise DomainError("h has to be positive and finite, got {}.".format(h))
    if not np.isfinite(s):
        raise DomainError("s has to be finite.")

    W = np.diag(grid.quad_weights)
    if s < 0:
        positive = sobolev_norm_matrix(grid, -s, h)
        return W @ np.linalg.solve(positive, W)

    if float(s).is_integer():
        M = W.astype(complex)
        Dj = np.eye(grid.N)
        for j in range(1, int(s) + 1):
            Dj = grid.D1 @ Dj
            M = M + h ** (2 * j) * (Dj.T @ W @ Dj)
        return M

    # fractional order via the symmetrized order one matrix
    root = np.sqrt(grid.quad_weights)
    K = sobolev_norm_matrix(grid, 1, h) / np.outer(root, root)
    K = (K + K.conj().T) / 2
    values, vectors = scipy.linalg.eigh(K)
    Ks = (vectors * values ** s) @ vectors.conj().T
    return Ks * np.outer(root, root)


def sobolev_norm(grid, u, s, h, matrix=None):
    """Semiclassical Sobolev norm of nodal values."""
    M = sobolev_norm_matrix(grid, s, h) if matrix is None else matrix
    u = np.asarray(u)
    return float(np.sqrt(max(np.real(u.conj() @ M @ u), 0.0)))
