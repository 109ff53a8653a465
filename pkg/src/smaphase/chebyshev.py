"""
Chebyshev-Gauss-Lobatto collocation operators on [-1, 1].

Nodes are ordered as x_i = cos(pi*i/N), i.e. descending from 1 to -1.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg


class InvalidOrder(ValueError):
    pass


class DuplicateNodes(ValueError):
    pass


class InvalidSizes(ValueError):
    pass


class SizeMismatch(ValueError):
    pass


def _check_order(n):
    if int(n) != n or n < 1:
        raise InvalidOrder(f"polynomial order must be an integer >= 1, got {n}")
    return int(n)


def cgl_nodes(n: int) -> np.ndarray:
    n = _check_order(n)
    x = np.cos(np.pi * np.arange(n + 1) / n)
    # exact symmetry: cos(pi/2) is 6e-17 in floating point
    x = 0.5 * (x - x[::-1])
    return x


def diff_matrix(n: int) -> np.ndarray:
    """
    Chebyshev collocation differentiation matrix of order ``n``.

    Off-diagonal entries are (c_i/c_j)(-1)^(i+j)/(x_i - x_j) for every i != j,
    with c_0 = c_N = 2. Node differences use the trigonometric identity
    x_i - x_j = 2 sin(pi(i+j)/2N) sin(pi(j-i)/2N) to avoid cancellation.
    Interior diagonal entries come from the zero row-sum condition; the two
    corners are set to +-(2N²+1)/6.
    """
    n = _check_order(n)
    i = np.arange(n + 1)
    c = np.ones(n + 1)
    c[0] = c[-1] = 2.0
    I, J = np.meshgrid(i, i, indexing="ij")
    dx = 2.0 * np.sin(np.pi * (I + J) / (2 * n)) * np.sin(np.pi * (J - I) / (2 * n))
    np.fill_diagonal(dx, 1.0)
    sign = np.where((I + J) % 2 == 0, 1.0, -1.0)
    D = np.outer(c, 1.0 / c) * sign / dx
    np.fill_diagonal(D, 0.0)
    D[np.diag_indices(n + 1)] = -D.sum(axis=1)
    corner = (2.0 * n * n + 1.0) / 6.0
    D[0, 0] = corner
    D[n, n] = -corner
    return D


def quad_weights(n: int) -> np.ndarray:
    """Clenshaw-Curtis weights on the CGL nodes; exact up to degree ``n``."""
    n = _check_order(n)
    theta = np.pi * np.arange(n + 1) / n
    w = np.zeros(n + 1)
    inner = theta[1:-1]
    v = np.ones(n - 1)
    if n % 2 == 0:
        w[0] = w[n] = 1.0 / (n * n - 1)
        for k in range(1, n // 2):
            v -= 2.0 * np.cos(2 * k * inner) / (4 * k * k - 1)
        v -= np.cos(n * inner) / (n * n - 1)
    else:
        w[0] = w[n] = 1.0 / (n * n)
        for k in range(1, (n - 1) // 2 + 1):
            v -= 2.0 * np.cos(2 * k * inner) / (4 * k * k - 1)
    w[1:-1] = 2.0 * v / n
    return w


def cardinal_matrix(source_nodes, eval_points) -> np.ndarray:
    """
    Lagrange cardinal functions of ``source_nodes`` evaluated at ``eval_points``.

    Entry (i, j) is xi_j(eval_points[i]); computed with the barycentric formula.
    """
    xs = np.asarray(source_nodes, dtype=float)
    xe = np.atleast_1d(np.asarray(eval_points, dtype=float))
    diff = xs[:, None] - xs[None, :]
    np.fill_diagonal(diff, 1.0)
    if np.any(diff == 0.0):
        raise DuplicateNodes("source nodes must be distinct")
    bw = 1.0 / np.prod(diff, axis=1)

    d = xe[:, None] - xs[None, :]
    hit = d == 0.0
    d[hit] = 1.0
    terms = bw[None, :] / d
    M = terms / terms.sum(axis=1, keepdims=True)
    rows = hit.any(axis=1)
    M[rows] = hit[rows].astype(float)
    return M


@dataclass(frozen=True)
class SpectralOperators:
    n: int
    nodes: np.ndarray
    diff: np.ndarray
    quad: np.ndarray

    @classmethod
    def build(cls, n: int) -> "SpectralOperators":
        return spectral_operators(n)


@lru_cache(maxsize=None)
def spectral_operators(n: int) -> SpectralOperators:
    ops = SpectralOperators(n=n, nodes=cgl_nodes(n), diff=diff_matrix(n), quad=quad_weights(n))
    for a in (ops.nodes, ops.diff, ops.quad):
        a.setflags(write=False)
    return ops


@dataclass(frozen=True)
class FilterPair:
    """
    Least-squares restriction to a sparse CGL grid and interpolation back.

    ``filter = prolong @ restrict`` projects fine-grid samples onto
    polynomials of degree ``n_sparse - 1``.
    """
    restrict: np.ndarray
    prolong: np.ndarray
    filter: np.ndarray

    @property
    def n_fine(self) -> int:
        return self.prolong.shape[0]

    @property
    def n_sparse(self) -> int:
        return self.prolong.shape[1]

    def apply(self, values: np.ndarray, dims: int = 1) -> np.ndarray:
        """Filter along the last axis, or the last two axes as a tensor product."""
        F = self.filter
        if dims == 2:
            return F @ values @ F.T
        return values @ F.T


def filter_pair(n_fine: int, n_sparse: int) -> FilterPair:
    """Build the smoothing filter; sizes are node counts, not orders."""
    if n_sparse < 2 or n_fine < 2 or n_sparse >= n_fine:
        raise InvalidSizes(f"need 2 <= n_sparse < n_fine, got n_sparse={n_sparse}, n_fine={n_fine}")
    prolong = cardinal_matrix(cgl_nodes(n_sparse - 1), cgl_nodes(n_fine - 1))
    Q, R = scipy.linalg.qr(prolong, mode="economic")
    restrict = scipy.linalg.solve_triangular(R, Q.T)
    return FilterPair(restrict=restrict, prolong=prolong, filter=prolong @ restrict)


def grid_transfer_2d(field, m_from: int, m_to: int) -> np.ndarray:
    """Tensor-product Chebyshev interpolation from an order-m_from grid to order m_to."""
    field = np.asarray(field, dtype=float)
    if field.shape[-2:] != (m_from + 1, m_from + 1):
        raise SizeMismatch(f"field shape {field.shape} does not match order {m_from}")
    if m_from == m_to:
        return field.copy()
    T = cardinal_matrix(cgl_nodes(m_from), cgl_nodes(m_to))
    return T @ field @ T.T

