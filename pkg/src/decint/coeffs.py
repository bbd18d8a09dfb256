"""Subtimenode distributions and the quadrature/interpolation coefficients built on them.

Everything in this module is plain polynomial machinery on the reference
interval [0, 1]: node families, Lagrange basis evaluation, per-node and
per-panel quadrature weights, and interpolation (resampling) matrices
between node sets.  All downstream integrators consume these objects.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import InvalidOrderError, InvalidParameterError, SingularBasisError

__all__ = [
    "NodeFamily",
    "NodeSet",
    "DecCoefficients",
    "make_nodes",
    "make_coefficients",
    "make_interp_matrix",
    "lagrange_values",
    "lagrange_derivatives",
]


class NodeFamily(Enum):
    EQUISPACED = "equispaced"
    GAUSS_LOBATTO = "gauss_lobatto"


@dataclass(frozen=True)
class NodeSet:
    """Ordered normalized subtimenodes on [0, 1], endpoints included."""

    family: NodeFamily
    nodes: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        if nodes.ndim != 1 or nodes.size < 2:
            raise InvalidOrderError("a node set needs at least two nodes")
        if nodes[0] != 0.0 or nodes[-1] != 1.0 or np.any(np.diff(nodes) <= 0):
            raise ValueError("nodes must increase strictly from 0 to 1")

    @property
    def subintervals(self) -> int:
        return self.nodes.size - 1

    def times(self, t_start: float, dt: float) -> np.ndarray:
        """Physical times of the nodes inside the step [t_start, t_start+dt]."""
        return t_start + dt * self.nodes


@dataclass(frozen=True)
class DecCoefficients:
    """Quadrature weights attached to one node set.

    ``quad_full[m, l]`` approximates the integral of the l-th Lagrange basis
    polynomial over [0, nodes[m]]; ``quad_panel[m, l]`` over
    [nodes[m-1], nodes[m]].  Row 0 of both matrices is zero.  ``spacings[m]``
    is nodes[m] - nodes[m-1] (zero for m = 0).  Since the integrands are
    polynomials of degree <= M, the Gauss rule used in assembly is exact and
    "approximates" means "up to roundoff".
    """

    node_set: NodeSet
    quad_full: np.ndarray
    quad_panel: np.ndarray
    spacings: np.ndarray

    @property
    def nodes(self) -> np.ndarray:
        return self.node_set.nodes

    @property
    def subintervals(self) -> int:
        return self.node_set.subintervals


def _as_node_array(nodes) -> np.ndarray:
    if isinstance(nodes, NodeSet):
        return nodes.nodes
    return np.asarray(nodes, dtype=float)


def lagrange_values(nodes, x) -> np.ndarray:
    """Evaluate all Lagrange basis polynomials of ``nodes`` at points ``x``.

    Returns an array of shape (len(x), len(nodes)); entry [i, j] is the
    j-th basis polynomial at x[i].  Exact ones/zeros are produced when an
    evaluation point coincides bitwise with a node.
    """
    nodes = _as_node_array(nodes)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    n = nodes.size
    if np.unique(nodes).size != n:
        raise SingularBasisError("duplicate interpolation nodes")
    vals = np.ones((x.size, n))
    for j in range(n):
        for k in range(n):
            if k != j:
                vals[:, j] *= (x - nodes[k]) / (nodes[j] - nodes[k])
    return vals


def lagrange_derivatives(nodes, x) -> np.ndarray:
    """First derivatives of all Lagrange basis polynomials at points ``x``.

    Shape (len(x), len(nodes)).  Uses the expanded product-rule form, which
    is stable for the small node counts used here and exact at the nodes.
    """
    nodes = _as_node_array(nodes)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    n = nodes.size
    if np.unique(nodes).size != n:
        raise SingularBasisError("duplicate interpolation nodes")
    out = np.zeros((x.size, n))
    for j in range(n):
        denom = 1.0
        for k in range(n):
            if k != j:
                denom *= nodes[j] - nodes[k]
        for k in range(n):
            if k == j:
                continue
            term = np.ones(x.size)
            for l in range(n):
                if l != j and l != k:
                    term *= x - nodes[l]
            out[:, j] += term
        out[:, j] /= denom
    return out


def _legendre_and_derivative(degree: int, x: np.ndarray):
    """Legendre polynomial of given degree and its derivative, on [-1, 1]."""
    p_prev = np.ones_like(x)
    p = x.copy()
    if degree == 0:
        return p_prev, np.zeros_like(x)
    for k in range(1, degree):
        p, p_prev = ((2 * k + 1) * x * p - k * p_prev) / (k + 1), p
    dp = degree * (x * p - p_prev) / (x * x - 1.0)
    return p, dp


def _gauss_lobatto_nodes(subintervals: int) -> np.ndarray:
    """Gauss-Lobatto nodes on [0, 1]: endpoints plus the extrema of the
    degree-``subintervals`` Legendre polynomial.

    Interior nodes are found by Newton iteration on the Legendre-derivative
    recurrence, seeded with Chebyshev-Lobatto estimates (tolerance 1e-15,
    at most 100 iterations).
    """
    m = subintervals
    if m == 1:
        return np.array([0.0, 1.0])
    k = np.arange(1, m)
    x = np.cos(np.pi * k / m)  # descending seeds on (-1, 1)
    for _ in range(100):
        p, dp = _legendre_and_derivative(m, x)
        # second derivative from the Legendre differential equation
        d2p = (2.0 * x * dp - m * (m + 1) * p) / (1.0 - x * x)
        step = dp / d2p
        x = x - step
        if np.max(np.abs(step)) <= 1e-15:
            break
    interior = np.sort((x + 1.0) / 2.0)
    nodes = np.concatenate(([0.0], interior, [1.0]))
    # symmetrize to kill the last ulp of asymmetry from the seeds
    return (nodes + (1.0 - nodes[::-1])) / 2.0


def make_nodes(family: NodeFamily, subintervals: int) -> NodeSet:
    """Build the node set with ``subintervals`` panels (so subintervals+1 nodes)."""
    if not isinstance(subintervals, (int, np.integer)) or subintervals < 1:
        raise InvalidOrderError(
            f"subinterval count must be a positive integer, got {subintervals!r}")
    if family == NodeFamily.EQUISPACED:
        nodes = np.arange(subintervals + 1, dtype=float) / subintervals
    elif family == NodeFamily.GAUSS_LOBATTO:
        nodes = _gauss_lobatto_nodes(subintervals)
    else:
        raise InvalidParameterError(f"unknown node family {family!r}")
    return NodeSet(family, nodes)


def make_coefficients(node_set: NodeSet) -> DecCoefficients:
    """Assemble the per-panel and cumulative quadrature weight matrices.

    Each panel integral uses a Gauss-Legendre rule with M+1 points (exact
    for polynomial degree 2M+1, far beyond the degree-M integrands), and the
    cumulative matrix is the running sum of the panel rows, which keeps the
    telescoping identity between the two matrices exact in floating point.
    """
    nodes = node_set.nodes
    m_count = node_set.subintervals
    gq_x, gq_w = np.polynomial.legendre.leggauss(m_count + 1)
    n = m_count + 1
    panel = np.zeros((n, n))
    for m in range(1, n):
        a, b = nodes[m - 1], nodes[m]
        half = (b - a) / 2.0
        pts = a + half * (gq_x + 1.0)
        panel[m] = half * (gq_w @ lagrange_values(nodes, pts))
    full = np.cumsum(panel, axis=0)
    spacings = np.concatenate(([0.0], np.diff(nodes)))
    for arr in (panel, full, spacings):
        arr.setflags(write=False)
    return DecCoefficients(node_set, full, panel, spacings)


def make_interp_matrix(from_nodes, to_nodes) -> np.ndarray:
    """Resampling matrix H with H[i, j] = (j-th basis of from_nodes)(to_nodes[i]).

    Multiplying H onto values sampled at ``from_nodes`` evaluates their
    polynomial interpolant at ``to_nodes``.  Rows at shared nodes come out
    as exact unit rows.
    """
    src = _as_node_array(from_nodes)
    dst = _as_node_array(to_nodes)
    if src.size < 2:
        raise SingularBasisError("need at least two source nodes")
    return lagrange_values(src, dst)
