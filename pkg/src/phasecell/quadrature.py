"""Gauss-Hermite / Gauss-Legendre rules and tensor-product integration.

Nodes come from the symmetric tridiagonal Jacobi matrix (Golub-Welsch),
polished by a few Newton steps on the three-term recurrence.  Weights are
then recomputed from the Christoffel function so that the tiny weights at
the edge of a Hermite rule keep full relative accuracy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import erfc

# exp(-x^2) at the outermost node underflows past this order
MAX_HERMITE_ORDER = 300

DEFAULT_BOX = 8.0


@dataclass(frozen=True)
class QuadratureRule:
    """A one-dimensional quadrature rule.

    For ``kind == "gauss-hermite"`` the weight function e^{-k^2} is implicit:
    ``sum(w * f(x))`` approximates ``int f(k) exp(-k^2) dk``.  For
    ``"gauss-legendre"`` the sum approximates ``int_a^b f(k) dk``.
    """

    kind: str
    order: int
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    interval: tuple[float, float] | None = None

    def __post_init__(self):
        if self.kind not in ("gauss-hermite", "gauss-legendre"):
            raise ValueError(f"unknown quadrature kind {self.kind!r}")
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if nodes.shape != weights.shape or nodes.ndim != 1:
            raise ValueError("nodes and weights must be 1-D arrays of equal length")
        nodes.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    def __len__(self):
        return self.nodes.size

    @property
    def symmetric(self) -> bool:
        return bool(np.array_equal(self.nodes, -self.nodes[::-1]))

    def integrate(self, f: Callable[[np.ndarray], np.ndarray]) -> complex | float:
        values = self.weights * np.broadcast_to(f(self.nodes), self.nodes.shape)
        return _fold_sum(values, 0) if self.symmetric else np.sum(values)


def _check_order(order) -> int:
    if isinstance(order, bool) or int(order) != order or order < 1:
        raise ValueError(f"quadrature order must be a positive integer, got {order!r}")
    return int(order)


def _symmetrize(nodes: np.ndarray, weights: np.ndarray):
    # Enforce exact mirror symmetry about 0 so odd integrands cancel pairwise.
    nodes = 0.5 * (nodes - nodes[::-1])
    weights = 0.5 * (weights + weights[::-1])
    if nodes.size % 2:
        nodes[nodes.size // 2] = 0.0
    return nodes, weights


def _hermite_functions_upto(order: int, x: np.ndarray) -> np.ndarray:
    """Orthonormal Hermite *polynomials* p_0..p_order at x (no Gaussian factor)."""
    p = np.empty((order + 1, x.size))
    p[0] = math.pi ** -0.25
    if order >= 1:
        p[1] = math.sqrt(2.0) * x * p[0]
    for n in range(1, order):
        p[n + 1] = math.sqrt(2.0 / (n + 1)) * x * p[n] - math.sqrt(n / (n + 1)) * p[n - 1]
    return p


def gauss_hermite(order: int) -> QuadratureRule:
    """Gauss-Hermite rule for the weight e^{-k^2} on the real line."""
    order = _check_order(order)
    if order > MAX_HERMITE_ORDER:
        raise ValueError(
            f"gauss-hermite order {order} exceeds {MAX_HERMITE_ORDER}: outer weights underflow"
        )
    if order == 1:
        return QuadratureRule("gauss-hermite", 1, np.array([0.0]), np.array([math.sqrt(math.pi)]))

    off = np.sqrt(np.arange(1, order) / 2.0)
    x = eigh_tridiagonal(np.zeros(order), off, eigvals_only=True)
    # Newton on p_Q, with p_Q' = sqrt(2Q) p_{Q-1}
    for _ in range(3):
        p = _hermite_functions_upto(order, x)
        x = x - p[order] / (math.sqrt(2.0 * order) * p[order - 1])
    p = _hermite_functions_upto(order - 1, x)
    # Christoffel weights: w_i = 1 / sum_n p_n(x_i)^2
    w = 1.0 / np.sum(p * p, axis=0)
    x, w = _symmetrize(np.sort(x), w[np.argsort(x)])
    return QuadratureRule("gauss-hermite", order, x, w)


def _legendre_reference(order: int):
    if order == 1:
        return np.array([0.0]), np.array([2.0])
    k = np.arange(1, order)
    off = k / np.sqrt(4.0 * k * k - 1.0)
    x = eigh_tridiagonal(np.zeros(order), off, eigvals_only=True)
    for _ in range(3):
        p_prev, p = np.ones_like(x), x.copy()
        for n in range(1, order):
            p_prev, p = p, ((2 * n + 1) * x * p - n * p_prev) / (n + 1)
        dp = order * (x * p - p_prev) / (x * x - 1.0)
        x = x - p / dp
    p_prev, p = np.ones_like(x), x.copy()
    for n in range(1, order):
        p_prev, p = p, ((2 * n + 1) * x * p - n * p_prev) / (n + 1)
    dp = order * (x * p - p_prev) / (x * x - 1.0)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    order_idx = np.argsort(x)
    return _symmetrize(x[order_idx], w[order_idx])


def gauss_legendre(order: int, a: float = -1.0, b: float = 1.0) -> QuadratureRule:
    """Gauss-Legendre rule on the finite interval [a, b]."""
    order = _check_order(order)
    a, b = float(a), float(b)
    if not a < b:
        raise ValueError(f"gauss-legendre needs a < b, got [{a}, {b}]")
    x, w = _legendre_reference(order)
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    return QuadratureRule("gauss-legendre", order, half * x + mid, half * w, (a, b))


def composite_legendre(order: int, breakpoints: Sequence[float]) -> QuadratureRule:
    """Gauss-Legendre of the given order on every panel between sorted breakpoints.

    Panels are mapped from the reference rule so that mirror-image panels get
    mirror-image nodes bitwise.
    """
    order = _check_order(order)
    bp = np.unique(np.asarray(breakpoints, dtype=float))
    if bp.size < 2:
        raise ValueError("composite rule needs at least two distinct breakpoints")
    x, w = _legendre_reference(order)
    nodes, weights = [], []
    for a, b in zip(bp[:-1], bp[1:]):
        half = 0.5 * (b - a)
        mid = 0.5 * (a + b)
        nodes.append(half * x + mid)
        weights.append(half * w)
    return QuadratureRule(
        "gauss-legendre", order, np.concatenate(nodes), np.concatenate(weights),
        (float(bp[0]), float(bp[-1])),
    )


def box_rule(order: int = 64, K: float = DEFAULT_BOX, breakpoints: Sequence[float] = (0.0,)) -> QuadratureRule:
    """Composite Legendre on [-K, K] with extra panel edges (0 by default, where |k| kinks)."""
    if not K > 0:
        raise ValueError(f"truncation K must be positive, got {K}")
    inner = [p for p in breakpoints if -K < p < K]
    return composite_legendre(order, [-K, *inner, K])


def gaussian_tail(K: float, center: float = 0.0, width: float = 1.0) -> float:
    """Mass of exp(-((k - center)/width)^2) outside [-K, K]."""
    lo = (K + center) / width
    hi = (K - center) / width
    return 0.5 * math.sqrt(math.pi) * width * float(erfc(lo) + erfc(hi))


def _fold_sum(values: np.ndarray, axis: int):
    """Sum along ``axis`` pairing mirror-image nodes first.

    For a rule symmetric about 0 an odd integrand then cancels exactly.
    """
    values = np.moveaxis(values, axis, 0)
    half = values.shape[0] // 2
    paired = values[:half] + values[::-1][:half]
    total = np.sum(paired, axis=0)
    if values.shape[0] % 2:
        total = total + values[half]
    return total


def integrate_nd(f: Callable[..., np.ndarray], rules: Sequence[QuadratureRule], vectorized: bool = True):
    """Tensor-product quadrature of ``f(k_1, ..., k_d)``.

    With ``vectorized=True`` f receives d broadcastable arrays (``indexing="ij"``);
    otherwise it is called once per node tuple in lexicographic order.
    """
    if len(rules) == 0:
        raise ValueError("integrate_nd needs at least one rule")
    grids = np.meshgrid(*[r.nodes for r in rules], indexing="ij", sparse=True)
    weight = np.ones((1,) * len(rules))
    for r, g in zip(rules, np.meshgrid(*[r.weights for r in rules], indexing="ij", sparse=True)):
        weight = weight * g
    if vectorized:
        values = np.broadcast_to(f(*grids), weight.shape)
    else:
        values = np.empty(weight.shape, dtype=complex)
        for idx in np.ndindex(weight.shape):
            values[idx] = f(*(r.nodes[i] for r, i in zip(rules, idx)))
        if not np.any(values.imag):
            values = values.real
    # fixed reduction order: last axis first, mirror pairs folded on symmetric axes
    total = weight * values
    for axis in reversed(range(len(rules))):
        total = _fold_sum(total, axis) if rules[axis].symmetric else np.sum(total, axis=axis)
    return total[()] if isinstance(total, np.ndarray) else total
