"""Complex Hermite-function basis xi_n(k) = i^n psi_n(k).

psi_n is the orthonormal Hermite function, generated by the normalized
three-term recurrence

    psi_{n+1} = k sqrt(2/(n+1)) psi_n - sqrt(n/(n+1)) psi_{n-1}

Raw H_n, 2^{n/2} and sqrt(n!) never appear.  The recurrence is run on a
rescaled copy with a tracked log-scale, so the Gaussian prefactor
exp(-k^2/2) is applied once at the end; values underflow to 0 only when the
true value is below the smallest double.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .quadrature import QuadratureRule, gauss_legendre

_LOG_PI_QUARTER = -0.25 * math.log(math.pi)
_RESCALE = 1e150


def hermite_functions(n_max: int, k, gaussian: bool = True) -> np.ndarray:
    """Real orthonormal Hermite functions psi_0..psi_{n_max} at k.

    Returns an array of shape ``(n_max + 1,) + np.shape(k)``.  With
    ``gaussian=False`` the exp(-k^2/2) factor is omitted (orthonormal
    polynomials for the weight e^{-k^2}).
    """
    if n_max < 0:
        raise ValueError(f"n_max must be non-negative, got {n_max}")
    k = np.asarray(k, dtype=float)
    shape = k.shape
    x = k.ravel()
    out = np.empty((n_max + 1, x.size))
    log_scale = np.full(x.size, _LOG_PI_QUARTER)
    if gaussian:
        log_scale -= 0.5 * x * x
    prev = np.zeros(x.size)
    cur = np.ones(x.size)
    scale_at = np.empty((n_max + 1, x.size))
    out[0] = cur
    scale_at[0] = log_scale
    for n in range(n_max):
        nxt = math.sqrt(2.0 / (n + 1)) * x * cur - math.sqrt(n / (n + 1)) * prev
        prev, cur = cur, nxt
        big = np.abs(cur) > _RESCALE
        if big.any():
            prev = np.where(big, prev / _RESCALE, prev)
            cur = np.where(big, cur / _RESCALE, cur)
            log_scale = np.where(big, log_scale + math.log(_RESCALE), log_scale)
        out[n + 1] = cur
        scale_at[n + 1] = log_scale
    with np.errstate(under="ignore", divide="ignore"):
        out = np.sign(out) * np.exp(np.log(np.abs(out)) + scale_at)
    return out.reshape((n_max + 1,) + shape)


def apply_phase(psi: np.ndarray, n: np.ndarray | int) -> np.ndarray:
    """Multiply psi_n by i^n using exact quarter turns."""
    psi = np.asarray(psi, dtype=float)
    quarter = np.asarray(n) % 4
    re = np.where(quarter == 0, psi, np.where(quarter == 2, -psi, 0.0))
    im = np.where(quarter == 1, psi, np.where(quarter == 3, -psi, 0.0))
    return re + 1j * im


def xi_table(n_max: int, k, gaussian: bool = True) -> np.ndarray:
    """xi_0..xi_{n_max} at k, shape ``(n_max + 1,) + np.shape(k)``."""
    psi = hermite_functions(n_max, k, gaussian=gaussian)
    n = np.arange(n_max + 1).reshape((-1,) + (1,) * np.ndim(k))
    return apply_phase(psi, n)


def xi(n: int, k: float) -> complex:
    """Single value of xi_n(k)."""
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    if not math.isfinite(k):
        raise ValueError(f"k must be finite, got {k}")
    return complex(xi_table(n, float(k))[n])


@dataclass(frozen=True)
class XiBatch:
    """xi_0(k)..xi_{n_max}(k) at one momentum."""

    n_max: int
    k: float
    values: np.ndarray = field(repr=False)

    def __getitem__(self, n):
        return self.values[n]


def xi_batch(n_max: int, k: float) -> XiBatch:
    values = xi_table(n_max, float(k))
    values.setflags(write=False)
    return XiBatch(n_max, float(k), values)


@dataclass(frozen=True)
class OrthonormalityReport:
    matrix: np.ndarray = field(repr=False)
    max_deviation: float
    order: int
    kind: str
    warning: str | None = None

    def as_dict(self):
        return {
            "n_max": self.matrix.shape[0] - 1,
            "kind": self.kind,
            "order": self.order,
            "max_deviation": self.max_deviation,
            "warning": self.warning,
        }


def orthonormality_matrix(n_max: int, rule: QuadratureRule) -> OrthonormalityReport:
    """Gram matrix G[m, n] = int conj(xi_m) xi_n dk under ``rule``."""
    warning = None
    if rule.kind == "gauss-hermite":
        # e^{-k^2} is carried by the rule weights
        vals = xi_table(n_max, rule.nodes, gaussian=False)
        if rule.order < n_max + 1:
            warning = (
                f"gauss-hermite order {rule.order} < n_max+1 = {n_max + 1}: "
                "products up to degree 2*n_max are not integrated exactly"
            )
    else:
        vals = xi_table(n_max, rule.nodes)
        warning = "gauss-legendre rule: orthonormality holds only up to truncation and resolution error"
    gram = (vals.conj() * rule.weights) @ vals.T
    deviation = float(np.max(np.abs(gram - np.eye(n_max + 1))))
    if warning and rule.kind == "gauss-hermite":
        warnings.warn(warning, RuntimeWarning, stacklevel=2)
    return OrthonormalityReport(gram, deviation, rule.order, rule.kind, warning)


def completeness_kernel(n_cut: int, k: float, k_hat: float) -> complex:
    """Partial sum over n < n_cut of conj(xi_n(k)) xi_n(k_hat)."""
    if n_cut < 1:
        raise ValueError(f"n_cut must be >= 1, got {n_cut}")
    a = xi_table(n_cut - 1, float(k))
    b = xi_table(n_cut - 1, float(k_hat))
    return complex(np.sum(a.conj() * b))


def kernel_matrix(n_cut: int, k, k_hat) -> np.ndarray:
    """completeness_kernel on the grid k x k_hat."""
    a = xi_table(n_cut - 1, np.asarray(k, dtype=float))
    b = xi_table(n_cut - 1, np.asarray(k_hat, dtype=float))
    return a.conj().T @ b


def default_smearing_rule(order: int = 320, K: float = 12.0) -> QuadratureRule:
    return gauss_legendre(order, -K, K)


def project(n_cut: int, g: Callable[[np.ndarray], np.ndarray], k, rule: QuadratureRule | None = None):
    """int K_{n_cut}(k, k_hat) g(k_hat) dk_hat, the truncated expansion of g at k."""
    rule = rule or default_smearing_rule()
    kern = kernel_matrix(n_cut, np.atleast_1d(k), rule.nodes)
    out = kern @ (rule.weights * g(rule.nodes))
    return out if np.ndim(k) else complex(out[0])


def smeared_completeness(n_cut: int, g: Callable[[np.ndarray], np.ndarray], rule: QuadratureRule | None = None):
    """Return (reproduced, reference) for the double integral of g K g.

    ``reproduced`` is int int conj(g(k)) K(k, k_hat) g(k_hat) dk dk_hat, which
    equals sum_{n<n_cut} |<xi_n, g>|^2; ``reference`` is int |g|^2.  The sum
    is accumulated term by term so it is non-decreasing in n_cut.
    """
    rule = rule or default_smearing_rule()
    gv = g(rule.nodes)
    coeffs = xi_table(n_cut - 1, rule.nodes).conj() @ (rule.weights * gv)
    reproduced = 0.0
    for c in np.abs(coeffs) ** 2:
        reproduced += c
    reference = float(np.sum(rule.weights * np.abs(gv) ** 2))
    return float(reproduced), reference


@dataclass(frozen=True)
class CompletenessReport:
    """Truncation error of the smeared completeness relation.

    ``tail[i]`` is sum_{n_cuts[i] <= n < n_closure} |<xi_n, g>|^2, the amount
    of ||g||^2 missed by the first n_cuts[i] terms.  ``closure_defect`` is
    ||g||^2 - sum_{n < n_closure} |<xi_n, g>|^2, which measures completeness
    itself and should sit at rounding level.
    """

    n_cuts: tuple
    tail: tuple
    closure_defect: float
    n_closure: int
    reference: float

    def as_dict(self):
        return {
            "n_cuts": list(self.n_cuts),
            "tail": list(self.tail),
            "closure_defect": self.closure_defect,
            "n_closure": self.n_closure,
            "reference": self.reference,
        }


def completeness_errors(n_cuts, g, rule: QuadratureRule | None = None, n_closure: int | None = None):
    rule = rule or default_smearing_rule()
    n_cuts = tuple(int(n) for n in n_cuts)
    if min(n_cuts) < 1:
        raise ValueError("n_cut values must be >= 1")
    n_closure = n_closure or 2 * max(n_cuts)
    if n_closure < max(n_cuts):
        raise ValueError(f"n_closure={n_closure} is below the largest n_cut")
    gv = g(rule.nodes)
    power = np.abs(xi_table(n_closure - 1, rule.nodes).conj() @ (rule.weights * gv)) ** 2
    # suffix sums from the smallest terms up keep the tail monotone in n_cut
    suffix = np.cumsum(power[::-1])[::-1]
    tail = tuple(float(suffix[n]) if n < n_closure else 0.0 for n in n_cuts)
    reference = float(np.sum(rule.weights * np.abs(gv) ** 2))
    return CompletenessReport(n_cuts, tail, reference - float(suffix[0]), n_closure, reference)
