"""Mode solutions, Fourier-Hermite synthesis and observables of the
difference-differential Klein-Gordon equation

    [ sum_a D#_a D#_a - d^2/dt^2 - m^2 ] Phi(n; t) = 0

on the lattice {0..n_max}^d with continuous time.  Creation/annihilation
operators are replaced by c-number densities: complex amplitudes a(k), b(k)
for synthesis and non-negative occupations N+(k), N-(k) for observables.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import erfc

from . import discrete_ops
from .hermite import smeared_completeness, xi_table
from .quadrature import DEFAULT_BOX, QuadratureRule, box_rule, gauss_hermite, gauss_legendre, integrate_nd

log = logging.getLogger(__name__)

FAMILIES = ("gaussian", "box", "zero")
ROLES = ("A", "B", "Nplus", "Nminus")


class DegenerateModeError(ValueError):
    """omega = 0 (massless mode at k = 0) where 1/sqrt(2 omega) is needed."""


def omega(m: float, k) -> float:
    """Positive root sqrt(|k|^2 + m^2)."""
    if m < 0:
        raise ValueError(f"mass must be non-negative, got {m}")
    k = np.atleast_1d(np.asarray(k, dtype=float))
    return math.sqrt(float(np.dot(k, k)) + m * m)


def _mode_omega(m, k):
    w = omega(m, k)
    if w == 0.0:
        raise DegenerateModeError("zero-frequency mode (m = 0, k = 0) has no 1/sqrt(2 omega) normalization")
    return w


def mode_field(site: Sequence[int], k, m: float, t: float, sign: str = "-") -> complex:
    """Single-mode solution at lattice ``site``.

    sign '-':  prod_a xi_{n^a}(k_a) e^{-i w t} / sqrt(2 w)
    sign '+':  prod_a conj(xi_{n^a}(k_a)) e^{+i w t} / sqrt(2 w)
    """
    if sign not in "+-" or len(sign) != 1:
        raise ValueError(f"sign must be '+' or '-', got {sign!r}")
    k = np.atleast_1d(np.asarray(k, dtype=float))
    site = tuple(int(s) for s in np.atleast_1d(site))
    if len(site) != k.size:
        raise ValueError(f"site has {len(site)} coordinates but k has {k.size}")
    w = _mode_omega(m, k)
    value = 1.0 + 0j
    for n, ka in zip(site, k):
        value *= xi_table(n, ka)[n]
    if sign == "+":
        value = value.conjugate()
    phase = np.exp(-1j * w * t) if sign == "-" else np.exp(1j * w * t)
    return complex(value * phase / math.sqrt(2.0 * w))


def mode_normalization(m: float, k) -> float:
    return 1.0 / math.sqrt(2.0 * _mode_omega(m, k))


# ---------------------------------------------------------------------------
# densities


def _parse_amplitude(value) -> complex:
    if isinstance(value, dict):
        return complex(value.get("re", 0.0), value.get("im", 0.0))
    if isinstance(value, (list, tuple)):
        re, im = value
        return complex(re, im)
    return complex(value)


@dataclass(frozen=True)
class SpectralDensity:
    """Axis-separable momentum density.

    gaussian: amplitude * prod_a exp(-((k_a - center_a) / width_a)^2)
    box:      amplitude * prod_a [|k_a - center_a| <= width_a]
    zero:     0
    """

    family: str = "zero"
    center: tuple = (0.0,)
    width: tuple = (1.0,)
    amplitude: complex = 1.0
    role: str = "A"

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"density family must be one of {FAMILIES}, got {self.family!r}")
        if self.role not in ROLES:
            raise ValueError(f"density role must be one of {ROLES}, got {self.role!r}")
        center = tuple(float(c) for c in np.atleast_1d(self.center))
        width = tuple(float(w) for w in np.atleast_1d(self.width))
        if self.family != "zero" and any(not w > 0 for w in width):
            raise ValueError("density widths must be positive")
        amplitude = complex(self.amplitude)
        if self.role.startswith("N") and (amplitude.imag != 0 or amplitude.real < 0):
            raise ValueError(f"occupation density {self.role} needs a real non-negative amplitude")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "width", width)
        object.__setattr__(self, "amplitude", amplitude)

    @classmethod
    def from_dict(cls, data: dict | None, role: str) -> "SpectralDensity":
        if not data:
            return cls("zero", role=role)
        params = data.get("params", {})
        return cls(
            family=data.get("family", "zero"),
            center=params.get("center", 0.0),
            width=params.get("width", 1.0),
            amplitude=_parse_amplitude(params.get("amplitude", 1.0)),
            role=role,
        )

    def to_dict(self) -> dict:
        amp = self.amplitude
        return {
            "family": self.family,
            "params": {
                "center": list(self.center),
                "width": list(self.width),
                "amplitude": amp.real if amp.imag == 0 else [amp.real, amp.imag],
            },
        }

    def _axis(self, values, a):
        return values[a] if len(values) > 1 else values[0]

    @property
    def is_real(self) -> bool:
        return self.amplitude.imag == 0

    def __call__(self, *k):
        if self.family == "zero" or self.amplitude == 0:
            return np.zeros(np.broadcast_shapes(*(np.shape(x) for x in k)))
        out = 1.0
        for a, ka in enumerate(k):
            c, w = self._axis(self.center, a), self._axis(self.width, a)
            z = (np.asarray(ka) - c) / w
            out = out * (np.exp(-z * z) if self.family == "gaussian" else (np.abs(z) <= 1.0).astype(float))
        amp = self.amplitude.real if self.is_real else self.amplitude
        return amp * out

    def breakpoints(self, axis: int) -> list:
        if self.family != "box":
            return []
        c, w = self._axis(self.center, axis), self._axis(self.width, axis)
        return [c - w, c + w]

    def tail_mass(self, K: float, d: int) -> float:
        """Integral of |density| outside [-K, K]^d."""
        if self.family == "zero" or self.amplitude == 0:
            return 0.0
        full, log_kept = 1.0, 0.0
        for a in range(d):
            c, w = self._axis(self.center, a), self._axis(self.width, a)
            if self.family == "gaussian":
                total = math.sqrt(math.pi) * w
                lost = 0.5 * float(erfc((K - c) / w) + erfc((K + c) / w))
            else:
                total = 2 * w
                lost = 1.0 - max(0.0, min(K, c + w) - max(-K, c - w)) / total
            full *= total
            log_kept += math.log1p(-lost) if lost < 1.0 else -math.inf
        # full * (1 - prod(1 - lost_a)) without cancellation
        return abs(self.amplitude) * full * -math.expm1(log_kept)


Density = SpectralDensity | Callable[..., np.ndarray]


def zero_density(role: str = "A") -> SpectralDensity:
    return SpectralDensity("zero", role=role)


# ---------------------------------------------------------------------------
# quadrature configuration


@dataclass(frozen=True)
class QuadConfig:
    """Per-axis rule: composite Legendre on [-K, K] split at 0 and box edges,
    or Gauss-Hermite with the e^{-k^2} weight divided back out."""

    kind: str = "gauss-legendre"
    order: int = 64
    K: float = DEFAULT_BOX
    breakpoints: tuple = ()

    def __post_init__(self):
        if self.kind not in ("gauss-legendre", "gauss-hermite"):
            raise ValueError(f"quadrature kind must be gauss-legendre or gauss-hermite, got {self.kind!r}")
        object.__setattr__(self, "breakpoints", tuple(float(b) for b in self.breakpoints))

    @classmethod
    def from_dict(cls, data: dict | None) -> "QuadConfig":
        data = data or {}
        return cls(
            kind=data.get("kind", "gauss-legendre"),
            order=int(data.get("order", 64)),
            K=float(data.get("K", DEFAULT_BOX)),
            breakpoints=tuple(data.get("breakpoints", ())),
        )

    def to_dict(self):
        return {"kind": self.kind, "order": self.order, "K": self.K, "breakpoints": list(self.breakpoints)}

    def rules(self, d: int, densities: Sequence[Density] = ()) -> list[QuadratureRule]:
        if self.kind == "gauss-hermite":
            return [gauss_hermite(self.order)] * d
        rules = []
        for a in range(d):
            bps = {0.0, *self.breakpoints}
            for dens in densities:
                if isinstance(dens, SpectralDensity):
                    bps.update(dens.breakpoints(a))
            rules.append(box_rule(self.order, self.K, sorted(bps)))
        return rules

    def weight_correction(self, grids) -> np.ndarray | float:
        if self.kind != "gauss-hermite":
            return 1.0
        ksq = sum(g * g for g in grids)
        return np.exp(ksq)


def _grid(rules):
    grids = np.meshgrid(*[r.nodes for r in rules], indexing="ij", sparse=True)
    weights = np.ones((1,) * len(rules))
    for w in np.meshgrid(*[r.weights for r in rules], indexing="ij", sparse=True):
        weights = weights * w
    return grids, weights


def _omega_grid(grids, m):
    return np.sqrt(sum(g * g for g in grids) + m * m)


# ---------------------------------------------------------------------------
# synthesis


@dataclass(frozen=True)
class FieldLattice:
    d: int
    n_max: int
    t: float
    values: np.ndarray = field(repr=False)

    def to_lattice_field(self, extension=None) -> discrete_ops.LatticeField:
        return discrete_ops.LatticeField(self.values, extension)


def _contract(coef: np.ndarray, tables: Sequence[np.ndarray]) -> np.ndarray:
    # sum over k of coef[k_1..k_d] * prod_a tables[a][n_a, k_a]
    out = coef
    for table in tables:
        out = np.tensordot(out, table, axes=([0], [1]))
    return out


def synthesize(
    A: Density,
    B: Density,
    d: int,
    n_max: int,
    m: float,
    t: float,
    quad: QuadConfig | None = None,
    time_derivative: int = 0,
) -> FieldLattice:
    """Phi(n; t) = Phi^-(n; t) + Phi^+(n; t) by tensor-product quadrature.

    ``time_derivative`` p returns d^p Phi / dt^p, taken analytically under the
    integral ((-i w)^p for Phi^-, (+i w)^p for Phi^+).
    """
    quad = quad or QuadConfig()
    if d < 1 or n_max < 0:
        raise ValueError(f"need d >= 1 and n_max >= 0, got d={d}, n_max={n_max}")
    if m < 0:
        raise ValueError(f"mass must be non-negative, got {m}")
    rules = quad.rules(d, [A, B])
    grids, weights = _grid(rules)
    shape = weights.shape
    w = np.broadcast_to(_omega_grid(grids, m), shape)
    a = np.broadcast_to(A(*grids), shape)
    b = np.broadcast_to(B(*grids), shape)
    weights = weights * quad.weight_correction(grids)

    degenerate = w == 0.0
    if degenerate.any():
        if np.any(a[degenerate] != 0) or np.any(b[degenerate] != 0):
            raise DegenerateModeError("a quadrature node sits on the zero-frequency mode with non-zero amplitude")
        log.warning("skipping %d zero-frequency node(s) with vanishing amplitude", int(degenerate.sum()))
    safe_w = np.where(degenerate, 1.0, w)
    base = np.where(degenerate, 0.0, weights / np.sqrt(2.0 * safe_w))

    coef_minus = base * a * np.exp(-1j * safe_w * t) * (-1j * safe_w) ** time_derivative
    coef_plus = base * b * np.exp(1j * safe_w * t) * (1j * safe_w) ** time_derivative
    tables = [xi_table(n_max, r.nodes) for r in rules]
    values = _contract(coef_minus, tables) + _contract(coef_plus, [tab.conj() for tab in tables])
    return FieldLattice(d, n_max, float(t), values)


# ---------------------------------------------------------------------------
# residuals


def kg_residual_mode(site: Sequence[int], k, m: float, t: float, sign: str = "-") -> complex:
    """Residual of the field equation for one mode at ``site``.

    The spatial part uses the lattice operator with xi_{n+1}, xi_{n+2}
    evaluated on demand; d^2/dt^2 is the exact factor -w^2.
    """
    k = np.atleast_1d(np.asarray(k, dtype=float))
    site = tuple(int(s) for s in np.atleast_1d(site))
    if len(site) != k.size:
        raise ValueError(f"site has {len(site)} coordinates but k has {k.size}")
    w = _mode_omega(m, k)
    reach = max(site) + 2
    tables = [xi_table(reach, ka) for ka in k]
    if sign == "+":
        tables = [tab.conj() for tab in tables]
    phase = np.exp(-1j * w * t) if sign == "-" else np.exp(1j * w * t)
    norm = phase / math.sqrt(2.0 * w)

    def F(s):
        value = norm
        for n, tab in zip(s, tables):
            value = value * tab[n]
        return value

    here = F(site)
    return discrete_ops.laplacian_sharp(F, site) + w * w * here - m * m * here


def kg_residual_field(
    F_minus: FieldLattice, F_now: FieldLattice, F_plus: FieldLattice, m: float, delta: float
) -> np.ndarray:
    """Residual on the interior block {0..n_max-2}^d with a central time difference."""
    if not delta > 0:
        raise ValueError(f"time step must be positive, got {delta}")
    shapes = {F.values.shape for F in (F_minus, F_now, F_plus)}
    if len(shapes) != 1:
        raise ValueError(f"lattice shapes differ: {sorted(shapes)}")
    lap = discrete_ops.laplacian_sharp_array(F_now.values)
    interior = (slice(0, lap.shape[0]),) * F_now.d
    dtt = (F_plus.values - 2.0 * F_now.values + F_minus.values)[interior] / (delta * delta)
    return lap - dtt - m * m * F_now.values[interior]


def kg_residual_synth(A: Density, B: Density, d: int, n_max: int, m: float, t: float, quad: QuadConfig | None = None):
    """Residual of a synthesized field with d^2/dt^2 taken under the integral."""
    phi = synthesize(A, B, d, n_max, m, t, quad)
    phi_tt = synthesize(A, B, d, n_max, m, t, quad, time_derivative=2)
    lap = discrete_ops.laplacian_sharp_array(phi.values)
    interior = (slice(0, lap.shape[0]),) * d
    return lap - phi_tt.values[interior] - m * m * phi.values[interior]


# ---------------------------------------------------------------------------
# observables


@dataclass(frozen=True)
class Observables:
    H: float
    P: tuple
    Q: float
    truncation_tail: float = 0.0
    vacuum_term: str = "dropped"

    def as_dict(self):
        return {
            "H": self.H,
            "P": list(self.P),
            "Q": self.Q,
            "truncation_tail": self.truncation_tail,
            "vacuum_term": self.vacuum_term,
        }


def observables(Nplus: Density, Nminus: Density, m: float, d: int, quad: QuadConfig | None = None) -> Observables:
    """Energy, momentum and charge (e = 1) of occupation densities N+ and N-.

    The zero-point term delta(0) I(k) of the energy is dropped.
    """
    quad = quad or QuadConfig()
    if m < 0:
        raise ValueError(f"mass must be non-negative, got {m}")
    rules = quad.rules(d, [Nplus, Nminus])
    grids, _ = _grid(rules)
    corr = quad.weight_correction(grids)
    n_plus = np.real_if_close(np.asarray(Nplus(*grids)))
    n_minus = np.real_if_close(np.asarray(Nminus(*grids)))
    for name, arr in (("N+", n_plus), ("N-", n_minus)):
        if np.iscomplexobj(arr) or np.any(arr < 0):
            raise ValueError(f"occupation density {name} must be real and non-negative at every node")
    log.info("observables: zero-point term delta(0) I(k) dropped")

    total = lambda *k: (Nplus(*k) + Nminus(*k)) * corr  # noqa: E731
    H = integrate_nd(lambda *k: total(*k) * _omega_grid(k, m), rules)
    P = tuple(float(integrate_nd(lambda *k, j=j: total(*k) * k[j], rules)) for j in range(d))
    Q = integrate_nd(lambda *k: (Nplus(*k) - Nminus(*k)) * corr, rules)

    tail = 0.0
    if quad.kind == "gauss-legendre":
        for dens in (Nplus, Nminus):
            if isinstance(dens, SpectralDensity):
                tail += dens.tail_mass(quad.K, d)
    return Observables(float(H), P, float(Q), tail)


# ---------------------------------------------------------------------------
# commutator bookkeeping


def regularized_delta(x, sigma: float):
    """Normalized Gaussian exp(-|x|^2 / (2 sigma^2)) / (sigma sqrt(2 pi))^d."""
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    x = np.asarray(x, dtype=float)
    d = x.shape[-1] if x.ndim else 1
    sq = np.sum(x * x, axis=-1) if x.ndim else x * x
    return np.exp(-sq / (2 * sigma * sigma)) / (sigma * math.sqrt(2 * math.pi)) ** d


def commutator_kernel_check(k, k_hat, sigma: float) -> float:
    """Regularized delta(k - k_hat) standing in for [A(k), A^dagger(k_hat)]."""
    diff = np.atleast_1d(np.asarray(k, dtype=float) - np.asarray(k_hat, dtype=float))
    return float(regularized_delta(diff, sigma))


@dataclass(frozen=True)
class DeltaReport:
    sigma: float
    normalization: float
    peak: float
    far_ratio: float

    def as_dict(self):
        return {"sigma": self.sigma, "normalization": self.normalization, "peak": self.peak, "far_ratio": self.far_ratio}


def delta_family_report(sigma: float, k: float = 0.0, order: int = 64) -> DeltaReport:
    """Normalization of the regularized delta over k_hat and its decay beyond 5 sigma."""
    rule = box_rule(order, 12 * sigma, (0.0,))
    k_hat = k + rule.nodes
    norm = float(np.sum(rule.weights * regularized_delta((k - k_hat)[:, None], sigma)))
    peak = commutator_kernel_check(k, k, sigma)
    far = commutator_kernel_check(k, k + 5 * sigma, sigma) / peak
    return DeltaReport(sigma, norm, peak, far)


def lattice_tail_fraction(n_max: int, density: Callable[[np.ndarray], np.ndarray], K: float = DEFAULT_BOX, order: int = 400) -> float:
    """Share of ||a||^2 carried by xi_n with n > n_max, for a 1-D amplitude a(k)."""
    kept, total = smeared_completeness(n_max + 1, lambda x: np.asarray(density(x)), gauss_legendre(order, -K, K))
    return max(total - kept, 0.0) / total if total else 0.0
