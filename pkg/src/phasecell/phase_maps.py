"""Canonical map chain from the unit square to wound annuli and Peano circles.

    h_M  : (x, y)     -> (rho, alpha) = (x / (2 M pi) + 1/2, 2 M pi y - M pi)
    h_Mn : (rho, alpha) -> (r, theta) = (rho + n, alpha)
    g_Mn : (r, theta) -> (q, p)       = (sqrt(2r) cos theta, sqrt(2r) sin theta)

g uses sqrt(2r), which gives q^2 + p^2 = 2r and the annulus
2n+1 <= q^2 + p^2 <= 2n+1 + 1/(M pi).  Each map has unit Jacobian.  The
angle runs over 2 M pi, so the annulus is covered M times: its planar area
is 1/M while the multiplicity-weighted (pullback) area is 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

_EDGE_TOL = 1e-12


class DomainError(ValueError):
    """Input lies outside the closed domain of a map."""


def _check_positive_int(name, value, minimum=1):
    if isinstance(value, bool) or int(value) != value or value < minimum:
        raise ValueError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)


def _in_range(v, lo, hi):
    v = np.asarray(v, dtype=float)
    return np.all((v >= lo - _EDGE_TOL) & (v <= hi + _EDGE_TOL))


@dataclass(frozen=True)
class RectRegionDM:
    M: int

    @property
    def rho_interval(self):
        return (0.5, 0.5 + 1.0 / (2 * self.M * math.pi))

    @property
    def alpha_interval(self):
        return (-self.M * math.pi, self.M * math.pi)

    @property
    def area(self) -> float:
        return (1.0 / (2 * self.M * math.pi)) * (2 * self.M * math.pi)


@dataclass(frozen=True)
class RectRegionDMn:
    M: int
    n: int

    @property
    def r_interval(self):
        return (self.n + 0.5, self.n + 0.5 + 1.0 / (2 * self.M * math.pi))

    @property
    def theta_interval(self):
        return (-self.M * math.pi, self.M * math.pi)

    @property
    def area(self) -> float:
        return (1.0 / (2 * self.M * math.pi)) * (2 * self.M * math.pi)


@dataclass(frozen=True)
class AnnulusRegion:
    M: int
    n: int

    @property
    def inner_radius_sq(self) -> float:
        return 2.0 * self.n + 1.0

    @property
    def outer_radius_sq(self) -> float:
        return 2.0 * self.n + 1.0 + 1.0 / (self.M * math.pi)

    @property
    def winding(self) -> int:
        return self.M

    @property
    def geometric_area(self) -> float:
        # pi * (outer^2 - inner^2) = pi / (M pi), cancelled symbolically
        return float(Fraction(1, self.M))

    @property
    def covered_area(self) -> float:
        return float(Fraction(1, self.M) * self.winding)

    def contains(self, q, p, tol=_EDGE_TOL):
        rsq = np.asarray(q) ** 2 + np.asarray(p) ** 2
        return (rsq >= self.inner_radius_sq - tol) & (rsq <= self.outer_radius_sq + tol)


@dataclass(frozen=True)
class PeanoCircle:
    n: int

    @property
    def radius_sq(self) -> int:
        return 2 * self.n + 1

    @property
    def radius(self) -> float:
        return math.sqrt(self.radius_sq)

    @property
    def covered_area(self) -> float:
        return 1.0

    def outer_radius_sq(self, M):
        """Outer boundary q^2 + p^2 of the M-th annulus, decreasing to radius_sq."""
        M = np.asarray(M, dtype=float)
        r_top = self.n + 0.5 + 1.0 / (2.0 * M * math.pi)
        return 2.0 * r_top

    def points(self, samples: int) -> np.ndarray:
        phi = 2.0 * math.pi * np.arange(samples) / samples
        return self.radius * np.column_stack([np.cos(phi), np.sin(phi)])


@dataclass(frozen=True)
class HyperTorus:
    ns: tuple
    samples_per_circle: int
    points: np.ndarray = field(repr=False)

    @property
    def radii(self):
        return tuple(math.sqrt(2 * n + 1) for n in self.ns)

    @property
    def circles(self):
        return tuple(PeanoCircle(n) for n in self.ns)

    def radius_sq_residuals(self) -> np.ndarray:
        """|q_a^2 + p_a^2 - (2 n^a + 1)| per point and factor."""
        pts = self.points.reshape(len(self.points), -1, 2)
        target = np.array([2 * n + 1 for n in self.ns], dtype=float)
        return np.abs(np.sum(pts * pts, axis=2) - target)


@dataclass(frozen=True)
class ProductBundleSample:
    """Total space of base circle x fibre interval, one row (q, p, f) per sample."""

    base: PeanoCircle
    fibre: tuple
    base_points: np.ndarray = field(repr=False)
    fibre_values: np.ndarray = field(repr=False)
    total: np.ndarray = field(repr=False)
    base_index: np.ndarray = field(repr=False)

    def project(self) -> np.ndarray:
        return self.total[:, :2].copy()

    def projection_holds(self) -> bool:
        expected = self.base_points[self.base_index]
        return bool(np.array_equal(self.project().view(np.uint64), expected.view(np.uint64)))


def h_M(M: int, x, y):
    M = _check_positive_int("M", M)
    if not (_in_range(x, 0.0, 1.0) and _in_range(y, 0.0, 1.0)):
        raise DomainError("h_M is defined on the unit square [0, 1]^2")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    rho = x / (2 * M * math.pi) + 0.5
    alpha = (2 * M * math.pi) * y - M * math.pi
    return rho, alpha


def h_Mn(n: int, rho, alpha, M: int | None = None):
    """Shift rho by n.  With M given, (rho, alpha) is checked against D_M."""
    n = _check_positive_int("n", n, 0)
    if M is not None:
        region = RectRegionDM(_check_positive_int("M", M))
        if not (_in_range(rho, *region.rho_interval) and _in_range(alpha, *region.alpha_interval)):
            raise DomainError(f"(rho, alpha) outside D_M for M={M}")
    elif not np.all(np.asarray(rho) >= 0.5 - _EDGE_TOL):
        raise DomainError("rho must be >= 1/2")
    return np.asarray(rho, dtype=float) + n, np.asarray(alpha, dtype=float)


def g_Mn(r, theta):
    r = np.asarray(r, dtype=float)
    if np.any(~(r > 0.0)):
        raise DomainError("g_Mn needs r > 0")
    scale = np.sqrt(2.0 * r)
    theta = np.asarray(theta, dtype=float)
    return scale * np.cos(theta), scale * np.sin(theta)


def _composite_unchecked(M, n, x, y):
    rho = x / (2 * M * math.pi) + 0.5
    theta = (2 * M * math.pi) * y - M * math.pi
    scale = np.sqrt(2.0 * (rho + n))
    return scale * np.cos(theta), scale * np.sin(theta)


def composite_map(M: int, n: int, x, y):
    """g_Mn o h_Mn o h_M from the unit square onto the annulus A_Mn."""
    rho, alpha = h_M(M, x, y)
    r, theta = h_Mn(n, rho, alpha, M=M)
    return g_Mn(r, theta)


def jacobian_determinant(M: int, n: int, x, y, step: float = 1e-6):
    """Central finite-difference det d(q,p)/d(x,y); points must be >= step from the edges."""
    M = _check_positive_int("M", M)
    n = _check_positive_int("n", n, 0)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if not (_in_range(x, step, 1 - step) and _in_range(y, step, 1 - step)):
        raise DomainError("finite-difference points must be at least `step` inside the square")
    qx1, px1 = _composite_unchecked(M, n, x + step, y)
    qx0, px0 = _composite_unchecked(M, n, x - step, y)
    qy1, py1 = _composite_unchecked(M, n, x, y + step)
    qy0, py0 = _composite_unchecked(M, n, x, y - step)
    h2 = 2 * step
    return ((qx1 - qx0) * (py1 - py0) - (qy1 - qy0) * (px1 - px0)) / (h2 * h2)


def preimage_count(M: int, n: int, q, p) -> np.ndarray:
    """Number of points of the unit square mapped onto each (q, p).

    Inverts g o h o h branch by branch: theta = atan2(p, q) + 2 pi k for every
    k whose y = (theta + M pi) / (2 M pi) lands in [0, 1).  Using the half-open
    interval counts the seam theta = +-M pi once.
    """
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    r = 0.5 * (q * q + p * p)
    x = (r - n - 0.5) * (2 * M * math.pi)
    inside = (x >= 0.0) & (x <= 1.0)
    phi = np.arctan2(p, q)
    count = np.zeros(q.shape, dtype=np.int64)
    for k in range(-M - 1, M + 2):
        y = (phi + 2 * math.pi * k + M * math.pi) / (2 * M * math.pi)
        count += ((y >= 0.0) & (y < 1.0)).astype(np.int64)
    return np.where(inside, count, 0)


@dataclass(frozen=True)
class AreaReport:
    M: int
    n: int
    geometric: float
    covered: float
    mc_estimate: float
    mc_stderr: float
    samples: int
    seed: int

    def as_dict(self):
        return {
            "M": self.M,
            "n": self.n,
            "geometric": self.geometric,
            "covered": self.covered,
            "mc_estimate": self.mc_estimate,
            "mc_stderr": self.mc_stderr,
            "samples": self.samples,
            "seed": self.seed,
        }


def areas(M: int, n: int, samples: int = 1_000_000, seed: int = 0) -> AreaReport:
    """Planar and covered areas of A_Mn, plus a Monte-Carlo covered-area estimate.

    The estimator draws points uniformly (in area) from a band of q^2 + p^2
    one half-width wider than the annulus on each side, counts their
    preimages in the unit square, and scales the mean count by the band area.
    """
    M = _check_positive_int("M", M)
    n = _check_positive_int("n", n, 0)
    region = AnnulusRegion(M, n)
    width = 1.0 / (M * math.pi)
    lo = region.inner_radius_sq - 0.25 * width
    hi = region.outer_radius_sq + 0.25 * width
    rng = np.random.default_rng(seed)
    rsq = rng.uniform(lo, hi, samples)
    phi = rng.uniform(-math.pi, math.pi, samples)
    rad = np.sqrt(rsq)
    counts = preimage_count(M, n, rad * np.cos(phi), rad * np.sin(phi))
    band_area = math.pi * (hi - lo)
    estimate = band_area * counts.mean()
    stderr = band_area * counts.std(ddof=1) / math.sqrt(samples)
    return AreaReport(M, n, region.geometric_area, region.covered_area, float(estimate), float(stderr), samples, seed)


def winding_number(M: int, n: int, x_fixed: float, samples: int | None = None) -> int:
    """Turns of composite_map(M, n, x_fixed, y) about the origin as y goes 0 -> 1."""
    M = _check_positive_int("M", M)
    if not 0.0 <= x_fixed <= 1.0:
        raise DomainError(f"x_fixed must lie in [0, 1], got {x_fixed}")
    samples = samples or max(64 * M, 1024)
    # unwrap cannot see a true step of pi or more, so guard on theta's spacing
    if samples < 2 or 2 * M * math.pi / (samples - 1) >= math.pi:
        raise ArithmeticError(f"{samples} samples give angle steps >= pi for M={M}")
    y = np.linspace(0.0, 1.0, samples)
    q, p = composite_map(M, n, np.full_like(y, x_fixed), y)
    unwrapped = np.unwrap(np.arctan2(p, q))
    return int(round((unwrapped[-1] - unwrapped[0]) / (2 * math.pi)))


def annulus(M: int, n: int) -> AnnulusRegion:
    return AnnulusRegion(_check_positive_int("M", M), _check_positive_int("n", n, 0))


def peano_circle(n: int) -> PeanoCircle:
    return PeanoCircle(_check_positive_int("n", n, 0))


def hyper_torus(n1: int, n2: int, n3: int, samples_per_circle: int) -> HyperTorus:
    """Cartesian-product sampling of three Peano circles, rows (q1, p1, q2, p2, q3, p3)."""
    ns = tuple(_check_positive_int(f"n{i + 1}", v, 0) for i, v in enumerate((n1, n2, n3)))
    s = _check_positive_int("samples_per_circle", samples_per_circle, 3)
    circles = [PeanoCircle(v).points(s) for v in ns]
    i, j, k = np.meshgrid(np.arange(s), np.arange(s), np.arange(s), indexing="ij")
    pts = np.concatenate([circles[0][i.ravel()], circles[1][j.ravel()], circles[2][k.ravel()]], axis=1)
    return HyperTorus(ns, s, pts)


def bundle_sample(base: PeanoCircle, fibre, base_samples: int, fibre_samples: int) -> ProductBundleSample:
    """Grid on the trivial bundle base x [f0, f1] (time or momentum fibre)."""
    f0, f1 = (float(v) for v in fibre)
    if not f0 < f1:
        raise ValueError(f"fibre interval must be non-degenerate, got [{f0}, {f1}]")
    nb = _check_positive_int("base_samples", base_samples, 2)
    nf = _check_positive_int("fibre_samples", fibre_samples, 2)
    base_pts = base.points(nb)
    fibre_vals = np.linspace(f0, f1, nf)
    bi, fi = np.meshgrid(np.arange(nb), np.arange(nf), indexing="ij")
    bi, fi = bi.ravel(), fi.ravel()
    total = np.column_stack([base_pts[bi], fibre_vals[fi]])
    return ProductBundleSample(base, (f0, f1), base_pts, fibre_vals, total, bi)
