"""Pre-Peano approximants f^j of the unit square.

Level 1 visits the 3x3 cells column by column in serpentine order (column 0
upward, column 1 downward, column 2 upward), drawing the full diagonal of each
cell so that the path runs (0,0) -> (1,1) through ten corners.  Level j+1
replaces every diagonal segment P -> Q of f^j by the level-1 motif mapped
into that segment's cell with

    (s, t) -> P + (Q - P) * (s, t)        (componentwise)

i.e. a scaling by 1/3 combined with the reflections that send the motif's
start and end onto P and Q.  Vertices are stored as integers over 3^j.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

MAX_LEVEL = 8
# deepest level reachable by limit_point's digit descent
MAX_LIMIT_LEVEL = 20
TAIL_FACTOR = 1.5 * math.sqrt(2.0)

# level-1 corners in units of 1/3
MOTIF = np.array(
    [(0, 0), (1, 1), (0, 2), (1, 3), (2, 2), (1, 1), (2, 0), (3, 1), (2, 2), (3, 3)],
    dtype=np.int64,
)
_STEPS = np.diff(MOTIF, axis=0)


def _check_level(j, upper=MAX_LEVEL):
    if isinstance(j, bool) or int(j) != j or not 1 <= j <= upper:
        raise ValueError(f"level must be an integer in 1..{upper}, got {j!r}")
    return int(j)


@dataclass(frozen=True)
class PeanoApproximant:
    """Level-j curve; ``lattice`` holds integer vertex coordinates over 3^j."""

    level: int
    lattice: np.ndarray = field(repr=False)

    @property
    def side(self) -> int:
        return 3**self.level

    @property
    def n_segments(self) -> int:
        return 9**self.level

    @property
    def vertices(self) -> np.ndarray:
        return self.lattice / float(self.side)

    @property
    def breakpoints(self) -> np.ndarray:
        return np.arange(self.n_segments + 1) / float(self.n_segments)

    def __call__(self, u):
        return evaluate(self, u)


@dataclass(frozen=True)
class CoverageReport:
    level: int
    cells_total: int
    cells_hit: int

    @property
    def fraction(self) -> float:
        return self.cells_hit / self.cells_total

    def as_dict(self):
        return {
            "level": self.level,
            "cells_total": self.cells_total,
            "cells_hit": self.cells_hit,
            "fraction": self.fraction,
        }


def _refine(lattice: np.ndarray) -> np.ndarray:
    start = lattice[:-1]
    step = np.diff(lattice, axis=0)
    body = 3 * start[:, None, :] + step[:, None, :] * MOTIF[None, :9, :].astype(lattice.dtype)
    return np.concatenate([body.reshape(-1, 2), 3 * lattice[-1:]], axis=0)


def build_approximant(j: int) -> PeanoApproximant:
    j = _check_level(j)
    # 3^8 fits in int16; keeps the level-8 array at ~170 MB
    lattice = MOTIF.astype(np.int16 if j >= 7 else np.int64)
    for _ in range(j - 1):
        lattice = _refine(lattice)
    lattice.setflags(write=False)
    return PeanoApproximant(j, lattice)


def _segment_and_fraction(n_segments: int, u):
    t = np.asarray(u, dtype=float) * n_segments
    nearest = np.rint(t)
    # snap parameters that are breakpoints up to rounding of k/9^j
    snap = np.abs(t - nearest) <= 4 * np.finfo(float).eps * np.maximum(nearest, 1.0)
    t = np.where(snap, nearest, t)
    seg = np.minimum(np.floor(t), n_segments - 1).astype(np.int64)
    return seg, t - seg


def evaluate(c: PeanoApproximant, u):
    """Point(s) f^j(u) for u in [0, 1]; exact stored vertex at every breakpoint."""
    u_arr = np.asarray(u, dtype=float)
    if np.any(~np.isfinite(u_arr)) or np.any(u_arr < 0.0) or np.any(u_arr > 1.0):
        raise ValueError("curve parameter u must lie in [0, 1]")
    seg, frac = _segment_and_fraction(c.n_segments, u_arr)
    p = c.lattice[seg].astype(float)
    q = c.lattice[seg + 1].astype(float)
    frac = frac[..., None]
    point = np.where(frac == 0.0, p, p + frac * (q - p)) / c.side
    return point


def sup_distance(j: int) -> float:
    """Exact sup_u |f^j(u) - f^{j+1}(u)|.

    Both curves are linear between consecutive points of {k / 9^{j+1}}, so the
    norm of their difference peaks at one of those points.  The comparison is
    done in integers over the common denominator 9 * 3^j.
    """
    j = _check_level(j, MAX_LEVEL - 1)
    coarse = build_approximant(j).lattice.astype(np.int64)
    fine = build_approximant(j + 1).lattice.astype(np.int64)
    k = np.arange(fine.shape[0])
    seg = np.minimum(k // 9, coarse.shape[0] - 2)
    r = k - 9 * seg
    step = coarse[seg + 1] - coarse[seg]
    diff = 9 * coarse[seg] + r[:, None] * step - 3 * fine
    sq = int(np.max(np.sum(diff * diff, axis=1)))
    return math.sqrt(sq) / (9 * 3**j)


def sup_distance_bound(j: int) -> float:
    return math.sqrt(2.0) / 3**j


def coverage(j: int) -> CoverageReport:
    """Count level-j cells crossed by a curve segment.

    A segment crosses the interior of exactly one cell (the one whose diagonal
    it is), so this is the stricter form of the closure test.
    """
    c = build_approximant(j)
    lat = c.lattice.astype(np.int64)
    cell = np.minimum(lat[:-1], lat[1:])
    index = cell[:, 0] * c.side + cell[:, 1]
    hit = np.zeros(c.n_segments, dtype=bool)
    hit[index] = True
    return CoverageReport(c.level, c.n_segments, int(np.count_nonzero(hit)))


def _digit_descent(u: Fraction, level: int):
    """f^level(u) by walking the base-9 digits of u through the motif maps."""
    offset = [Fraction(0), Fraction(0)]
    scale = [Fraction(1), Fraction(1)]
    t = u
    for _ in range(level):
        t *= 9
        s = min(int(t), 8)
        t -= s
        for axis in range(2):
            offset[axis] += scale[axis] * Fraction(int(MOTIF[s, axis]), 3)
            scale[axis] *= Fraction(int(_STEPS[s, axis]), 3)
    return tuple(float(offset[a] + scale[a] * t) for a in range(2))


def limit_level(tol: float) -> int:
    """Smallest j with tail bound (3 sqrt(2) / 2) 3^{-j} <= tol."""
    floor = TAIL_FACTOR / 3**MAX_LIMIT_LEVEL
    if not tol >= floor:
        raise ValueError(f"tolerance {tol!r} is below the achievable minimum {floor:.6g}")
    j = 1
    while TAIL_FACTOR / 3**j > tol:
        j += 1
    return j


def limit_point(u: float, tol: float):
    """Approximate the Peano point f(u); returns (point, radius, level)."""
    if not 0.0 <= u <= 1.0:
        raise ValueError(f"curve parameter u must lie in [0, 1], got {u}")
    j = limit_level(tol)
    point = _digit_descent(Fraction(u), j)
    return point, TAIL_FACTOR / 3**j, j
