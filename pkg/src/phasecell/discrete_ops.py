"""Mean-difference operator on the lattice index n.

    (D# f)(n) = sqrt((n+1)/2) f(n+1) - sqrt(n/2) f(n-1)

This is the two-point form for which D# xi_n(k) = i k xi_n(k): combine
k psi_n = sqrt(n/2) psi_{n-1} + sqrt((n+1)/2) psi_{n+1} with the i^n phase.
At n = 0 the backward coefficient is exactly zero and f(-1) is never read.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np


class LatticeRangeError(IndexError):
    """A stencil reached past the stored lattice and no extension was supplied."""


@dataclass(frozen=True)
class LatticeSequence:
    """Complex samples f(0..n_max); ``extension(n)`` supplies values past n_max."""

    values: np.ndarray = field(repr=False)
    extension: Callable[[int], complex] | None = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.ndim != 1 or values.size == 0:
            raise ValueError("LatticeSequence needs a non-empty 1-D array")
        object.__setattr__(self, "values", values)

    @property
    def n_max(self) -> int:
        return self.values.size - 1

    def __call__(self, n: int) -> complex:
        if n < 0:
            raise LatticeRangeError(f"lattice index {n} is negative")
        if n <= self.n_max:
            return complex(self.values[n])
        if self.extension is None:
            raise LatticeRangeError(
                f"neighbor n={n} lies beyond n_max={self.n_max} and no extension was supplied"
            )
        return complex(self.extension(n))


@dataclass(frozen=True)
class LatticeField:
    """Complex samples on {0..n_max}^d; ``extension(site)`` covers sites past n_max."""

    values: np.ndarray = field(repr=False)
    extension: Callable[[tuple], complex] | None = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.ndim == 0 or len(set(values.shape)) != 1:
            raise ValueError(f"LatticeField must be a hypercube, got shape {values.shape}")
        object.__setattr__(self, "values", values)

    @property
    def d(self) -> int:
        return self.values.ndim

    @property
    def n_max(self) -> int:
        return self.values.shape[0] - 1

    def __call__(self, site: Sequence[int]) -> complex:
        site = tuple(int(s) for s in site)
        if len(site) != self.d:
            raise ValueError(f"site {site} has {len(site)} coordinates, field has d={self.d}")
        if min(site) < 0:
            raise LatticeRangeError(f"site {site} has a negative coordinate")
        if max(site) <= self.n_max:
            return complex(self.values[site])
        if self.extension is None:
            raise LatticeRangeError(
                f"neighbor {site} lies beyond n_max={self.n_max} and no extension was supplied"
            )
        return complex(self.extension(site))


def _forward(n: int) -> float:
    return math.sqrt((n + 1) / 2.0)


def _backward(n: int) -> float:
    return math.sqrt(n / 2.0)


def delta_sharp(f: LatticeSequence | Callable[[int], complex], n: int) -> complex:
    """(D# f)(n)."""
    if n < 0:
        raise LatticeRangeError(f"lattice index {n} is negative")
    value = _forward(n) * f(n + 1)
    if n > 0:
        value -= _backward(n) * f(n - 1)
    return complex(value)


def _shift(site: tuple, axis: int, step: int) -> tuple:
    out = list(site)
    out[axis] += step
    return tuple(out)


def delta_sharp_axis(F: LatticeField | Callable[[tuple], complex], axis: int, site: Sequence[int]) -> complex:
    """D#_a along ``axis`` (1-based, a in 1..d) at ``site``."""
    site = tuple(int(s) for s in site)
    if not 1 <= axis <= len(site):
        raise ValueError(f"axis must be in 1..{len(site)}, got {axis}")
    a = axis - 1
    n = site[a]
    value = _forward(n) * F(_shift(site, a, +1))
    if n > 0:
        value -= _backward(n) * F(_shift(site, a, -1))
    return complex(value)


def laplacian_sharp(F: LatticeField | Callable[[tuple], complex], site: Sequence[int]) -> complex:
    """sum_a D#_a D#_a F at ``site``."""
    site = tuple(int(s) for s in site)
    total = 0j
    for axis in range(1, len(site) + 1):
        inner = lambda s, axis=axis: delta_sharp_axis(F, axis, s)  # noqa: E731
        total += delta_sharp_axis(inner, axis, site)
    return total


def _coefficients(n_points: int):
    n = np.arange(n_points, dtype=float)
    return np.sqrt((n + 1) / 2.0), np.sqrt(n / 2.0)


def delta_sharp_array(values: np.ndarray, axis: int = 0) -> np.ndarray:
    """D# along ``axis`` (0-based) for every site whose forward neighbor is stored.

    The result has length n_max along ``axis`` (sites 0..n_max-1).
    """
    values = np.asarray(values)
    values = np.moveaxis(values, axis, 0)
    m = values.shape[0] - 1
    fwd, bwd = _coefficients(m)
    shape = (m,) + (1,) * (values.ndim - 1)
    out = fwd.reshape(shape) * values[1:]
    out[1:] -= bwd[1:].reshape((m - 1,) + (1,) * (values.ndim - 1)) * values[: m - 1]
    return np.moveaxis(out, 0, axis)


def laplacian_sharp_array(values: np.ndarray) -> np.ndarray:
    """sum_a D#_a D#_a over the interior block {0..n_max-2}^d."""
    values = np.asarray(values)
    m = values.shape[0] - 2
    if m < 1:
        raise LatticeRangeError("lattice too small for a double application (need n_max >= 2)")
    interior = (slice(0, m),) * values.ndim
    total = np.zeros((m,) * values.ndim, dtype=np.result_type(values, complex))
    for a in range(values.ndim):
        twice = delta_sharp_array(delta_sharp_array(values, a), a)
        total += twice[interior]
    return total
