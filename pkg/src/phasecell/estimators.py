"""scikit-learn transformers around the curve, phase-map and basis routines."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from . import peano, phase_maps
from .hermite import xi_table


class PeanoCurveTransformer(TransformerMixin, BaseEstimator):
    """Map curve parameters u in [0, 1] (one column) to points f^level(u)."""

    def __init__(self, level=3):
        self.level = level

    def fit(self, X=None, y=None):
        self.curve_ = peano.build_approximant(self.level)
        self.n_features_in_ = 1
        return self

    def transform(self, X):
        check_is_fitted(self, "curve_")
        X = check_array(X, ensure_2d=True)
        if X.shape[1] != 1:
            raise ValueError(f"expected a single column of curve parameters, got {X.shape[1]}")
        return peano.evaluate(self.curve_, X[:, 0])


class PhaseMapTransformer(TransformerMixin, BaseEstimator):
    """Composite canonical map (x, y) -> (q, p) onto the annulus A_Mn."""

    def __init__(self, M=1, n=0):
        self.M = M
        self.n = n

    def fit(self, X=None, y=None):
        self.annulus_ = phase_maps.annulus(self.M, self.n)
        self.n_features_in_ = 2
        return self

    def transform(self, X):
        check_is_fitted(self, "annulus_")
        X = check_array(X)
        if X.shape[1] != 2:
            raise ValueError(f"expected columns (x, y), got {X.shape[1]} columns")
        q, p = phase_maps.composite_map(self.M, self.n, X[:, 0], X[:, 1])
        return np.column_stack([q, p])


class HermiteFeatures(TransformerMixin, BaseEstimator):
    """Expand a momentum column k into xi_0(k)..xi_{n_max}(k).

    ``output="complex"`` returns complex features; ``"real"`` stacks real and
    imaginary parts side by side.
    """

    def __init__(self, n_max=10, output="complex"):
        self.n_max = n_max
        self.output = output

    def fit(self, X=None, y=None):
        if self.output not in ("complex", "real"):
            raise ValueError(f"output must be 'complex' or 'real', got {self.output!r}")
        if int(self.n_max) != self.n_max or self.n_max < 0:
            raise ValueError(f"n_max must be a non-negative integer, got {self.n_max!r}")
        self.n_features_in_ = 1
        self.n_features_out_ = (self.n_max + 1) * (1 if self.output == "complex" else 2)
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_out_")
        X = check_array(X)
        if X.shape[1] != 1:
            raise ValueError(f"expected a single momentum column, got {X.shape[1]}")
        values = xi_table(int(self.n_max), X[:, 0]).T
        if self.output == "complex":
            return values
        return np.hstack([values.real, values.imag])
