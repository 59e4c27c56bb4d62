"""Radial profiles: analytic closed forms or sampled nodal values.

A profile knows its value and first two derivatives. Analytic profiles carry
closed-form derivatives; sampled profiles differentiate with the grid's
three-point stencils and interpolate off-node with a cubic spline.
"""

from __future__ import annotations

import numpy as np
from scipy.interpolate import CubicSpline

from .grids import RadialGrid


class AnalyticProfile:
    """Profile defined by callables for f, f', f''."""

    kind = "analytic"

    def __init__(self, f, d1=None, d2=None, label=""):
        self._f = f
        self._d1 = d1
        self._d2 = d2
        self.label = label

    def __call__(self, r):
        return self._f(np.asarray(r, dtype=float))

    def deriv1(self, r):
        if self._d1 is None:
            return _central(self._f, r, 1)
        return self._d1(np.asarray(r, dtype=float))

    def deriv2(self, r):
        if self._d2 is None:
            return _central(self._f, r, 2)
        return self._d2(np.asarray(r, dtype=float))

    def on(self, grid: RadialGrid):
        r = grid.nodes
        return self(r), self.deriv1(r), self.deriv2(r)


class SampledProfile:
    """Profile given by nodal values on a grid."""

    kind = "sampled"

    def __init__(self, grid: RadialGrid, values, label=""):
        self.grid = grid
        self.values = np.asarray(values, dtype=float)
        if self.values.shape != grid.nodes.shape:
            raise ValueError("values must match grid nodes")
        self.label = label
        self._spline = None

    def _get_spline(self):
        if self._spline is None:
            self._spline = CubicSpline(self.grid.nodes, self.values)
        return self._spline

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        return self._get_spline()(r)

    def deriv1(self, r):
        return self._get_spline()(np.asarray(r, dtype=float), 1)

    def deriv2(self, r):
        return self._get_spline()(np.asarray(r, dtype=float), 2)

    def on(self, grid: RadialGrid):
        if grid is self.grid or np.array_equal(grid.nodes, self.grid.nodes):
            v = self.values
            return v, grid.deriv1(v), grid.deriv2(v)
        v = self(grid.nodes)
        return v, grid.deriv1(v), grid.deriv2(v)


def constant_profile(value: float):
    c = float(value)
    return AnalyticProfile(lambda r: np.full_like(r, c),
                           lambda r: np.zeros_like(r),
                           lambda r: np.zeros_like(r),
                           label=f"const({c})")


def _central(f, r, order, rel_h=1e-5):
    r = np.asarray(r, dtype=float)
    h = rel_h * np.maximum(np.abs(r), 1.0)
    if order == 1:
        return (f(r + h) - f(r - h)) / (2.0 * h)
    return (f(r + h) - 2.0 * f(r) + f(r - h)) / h ** 2
