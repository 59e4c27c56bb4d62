"""Radial grids and finite-difference derivative stencils.

All fields live on a one-dimensional grid of radii ``0 = r_0 < r_1 < ... < r_N``.
Derivatives use three-point stencils that are exact on quadratics, so they are
second order on uniform grids and on smoothly stretched (geometric) grids.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgument

MIN_NODES = 16


def _three_point_weights(x0, x1, x2):
    """First/second derivative weights at x1 for nodes (x0, x1, x2)."""
    hm = x1 - x0
    hp = x2 - x1
    d1 = np.array([-hp / (hm * (hm + hp)),
                   (hp - hm) / (hm * hp),
                   hm / (hp * (hm + hp))])
    d2 = np.array([2.0 / (hm * (hm + hp)),
                   -2.0 / (hm * hp),
                   2.0 / (hp * (hm + hp))])
    return d1, d2


@dataclass(frozen=True)
class RadialGrid:
    """Strictly increasing radii starting at 0.

    ``policy`` is "uniform" or "geometric"; a geometric grid has a constant
    ratio ``stretch`` between consecutive spacings, concentrating nodes near
    the origin.
    """

    nodes: np.ndarray
    policy: str = "uniform"
    stretch: float = 1.0
    _d1: np.ndarray = field(default=None, repr=False, compare=False)
    _d2: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        object.__setattr__(self, "nodes", nodes)
        if nodes.ndim != 1 or nodes.size < MIN_NODES + 1:
            raise InvalidArgument(f"need at least {MIN_NODES + 1} nodes, got {nodes.size}")
        if nodes[0] != 0.0:
            raise InvalidArgument("first node must be 0")
        if np.any(np.diff(nodes) <= 0.0):
            raise InvalidArgument("nodes must be strictly increasing")

    @property
    def n_intervals(self) -> int:
        return self.nodes.size - 1

    @property
    def r_max(self) -> float:
        return float(self.nodes[-1])

    @property
    def spacings(self) -> np.ndarray:
        return np.diff(self.nodes)

    # -- derivative stencils ------------------------------------------------

    def _weights(self):
        if self._d1 is not None:
            return self._d1, self._d2
        x = self.nodes
        m = x.size
        d1 = np.zeros((m, 3))
        d2 = np.zeros((m, 3))
        for i in range(1, m - 1):
            d1[i], d2[i] = _three_point_weights(x[i - 1], x[i], x[i + 1])
        # one-sided stencils at the ends, exact on quadratics
        for i, (j0, j1, j2) in ((0, (0, 1, 2)), (m - 1, (m - 3, m - 2, m - 1))):
            xs = x[[j0, j1, j2]]
            v = np.vander(xs - x[i], 3, increasing=True)
            inv = np.linalg.inv(v.T)
            d1[i] = inv[:, 1]
            d2[i] = 2.0 * inv[:, 2]
        object.__setattr__(self, "_d1", d1)
        object.__setattr__(self, "_d2", d2)
        return d1, d2

    def deriv1(self, values: np.ndarray) -> np.ndarray:
        """Nodal first derivative of nodal values."""
        return self._apply(values, 0)

    def deriv2(self, values: np.ndarray) -> np.ndarray:
        """Nodal second derivative of nodal values."""
        return self._apply(values, 1)

    def _apply(self, values, which):
        d1, d2 = self._weights()
        w = d1 if which == 0 else d2
        v = np.asarray(values, dtype=float)
        out = np.empty_like(v)
        out[1:-1] = (w[1:-1, 0] * v[:-2] + w[1:-1, 1] * v[1:-1]
                     + w[1:-1, 2] * v[2:])
        out[0] = w[0] @ v[:3]
        out[-1] = w[-1] @ v[-3:]
        return out

    def even_deriv2_origin(self, values: np.ndarray) -> np.ndarray:
        """Second derivative at r=0 of an even profile (f'(0)=0 assumed)."""
        r1 = self.nodes[1]
        return 2.0 * (values[1] - values[0]) / r1 ** 2

    # -- restriction --------------------------------------------------------

    def truncate(self, r_out: float) -> "RadialGrid":
        """Sub-grid covering [0, r_out]; appends r_out if it is not a node."""
        if r_out <= self.nodes[MIN_NODES]:
            raise InvalidArgument("truncation radius leaves too few nodes")
        keep = self.nodes[self.nodes <= r_out * (1.0 + 1e-14)]
        if keep[-1] < r_out * (1.0 - 1e-14):
            keep = np.append(keep, r_out)
        else:
            keep[-1] = r_out
        return RadialGrid(keep, policy="truncated", stretch=self.stretch)

    def outer_third_mask(self) -> np.ndarray:
        """Boolean mask selecting radii in the outer third of [0, r_max]."""
        return self.nodes >= (2.0 / 3.0) * self.r_max


def build_grid(r_max: float, n_intervals: int, policy: str = "uniform",
               stretch: float | None = None) -> RadialGrid:
    """Build a radial grid on [0, r_max] with N intervals.

    Geometric spacing uses ``h_{i+1} = stretch * h_i``, so nodes concentrate
    near the origin for stretch > 1.
    """
    if r_max <= 0.0:
        raise InvalidArgument(f"r_max must be positive, got {r_max}")
    if n_intervals < MIN_NODES:
        raise InvalidArgument(f"need N >= {MIN_NODES}, got {n_intervals}")
    if policy == "uniform":
        nodes = np.linspace(0.0, r_max, n_intervals + 1)
        return RadialGrid(nodes, policy="uniform", stretch=1.0)
    if policy == "geometric":
        if stretch is None or stretch <= 0.0:
            raise InvalidArgument("geometric policy needs a positive stretch factor")
        if abs(stretch - 1.0) < 1e-14:
            return build_grid(r_max, n_intervals, "uniform")
        # h0 * (s^N - 1)/(s - 1) = r_max
        h0 = r_max * (stretch - 1.0) / (stretch ** n_intervals - 1.0)
        h = h0 * stretch ** np.arange(n_intervals)
        nodes = np.concatenate(([0.0], np.cumsum(h)))
        nodes[-1] = r_max
        return RadialGrid(nodes, policy="geometric", stretch=float(stretch))
    raise InvalidArgument(f"unknown spacing policy {policy!r}")


def geometric_stretch_for(r_max: float, n_intervals: int, h0: float) -> float:
    """Stretch factor whose geometric grid on [0, r_max] starts with spacing h0."""
    if not 0.0 < h0 < r_max / n_intervals:
        raise InvalidArgument("h0 must lie in (0, r_max/N)")
    lo, hi = 1.0 + 1e-12, 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        first = r_max * (mid - 1.0) / (mid ** n_intervals - 1.0)
        if first > h0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
