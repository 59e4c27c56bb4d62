"""Radial initial data sets and constraint quantities.

The metric is the warped product ``g = a(r) dr^2 + c(r) r^2 sigma`` with
``sigma`` the round unit (n-1)-sphere, and the symmetric 2-tensor q is stored
through its orthonormal-frame eigenvalues (q_rad, q_tan).  Everything reduces
to closed-form radial expressions:

* ``|q|^2 = q_rad^2 + (n-1) q_tan^2``,  ``tr q = q_rad + (n-1) q_tan``
* scalar curvature from the warping radius f(r) = r sqrt(c(r))
* momentum density J has a single radial frame component.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .errors import (DecViolation, GenerationFailure, InvalidArgument,
                     NumericalDegeneracy)
from .grids import RadialGrid, build_grid
from .profiles import AnalyticProfile, SampledProfile, constant_profile

FAMILIES = ("flat", "schwarzschild", "conformal", "perturbed-dec", "sampled")


@dataclass
class RadialInitialData:
    """Rotationally symmetric initial data set (M, g, q)."""

    n: int
    a: object
    c: object
    q_rad: object
    q_tan: object
    alpha_decl: float | None = None       # None means "unknown"
    delta: float = 0.5
    family: str = "sampled"
    params: dict = field(default_factory=dict)
    seed: int | None = None
    origin_regular: bool = True

    def __post_init__(self):
        if self.n < 4:
            raise InvalidArgument(f"dimension must satisfy n >= 4, got {self.n}")
        if self.delta <= 0.0:
            raise InvalidArgument("decay exponent delta must be positive")

    def q_is_zero(self, grid: RadialGrid) -> bool:
        qr = self.q_rad(grid.nodes)
        qt = self.q_tan(grid.nodes)
        return bool(np.all(qr == 0.0) and np.all(qt == 0.0))

    def q_frame_norm(self, r) -> np.ndarray:
        """|q|_g at the given radii."""
        qr = self.q_rad(r)
        qt = self.q_tan(r)
        return np.sqrt(qr ** 2 + (self.n - 1) * qt ** 2)

    def q_trace(self, r) -> np.ndarray:
        return self.q_rad(r) + (self.n - 1) * self.q_tan(r)

    # -- serialization -----------------------------------------------------

    def spec_dict(self, grid: RadialGrid) -> dict:
        return {
            "family": self.family,
            "n": int(self.n),
            "params": dict(self.params),
            "grid": {"r_max": grid.r_max, "N": grid.n_intervals,
                     "policy": grid.policy, "stretch": grid.stretch},
            "seed": -1 if self.seed is None else int(self.seed),
        }

    def profiles_csv(self, grid: RadialGrid) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["r", "a", "c", "q_rad", "q_tan"])
        r = grid.nodes
        cols = [r, self.a(r), self.c(r), self.q_rad(r), self.q_tan(r)]
        for row in zip(*cols):
            writer.writerow([repr(float(v)) for v in row])
        return buf.getvalue()


@dataclass
class ConstraintFields:
    """Energy/momentum constraint quantities on a grid."""

    R_g: np.ndarray
    mu: np.ndarray
    J_rad: np.ndarray
    margin: np.ndarray


# ---------------------------------------------------------------------------
# dataset families
# ---------------------------------------------------------------------------

def _conformal_power(m, n, regularized):
    """Profile (1 + (m/2) rho^{2-n})^{4/(n-2)} with rho = r or sqrt(1+r^2)."""
    p = 4.0 / (n - 2)
    k = -(n - 2) / 2.0    # phi = 1 + (m/2) w^k, w = r^2 or 1+r^2

    def parts(r):
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            w = 1.0 + r ** 2 if regularized else r ** 2
            wk = w ** k
            phi = 1.0 + 0.5 * m * wk
            dphi = 0.5 * m * k * wk / w * 2.0 * r
            d2phi = 0.5 * m * (2.0 * k * wk / w
                               + 4.0 * k * (k - 1.0) * r ** 2 * wk / w ** 2)
        return phi, dphi, d2phi

    def f(r):
        return parts(r)[0] ** p

    def d1(r):
        phi, dphi, _ = parts(r)
        return p * phi ** (p - 1.0) * dphi

    def d2(r):
        phi, dphi, d2phi = parts(r)
        return (p * (p - 1.0) * phi ** (p - 2.0) * dphi ** 2
                + p * phi ** (p - 1.0) * d2phi)

    return AnalyticProfile(f, d1, d2, label=f"conformal(m={m})")


def _tail_sum_profile(terms):
    """1 + sum_i amp_i (1+r^2)^{e_i/2} with closed-form derivatives."""

    def f(r):
        w = 1.0 + r ** 2
        out = np.ones_like(w)
        for amp, e in terms:
            out = out + amp * w ** (0.5 * e)
        return out

    def d1(r):
        w = 1.0 + r ** 2
        out = np.zeros_like(w)
        for amp, e in terms:
            out = out + amp * e * r * w ** (0.5 * e - 1.0)
        return out

    def d2(r):
        w = 1.0 + r ** 2
        out = np.zeros_like(w)
        for amp, e in terms:
            out = out + amp * e * (w ** (0.5 * e - 1.0)
                                   + (e - 2.0) * r ** 2 * w ** (0.5 * e - 2.0))
        return out

    return AnalyticProfile(f, d1, d2, label="tail-sum")


def _even_gaussian(amp0, amp2, width):
    """(amp0 + amp2 u) e^{-u} with u = (r/width)^2; even, rapidly decaying."""

    def parts(r):
        u = (r / width) ** 2
        e = np.exp(-u)
        val = (amp0 + amp2 * u) * e
        fu = (amp2 - amp0 - amp2 * u) * e
        fuu = (amp0 - 2.0 * amp2 + amp2 * u) * e
        return val, fu, fuu, u

    def f(r):
        return parts(r)[0]

    def d1(r):
        _, fu, _, _ = parts(r)
        return fu * 2.0 * r / width ** 2

    def d2(r):
        _, fu, fuu, _ = parts(r)
        return fuu * (2.0 * r / width ** 2) ** 2 + fu * 2.0 / width ** 2

    return AnalyticProfile(f, d1, d2, label="even-gaussian")


def make_dataset(family: str, n: int, params: dict | None = None,
                 grid: RadialGrid | None = None,
                 seed: int | None = None) -> RadialInitialData:
    """Generate a radial initial data set from a named family.

    Families: flat, schwarzschild(m), conformal(alpha, delta, beta),
    perturbed-dec(m, amplitude).  perturbed-dec data are rescaled (q halved)
    until the strict DEC margin is positive, verified by constraint_fields.
    """
    params = dict(params or {})
    one = constant_profile(1.0)
    zero = constant_profile(0.0)

    if family == "flat":
        return RadialInitialData(n=n, a=one, c=one, q_rad=zero, q_tan=zero,
                                 alpha_decl=0.0, family="flat", params=params,
                                 seed=seed)

    if family == "schwarzschild":
        m = params.get("m", 1.0)
        if m < 0:
            raise InvalidArgument(f"schwarzschild mass must be nonnegative, got {m}")
        prof = _conformal_power(m, n, regularized=False)
        return RadialInitialData(n=n, a=prof, c=prof, q_rad=zero, q_tan=zero,
                                 alpha_decl=2.0 * m / (n - 2), family="schwarzschild",
                                 params={"m": m}, seed=seed, origin_regular=False)

    if family == "conformal":
        alpha = params.get("alpha", 0.3)
        delta = params.get("delta", 0.5)
        beta = params.get("beta", 0.0)
        terms = [(alpha, 2 - n)]
        if beta != 0.0:
            terms.append((beta, 2 - n - 2 * delta))
        prof = _tail_sum_profile(terms)
        return RadialInitialData(n=n, a=prof, c=prof, q_rad=zero, q_tan=zero,
                                 alpha_decl=alpha, delta=delta, family="conformal",
                                 params={"alpha": alpha, "delta": delta, "beta": beta},
                                 seed=seed)

    if family == "perturbed-dec":
        if grid is None:
            raise InvalidArgument("perturbed-dec generation needs a grid for the DEC check")
        m = params.get("m", 1.0)
        if m < 0:
            raise InvalidArgument(f"mass parameter must be nonnegative, got {m}")
        amplitude = params.get("amplitude", 0.05)
        rng = np.random.default_rng(0 if seed is None else seed)
        base = _conformal_power(m, n, regularized=True)
        width = float(rng.uniform(1.5, 3.5))
        a0 = float(rng.uniform(-1.0, 1.0))
        a2r = float(rng.uniform(-1.0, 1.0))
        a2t = float(rng.uniform(-1.0, 1.0))
        eps = amplitude
        for _ in range(40):
            data = RadialInitialData(
                n=n, a=base, c=base,
                q_rad=_even_gaussian(eps * a0, eps * a2r, width),
                q_tan=_even_gaussian(eps * a0, eps * a2t, width),
                alpha_decl=2.0 * m / (n - 2), family="perturbed-dec",
                params={"m": m, "amplitude": amplitude}, seed=seed)
            fields = constraint_fields(data, grid)
            if np.min(fields.margin) > 0.0:
                return data
            eps *= 0.5
        raise GenerationFailure("could not reach a positive DEC margin in 40 rescales")

    raise InvalidArgument(f"unknown family {family!r}")


def dataset_from_samples(grid: RadialGrid, a, c, q_rad, q_tan, n: int,
                         alpha_decl=None, delta=0.5) -> RadialInitialData:
    """Wrap sampled nodal profiles as a dataset (cubic-spline interpolation)."""
    return RadialInitialData(
        n=n,
        a=SampledProfile(grid, a, "a"),
        c=SampledProfile(grid, c, "c"),
        q_rad=SampledProfile(grid, q_rad, "q_rad"),
        q_tan=SampledProfile(grid, q_tan, "q_tan"),
        alpha_decl=alpha_decl, delta=delta, family="sampled")


def dataset_from_json(spec: dict) -> tuple[RadialInitialData, RadialGrid]:
    """Rebuild (dataset, grid) from the dataset JSON schema."""
    for key in ("family", "n", "grid"):
        if key not in spec:
            raise InvalidArgument(f"dataset spec missing {key!r}")
    g = spec["grid"]
    grid = build_grid(float(g["r_max"]), int(g["N"]), g.get("policy", "uniform"),
                      g.get("stretch"))
    seed = spec.get("seed", -1)
    data = make_dataset(spec["family"], int(spec["n"]), spec.get("params", {}),
                        grid=grid, seed=None if seed in (-1, None) else int(seed))
    return data, grid


# ---------------------------------------------------------------------------
# curvature and constraints
# ---------------------------------------------------------------------------

def _metric_arrays(data: RadialInitialData, grid: RadialGrid):
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        a, da, d2a = data.a.on(grid)
        c, dc, d2c = data.c.on(grid)
    lo = 1 if not data.origin_regular else 0
    bad = ~np.isfinite(a[lo:]) | ~np.isfinite(c[lo:]) \
        | (a[lo:] < 1e-10) | (c[lo:] < 1e-10)
    if np.any(bad):
        raise NumericalDegeneracy("metric coefficients below 1e-10 or non-finite")
    return a, da, d2a, c, dc, d2c


def scalar_curvature(data: RadialInitialData, grid: RadialGrid) -> np.ndarray:
    """Scalar curvature of g = a dr^2 + c r^2 sigma at the grid nodes.

    Uses the warping radius f = r sqrt(c):
        R = (n-1)(n-2) (1 - f'^2/a)/f^2 - 2(n-1) (f''/a - f' a'/(2a^2))/f
    with the even-profile limit at r = 0.  Origin-singular families (exact
    Schwarzschild) get NaN at the first node.
    """
    n = data.n
    a, da, d2a, c, dc, d2c = _metric_arrays(data, grid)
    r = grid.nodes
    with np.errstate(divide="ignore", invalid="ignore"):
        sc = np.sqrt(c)
        f = r * sc
        f1 = sc + r * dc / (2.0 * sc)
        f2 = dc / sc + r * d2c / (2.0 * sc) - r * dc ** 2 / (4.0 * c * sc)
        term1 = (n - 1) * (n - 2) * (1.0 - f1 ** 2 / a) / f ** 2
        term2 = -2.0 * (n - 1) * (f2 / a - f1 * da / (2.0 * a ** 2)) / f
        R = term1 + term2
    if data.origin_regular:
        if data.a.kind == "sampled":
            a2 = grid.even_deriv2_origin(data.a.values)
            c2 = grid.even_deriv2_origin(data.c.values)
        else:
            a2, c2 = d2a[0], d2c[0]
        R[0] = n * (n - 1) * (a2 - 3.0 * c2) / (2.0 * a[0] ** 2)
    else:
        R[0] = np.nan
    return R


def constraint_fields(data: RadialInitialData, grid: RadialGrid) -> ConstraintFields:
    """Energy density mu, radial momentum J_rad, and the strict-DEC margin."""
    n = data.n
    R = scalar_curvature(data, grid)
    r = grid.nodes
    a = data.a(r)
    c, dc = data.c(r), data.c.deriv1(r)
    qr, qt = data.q_rad(r), data.q_tan(r)
    dqt = data.q_tan.deriv1(r)
    q2 = qr ** 2 + (n - 1) * qt ** 2
    tr = qr + (n - 1) * qt
    mu = 0.5 * (R - q2 + tr ** 2)
    with np.errstate(divide="ignore", invalid="ignore"):
        warp = dc / (2.0 * c) + 1.0 / r
        J = (n - 1) * (warp * (qr - qt) - dqt) / np.sqrt(a)
    # smooth origin: (q_rad - q_tan)/r -> (q_rad - q_tan)'(0) = 0 and q_tan'(0) = 0
    J[0] = 0.0 if data.origin_regular else np.nan
    margin = mu - np.abs(J)
    return ConstraintFields(R_g=R, mu=mu, J_rad=J, margin=margin)


def geodesic_distance(data: RadialInitialData, r_from: float, r_to: float,
                      rtol: float = 1e-11) -> float:
    """g-geodesic length of the radial segment [r_from, r_to]."""
    if r_from < 0 or r_to < r_from:
        raise InvalidArgument(f"need 0 <= r_from <= r_to, got ({r_from}, {r_to})")
    if r_to == r_from:
        return 0.0
    val, _ = quad(lambda r: math.sqrt(float(data.a(r))), r_from, r_to,
                  epsrel=rtol, epsabs=0.0, limit=200)
    return val


def radius_at_distance(data: RadialInitialData, r_start: float, dist: float,
                       inward: bool = True, a_extra=None) -> float:
    """Radius at geodesic distance `dist` from r_start (inward by default).

    ``a_extra`` optionally replaces the metric coefficient a by a callable
    (used for the Jang graph metric a + u'^2).  Clipped at r = 0.
    """
    a_fn = a_extra if a_extra is not None else (lambda r: float(data.a(r)))

    def dist_to(r):
        val, _ = quad(lambda s: math.sqrt(a_fn(s)), r, r_start,
                      epsrel=1e-10, epsabs=1e-14, limit=200)
        return val

    if not inward:
        raise InvalidArgument("only inward collars are needed")
    lo, hi = 0.0, r_start
    if dist_to(0.0) <= dist:
        return 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if dist_to(mid) > dist:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-12 * max(1.0, r_start):
            break
    return 0.5 * (lo + hi)


def ricci_eigenvalues(data: RadialInitialData, grid: RadialGrid):
    """(radial, tangential) orthonormal-frame Ricci eigenvalues at the nodes."""
    n = data.n
    a, da, _, c, dc, d2c = _metric_arrays(data, grid)
    r = grid.nodes
    with np.errstate(divide="ignore", invalid="ignore"):
        sc = np.sqrt(c)
        f = r * sc
        f1 = sc + r * dc / (2.0 * sc)
        f2 = dc / sc + r * d2c / (2.0 * sc) - r * dc ** 2 / (4.0 * c * sc)
        fss_over_f = (f2 / a - f1 * da / (2.0 * a ** 2)) / f
        ric_rad = -(n - 1) * fss_over_f
        ric_tan = -fss_over_f + (n - 2) * (1.0 - f1 ** 2 / a) / f ** 2
    if data.origin_regular:
        # isotropy at a smooth center: every Ricci eigenvalue equals R/n there
        R0 = scalar_curvature(data, grid)[0]
        ric_rad[0] = ric_tan[0] = R0 / n
    else:
        ric_rad[0] = ric_tan[0] = np.nan
    return ric_rad, ric_tan


def dq_frame_norm(data: RadialInitialData, grid: RadialGrid) -> np.ndarray:
    """|Dq|_g at the nodes (orthonormal-frame covariant derivative norm)."""
    n = data.n
    r = grid.nodes
    a = data.a(r)
    c, dc = data.c(r), data.c.deriv1(r)
    qr, qt = data.q_rad(r), data.q_tan(r)
    dqr, dqt = data.q_rad.deriv1(r), data.q_tan.deriv1(r)
    with np.errstate(divide="ignore", invalid="ignore"):
        warp = dc / (2.0 * c) + 1.0 / r
        mixed = warp * (qr - qt)
    mixed[0] = 0.0
    sq = (dqr ** 2 + (n - 1) * dqt ** 2 + 2.0 * (n - 1) * mixed ** 2) / a
    return np.sqrt(sq)


# ---------------------------------------------------------------------------
# invariant checks
# ---------------------------------------------------------------------------

def _masked_loglog_slope(r, y, floor=1e-13):
    mask = (r > 0) & (np.abs(y) > floor)
    if np.count_nonzero(mask) < 8:
        return None
    coef = np.polyfit(np.log(r[mask]), np.log(np.abs(y[mask])), 1)
    return float(coef[0])


def validate_dataset(data: RadialInitialData, grid: RadialGrid) -> dict:
    """Check the structural and asymptotic invariants of a dataset.

    Hard violations raise InvalidArgument; decay checks are reported as
    fitted slopes (None when the profile is at the numerical floor).
    """
    n = data.n
    r = grid.nodes
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        a, c = data.a(r), data.c(r)
    lo = 0 if data.origin_regular else 1
    if np.any(a[lo:] <= 0.0) or np.any(c[lo:] <= 0.0):
        raise InvalidArgument("metric profiles must be positive at every node")
    report = {"origin_regular": data.origin_regular}
    if data.origin_regular:
        if abs(a[0] - c[0]) > 1e-10 * max(1.0, abs(a[0])):
            raise InvalidArgument("smooth origin needs a(0) = c(0)")
        for name, prof in (("a", data.a), ("c", data.c),
                           ("q_rad", data.q_rad), ("q_tan", data.q_tan)):
            d0 = float(np.atleast_1d(prof.deriv1(np.array([0.0])))[0])
            scale = max(1.0, float(np.max(np.abs(prof(r)))))
            if abs(d0) > 1e-6 * scale:
                raise InvalidArgument(f"profile {name} must have vanishing slope at r=0")
    # metric decay toward (1 + alpha r^{2-n}) at rate r^{2-n-2delta}
    outer = grid.outer_third_mask() & (r > 0)
    alpha = data.alpha_decl
    if alpha is None:
        x = r[outer] ** (2.0 - n)
        y = a[outer] - 1.0
        alpha = float(x @ y / (x @ x))
    resid_a = a[outer] - 1.0 - alpha * r[outer] ** (2.0 - n)
    resid_c = c[outer] - 1.0 - alpha * r[outer] ** (2.0 - n)
    want = -(n - 2 + 2 * data.delta)
    for name, resid in (("a", resid_a), ("c", resid_c)):
        slope = _masked_loglog_slope(r[outer], resid)
        report[f"slope_{name}"] = slope
        if slope is not None and slope > want + 0.5:
            raise InvalidArgument(
                f"profile {name} decays at rate {slope:.2f}, declared {want:.2f}")
    qn = data.q_frame_norm(r)
    slope_q = _masked_loglog_slope(r[outer], qn[outer])
    report["slope_q"] = slope_q
    if slope_q is not None and slope_q > -(n - 1) + 0.5:
        raise InvalidArgument(f"|q| decays at rate {slope_q:.2f}, need ~{1 - n}")
    report["alpha"] = alpha
    return report
