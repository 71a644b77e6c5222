"""Integral quantities: Gaussian entropy, total curvature, areas, L1 distance.

The Gaussian inner product used by the spectral machinery is

    <f, g> = (4 pi)^{-1/2} integral f(y) g(y) exp(-y^2/4) dy,

evaluated with Gauss-Hermite nodes after the substitution y = 2u, which
makes the rule exact on polynomials far beyond the eigenfunctions used.

Entropy of a curve is the supremum over centers x0 and scales lam > 0 of
the Gaussian-weighted length integral

    (4 pi lam)^{-1/2} integral exp(-|x - x0|^2 / (4 lam)) ds(x),

found by a coarse log-spaced grid search followed by Nelder-Mead
refinement; ties in the grid stage break toward the smallest scale, then
lexicographic center. The curve measure is one-dimensional arclength.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .curves import PlanarCurve
from .errors import InvalidInputError, RegionUndefinedError
from .flow import SheetGraph


# ---------------------------------------------------------------------------
# Gaussian inner product
# ---------------------------------------------------------------------------

class GaussianQuadrature:
    """Quadrature for the weight exp(-y^2/4)/sqrt(4 pi) on the line.

    With y = 2u the weight reduces to exp(-u^2)/sqrt(pi); Gauss-Hermite
    nodes of order n integrate polynomial products up to degree 2n-1
    exactly. 64 nodes are the package default.
    """

    def __init__(self, n: int = 64):
        nodes, weights = np.polynomial.hermite.hermgauss(n)
        self.y = 2.0 * nodes
        self.w = weights / math.sqrt(math.pi)

    def inner(self, fvals, gvals) -> float:
        f = np.asarray(fvals, dtype=float)
        g = np.asarray(gvals, dtype=float)
        if not (np.all(np.isfinite(f)) and np.all(np.isfinite(g))):
            raise InvalidInputError("non-finite samples in inner product")
        return float(np.sum(self.w * f * g))

    def inner_fn(self, f, g) -> float:
        return self.inner(f(self.y), g(self.y))

    def norm_sq(self, fvals) -> float:
        return self.inner(fvals, fvals)


DEFAULT_QUADRATURE = GaussianQuadrature(64)


def gaussian_inner(f, g, quad: GaussianQuadrature | None = None) -> float:
    """Inner product of two functions given as callables or (y, values) pairs."""
    quad = quad or DEFAULT_QUADRATURE

    def evaluate(obj):
        if callable(obj):
            return np.asarray(obj(quad.y), dtype=float)
        y, vals = obj
        y = np.asarray(y, dtype=float)
        vals = np.asarray(vals, dtype=float)
        if not np.all(np.isfinite(vals)):
            raise InvalidInputError("non-finite samples")
        out = np.interp(quad.y, y, vals, left=0.0, right=0.0)
        return out

    return quad.inner(evaluate(f), evaluate(g))


# ---------------------------------------------------------------------------
# entropy
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EntropyResult:
    value: float
    x0: tuple
    lam: float
    iterations: int
    gap: float


def _arc_weights(curve: PlanarCurve) -> np.ndarray:
    seg = curve.segment_lengths()
    if curve.closed:
        return 0.5 * (seg + np.roll(seg, 1))
    w = np.zeros(curve.n)
    w[:-1] += 0.5 * seg
    w[1:] += 0.5 * seg
    return w


def gaussian_density(curve: PlanarCurve, x0, lam: float,
                     weights: np.ndarray | None = None) -> float:
    """Gaussian-weighted length of the curve for one center/scale pair."""
    w = _arc_weights(curve) if weights is None else weights
    d2 = (curve.points[:, 0] - x0[0]) ** 2 + (curve.points[:, 1] - x0[1]) ** 2
    return float(np.sum(w * np.exp(-d2 / (4.0 * lam))) / math.sqrt(4.0 * math.pi * lam))


def entropy(curve: PlanarCurve, n_lam: int = 60, n_x0: int = 41,
            lam_range: tuple | None = None) -> EntropyResult:
    """Maximize the Gaussian density over centers and scales.

    Grid stage: n_x0 x n_x0 centers over the padded bounding box times
    n_lam log-spaced scales in [1e-3, 10 diam^2]; refinement: Nelder-Mead
    from the top grid points (deterministic), with the reported gap being
    the final simplex function spread.
    """
    pts = curve.points
    w = _arc_weights(curve)
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    diam = float(np.hypot(*(hi - lo))) or 1.0
    pad = 0.05 * diam
    if lam_range is None:
        lam_range = (1e-3, 10.0 * diam * diam)
    lams = np.geomspace(lam_range[0], lam_range[1], n_lam)
    xs = np.linspace(lo[0] - pad, hi[0] + pad, n_x0)
    ys = np.linspace(lo[1] - pad, hi[1] + pad, n_x0)

    best = (-np.inf, None)
    # iterate smallest lambda first, then lexicographic center: first max wins ties
    for lam in lams:
        inv = 1.0 / (4.0 * lam)
        norm = 1.0 / math.sqrt(4.0 * math.pi * lam)
        for x in xs:
            dx2 = (pts[:, 0] - x) ** 2
            d2 = dx2[None, :] + (pts[:, 1][None, :] - ys[:, None]) ** 2
            vals = norm * (np.exp(-d2 * inv) * w[None, :]).sum(axis=1)
            j = int(np.argmax(vals))
            if vals[j] > best[0]:
                best = (float(vals[j]), (float(x), float(ys[j]), float(lam)))
    grid_val, (gx, gy, glam) = best

    def neg(params):
        x, y, loglam = params
        return -gaussian_density(curve, (x, y), math.exp(loglam), weights=w)

    res = minimize(neg, np.array([gx, gy, math.log(glam)]), method="Nelder-Mead",
                   options={"xatol": 1e-8, "fatol": 1e-10, "maxiter": 2000})
    value = float(-res.fun)
    if value < grid_val:          # refinement must not lose the grid max
        value = grid_val
        x0 = (gx, gy)
        lam = glam
    else:
        x0 = (float(res.x[0]), float(res.x[1]))
        lam = float(math.exp(res.x[2]))
    gap = float(abs(res.final_simplex[1][0] - res.final_simplex[1][-1]))
    return EntropyResult(value=value, x0=x0, lam=lam,
                         iterations=int(res.nit), gap=gap)


def total_curvature(curve: PlanarCurve) -> float:
    """Arclength integral of |kappa| over the sampled curve."""
    from .curves import geometry
    geo = geometry(curve)
    return float(np.sum(np.abs(geo.kappa) * _arc_weights(curve)))


# ---------------------------------------------------------------------------
# finger regions and areas
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FingerRegion:
    """Region enclosed by a finger arc and the x2-axis.

    ``arc`` are polyline points ordered along the curve whose first and
    last points lie exactly on the x2-axis (x1 = 0); ``vertex`` is the
    sharp-vertex position; ``asymptotes`` the height pair when known.
    """

    finger_id: int
    arc: np.ndarray
    vertex: tuple
    asymptotes: tuple | None = None

    @property
    def area(self) -> float:
        return finger_area_from_arc(self.arc)


def finger_area_from_arc(arc: np.ndarray) -> float:
    """Shoelace area of the arc closed by the x2-axis segment, positive."""
    x, y = arc[:, 0], arc[:, 1]
    if abs(x[0]) > 1e-9 or abs(x[-1]) > 1e-9:
        raise RegionUndefinedError("arc endpoints must lie on the x2-axis")
    interior = x[1:-1]
    sign_changes = np.count_nonzero(np.diff(np.sign(interior[np.abs(interior) > 1e-12])) != 0)
    if sign_changes:
        raise RegionUndefinedError("arc crosses the x2-axis more than twice")
    area2 = np.sum(x[:-1] * y[1:] - x[1:] * y[:-1])
    # closing the loop along the axis adds no cross terms (x = 0 there)
    return float(abs(area2) / 2.0)


def finger_area(curve: PlanarCurve, finger: FingerRegion) -> float:
    """Area |F| of a detected finger region (curve argument kept for symmetry)."""
    return finger.area


@dataclass(frozen=True)
class AreaSeriesFit:
    times: np.ndarray
    areas: np.ndarray
    slope: float
    intercept: float
    residual: float
    fit_window: tuple


def area_series(regions, fit_window: tuple | None = None) -> AreaSeriesFit:
    """Affine fit of the finger-area law from a tracked (t, region) series.

    ``regions`` is a sequence of (t, FingerRegion) or (t, area) pairs. The
    fit uses the given window, defaulting to the last half of the series.
    """
    times = np.array([t for t, _ in regions], dtype=float)
    areas = np.array([r.area if isinstance(r, FingerRegion) else float(r)
                      for _, r in regions])
    if len(times) < 3:
        raise InvalidInputError("need at least 3 samples for an affine fit")
    if fit_window is None:
        fit_window = (float(times[len(times) // 2]), float(times[-1]))
    mask = (times >= fit_window[0] - 1e-12) & (times <= fit_window[1] + 1e-12)
    if mask.sum() < 3:
        raise InvalidInputError("fit window contains fewer than 3 samples")
    coeff, res, *_ = np.polynomial.polynomial.polyfit(
        times[mask], areas[mask], 1, full=True)
    resid = math.sqrt(res[0][0] / mask.sum()) if len(res[0]) else 0.0
    return AreaSeriesFit(times=times, areas=areas, slope=float(coeff[1]),
                         intercept=float(coeff[0]), residual=float(resid),
                         fit_window=fit_window)


def reaper_area_intercept(width: float, b: float, pointing: str = "right") -> float:
    """Closed-form intercept of the reaper area law |F|(t) = -pi t + C0.

    The finger region of an exact right-pointing reaper of width w and
    shift b has area w * h(t) - w^2 ln 2 / pi + O(e^{-k h}) with tip
    abscissa h(t) = b + k|t|, giving C0 = w b - w^2 ln 2 / pi; the
    left-pointing mirror flips the sign of the b term. The intercept is
    affine in b with slope +-w, which is what the best-fit shift inversion
    uses.
    """
    sigma = 1.0 if pointing == "right" else -1.0
    return sigma * width * b - width * width * math.log(2.0) / math.pi


# ---------------------------------------------------------------------------
# L1 graph distance
# ---------------------------------------------------------------------------

def l1_graph_distance(v: SheetGraph, vbar: SheetGraph) -> float:
    """Trapezoid integral of |V - Vbar| over a common x2 grid."""
    if v.axis != vbar.axis:
        raise InvalidInputError("graphs must share an axis")
    if (len(v.values) != len(vbar.values)
            or abs(v.lo - vbar.lo) > 1e-12 * max(1.0, abs(v.lo))
            or abs(v.hi - vbar.hi) > 1e-12 * max(1.0, abs(v.hi))):
        raise InvalidInputError("graphs must share domain and grid")
    return float(np.trapezoid(np.abs(v.values - vbar.values), dx=v.h))
