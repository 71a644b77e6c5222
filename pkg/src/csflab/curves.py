"""Sampled planar curves and their discrete differential geometry.

A curve is an ordered array of points in the plane, either closed (the last
point connects back to the first; the first point is not repeated) or open.
All derived geometry uses second-order discrete schemes:

* tangents from chord differences weighted by the local spacing,
* curvature from the circle through three consecutive samples (signed so
  that kappa > 0 when the curve bends toward the left normal J t),
* a continuous angle lift theta with theta_s = kappa discretely,
* arclength measured on an interpolating cubic spline, which is what the
  resampler equidistributes and what length-sensitive invariants use.

Everything here is a pure function of immutable inputs; point arrays are
marked read-only after construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline, PchipInterpolator

from .errors import DegenerateCurveError, InvalidInputError

MIN_POINTS = 8

# Gauss-Legendre rule used to measure spline arclength per parameter interval.
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)


@dataclass(frozen=True)
class PlanarCurve:
    """Ordered polyline samples of an oriented planar curve.

    Parameters
    ----------
    points : (n, 2) float array
        Sample positions. For closed curves the wrap segment points[-1] ->
        points[0] is implied and the first point is not duplicated.
    closed : bool
        Topology flag.
    embedded : bool
        Declares the curve simple; flows may then monitor self-intersection.
    """

    points: np.ndarray
    closed: bool = False
    embedded: bool = False

    def __post_init__(self):
        pts = np.ascontiguousarray(np.asarray(self.points, dtype=float))
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise InvalidInputError(f"points must be (n, 2), got {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise InvalidInputError("points contain non-finite values")
        if len(pts) < MIN_POINTS:
            raise DegenerateCurveError(f"need at least {MIN_POINTS} points, got {len(pts)}")
        seg = np.diff(pts, axis=0)
        if self.closed:
            seg = np.vstack([seg, pts[0] - pts[-1]])
        if np.any(np.hypot(seg[:, 0], seg[:, 1]) == 0.0):
            raise DegenerateCurveError("consecutive points must be distinct")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return len(self.points)

    def segment_lengths(self) -> np.ndarray:
        """Chord lengths; n segments for closed curves, n-1 for open."""
        seg = np.diff(self.points, axis=0)
        if self.closed:
            seg = np.vstack([seg, self.points[0] - self.points[-1]])
        return np.hypot(seg[:, 0], seg[:, 1])

    def chord_length(self) -> float:
        return float(self.segment_lengths().sum())

    def reversed(self) -> "PlanarCurve":
        return PlanarCurve(self.points[::-1].copy(), closed=self.closed, embedded=self.embedded)

    def translated(self, dx: float, dy: float) -> "PlanarCurve":
        return PlanarCurve(self.points + np.array([dx, dy]), closed=self.closed,
                           embedded=self.embedded)


@dataclass(frozen=True)
class CurveGeometry:
    """Per-sample differential geometry of a :class:`PlanarCurve`.

    Fields
    ------
    s : arclength of each sample from the start point (chord-accumulated)
    tangent, normal : unit tangent and left normal n = J t
    kappa : signed curvature, positive when bending toward ``normal``
    theta : continuous angle lift of the tangent (radians)
    length : total chord length (use :func:`curve_length` for the
             spline-accurate measure)
    """

    s: np.ndarray
    tangent: np.ndarray
    normal: np.ndarray
    kappa: np.ndarray
    theta: np.ndarray
    length: float = 0.0


def _wrap_index(pts, closed):
    """Return (prev, this, next) point arrays honoring topology."""
    if closed:
        prev_pts = np.roll(pts, 1, axis=0)
        next_pts = np.roll(pts, -1, axis=0)
        return prev_pts, pts, next_pts
    return pts[:-2], pts[1:-1], pts[2:]


def _menger_kappa(p0, p1, p2):
    """Signed curvature of the circle through three points."""
    e1 = p1 - p0
    e2 = p2 - p1
    chord = p2 - p0
    cross = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
    denom = (np.hypot(e1[:, 0], e1[:, 1]) * np.hypot(e2[:, 0], e2[:, 1])
             * np.hypot(chord[:, 0], chord[:, 1]))
    return 2.0 * cross / denom


def kappa_normal(pts: np.ndarray, closed: bool):
    """Fast curvature and unit normal for the stepper hot path.

    Same stencils as :func:`geometry` without the angle lift bookkeeping.
    """
    if closed:
        p0 = np.roll(pts, 1, axis=0)
        p2 = np.roll(pts, -1, axis=0)
        kappa = _menger_kappa(p0, pts, p2)
        tan = p2 - p0
    else:
        kappa = np.empty(len(pts))
        kappa[1:-1] = _menger_kappa(pts[:-2], pts[1:-1], pts[2:])
        kappa[0] = 2.0 * kappa[1] - kappa[2]
        kappa[-1] = 2.0 * kappa[-2] - kappa[-3]
        tan = np.empty_like(pts)
        tan[1:-1] = pts[2:] - pts[:-2]
        tan[0] = pts[1] - pts[0]
        tan[-1] = pts[-1] - pts[-2]
    tan = tan / np.hypot(tan[:, 0], tan[:, 1])[:, None]
    normal = np.column_stack([-tan[:, 1], tan[:, 0]])
    return kappa, normal


def geometry(curve: PlanarCurve) -> CurveGeometry:
    """Compute arclength, tangent/normal, curvature and angle lift.

    Curvature uses the circumscribed circle through each sample and its two
    neighbors; open-curve endpoints get one-sided second-order values.
    """
    pts = curve.points
    if curve.n < 3:
        raise InvalidInputError("need at least 3 points for geometry")
    seg = curve.segment_lengths()
    n = curve.n

    if curve.closed:
        h_prev = np.roll(seg, 1)          # length of segment arriving at i
        h_next = seg                      # leaving i
        p0, p1, p2 = _wrap_index(pts, True)
        kappa = _menger_kappa(p0, p1, p2)
        fwd = (p2 - p1) / h_next[:, None]
        bwd = (p1 - p0) / h_prev[:, None]
        w = (h_prev / (h_prev + h_next))[:, None]
        tan = w * fwd + (1.0 - w) * bwd
    else:
        h_prev = seg[:-1]
        h_next = seg[1:]
        kappa = np.empty(n)
        kappa[1:-1] = _menger_kappa(pts[:-2], pts[1:-1], pts[2:])
        # one-sided second-order extrapolation at the ends
        kappa[0] = 2.0 * kappa[1] - kappa[2]
        kappa[-1] = 2.0 * kappa[-2] - kappa[-3]
        tan = np.empty_like(pts)
        fwd = (pts[2:] - pts[1:-1]) / h_next[:, None]
        bwd = (pts[1:-1] - pts[:-2]) / h_prev[:, None]
        w = (h_prev / (h_prev + h_next))[:, None]
        tan[1:-1] = w * fwd + (1.0 - w) * bwd
        tan[0] = _onesided_tangent(pts[0], pts[1], pts[2])
        tan[-1] = -_onesided_tangent(pts[-1], pts[-2], pts[-3])

    tan = tan / np.hypot(tan[:, 0], tan[:, 1])[:, None]
    normal = np.column_stack([-tan[:, 1], tan[:, 0]])

    raw = np.arctan2(tan[:, 1], tan[:, 0])
    theta = np.unwrap(raw)

    if curve.closed:
        s = np.concatenate([[0.0], np.cumsum(seg[:-1])])
    else:
        s = np.concatenate([[0.0], np.cumsum(seg)])

    return CurveGeometry(s=s, tangent=tan, normal=normal, kappa=kappa,
                         theta=theta, length=float(seg.sum()))


def _onesided_tangent(p0, p1, p2):
    """Derivative at p0 of the parabola through p0, p1, p2 in chord parameter."""
    h1 = np.hypot(*(p1 - p0))
    h2 = np.hypot(*(p2 - p1))
    c0 = -(2.0 * h1 + h2) / (h1 * (h1 + h2))
    c1 = (h1 + h2) / (h1 * h2)
    c2 = -h1 / (h2 * (h1 + h2))
    return c0 * p0 + c1 * p1 + c2 * p2


def _parametric_spline(curve: PlanarCurve):
    """Cubic spline (x(u), y(u)) in chord parameter; periodic for closed curves."""
    pts = curve.points
    seg = curve.segment_lengths()
    if curve.closed:
        u = np.concatenate([[0.0], np.cumsum(seg)])
        data = np.vstack([pts, pts[:1]])
        bc = "periodic"
    else:
        u = np.concatenate([[0.0], np.cumsum(seg)])
        data = pts
        bc = "not-a-knot"
    sx = CubicSpline(u, data[:, 0], bc_type=bc)
    sy = CubicSpline(u, data[:, 1], bc_type=bc)
    return sx, sy, u


def _arclength_table(sx, sy, u):
    """Accurate cumulative arclength at the spline knots via Gauss-Legendre."""
    a = u[:-1]
    b = u[1:]
    mid = 0.5 * (a + b)[:, None]
    half = 0.5 * (b - a)[:, None]
    uu = mid + half * _GL_NODES[None, :]
    speed = np.hypot(sx(uu, 1), sy(uu, 1))
    seg_len = (speed * _GL_WEIGHTS[None, :]).sum(axis=1) * half[:, 0]
    return np.concatenate([[0.0], np.cumsum(seg_len)])


def curve_length(curve: PlanarCurve) -> float:
    """Total arclength of the spline through the samples."""
    sx, sy, u = _parametric_spline(curve)
    return float(_arclength_table(sx, sy, u)[-1])


def resample_arclength(curve: PlanarCurve, n: int) -> PlanarCurve:
    """Resample to ``n`` points equispaced in spline arclength.

    Open curves keep both endpoints; closed curves keep the start point and
    distribute n points over the full loop. Total length is preserved to the
    accuracy of the spline fit.
    """
    if n < MIN_POINTS:
        raise InvalidInputError(f"n must be >= {MIN_POINTS}")
    sx, sy, u = _parametric_spline(curve)
    cum = _arclength_table(sx, sy, u)
    total = cum[-1]
    if total <= 0.0:
        raise DegenerateCurveError("curve has zero length")
    # invert s -> u with a monotone interpolant
    inv = PchipInterpolator(cum, u)
    if curve.closed:
        s_new = total * np.arange(n) / n
    else:
        s_new = total * np.arange(n) / (n - 1)
    u_new = inv(s_new)
    pts = np.column_stack([sx(u_new), sy(u_new)])
    if not curve.closed:
        pts[0] = curve.points[0]
        pts[-1] = curve.points[-1]
    else:
        pts[0] = curve.points[0]
    return PlanarCurve(pts, closed=curve.closed, embedded=curve.embedded)


# ---------------------------------------------------------------------------
# self-intersection
# ---------------------------------------------------------------------------

_SHARED_EPS = 1e-12


def _segments(curve: PlanarCurve):
    pts = curve.points
    a = pts
    if curve.closed:
        b = np.roll(pts, -1, axis=0)
    else:
        a = pts[:-1]
        b = pts[1:]
    return a, b


def _adjacent(i, j, nseg, closed):
    if abs(i - j) <= 1:
        return True
    return closed and abs(i - j) == nseg - 1


def _proper_intersection(p1, p2, q1, q2):
    """Segment intersection test; a pure endpoint-endpoint touch within
    the 1e-12 guard does not count."""
    d1 = p2 - p1
    d2 = q2 - q1
    denom = d1[0] * d2[1] - d1[1] * d2[0]
    rel = q1 - p1
    scale = max(1.0, abs(d1[0]), abs(d1[1]), abs(d2[0]), abs(d2[1]))
    if denom == 0.0:
        # parallel: collinear overlap counts as intersection
        if abs(rel[0] * d1[1] - rel[1] * d1[0]) > _SHARED_EPS * scale * scale:
            return False
        dd = d1[0] * d1[0] + d1[1] * d1[1]
        t0 = (rel[0] * d1[0] + rel[1] * d1[1]) / dd
        t1 = t0 + (d2[0] * d1[0] + d2[1] * d1[1]) / dd
        lo, hi = min(t0, t1), max(t0, t1)
        return hi > _SHARED_EPS and lo < 1.0 - _SHARED_EPS
    t = (rel[0] * d2[1] - rel[1] * d2[0]) / denom
    s = (rel[0] * d1[1] - rel[1] * d1[0]) / denom
    eps = _SHARED_EPS
    if not (-eps <= t <= 1.0 + eps and -eps <= s <= 1.0 + eps):
        return False
    endpoint_t = t <= eps or t >= 1.0 - eps
    endpoint_s = s <= eps or s >= 1.0 - eps
    return not (endpoint_t and endpoint_s)


def self_intersects(curve: PlanarCurve):
    """Exact segment sweep for self-intersection.

    Returns ``(flag, pair)`` where pair is the first intersecting segment
    index pair (lexicographic) or None. Segments sharing an endpoint are
    exempt up to a 1e-12 guard.
    """
    a, b = _segments(curve)
    nseg = len(a)
    lo = np.minimum(a, b)
    hi = np.maximum(a, b)
    # grid hash on bounding boxes; cell comparable to the largest segment
    cell = max(float(np.max(hi - lo)), 1e-300)
    ix0 = np.floor(lo[:, 0] / cell).astype(np.int64)
    ix1 = np.floor(hi[:, 0] / cell).astype(np.int64)
    iy0 = np.floor(lo[:, 1] / cell).astype(np.int64)
    iy1 = np.floor(hi[:, 1] / cell).astype(np.int64)
    buckets: dict = {}
    for i in range(nseg):
        for cx in range(ix0[i], ix1[i] + 1):
            for cy in range(iy0[i], iy1[i] + 1):
                buckets.setdefault((cx, cy), []).append(i)
    best = None
    seen = set()
    for members in buckets.values():
        if len(members) < 2:
            continue
        for ii in range(len(members)):
            for jj in range(ii + 1, len(members)):
                i, j = members[ii], members[jj]
                if i > j:
                    i, j = j, i
                if (i, j) in seen:
                    continue
                seen.add((i, j))
                if _adjacent(i, j, nseg, curve.closed):
                    continue
                # bbox reject
                if (lo[i, 0] > hi[j, 0] or lo[j, 0] > hi[i, 0]
                        or lo[i, 1] > hi[j, 1] or lo[j, 1] > hi[i, 1]):
                    continue
                if _proper_intersection(a[i], b[i], a[j], b[j]):
                    if best is None or (i, j) < best:
                        best = (i, j)
    return (best is not None), best


# ---------------------------------------------------------------------------
# distances
# ---------------------------------------------------------------------------

def _points_to_segments_min(pts, a, b, chunk=512):
    """For each point, min distance to the segment set [a_i, b_i]."""
    d = b - a
    dd = np.einsum("ij,ij->i", d, d)
    dd = np.where(dd == 0.0, 1.0, dd)
    out = np.empty(len(pts))
    for k0 in range(0, len(pts), chunk):
        p = pts[k0:k0 + chunk]
        rel = p[:, None, :] - a[None, :, :]
        t = np.einsum("pij,ij->pi", rel, d) / dd[None, :]
        t = np.clip(t, 0.0, 1.0)
        proj = a[None, :, :] + t[:, :, None] * d[None, :, :]
        dist = np.hypot(p[:, None, 0] - proj[:, :, 0], p[:, None, 1] - proj[:, :, 1])
        out[k0:k0 + chunk] = dist.min(axis=1)
    return out


def hausdorff_distance(c1: PlanarCurve, c2: PlanarCurve) -> float:
    """Symmetric discrete Hausdorff distance with segment projection."""
    a1, b1 = _segments(c1)
    a2, b2 = _segments(c2)
    d12 = _points_to_segments_min(c1.points, a2, b2).max()
    d21 = _points_to_segments_min(c2.points, a1, b1).max()
    return float(max(d12, d21))


def min_distance(c1: PlanarCurve, c2: PlanarCurve) -> float:
    """Minimum distance between two curves (points of one to segments of the other)."""
    a1, b1 = _segments(c1)
    a2, b2 = _segments(c2)
    d12 = _points_to_segments_min(c1.points, a2, b2).min()
    d21 = _points_to_segments_min(c2.points, a1, b1).min()
    return float(min(d12, d21))
