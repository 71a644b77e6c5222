"""Feature detection and quantitative asymptotics checks on flows.

Detects vertices (curvature criticals), tips/knuckles (distance criticals),
inflections, graphical sheets, and fingers (edge pairs sharing a sharp
vertex); classifies edges into the three analytic types

    A1: one inflection, theta positive convex, kappa increasing
    A2: convex with one flat vertex, theta increasing
    B:  noncompact tail, theta and kappa positive increasing, kappa -> 0

and runs the measured counterparts of the asymptotic laws: strip
confinement, vertex curvature/speed/direction, exponential height decay of
sheets, best-fitting reaper by area-intercept matching, tip translation
limit, height-pattern validation, L1 contraction, and the far-field slope
bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .curves import PlanarCurve, geometry
from .errors import (InvalidInputError, NotInRegimeError, ResolutionError, TrackingError)
from .flow import FlowTrajectory, SheetGraph
from .functionals import (AreaSeriesFit, FingerRegion, area_series, l1_graph_distance,
                          reaper_area_intercept)

SLOPE_TAN80 = math.tan(math.radians(80.0))


# ---------------------------------------------------------------------------
# feature detection
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CriticalPoint:
    index: float          # fractional sample index after quadratic refinement
    s: float
    point: tuple
    value: float          # kappa or distance at the critical point
    kind: str             # sharp | flat | tip | knuckle | inflection


@dataclass(frozen=True)
class Finger:
    finger_id: int
    vertex: CriticalPoint
    lo_index: int         # sample range of the two edges around the vertex
    hi_index: int
    pointing: str         # left | right


@dataclass(frozen=True)
class FeatureSet:
    sharp_vertices: list
    flat_vertices: list
    tips: list
    knuckles: list
    inflections: list
    sheets: list          # (i0, i1) index ranges graphical over x1
    fingers: list
    degenerate_curvature: bool = False

    def to_dict(self) -> dict:
        def cp(c):
            return {"index": c.index, "s": c.s, "point": list(c.point),
                    "value": c.value, "kind": c.kind}
        return {
            "sharp_vertices": [cp(c) for c in self.sharp_vertices],
            "flat_vertices": [cp(c) for c in self.flat_vertices],
            "tips": [cp(c) for c in self.tips],
            "knuckles": [cp(c) for c in self.knuckles],
            "inflections": [cp(c) for c in self.inflections],
            "sheets": [list(r) for r in self.sheets],
            "fingers": [{"id": f.finger_id, "vertex": cp(f.vertex),
                         "range": [f.lo_index, f.hi_index], "pointing": f.pointing}
                        for f in self.fingers],
            "degenerate_curvature": self.degenerate_curvature,
        }


def _signed_value(cp: CriticalPoint, kappa_sample: float) -> CriticalPoint:
    """Restore the curvature sign on a critical point refined on |kappa|."""
    if kappa_sample < 0:
        return CriticalPoint(index=cp.index, s=cp.s, point=cp.point,
                             value=-cp.value, kind=cp.kind)
    return cp


def _refine_critical(s, vals, i, pts, kind):
    """Quadratic fit through the 5-point stencil around sample i."""
    n = len(vals)
    idx = np.arange(max(i - 2, 0), min(i + 3, n))
    coeff = np.polynomial.polynomial.polyfit(s[idx] - s[i], vals[idx], 2)
    if coeff[2] != 0.0:
        ds = -coeff[1] / (2.0 * coeff[2])
        ds = float(np.clip(ds, s[idx[0]] - s[i], s[idx[-1]] - s[i]))
    else:
        ds = 0.0
    s_star = s[i] + ds
    value = float(coeff[0] + coeff[1] * ds + coeff[2] * ds * ds)
    # position by local interpolation along the polyline
    j = int(np.searchsorted(s, s_star, side="right") - 1)
    j = min(max(j, 0), n - 2)
    w = (s_star - s[j]) / (s[j + 1] - s[j])
    point = (1.0 - w) * pts[j] + w * pts[j + 1]
    frac = j + w
    return CriticalPoint(index=float(frac), s=float(s_star),
                         point=(float(point[0]), float(point[1])),
                         value=value, kind=kind)


def _local_extrema(vals, closed):
    """Indices of local maxima/minima; short plateaus collapse to one index
    (the quadratic refinement recenters it)."""
    if closed:
        prev_v = np.roll(vals, 1)
        next_v = np.roll(vals, -1)
        maxima = np.nonzero((vals >= prev_v) & (vals > next_v))[0]
        minima = np.nonzero((vals <= prev_v) & (vals < next_v))[0]
    else:
        maxima = 1 + np.nonzero((vals[1:-1] >= vals[:-2]) & (vals[1:-1] > vals[2:]))[0]
        minima = 1 + np.nonzero((vals[1:-1] <= vals[:-2]) & (vals[1:-1] < vals[2:]))[0]
    return maxima, minima


def _gap_check(indices, min_gap=3):
    both = np.sort(np.asarray(indices))
    if len(both) > 1 and np.diff(both).min() < min_gap:
        raise ResolutionError("critical points closer than 3 samples; refine the mesh")


def detect_features(curve: PlanarCurve, basepoint=(0.0, 0.0),
                    kappa_floor: float = 1e-4) -> FeatureSet:
    """Find vertices, tips/knuckles, inflections, sheets and fingers.

    Curvature criticals below ``kappa_floor`` in relative variation mark a
    degenerate (constant-curvature) profile and are not reported as
    isolated vertices.
    """
    geo = geometry(curve)
    pts = curve.points
    s = geo.s
    kap = geo.kappa

    sharp, flat = [], []
    akap = np.abs(kap)
    spread = kap.max() - kap.min()
    degenerate = spread <= kappa_floor * max(1.0, akap.max())
    if not degenerate:
        # vertices are criticals of the curvature magnitude, so the tip of a
        # finger is sharp regardless of its pointing/traversal sign
        maxima, minima = _local_extrema(akap, curve.closed)
        floor_abs = kappa_floor * akap.max()     # drop mesh-noise criticals
        interior_pad = 2
        maxima = [i for i in maxima if akap[i] >= floor_abs
                  and (curve.closed or interior_pad <= i < len(kap) - interior_pad)]
        minima = [i for i in minima if akap[i] >= floor_abs
                  and (curve.closed or interior_pad <= i < len(kap) - interior_pad)]
        _gap_check(list(maxima) + list(minima))
        for i in maxima:
            cp = _refine_critical(s, akap, i, pts, "sharp")
            sharp.append(_signed_value(cp, kap[i]))
        for i in minima:
            cp = _refine_critical(s, akap, i, pts, "flat")
            flat.append(_signed_value(cp, kap[i]))

    dist = np.hypot(pts[:, 0] - basepoint[0], pts[:, 1] - basepoint[1])
    tips, knuckles = [], []
    dist_spread = dist.max() - dist.min()
    if dist_spread > 1e-9 * max(1.0, dist.max()):
        maxima, minima = _local_extrema(dist, curve.closed)
        _gap_check(list(maxima) + list(minima))
        for i in maxima:
            tips.append(_refine_critical(s, dist, i, pts, "tip"))
        for i in minima:
            knuckles.append(_refine_critical(s, dist, i, pts, "knuckle"))

    # inflections: transitions between genuinely positive and negative runs
    # of kappa (sign flips inside the noise floor are not counted)
    inflections = []
    if not degenerate:
        floor_abs = kappa_floor * akap.max()
        sig = np.where(kap > floor_abs, 1, np.where(kap < -floor_abs, -1, 0))
        nz = np.nonzero(sig)[0]
        pairs = list(zip(nz[:-1], nz[1:]))
        if curve.closed and len(nz) > 1:
            pairs.append((nz[-1], nz[0] + len(kap)))
        for a, b in pairs:
            if sig[a % len(kap)] == sig[b % len(kap)]:
                continue
            idx = np.arange(a, b + 1) % len(kap)
            j_rel = int(np.argmin(akap[idx]))
            i = int(idx[j_rel])
            i2 = int(idx[min(j_rel + 1, len(idx) - 1)])
            if i2 == i:
                i2 = (i + 1) % len(kap)
            denom = kap[i2] - kap[i]
            w = float(np.clip(-kap[i] / denom, 0.0, 1.0)) if denom != 0.0 else 0.5
            step = s[i2] - s[i] if i2 > i else float(np.mean(np.diff(s)))
            s_star = s[i] + w * step
            point = (1.0 - w) * pts[i] + w * pts[i2]
            inflections.append(CriticalPoint(index=i + w, s=float(s_star),
                                             point=(float(point[0]), float(point[1])),
                                             value=0.0, kind="inflection"))

    # graphical (over x1) runs: |slope| below the 80-degree guard
    slope_ok = np.abs(geo.tangent[:, 1]) < SLOPE_TAN80 * np.abs(geo.tangent[:, 0])
    sheets = _runs(slope_ok, min_len=4)

    fingers = []
    sharp_sorted = sorted(sharp, key=lambda c: c.index)
    for fid, v in enumerate(sharp_sorted, start=1):
        i = int(round(v.index))
        lo = 0 if fid == 1 else int(round(sharp_sorted[fid - 2].index))
        hi = curve.n - 1 if fid == len(sharp_sorted) else int(round(sharp_sorted[fid].index))
        probe = 5
        left = pts[max(i - probe, 0), 0]
        right = pts[min(i + probe, curve.n - 1), 0]
        pointing = "right" if pts[i, 0] >= max(left, right) else "left"
        fingers.append(Finger(finger_id=fid, vertex=v, lo_index=lo, hi_index=hi,
                              pointing=pointing))

    return FeatureSet(sharp_vertices=sharp_sorted, flat_vertices=flat, tips=tips,
                      knuckles=knuckles, inflections=inflections, sheets=sheets,
                      fingers=fingers, degenerate_curvature=degenerate)


def _runs(mask, min_len=1):
    out = []
    n = len(mask)
    i = 0
    while i < n:
        if mask[i]:
            j = i
            while j + 1 < n and mask[j + 1]:
                j += 1
            if j - i + 1 >= min_len:
                out.append((i, j))
            i = j + 1
        else:
            i += 1
    return out


def sheets_crossing_axis(curve: PlanarCurve, features: FeatureSet | None = None) -> int:
    """Number of graphical sheets crossing the x2-axis (the multiplicity count)."""
    features = features or detect_features(curve)
    x = curve.points[:, 0]
    count = 0
    for i0, i1 in features.sheets:
        if x[i0:i1 + 1].min() <= 0.0 <= x[i0:i1 + 1].max():
            count += 1
    return count


def is_graph_over_x2(curve: PlanarCurve, rel_tol: float = 1e-12) -> tuple:
    """Whether x2 is monotone along the curve; returns (flag, worst step).

    Roundoff-size backsteps (below rel_tol of the height span) are
    tolerated: exponentially flat tails saturate to their asymptote height
    in floating point while the underlying curve is still strictly
    graphical.
    """
    z = curve.points[:, 1]
    dz = np.diff(z)
    if z[-1] < z[0]:
        dz = -dz
    tol = rel_tol * max(float(z.max() - z.min()), 1.0)
    return bool(np.all(dz >= -tol)), float(dz.min())


# ---------------------------------------------------------------------------
# edge classification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EdgeClass:
    tag: str                      # A1 | A2 | B | UNCLASSIFIED
    inflection_s: float | None = None
    flat_vertex_s: float | None = None
    certificates: dict = field(default_factory=dict)


def _genuine_sign_changes(kap, floor_rel: float = 1e-3):
    """Sign-change locations of kappa, ignoring flips inside the noise floor."""
    floor = floor_rel * np.abs(kap).max()
    sig = np.where(kap > floor, 1, np.where(kap < -floor, -1, 0))
    nz = np.nonzero(sig)[0]
    out = []
    for a, b in zip(nz[:-1], nz[1:]):
        if sig[a] != sig[b]:
            out.append((a + b) // 2)
    return out


def _monotone_fraction(vals):
    d = np.diff(vals)
    if len(d) == 0:
        return 1.0, 1.0
    inc = float(np.mean(d >= -1e-12))
    dec = float(np.mean(d <= 1e-12))
    return inc, dec


def _convex_fraction(s, vals):
    d2 = np.diff(np.diff(vals) / np.diff(s)) / np.diff(0.5 * (s[:-1] + s[1:]))
    if len(d2) == 0:
        return 1.0
    return float(np.mean(d2 >= -1e-8 * max(1.0, np.abs(vals).max())))


def classify_edge(edge: PlanarCurve, noncompact: bool = False,
                  frac_tol: float = 0.98) -> EdgeClass:
    """Tag an edge with its analytic type, trying both orientations.

    Certificates are sampled monotonicity/convexity fractions; the tag is
    assigned when the class pattern holds on at least ``frac_tol`` of the
    samples, otherwise UNCLASSIFIED with diagnostics.
    """
    last_certs = {}
    variants = []
    for flip in (False, True):
        for reflect in (False, True):
            pts = edge.points[::-1].copy() if flip else edge.points.copy()
            if reflect:
                pts[:, 1] = -pts[:, 1]
            variants.append((flip, reflect, PlanarCurve(pts, closed=edge.closed)))
    for flip, reflect, cur in variants:
        geo = geometry(cur)
        interior = slice(2, -2)
        kap = geo.kappa[interior]
        theta = geo.theta[interior]
        theta = theta - 2.0 * math.pi * np.round(np.median(theta) / (2.0 * math.pi))
        s = geo.s[interior]
        sign_changes = _genuine_sign_changes(kap)
        inc_k, _ = _monotone_fraction(kap)
        inc_t, _ = _monotone_fraction(theta)
        conv_t = _convex_fraction(s, theta)
        conv_k = _convex_fraction(s, kap)
        certs = {"kappa_increasing": inc_k, "theta_increasing": inc_t,
                 "theta_convex": conv_t, "kappa_convex": conv_k,
                 "n_inflections": int(len(sign_changes)),
                 "orientation_flipped": flip, "reflected": reflect}
        last_certs = certs
        if noncompact:
            tail_k = abs(kap[0])
            certs["kappa_tail"] = float(tail_k)
            if (len(sign_changes) == 0 and np.all(kap > -1e-10)
                    and inc_k >= frac_tol and inc_t >= frac_tol
                    and tail_k <= 1e-3 * abs(kap[-1])):
                return EdgeClass(tag="B", certificates=certs)
            continue
        if len(sign_changes) == 1 and inc_k >= frac_tol and conv_t >= frac_tol:
            i = sign_changes[0]
            if np.all(theta > -1e-6):
                return EdgeClass(tag="A1", inflection_s=float(s[i]), certificates=certs)
        if (len(sign_changes) == 0 and np.all(kap > -1e-10) and inc_t >= frac_tol
                and conv_k >= frac_tol):
            j = int(np.argmin(kap))
            if 0 < j < len(kap) - 1:
                return EdgeClass(tag="A2", flat_vertex_s=float(s[j]), certificates=certs)
    return EdgeClass(tag="UNCLASSIFIED", certificates=last_certs)


# ---------------------------------------------------------------------------
# finger tracking
# ---------------------------------------------------------------------------

@dataclass
class FingerTrack:
    finger_id: int
    pointing: str
    asymptotes: tuple | None = None
    times: list = field(default_factory=list)
    vertices: list = field(default_factory=list)       # (x1, x2)
    kappas: list = field(default_factory=list)
    thetas: list = field(default_factory=list)
    regions: list = field(default_factory=list)        # FingerRegion or None

    @property
    def vertex_x(self) -> np.ndarray:
        return np.array([v[0] for v in self.vertices])

    def area_pairs(self):
        return [(t, r) for t, r in zip(self.times, self.regions) if r is not None]


def _theta_at(geo, frac_index):
    i = int(frac_index)
    w = frac_index - i
    th = geo.theta
    if i + 1 >= len(th):
        return float(th[-1] % (2.0 * math.pi))
    val = (1.0 - w) * th[i] + w * th[i + 1]
    return float(val % (2.0 * math.pi))


def _finger_region_from_vertex(curve: PlanarCurve, v_index: float, finger_id: int,
                               vertex, asymptotes=None):
    """Walk both ways from the vertex to the flanking x2-axis crossings."""
    x = curve.points[:, 0]
    i = int(round(v_index))
    j_lo = i
    while j_lo > 0 and np.sign(x[j_lo - 1]) == np.sign(x[i]):
        j_lo -= 1
    j_hi = i
    while j_hi < curve.n - 1 and np.sign(x[j_hi + 1]) == np.sign(x[i]):
        j_hi += 1
    if j_lo == 0 or j_hi == curve.n - 1:
        return None
    # exact crossing points by linear interpolation
    def crossing(a, b):
        w = -x[a] / (x[b] - x[a])
        return (1.0 - w) * curve.points[a] + w * curve.points[b]
    p_lo = crossing(j_lo, j_lo - 1)
    p_hi = crossing(j_hi, j_hi + 1)
    arc = np.vstack([[p_lo], curve.points[j_lo:j_hi + 1], [p_hi]])
    arc[0, 0] = 0.0
    arc[-1, 0] = 0.0
    return FingerRegion(finger_id=finger_id, arc=arc, vertex=vertex,
                        asymptotes=asymptotes)


def track_fingers(traj: FlowTrajectory, basepoint=(0.0, 0.0),
                  heights=None) -> list:
    """Match sharp vertices across snapshots into finger tracks.

    Matching is nearest-vertex around a velocity-extrapolated prediction
    with gate 3/|kappa(v)| plus the predicted displacement; initial ids
    order by vertex height so finger i sits between heights i-1 and i.
    """
    first = detect_features(traj[0].curve, basepoint)
    if not first.fingers:
        raise TrackingError("no fingers detected on the first snapshot")
    fingers = sorted(first.fingers, key=lambda f: f.vertex.point[1])
    tracks = []
    for fid, f in enumerate(fingers, start=1):
        asym = None
        if heights is not None and fid < len(heights) + 1:
            asym = (float(heights[fid - 1]), float(heights[fid]))
        tracks.append(FingerTrack(finger_id=fid, pointing=f.pointing, asymptotes=asym))

    prev_positions = [np.array(f.vertex.point) for f in fingers]
    velocities = [np.zeros(2) for _ in fingers]
    prev_t = traj[0].t
    for snap in traj:
        feats = detect_features(snap.curve, basepoint)
        geo = geometry(snap.curve)
        cand = sorted(feats.sharp_vertices, key=lambda c: c.point[1])
        dt = snap.t - prev_t
        used = set()
        for k, track in enumerate(tracks):
            pred = prev_positions[k] + velocities[k] * dt
            best, best_d = None, np.inf
            for ci, c in enumerate(cand):
                if ci in used:
                    continue
                d = math.hypot(c.point[0] - pred[0], c.point[1] - pred[1])
                if d < best_d:
                    best, best_d = ci, d
            if best is None:
                raise TrackingError(f"finger {track.finger_id} lost at t = {snap.t:g}")
            c = cand[best]
            # vertices move at speed ~ |kappa(v)|; allow that plus history
            gate = (3.0 / max(abs(c.value), 1e-12) + 1.5 * abs(c.value) * dt
                    + float(np.hypot(*(velocities[k] * dt))) + 1e-6)
            if best_d > gate:
                raise TrackingError(
                    f"finger {track.finger_id} jumped {best_d:.3g} > gate {gate:.3g}")
            used.add(best)
            pos = np.array(c.point)
            if dt > 0:
                velocities[k] = (pos - prev_positions[k]) / dt
            prev_positions[k] = pos
            track.times.append(snap.t)
            track.vertices.append(c.point)
            track.kappas.append(c.value)
            track.thetas.append(_theta_at(geo, c.index))
            track.regions.append(_finger_region_from_vertex(
                snap.curve, c.index, track.finger_id, c.point, track.asymptotes))
        prev_t = snap.t
    return tracks


# ---------------------------------------------------------------------------
# strip confinement / slope
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StripReport:
    bound: float
    max_height: np.ndarray
    margins: np.ndarray
    verdict: str


def strip_confinement(traj: FlowTrajectory, heights) -> StripReport:
    """Check max |x2| < A = 1 + max |a_i| on every snapshot."""
    bound = 1.0 + max(abs(float(a)) for a in heights)
    sup = np.array([np.abs(s.curve.points[:, 1]).max() for s in traj])
    margins = bound - sup
    verdict = "PASS" if np.all(margins > 0.0) else "FAIL"
    return StripReport(bound=bound, max_height=sup, margins=margins, verdict=verdict)


@dataclass(frozen=True)
class SlopeReport:
    delta: float
    lam: float
    sup_ratio: np.ndarray
    verdict: str


def asymptotic_slope_check(traj: FlowTrajectory, delta: float, lam: float) -> SlopeReport:
    """Verify |x2/x1| < delta wherever |x1| >= lam sqrt(-t), per snapshot."""
    sups = []
    for snap in traj:
        if snap.t >= 0.0:
            raise InvalidInputError("slope check applies to t < 0")
        pts = snap.curve.points
        mask = np.abs(pts[:, 0]) >= lam * math.sqrt(-snap.t)
        if not mask.any():
            sups.append(0.0)
            continue
        sups.append(float(np.abs(pts[mask, 1] / pts[mask, 0]).max()))
    sups = np.array(sups)
    verdict = "PASS" if np.all(sups < delta) else "FAIL"
    return SlopeReport(delta=delta, lam=lam, sup_ratio=sups, verdict=verdict)


# ---------------------------------------------------------------------------
# vertex asymptotics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VertexReport:
    times: np.ndarray
    kappa: np.ndarray
    theta_err: np.ndarray          # |theta(v) - pi/2|
    speed: np.ndarray              # windowed horizontal speed dv1/dt
    kappa_bound: float             # pi / |a_i - a_j|
    speed_bound: float             # 3 / (2A) from the travel-direction lemma
    kappa_margin: np.ndarray       # |kappa| - bound
    speed_ok: np.ndarray


def vertex_asymptotics(track: FingerTrack, heights, window: int = 7) -> VertexReport:
    """Per-time vertex curvature, direction and speed against the sharp bounds."""
    if track.asymptotes is None:
        raise InvalidInputError("track needs asymptote heights")
    a_lo, a_hi = track.asymptotes
    width = abs(a_hi - a_lo)
    bound = math.pi / width
    strip = 1.0 + max(abs(float(a)) for a in heights)
    times = np.array(track.times)
    v1 = track.vertex_x
    speed = _windowed_slope(times, v1, window)
    kap = np.abs(np.array(track.kappas))
    theta_err = np.abs(np.array(track.thetas) - 0.5 * math.pi)
    return VertexReport(times=times, kappa=kap, theta_err=theta_err, speed=speed,
                        kappa_bound=bound, speed_bound=1.5 / strip,
                        kappa_margin=kap - bound,
                        speed_ok=np.abs(speed) >= 1.5 / strip)


def _windowed_slope(t, x, window):
    half = window // 2
    out = np.empty(len(t))
    for i in range(len(t)):
        lo = max(i - half, 0)
        hi = min(i + half + 1, len(t))
        coef = np.polynomial.polynomial.polyfit(t[lo:hi], x[lo:hi], 1)
        out[i] = coef[1]
    return out


# ---------------------------------------------------------------------------
# height decay
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DecayFit:
    slope: float
    intercept: float
    r_squared: float
    passes: bool
    n_points: int


def height_decay_fit(distances: np.ndarray, deviations: np.ndarray,
                     dev_range=(1e-12, 0.05), r2_min: float = 0.98) -> DecayFit:
    """Log-linear fit of sheet height deviation against distance to the vertex.

    Only deviations inside ``dev_range`` enter the fit (below, the values
    drown in roundoff; above, the tail expansion does not apply). Passing
    means a negative slope with R^2 at least ``r2_min``.
    """
    d = np.asarray(distances, dtype=float)
    dev = np.abs(np.asarray(deviations, dtype=float))
    if np.all(dev <= dev_range[0]):
        # already flat everywhere (a line): degenerate pass
        return DecayFit(slope=0.0, intercept=-np.inf, r_squared=1.0, passes=True,
                        n_points=0)
    mask = (dev > dev_range[0]) & (dev < dev_range[1]) & (d > 0)
    if mask.sum() < 8:
        raise NotInRegimeError("not enough samples in the exponential regime")
    x = d[mask]
    y = np.log(dev[mask])
    coef = np.polynomial.polynomial.polyfit(x, y, 1)
    pred = coef[0] + coef[1] * x
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    slope = float(coef[1])
    return DecayFit(slope=slope, intercept=float(coef[0]), r_squared=r2,
                    passes=bool(slope < 0.0 and r2 >= r2_min), n_points=int(mask.sum()))


def sheet_deviation_profile(region: FingerRegion, side: str = "lower"):
    """Distance-to-vertex and |U - a| samples along one edge of a finger region.

    ``side`` picks the edge converging to the lower or upper asymptote; the
    samples come from the region arc, which spans axis crossing to axis
    crossing through the vertex.
    """
    if region.asymptotes is None:
        raise InvalidInputError("region needs asymptote heights")
    a_lo, a_hi = region.asymptotes
    mid = 0.5 * (a_lo + a_hi)
    arc = region.arc
    vx = region.vertex[0]
    if side == "lower":
        sel = arc[arc[:, 1] < mid]
        a = a_lo
    else:
        sel = arc[arc[:, 1] > mid]
        a = a_hi
    dist = np.abs(sel[:, 0] - vx)
    dev = np.abs(sel[:, 1] - a)
    return dist, dev


# ---------------------------------------------------------------------------
# best-fitting reaper and tip limit
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ReaperFit:
    b: float
    intercept: float
    area_fit: AreaSeriesFit
    pointing: str
    width: float
    sym_diff: np.ndarray | None = None
    sym_diff_times: np.ndarray | None = None


def fit_best_reaper(track: FingerTrack, fit_window=None, traj: FlowTrajectory | None = None,
                    slope_tol: float = 0.02) -> ReaperFit:
    """Recover the shift b of the best-fitting reaper from the area law.

    The measured intercept C0 is matched to the closed-form intercept of an
    exact reaper, which is affine in b with slope +-width. Requires the
    measured slope within ``slope_tol`` of -pi. When the trajectory is
    passed, the symmetric-difference area series against the fitted reaper
    is attached.
    """
    if track.asymptotes is None:
        raise InvalidInputError("track needs asymptote heights")
    width = abs(track.asymptotes[1] - track.asymptotes[0])
    fit = area_series(track.area_pairs(), fit_window=fit_window)
    if abs(fit.slope + math.pi) > slope_tol * math.pi:
        raise NotInRegimeError(
            f"area slope {fit.slope:.5f} not within {slope_tol:.0%} of -pi")
    base = reaper_area_intercept(width, 0.0, track.pointing)
    sigma = 1.0 if track.pointing == "right" else -1.0
    b = sigma * (fit.intercept - base) / width
    sym = sym_t = None
    if traj is not None:
        sym_t, sym = _sym_diff_series(track, traj, b)
    return ReaperFit(b=float(b), intercept=fit.intercept, area_fit=fit,
                     pointing=track.pointing, width=width,
                     sym_diff=sym, sym_diff_times=sym_t)


def _sym_diff_series(track: FingerTrack, traj: FlowTrajectory, b: float):
    from .exact import GrimReaperSpec, grim_reaper_point
    a_lo, a_hi = track.asymptotes
    spec = GrimReaperSpec(a_lo=a_lo, a_hi=a_hi, b=b, pointing=track.pointing)
    times, vals = [], []
    for i, t in enumerate(track.times):
        region = track.regions[i]
        if region is None:
            continue
        arc = region.arc
        zs = np.linspace(arc[:, 1].min() + 1e-9, arc[:, 1].max() - 1e-9, 2001)
        v_flow = _arc_graph_over_z(arc, zs)
        k = spec.k
        z_off = zs - spec.midline
        inside = np.abs(z_off) < math.pi / (2.0 * k)
        v_reaper = np.full_like(zs, 0.0)
        v_reaper[inside] = grim_reaper_point(spec, t, z_off[inside])[:, 0]
        sigma = 1.0 if track.pointing == "right" else -1.0
        flow_pos = np.maximum(sigma * v_flow, 0.0)
        reap_pos = np.maximum(sigma * v_reaper, 0.0)
        vals.append(float(np.trapezoid(np.abs(flow_pos - reap_pos), zs)))
        times.append(t)
    return np.array(times), np.array(vals)


def _arc_graph_over_z(arc: np.ndarray, zs: np.ndarray) -> np.ndarray:
    z = arc[:, 1]
    x = arc[:, 0]
    if z[0] > z[-1]:
        z = z[::-1]
        x = x[::-1]
    order = np.argsort(z, kind="stable")
    return np.interp(zs, z[order], x[order])


@dataclass(frozen=True)
class TipLimitReport:
    times: np.ndarray
    residuals: np.ndarray
    decreasing: bool
    final: float
    passes: bool


def tip_limit_check(track: FingerTrack, b: float, final_tol: float = 0.05) -> TipLimitReport:
    """Residual of the tip translation limit v(t) -+ k t e1 -> (b, midline)."""
    if track.asymptotes is None:
        raise InvalidInputError("track needs asymptote heights")
    a_lo, a_hi = track.asymptotes
    k = math.pi / abs(a_hi - a_lo)
    mid = 0.5 * (a_lo + a_hi)
    sigma = 1.0 if track.pointing == "right" else -1.0
    times = np.array(track.times)
    v = np.array(track.vertices)
    res = np.hypot(v[:, 0] + sigma * k * times - b, v[:, 1] - mid)
    # smoothed decrease check: compare block medians to damp mesh jitter
    third = max(len(res) // 3, 1)
    decreasing = bool(np.median(res[:third]) >= np.median(res[-third:]) - 1e-9)
    return TipLimitReport(times=times, residuals=res, decreasing=decreasing,
                          final=float(res[-1]),
                          passes=bool(decreasing and res[-1] <= final_tol))


# ---------------------------------------------------------------------------
# configuration validation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConfigVerdict:
    ok: bool
    failures: list                 # human-readable findings
    patterns: list                 # machine tags

    def __bool__(self):
        return self.ok


def validate_config(spec) -> ConfigVerdict:
    """Check a trombone height pattern for realizability.

    PASS needs at least two fingers and strictly increasing heights. On
    failure the report names the obstruction: degenerate (repeated
    heights), proper nesting of same-parity finger intervals, or the
    spiral/nesting chain forced when a height folds back between its
    neighbors.
    """
    heights = [float(a) for a in spec.heights]
    m = len(heights) - 1
    failures, patterns = [], []
    if m < 2:
        failures.append("fewer than two fingers")
        patterns.append("too-few-fingers")
    for i in range(m):
        if heights[i + 1] == heights[i]:
            failures.append(
                f"heights a_{i} = a_{i + 1} = {heights[i]:g}: degenerate finger "
                "(asymptotes must be separated)")
            patterns.append("degenerate-heights")
    if not failures and all(heights[i] < heights[i + 1] for i in range(m)):
        return ConfigVerdict(ok=True, failures=[], patterns=[])

    if not any(p == "degenerate-heights" for p in patterns):
        # smallest i >= 1 with a rise then a fall, split per the obstruction proof
        for i in range(1, m):
            if heights[i - 1] < heights[i] and heights[i + 1] < heights[i]:
                if heights[i + 1] < heights[i - 1]:
                    failures.append(
                        f"heights ({heights[i - 1]:g}, {heights[i]:g}, {heights[i + 1]:g}): "
                        "proper nesting of fingers")
                    patterns.append("proper-nesting")
                else:
                    failures.append(
                        f"heights ({heights[i - 1]:g}, {heights[i]:g}, {heights[i + 1]:g}): "
                        "spiral and nesting chains")
                    patterns.append("spiral-nesting-chain")
                break
        else:
            if any(heights[i + 1] < heights[i] for i in range(m)):
                failures.append("heights not strictly increasing")
                patterns.append("not-increasing")
    # same-parity interval nesting scan (both orientations point the same way)
    intervals = [(min(heights[i], heights[i + 1]), max(heights[i], heights[i + 1]))
                 for i in range(m)]
    for i in range(m):
        for j in range(i + 2, m, 2):
            lo_i, hi_i = intervals[i]
            lo_j, hi_j = intervals[j]
            if (lo_i < lo_j and hi_j < hi_i) or (lo_j < lo_i and hi_i < hi_j):
                failures.append(
                    f"finger intervals {i + 1} and {j + 1} properly nested with equal parity")
                patterns.append("proper-nesting")
    return ConfigVerdict(ok=False, failures=failures, patterns=patterns)


# ---------------------------------------------------------------------------
# L1 contraction
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ContractionReport:
    times: np.ndarray
    distances: np.ndarray
    verdict: str
    max_step_increase: float       # worst per-flow-step relative increase
    steps_per_sample: int = 1


def l1_contraction_check(series_a, series_b, rel_tol: float = 1e-6,
                         steps_per_sample: int = 1) -> ContractionReport:
    """A(t) between two graph flows must not grow beyond rel_tol per flow step.

    The series are usually sampled coarser than the solver steps; the
    allowance between consecutive samples is prorated by
    ``steps_per_sample`` (budget (1 + rel_tol)^k - 1 over k steps).
    """
    if len(series_a) != len(series_b):
        raise InvalidInputError("series must have equal length")
    times = np.array([g.t for g in series_a])
    tb = np.array([g.t for g in series_b])
    if np.abs(times - tb).max() > 1e-9 * max(1.0, np.abs(times).max()):
        raise InvalidInputError("graph series must share times")
    dist = np.array([l1_graph_distance(a, b) for a, b in zip(series_a, series_b)])
    scale = max(dist.max(), 1e-300)
    ratios = (dist[1:] / np.maximum(dist[:-1], 1e-30 * scale))
    per_step = ratios ** (1.0 / max(steps_per_sample, 1)) - 1.0
    worst = float(per_step.max()) if len(per_step) else 0.0
    verdict = "PASS" if worst <= rel_tol else "FAIL"
    return ContractionReport(times=times, distances=dist, verdict=verdict,
                             max_step_increase=worst,
                             steps_per_sample=steps_per_sample)
