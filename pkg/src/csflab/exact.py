"""Closed-form curve shortening flows and glued multi-reaper initial data.

Families provided:

* static line ``x2 = a``
* shrinking circle ``r(t) = sqrt(r0^2 - 2t)``
* paper clip, the closed convex solution of ``cosh(x2) = exp(-t) cos(x1)``
  (validated by a flow-residual oracle rather than trusted as given)
* translating grim reaper between asymptotes ``a_lo < a_hi``:
  ``x1 = (1/k) log cos(k z) - k t + b``, ``x2 = z + (a_lo + a_hi)/2`` with
  ``k = pi / (a_hi - a_lo)``; the tip moves horizontally at speed k, toward
  -x1 for a right-pointing reaper
* trombone initial data: m truncated reapers with alternating pointing,
  blended across each shared asymptote where both branches are
  exponentially flat.

Conventions: a left-pointing reaper is the mirror image of the
right-pointing one about the vertical line ``x1 = b``, so its tip sits at
``b + k t`` and it translates toward +x1 going forward in time. Heights are
indexed a_0 < ... < a_m; finger i joins a_{i-1} to a_i and points right
exactly when the lowest tail runs left (and alternating from there).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .curves import PlanarCurve
from .errors import (ExtinctSolutionError, GluingInfeasibleError, InvalidInputError,
                     OutOfDomainError)

Pointing = Literal["left", "right"]


def line_curve(a: float, window=(-1.0, 1.0), n: int = 8) -> PlanarCurve:
    """Samples of the static line {x2 = a} over an x1 window."""
    x = np.linspace(window[0], window[1], n)
    return PlanarCurve(np.column_stack([x, np.full(n, float(a))]), closed=False, embedded=True)


def shrinking_circle(r0: float, t: float, center=(0.0, 0.0), n: int = 512) -> PlanarCurve:
    """Circle of radius sqrt(r0^2 - 2t); extinct at t = r0^2/2."""
    if r0 <= 0:
        raise InvalidInputError("r0 must be positive")
    rsq = r0 * r0 - 2.0 * t
    if rsq <= 0.0:
        raise ExtinctSolutionError(f"circle extinct at t = {r0 * r0 / 2:g}, requested t = {t:g}")
    r = math.sqrt(rsq)
    ang = 2.0 * np.pi * np.arange(n) / n
    pts = np.column_stack([center[0] + r * np.cos(ang), center[1] + r * np.sin(ang)])
    return PlanarCurve(pts, closed=True, embedded=True)


def circle_radius(r0: float, t: float) -> float:
    rsq = r0 * r0 - 2.0 * t
    if rsq <= 0.0:
        raise ExtinctSolutionError(f"circle extinct at t = {r0 * r0 / 2:g}")
    return math.sqrt(rsq)


# ---------------------------------------------------------------------------
# grim reaper
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GrimReaperSpec:
    """Translating soliton between asymptotes a_lo < a_hi with shift b."""

    a_lo: float
    a_hi: float
    b: float = 0.0
    pointing: Pointing = "right"

    def __post_init__(self):
        if not self.a_hi > self.a_lo:
            raise InvalidInputError("need a_lo < a_hi")
        if self.pointing not in ("left", "right"):
            raise InvalidInputError("pointing must be 'left' or 'right'")

    @property
    def width(self) -> float:
        return self.a_hi - self.a_lo

    @property
    def k(self) -> float:
        """Tip curvature = translation speed = pi / width."""
        return math.pi / self.width

    @property
    def midline(self) -> float:
        return 0.5 * (self.a_lo + self.a_hi)

    @property
    def sigma(self) -> int:
        """+1 for right-pointing, -1 for left-pointing."""
        return 1 if self.pointing == "right" else -1

    def tip(self, t: float) -> np.ndarray:
        """Tip position at time t: x1 = b - sigma*k*t, x2 = midline."""
        return np.array([self.b - self.sigma * self.k * t, self.midline])


def grim_reaper_point(spec: GrimReaperSpec, t: float, z):
    """Point(s) of the reaper at height offset z from the midline.

    Right-pointing: (x1, x2) = ((1/k) log cos(k z) - k t + b, z + midline);
    left-pointing mirrors x1 about x1 = b. Requires |z| < pi/(2k).
    """
    z = np.asarray(z, dtype=float)
    k = spec.k
    if np.any(np.abs(z) >= math.pi / (2.0 * k)):
        raise OutOfDomainError("height offset outside (-pi/2k, pi/2k)")
    body = np.log(np.cos(k * z)) / k
    x1 = spec.b + spec.sigma * (body - k * t)
    x2 = z + spec.midline
    return np.stack(np.broadcast_arrays(x1, x2), axis=-1)


def grim_reaper_curve(spec: GrimReaperSpec, t: float, n: int = 1024,
                      z_margin: float = 0.01) -> PlanarCurve:
    """Sampled reaper arc, equispaced in true arclength.

    The arc covers |z| <= pi/(2k) - z_margin/k (z_margin is the margin in
    the unit-width angle variable k*z). Arclength along the reaper has the
    closed form s(z) = (1/k) asinh(tan(k z)), so sampling is exact.
    """
    if n < 8:
        raise InvalidInputError("n must be >= 8")
    k = spec.k
    phi_max = math.pi / 2.0 - z_margin
    s_max = math.asinh(math.tan(phi_max)) / k
    s = np.linspace(-s_max, s_max, n)
    z = np.arctan(np.sinh(k * s)) / k
    pts = grim_reaper_point(spec, t, z)
    return PlanarCurve(pts, closed=False, embedded=True)


def grim_reaper_arc(spec: GrimReaperSpec, t: float, n: int = 4096,
                    x_tail: float | None = None) -> PlanarCurve:
    """Hairpin arc with both tails cut at the abscissa ``x_tail``.

    Unlike :func:`grim_reaper_curve`, the tail extent is set in flow length
    units (the sampler works in the saturation-safe arclength form), so the
    arc can reach far behind the tip, e.g. across the x2-axis.
    """
    if n < 8:
        raise InvalidInputError("n must be >= 8")
    tip1 = spec.tip(t)[0]
    if x_tail is None:
        x_tail = tip1 - spec.sigma * 10.0 * spec.width
    s_hi = _s_at_abscissa(spec, t, x_tail, side=+1)
    s = np.linspace(-s_hi, s_hi, n)
    return PlanarCurve(_arc_points(spec, t, s), closed=False, embedded=True)


def grim_reaper_graph(spec: GrimReaperSpec, t: float, branch: Literal["lower", "upper"], x):
    """Height of one reaper branch as a graph over x1.

    Exact form: the upper branch is a_hi - (1/k) asin(e^{k sigma (x - tip)})
    and the lower branch mirrors it about the midline. Valid where the
    exponent is <= 0 (behind the tip).
    """
    x = np.asarray(x, dtype=float)
    k = spec.k
    tip1 = spec.tip(t)[0]
    expo = k * spec.sigma * (x - tip1)
    if np.any(expo > 1e-12):
        raise OutOfDomainError("x beyond the tip abscissa for this branch")
    dev = np.arcsin(np.minimum(np.exp(expo), 1.0)) / k
    if branch == "upper":
        return spec.a_hi - dev
    if branch == "lower":
        return spec.a_lo + dev
    raise InvalidInputError("branch must be 'lower' or 'upper'")


# ---------------------------------------------------------------------------
# paper clip
# ---------------------------------------------------------------------------

def paperclip(t: float, n: int = 512) -> PlanarCurve:
    """Closed convex curve cosh(x2) = exp(-t) cos(x1), t < 0, counterclockwise.

    Sampled with Chebyshev clustering toward the x-intercepts, then the
    polyline is returned as-is (resample separately if needed). The formula
    is validated by :func:`paperclip_residual`.
    """
    if t >= 0.0:
        raise ExtinctSolutionError("paper clip exists for t < 0 only")
    if n < 16 or n % 2:
        raise InvalidInputError("n must be even and >= 16")
    xmax = math.acos(math.exp(t))
    half = n // 2
    # Chebyshev nodes cluster near the intercepts where the curve turns
    theta = np.pi * (np.arange(half) + 0.5) / half
    x_upper = xmax * np.cos(theta)          # decreasing from ~+xmax to ~-xmax
    y_upper = np.arccosh(np.maximum(np.exp(-t) * np.cos(x_upper), 1.0))
    upper = np.column_stack([x_upper, y_upper])
    lower = np.column_stack([-x_upper, -y_upper])
    pts = np.vstack([[xmax, 0.0], upper, [-xmax, 0.0], lower])
    return PlanarCurve(pts, closed=True, embedded=True)


def paperclip_x_intercept(t: float) -> float:
    if t >= 0.0:
        raise ExtinctSolutionError("paper clip exists for t < 0 only")
    return math.acos(math.exp(t))


def paperclip_residual(t: float, n: int = 512) -> np.ndarray:
    """|normal speed - curvature| at n sampled points, from the level-set form.

    With F = cosh(x2) - e^{-t} cos(x1), the normal speed along grad F/|grad F|
    is -F_t/|grad F| and the curvature component is -div(grad F/|grad F|);
    the flow equation makes their difference vanish identically, so the
    residual measures only whether the adopted formula is actually a flow.
    """
    curve = paperclip(t, n=n)
    x, y = curve.points[:, 0], curve.points[:, 1]
    et = math.exp(-t)
    fx = et * np.sin(x)
    fy = np.sinh(y)
    fxx = et * np.cos(x)
    fyy = np.cosh(y)
    grad = np.hypot(fx, fy)
    div_n = (fxx * fy ** 2 + fyy * fx ** 2) / grad ** 3       # f_xy = 0
    v_normal = -(et * np.cos(x)) / grad
    kappa_component = -div_n
    return np.abs(v_normal - kappa_component)


# ---------------------------------------------------------------------------
# trombone
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TromboneSpec:
    """Heights a_0..a_m and shifts b_1..b_m of a glued multi-reaper flow.

    Only structural consistency is enforced here so that invalid height
    patterns can still be built and fed to the configuration validator;
    :func:`trombone_initial` refuses specs that fail validation.
    """

    heights: tuple
    shifts: tuple
    tail_direction: Pointing = "left"

    def __post_init__(self):
        heights = tuple(float(a) for a in self.heights)
        shifts = tuple(float(b) for b in self.shifts)
        if len(heights) < 2:
            raise InvalidInputError("need at least two heights")
        if len(shifts) != len(heights) - 1:
            raise InvalidInputError("need exactly one shift per finger")
        if not all(map(math.isfinite, heights + shifts)):
            raise InvalidInputError("heights/shifts must be finite")
        if self.tail_direction not in ("left", "right"):
            raise InvalidInputError("tail_direction must be 'left' or 'right'")
        object.__setattr__(self, "heights", heights)
        object.__setattr__(self, "shifts", shifts)

    @property
    def m(self) -> int:
        return len(self.heights) - 1

    def finger_spec(self, i: int) -> GrimReaperSpec:
        """Reaper of finger i (1-based), pointing per the alternation rule."""
        if not 1 <= i <= self.m:
            raise InvalidInputError(f"finger index {i} out of range 1..{self.m}")
        a_lo, a_hi = self.heights[i - 1], self.heights[i]
        if self.tail_direction == "left":
            pointing = "right" if i % 2 == 1 else "left"
        else:
            pointing = "left" if i % 2 == 1 else "right"
        return GrimReaperSpec(a_lo=a_lo, a_hi=a_hi, b=self.shifts[i - 1], pointing=pointing)

    def widths(self) -> np.ndarray:
        return np.diff(np.asarray(self.heights))

    def strip_bound(self) -> float:
        """A = 1 + max |a_i|; the flow stays inside R x (-A, A)."""
        return 1.0 + max(abs(a) for a in self.heights)


def trombone_t_min(spec: TromboneSpec) -> float:
    """Smallest |t0| at which every adjacent tip pair is split by 10x the widest finger."""
    need = 10.0 * float(spec.widths().max())
    lo = 1e-6
    hi = 4.0
    while _min_tip_separation(spec, -hi) < need:
        hi *= 2.0
        if hi > 1e12:
            raise GluingInfeasibleError("tips never separate; check the spec")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _min_tip_separation(spec, -mid) >= need:
            hi = mid
        else:
            lo = mid
    return hi


def _min_tip_separation(spec: TromboneSpec, t: float) -> float:
    tips = [spec.finger_spec(i).tip(t)[0] for i in range(1, spec.m + 1)]
    return min(abs(tips[i + 1] - tips[i]) for i in range(len(tips) - 1))


def gluing_height(spec: TromboneSpec, t0: float) -> float:
    """Flatness level h at which adjacent branches are truncated and blended.

    h = exp(-min_i k_i |t0| / 2) clipped to [1e-8, min width / 10]; at the
    deep times the gluing is meant for, this clips to 1e-8 and the blend
    perturbs the curve below mesh resolution.
    """
    kmin = min(spec.finger_spec(i).k for i in range(1, spec.m + 1))
    h = math.exp(-0.5 * kmin * abs(t0))
    wmin = float(spec.widths().min())
    return float(np.clip(h, 1e-8, wmin / 10.0))


def _smoothstep(x):
    """Quintic smoothstep, C^2 ramp 0 -> 1 on [0, 1]."""
    x = np.clip(x, 0.0, 1.0)
    return x * x * x * (10.0 + x * (-15.0 + 6.0 * x))


def _log_cosh(u):
    """log cosh(u), saturation-safe for large |u|."""
    a = np.abs(u)
    return a + np.log1p(np.exp(-2.0 * a)) - math.log(2.0)


def _arc_points(reaper: GrimReaperSpec, t: float, s: np.ndarray) -> np.ndarray:
    """Reaper points from signed arclength s measured from the tip.

    Closed forms z(s) = (2/k) atan(tanh(ks/2)) and
    x(s) = tip - sigma (1/k) log cosh(ks) stay finite arbitrarily far down
    the tails, unlike the height parametrization, whose offset from the
    asymptote underflows.
    """
    k = reaper.k
    z_off = 2.0 * np.arctan(np.tanh(0.5 * k * s)) / k
    x = reaper.tip(t)[0] - reaper.sigma * _log_cosh(k * s) / k
    return np.column_stack([x, z_off + reaper.midline])


def _s_at_height_gap(reaper: GrimReaperSpec, gap: float, side: int) -> float:
    """Signed arclength where the branch sits ``gap`` above/below its asymptote.

    side = -1 for the lower branch (z = a_lo + gap), +1 for the upper.
    """
    k = reaper.k
    phi = math.pi / 2.0 - k * gap       # |k z_off| at the requested height
    return side * math.asinh(math.tan(phi)) / k


def _s_at_abscissa(reaper: GrimReaperSpec, t: float, x: float, side: int) -> float:
    """Signed arclength of the branch point with abscissa x (behind the tip)."""
    k = reaper.k
    u = k * reaper.sigma * (reaper.tip(t)[0] - x)
    if u <= 0.0:
        raise GluingInfeasibleError("abscissa does not clear the tip")
    # arccosh(e^u) without overflow
    mag = (u + math.log1p(math.sqrt(max(1.0 - math.exp(-2.0 * u), 0.0)))) / k
    return side * mag


def _arc_by_arclength(reaper: GrimReaperSpec, t: float, s_lo: float, s_hi: float,
                      spacing: float) -> np.ndarray:
    count = max(int(math.ceil((s_hi - s_lo) / spacing)), 8)
    s = np.linspace(s_lo, s_hi, count + 1)
    return _arc_points(reaper, t, s)


def _branch_threshold(reaper: GrimReaperSpec, t: float, h: float) -> float:
    """Abscissa where the branch deviation from its asymptote equals h."""
    k = reaper.k
    tip1 = reaper.tip(t)[0]
    return tip1 + reaper.sigma * math.log(math.sin(k * h)) / k


def trombone_initial(spec: TromboneSpec, t0: float, n: int = 4096,
                     tail_extent: float | None = None) -> PlanarCurve:
    """Glued initial curve: a graph x1 = V(x2) over (a_0, a_m).

    Each finger contributes an exact reaper arc truncated where it is h-close
    to a shared asymptote; across each interior asymptote the two adjacent
    branches (as graphs over x1) are blended with a quintic smoothstep on
    the overlap where both sit within h of the asymptote. The two tails are
    cut at |x1| = tail_extent (default: the farthest tip abscissa).
    """
    from .analysis import validate_config   # local import to avoid a cycle

    verdict = validate_config(spec)
    if not verdict.ok:
        raise InvalidInputError("invalid trombone spec: " + "; ".join(verdict.failures))
    if t0 >= 0.0:
        raise InvalidInputError("t0 must be negative")
    t_min = trombone_t_min(spec)
    if abs(t0) < t_min:
        raise GluingInfeasibleError(
            f"|t0| = {abs(t0):g} below the feasibility time {t_min:g} (tips overlap)")

    h = gluing_height(spec, t0)
    fingers = [spec.finger_spec(i) for i in range(1, spec.m + 1)]
    tips = np.array([f.tip(t0)[0] for f in fingers])
    if tail_extent is None:
        tail_extent = float(np.abs(tips).max())

    # arclength spans per finger, then a common sampling pitch
    spans = []
    for idx, reaper in enumerate(fingers):
        if idx == 0:
            tail_x = -tail_extent if reaper.pointing == "right" else tail_extent
            s_lo = _s_at_abscissa(reaper, t0, tail_x, side=-1)
        else:
            s_lo = _s_at_height_gap(reaper, h, side=-1)
        if idx == len(fingers) - 1:
            tail_x = -tail_extent if reaper.pointing == "right" else tail_extent
            s_hi = _s_at_abscissa(reaper, t0, tail_x, side=+1)
        else:
            s_hi = _s_at_height_gap(reaper, h, side=+1)
        spans.append((s_lo, s_hi))
    total = sum(hi - lo for lo, hi in spans)
    spacing_hint = total / (2.0 * n)
    pieces = [_arc_by_arclength(reaper, t0, lo, hi, spacing_hint)
              for reaper, (lo, hi) in zip(fingers, spans)]

    # blend segments across interior asymptotes
    blends = []
    for i in range(spec.m - 1):
        below, above = fingers[i], fingers[i + 1]
        a_shared = spec.heights[i + 1]
        x_below = _branch_threshold(below, t0, h)    # finger i end (|U-a| = h)
        x_above = _branch_threshold(above, t0, h)    # finger i+1 start
        lo, hi = min(x_below, x_above), max(x_below, x_above)
        if hi - lo < 4.0 * spacing_hint:
            raise GluingInfeasibleError("blend window collapsed; |t0| too small")
        count = max(int(math.ceil((hi - lo) / spacing_hint)), 8)
        x = np.linspace(x_below, x_above, count + 1)[1:-1]
        u_below = grim_reaper_graph(below, t0, "upper", x)
        u_above = grim_reaper_graph(above, t0, "lower", x)
        w = _smoothstep(np.abs(x - x_below) / abs(x_above - x_below))
        y = (1.0 - w) * u_below + w * u_above
        assert np.all(np.abs(y - a_shared) <= h + 1e-15)
        blends.append(np.column_stack([x, y]))

    chunks = [pieces[0]]
    for i in range(spec.m - 1):
        chunks.append(blends[i])
        chunks.append(pieces[i + 1])
    pts = np.vstack(chunks)

    # drop duplicate junction points
    keep = np.ones(len(pts), dtype=bool)
    d = np.hypot(*(np.diff(pts, axis=0).T))
    keep[1:] = d > 1e-13
    curve = PlanarCurve(pts[keep], closed=False, embedded=True)

    from .curves import resample_arclength
    return resample_arclength(curve, n)


def trombone_endpoint_heights(spec: TromboneSpec, t: float, x_lo: float, x_hi: float):
    """Exact tail heights at fixed abscissas (lower tail at x_lo, upper at x_hi)."""
    first = spec.finger_spec(1)
    last = spec.finger_spec(spec.m)
    y_lo = grim_reaper_graph(first, t, "lower", np.array([x_lo]))[0]
    y_hi = grim_reaper_graph(last, t, "upper", np.array([x_hi]))[0]
    return y_lo, y_hi


def sheet_profile_exact(spec: TromboneSpec, sheet: int, x, t: float):
    """Ancient-regime profile of sheet ``sheet`` (0..m) over abscissas x.

    Superposition of the exact corrections from the (at most two) adjacent
    reaper branches; valid while x stays behind both tips. This is what the
    sheet evolution is initialized and boundary-pinned with.
    """
    x = np.asarray(x, dtype=float)
    if not 0 <= sheet <= spec.m:
        raise InvalidInputError(f"sheet index {sheet} out of range 0..{spec.m}")
    u = np.full_like(x, float(spec.heights[sheet]))
    if sheet >= 1:
        below = spec.finger_spec(sheet)          # approaches a_sheet from below
        u -= float(spec.heights[sheet]) - grim_reaper_graph(below, t, "upper", x)
    if sheet <= spec.m - 1:
        above = spec.finger_spec(sheet + 1)      # approaches a_sheet from above
        u += grim_reaper_graph(above, t, "lower", x) - float(spec.heights[sheet])
    return u


def trombone_profile(spec: TromboneSpec, t0: float, z, n: int = 8192,
                     tail_extent: float | None = None):
    """V(z) with x1 = V(x2) sampled from the glued initial curve."""
    z = np.asarray(z, dtype=float)
    curve = trombone_initial(spec, t0, n=n, tail_extent=tail_extent)
    x2 = curve.points[:, 1]
    if np.any(np.diff(x2) <= 0):
        order = np.argsort(x2, kind="stable")
        x2 = x2[order]
        x1 = curve.points[order, 0]
    else:
        x1 = curve.points[:, 0]
    if z.min() < x2[0] or z.max() > x2[-1]:
        raise OutOfDomainError("requested heights outside the sampled graph")
    return np.interp(z, x2, x1)
