"""Gaussian inner product, entropy maximization, areas, L1 distance."""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from csflab import curves, exact, flow, functionals
from csflab.errors import InvalidInputError, RegionUndefinedError
from csflab.functionals import (DEFAULT_QUADRATURE, FingerRegion, area_series, entropy,
                                finger_area_from_arc, gaussian_inner, l1_graph_distance,
                                total_curvature)


def unit_circle(n, r=1.0, center=(0.0, 0.0)):
    ang = 2.0 * np.pi * np.arange(n) / n
    pts = np.column_stack([center[0] + r * np.cos(ang), center[1] + r * np.sin(ang)])
    return curves.PlanarCurve(pts, closed=True)


class TestGaussianInner:
    def test_normalization(self):
        assert gaussian_inner(lambda y: np.ones_like(y), lambda y: np.ones_like(y)) \
            == pytest.approx(1.0, abs=1e-14)

    def test_second_and_fourth_moments(self):
        assert gaussian_inner(lambda y: y, lambda y: y) == pytest.approx(2.0, abs=1e-12)
        f = lambda y: y * y - 2.0
        assert gaussian_inner(f, f) == pytest.approx(8.0, abs=1e-11)

    def test_eigenbasis_orthogonal(self):
        from csflab.spectral import phi1, phi2, phi3
        for a, b in ((phi1, phi2), (phi1, phi3), (phi2, phi3)):
            assert abs(gaussian_inner(a, b)) <= 1e-12

    def test_symmetric_bilinear_positive(self):
        rng = np.random.default_rng(7)
        quad64 = DEFAULT_QUADRATURE
        for _ in range(20):
            coef_f = rng.normal(size=4)
            coef_g = rng.normal(size=4)
            f = np.polynomial.polynomial.polyval(quad64.y, coef_f)
            g = np.polynomial.polynomial.polyval(quad64.y, coef_g)
            assert quad64.inner(f, g) == pytest.approx(quad64.inner(g, f), rel=1e-12)
            assert quad64.inner(f + g, f) == pytest.approx(
                quad64.inner(f, f) + quad64.inner(g, f), rel=1e-9, abs=1e-11)
            assert quad64.norm_sq(f) > 0.0

    def test_sampled_input(self):
        y = np.linspace(-30.0, 30.0, 4001)
        vals = y ** 2
        assert gaussian_inner((y, vals), lambda x: np.ones_like(x)) \
            == pytest.approx(2.0, abs=1e-6)

    def test_nonfinite_rejected(self):
        with pytest.raises(InvalidInputError):
            gaussian_inner(lambda y: np.full_like(y, np.nan), lambda y: y)


class TestEntropy:
    def test_line_density_one(self):
        line = exact.line_curve(0.0, (-10.0, 10.0), n=2001)
        res = entropy(line)
        assert res.value == pytest.approx(1.0, abs=1e-3)

    def test_circle_closed_form(self):
        res = entropy(unit_circle(512))
        assert res.value == pytest.approx(math.sqrt(2.0 * math.pi / math.e), abs=1e-3)
        assert res.lam == pytest.approx(0.5, abs=5e-3)
        assert np.hypot(*res.x0) <= 1e-3

    def test_gap_small(self):
        res = entropy(unit_circle(256))
        assert 0.0 <= res.gap <= 1e-4

    def test_rigid_motion_invariance(self):
        base = unit_circle(256)
        ang = 0.7
        rot = np.array([[math.cos(ang), -math.sin(ang)],
                        [math.sin(ang), math.cos(ang)]])
        moved = curves.PlanarCurve(base.points @ rot.T + np.array([3.0, -2.0]),
                                   closed=True)
        assert entropy(moved).value == pytest.approx(entropy(base).value, abs=1e-6)

    def test_parabolic_rescaling_covariance(self):
        base = unit_circle(256)
        scale = 2.0
        scaled = curves.PlanarCurve(scale * base.points, closed=True)
        r1 = entropy(base)
        r2 = entropy(scaled)
        assert r2.value == pytest.approx(r1.value, abs=1e-6)
        assert r2.lam == pytest.approx(scale ** 2 * r1.lam, rel=2e-2)

    def test_value_at_least_one(self):
        line = exact.line_curve(1.0, (-8.0, 8.0), n=512)
        assert entropy(line).value >= 1.0 - 1e-3


class TestTotalCurvature:
    def test_circle(self):
        assert total_curvature(unit_circle(1024)) == pytest.approx(2.0 * math.pi,
                                                                   abs=1e-4)

    def test_reaper_half_turn(self):
        spec = exact.GrimReaperSpec(0.0, 1.0)
        c = exact.grim_reaper_curve(spec, 0.0, n=4096, z_margin=1e-6)
        assert total_curvature(c) == pytest.approx(math.pi, abs=1e-3)

    def test_trombone_two_turns(self, trombone_spec):
        c = exact.trombone_initial(trombone_spec, -50.0, n=8192)
        assert total_curvature(c) == pytest.approx(2.0 * math.pi, rel=0.02)


class TestFingerArea:
    def test_half_disk(self):
        ang = np.linspace(-math.pi / 2, math.pi / 2, 4097)
        arc = np.column_stack([np.cos(ang), np.sin(ang)])
        arc[0, 0] = 0.0
        arc[-1, 0] = 0.0
        assert finger_area_from_arc(arc) == pytest.approx(math.pi / 2, abs=1e-6)

    def test_exact_reaper_vs_quadrature(self):
        spec = exact.GrimReaperSpec(0.0, 1.0)
        t = -10.0
        curve = exact.grim_reaper_arc(spec, t, n=16384, x_tail=-5.0)
        from csflab import analysis
        feats = analysis.detect_features(curve)
        v = feats.sharp_vertices[0]
        from csflab.analysis import _finger_region_from_vertex
        region = _finger_region_from_vertex(curve, v.index, 1, v.point, (0.0, 1.0))
        k = spec.k
        tip = spec.tip(t)[0]
        oracle, _ = quad(lambda x: (2.0 / k) * np.arccos(np.exp(np.minimum(
            k * (x - tip), 0.0))), 0.0, tip, limit=200)
        assert region.area == pytest.approx(oracle, rel=1e-4)

    def test_wrong_crossing_count(self):
        arc = np.column_stack([np.sin(np.linspace(0, 3 * np.pi, 64)),
                               np.linspace(0, 1, 64)])
        arc[0, 0] = 0.0
        arc[-1, 0] = 0.0
        with pytest.raises(RegionUndefinedError):
            finger_area_from_arc(arc)


def _reaper_region_series(spec, times, n=8192, x_tail=-5.0):
    from csflab.analysis import _finger_region_from_vertex, detect_features
    out = []
    for t in times:
        c = exact.grim_reaper_arc(spec, float(t), n=n, x_tail=x_tail)
        v = detect_features(c).sharp_vertices[0]
        out.append((float(t), _finger_region_from_vertex(c, v.index, 1, v.point,
                                                         (spec.a_lo, spec.a_hi))))
    return out


class TestAreaSeries:
    def test_exact_reaper_slope(self):
        spec = exact.GrimReaperSpec(0.0, 1.0)
        times = np.linspace(-12.0, -10.0, 21)
        fit = area_series(_reaper_region_series(spec, times))
        assert abs(fit.slope + math.pi) <= 1e-3
        assert fit.residual <= 1e-4

    def test_shift_relation(self):
        # intercept difference between shifts b and b + 0.3 is exactly 0.3 |da|
        times = np.linspace(-12.0, -10.0, 11)
        f0 = area_series(_reaper_region_series(exact.GrimReaperSpec(0.0, 1.0, b=0.0),
                                               times))
        f1 = area_series(_reaper_region_series(exact.GrimReaperSpec(0.0, 1.0, b=0.3),
                                               times))
        assert f1.intercept - f0.intercept == pytest.approx(0.3, abs=1e-3)

    def test_closed_form_intercept(self):
        spec = exact.GrimReaperSpec(0.0, 1.0, b=0.0)
        times = np.linspace(-12.0, -10.0, 11)
        fit = area_series(_reaper_region_series(spec, times))
        expected = functionals.reaper_area_intercept(1.0, 0.0, "right")
        assert fit.intercept == pytest.approx(expected, abs=1e-4)


class TestL1GraphDistance:
    def test_zero_and_offset(self):
        z = np.linspace(0.0, 2.0, 201)
        v = flow.SheetGraph(axis="x2", lo=0.0, hi=2.0, values=np.sin(z), t=0.0)
        same = flow.SheetGraph(axis="x2", lo=0.0, hi=2.0, values=np.sin(z), t=0.0)
        offset = flow.SheetGraph(axis="x2", lo=0.0, hi=2.0, values=np.sin(z) + 0.1,
                                 t=0.0)
        assert l1_graph_distance(v, same) == 0.0
        assert l1_graph_distance(v, offset) == pytest.approx(0.2, abs=1e-12)

    def test_triangle_inequality(self):
        rng = np.random.default_rng(11)
        z = np.linspace(0.0, 1.0, 101)
        for _ in range(25):
            a, b, c = (flow.SheetGraph(axis="x2", lo=0.0, hi=1.0,
                                       values=rng.normal(size=101), t=0.0)
                       for _ in range(3))
            assert l1_graph_distance(a, c) <= (l1_graph_distance(a, b)
                                               + l1_graph_distance(b, c) + 1e-12)

    def test_domain_mismatch(self):
        v = flow.SheetGraph(axis="x2", lo=0.0, hi=2.0, values=np.zeros(101), t=0.0)
        w = flow.SheetGraph(axis="x2", lo=0.0, hi=1.0, values=np.zeros(101), t=0.0)
        with pytest.raises(InvalidInputError):
            l1_graph_distance(v, w)


class TestMultiSheetEntropy:
    def test_near_flat_configuration_counts_sheets(self):
        # three long parallel segments 1 apart look like multiplicity three
        xs = np.linspace(-300.0, 300.0, 2001)
        rows = [np.column_stack([xs, np.full_like(xs, h)]) for h in (0.0, 1.0, 2.0)]
        chain = np.vstack([rows[0], rows[1][::-1] + [0.0, 0.0], rows[2]])
        # stitch into one open polyline: offset joints slightly to keep points distinct
        chain = np.vstack([rows[0],
                           [[xs[-1] + 0.5, 0.5]],
                           rows[1][::-1],
                           [[xs[0] - 0.5, 1.5]],
                           rows[2]])
        curve = curves.PlanarCurve(chain)
        res = functionals.entropy(curve)
        assert res.value == pytest.approx(3.0, abs=0.1)
