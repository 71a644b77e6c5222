"""Curve representation, resampling, geometry, intersection, distances."""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from csflab import curves, exact
from csflab.curves import (PlanarCurve, _arclength_table, _parametric_spline,
                           curve_length, geometry, hausdorff_distance,
                           resample_arclength, self_intersects)
from csflab.errors import DegenerateCurveError, InvalidInputError


def unit_circle(n, r=1.0, center=(0.0, 0.0)):
    ang = 2.0 * np.pi * np.arange(n) / n
    return PlanarCurve(np.column_stack([center[0] + r * np.cos(ang),
                                        center[1] + r * np.sin(ang)]), closed=True)


class TestPlanarCurve:
    def test_too_few_points(self):
        with pytest.raises(DegenerateCurveError):
            PlanarCurve(np.zeros((4, 2)) + np.arange(4)[:, None])

    def test_repeated_points_rejected(self):
        pts = np.array([[float(i), 0.0] for i in range(8)])
        pts[3] = pts[2]
        with pytest.raises(DegenerateCurveError):
            PlanarCurve(pts)

    def test_nonfinite_rejected(self):
        pts = np.column_stack([np.arange(8.0), np.zeros(8)])
        pts[5, 1] = np.nan
        with pytest.raises(InvalidInputError):
            PlanarCurve(pts)

    def test_points_read_only(self):
        c = unit_circle(16)
        with pytest.raises(ValueError):
            c.points[0, 0] = 42.0


class TestResample:
    def test_circle_equal_chords(self):
        c = resample_arclength(unit_circle(16), 16)
        seg = c.segment_lengths()
        assert np.ptp(seg) <= 1e-12 * seg.mean()

    def test_segment_equispacing(self):
        seg = PlanarCurve(np.column_stack([np.linspace(0, 1, 33), np.zeros(33)]))
        out = resample_arclength(seg, 9)
        assert np.allclose(out.points[:, 0], np.arange(9) / 8.0, atol=1e-12)
        assert np.allclose(out.points[:, 1], 0.0, atol=1e-14)

    def test_reaper_arc_length_vs_quadrature(self):
        # arc of the k = pi reaper covering |z| <= 0.45 (z the height offset)
        spec = exact.GrimReaperSpec(0.0, 1.0)
        z_margin = math.pi / 2.0 - 0.45 * math.pi
        dense = exact.grim_reaper_curve(spec, 0.0, n=4096, z_margin=z_margin)
        out = resample_arclength(dense, 256)
        oracle, err = quad(lambda z: 1.0 / math.cos(math.pi * z), -0.45, 0.45,
                           limit=200)
        assert err < 1e-9
        assert abs(curve_length(out) - oracle) <= 1e-6 * oracle

    def test_equispaced_in_arclength(self):
        spec = exact.GrimReaperSpec(0.0, 1.0)
        dense = exact.grim_reaper_curve(spec, 0.0, n=4096, z_margin=0.2)
        out = resample_arclength(dense, 256)
        sx, sy, u = _parametric_spline(out)
        cum = _arclength_table(sx, sy, u)
        steps = np.diff(cum)
        assert np.ptp(steps) <= 1e-6 * steps.mean()

    def test_endpoints_preserved(self):
        spec = exact.GrimReaperSpec(0.0, 1.0)
        dense = exact.grim_reaper_curve(spec, 0.0, n=1024, z_margin=0.2)
        out = resample_arclength(dense, 100)
        assert np.array_equal(out.points[0], dense.points[0])
        assert np.array_equal(out.points[-1], dense.points[-1])

    def test_total_length_preserved(self):
        c = unit_circle(512, r=1.3)
        out = resample_arclength(c, 700)
        assert abs(curve_length(out) - curve_length(c)) <= 1e-8 * curve_length(c)

    def test_idempotent(self):
        spec = exact.GrimReaperSpec(0.0, 1.0)
        dense = exact.grim_reaper_curve(spec, 0.0, n=4096, z_margin=0.1)
        once = resample_arclength(dense, 512)
        twice = resample_arclength(once, 512)
        assert np.abs(twice.points - once.points).max() <= 1e-8

    def test_degenerate_rejected(self):
        with pytest.raises((DegenerateCurveError, InvalidInputError)):
            resample_arclength(unit_circle(16), 4)


class TestGeometry:
    def test_circle_curvature(self):
        geo = geometry(unit_circle(512, r=2.0))
        assert np.abs(geo.kappa - 0.5).max() <= 1e-4

    def test_line_curvature(self):
        line = PlanarCurve(np.column_stack([np.linspace(0, 3, 64),
                                            0.5 * np.linspace(0, 3, 64)]))
        geo = geometry(line)
        assert np.abs(geo.kappa).max() <= 1e-10

    def test_reaper_tip_curvature(self):
        spec = exact.GrimReaperSpec(0.0, math.pi)     # k = 1
        c = exact.grim_reaper_curve(spec, 0.0, n=1024)
        geo = geometry(c)
        assert abs(np.abs(geo.kappa).max() - 1.0) <= 1e-3

    def test_unit_tangents(self):
        geo = geometry(unit_circle(64))
        norms = np.hypot(geo.tangent[:, 0], geo.tangent[:, 1])
        assert np.abs(norms - 1.0).max() <= 1e-12

    def test_angle_lift_continuous(self):
        geo = geometry(unit_circle(256))
        assert np.abs(np.diff(geo.theta)).max() < math.pi

    def test_theta_prime_matches_kappa(self):
        c = unit_circle(512, r=1.7)
        geo = geometry(c)
        dtheta = np.diff(geo.theta) / np.diff(geo.s)
        kappa_mid = 0.5 * (geo.kappa[1:] + geo.kappa[:-1])
        h = np.diff(geo.s).max()
        assert np.abs(dtheta - kappa_mid).max() <= 2.0 * h

    def test_reversal_flips_kappa_and_theta(self):
        spec = exact.GrimReaperSpec(0.0, 1.0)
        c = exact.grim_reaper_curve(spec, 0.0, n=256, z_margin=0.2)
        geo = geometry(c)
        geo_r = geometry(c.reversed())
        assert np.abs(geo_r.kappa + geo.kappa[::-1]).max() <= 1e-6
        diff = (geo_r.theta - (geo.theta[::-1] + math.pi)) % (2.0 * math.pi)
        diff = np.minimum(diff, 2.0 * math.pi - diff)
        assert np.abs(diff).max() <= 1e-9

    def test_total_turning_closed_ccw(self):
        c = unit_circle(1024)
        geo = geometry(c)
        sx, sy, u = _parametric_spline(c)
        cum = _arclength_table(sx, sy, u)
        ds = np.diff(cum)                      # accurate per-interval arclengths
        kappa_mid = 0.5 * (geo.kappa + np.roll(geo.kappa, -1))
        total = float(np.sum(kappa_mid * ds))
        assert abs(total - 2.0 * math.pi) <= 1e-6


class TestSelfIntersection:
    def test_circle_false(self):
        hit, pair = self_intersects(unit_circle(128))
        assert not hit and pair is None

    def test_figure_eight_true(self):
        t = np.linspace(0, 2 * np.pi, 200, endpoint=False)
        pts = np.column_stack([np.sin(2 * t), np.sin(t)])   # lemniscate-like
        hit, pair = self_intersects(PlanarCurve(pts, closed=True))
        assert hit
        i, j = pair
        crossing = PlanarCurve(pts, closed=True).points[i]
        assert np.hypot(*crossing) < 0.2            # crossing near the origin

    def test_trombone_initial_embedded(self):
        spec = exact.TromboneSpec((0.0, 1.0, 2.0), (0.0, 0.0))
        c = exact.trombone_initial(spec, -20.0, n=2048)
        hit, _ = self_intersects(c)
        assert not hit


class TestDistances:
    def test_hausdorff_self_zero(self):
        c = unit_circle(128)
        assert hausdorff_distance(c, c) == 0.0

    def test_hausdorff_concentric(self):
        d = hausdorff_distance(unit_circle(512), unit_circle(512, r=1.1))
        assert abs(d - 0.1) <= 1e-3

    def test_min_distance(self):
        d = curves.min_distance(unit_circle(256), unit_circle(256, r=2.0))
        assert abs(d - 1.0) <= 1e-3
