"""Closed-form solutions: line, circle, reaper, paper clip, trombone gluing."""

import math

import mpmath as mp
import numpy as np
import pytest

from csflab import analysis, curves, exact, flow
from csflab.errors import (ExtinctSolutionError, GluingInfeasibleError,
                           InvalidInputError, OutOfDomainError)


class TestLineAndCircle:
    def test_line_samples(self):
        c = exact.line_curve(0.0, (-1.0, 1.0), n=8)
        assert np.allclose(c.points[:, 1], 0.0)
        assert c.points[0, 0] == -1.0 and c.points[-1, 0] == 1.0

    def test_line_flat(self):
        geo = curves.geometry(exact.line_curve(2.0, (-3.0, 3.0), n=32))
        assert np.abs(geo.kappa).max() <= 1e-12

    def test_circle_radius_law(self):
        c = exact.shrinking_circle(2.0, 1.5, n=64)
        assert np.allclose(np.hypot(*c.points.T), 1.0, atol=1e-14)

    def test_circle_extinct(self):
        with pytest.raises(ExtinctSolutionError):
            exact.shrinking_circle(1.0, 0.5)


class TestGrimReaper:
    def test_tip_position(self):
        spec = exact.GrimReaperSpec(0.0, 1.0)
        assert np.allclose(exact.grim_reaper_point(spec, 0.0, 0.0), [0.0, 0.5])
        assert spec.k == pytest.approx(math.pi)

    def test_tip_translates(self):
        spec = exact.GrimReaperSpec(0.0, 1.0)
        assert np.allclose(exact.grim_reaper_point(spec, -1.0, 0.0), [math.pi, 0.5])

    def test_profile_value(self):
        spec = exact.GrimReaperSpec(0.0, 1.0)
        p = exact.grim_reaper_point(spec, 0.0, 0.49)
        expected = math.log(math.cos(0.49 * math.pi)) / math.pi
        assert p[0] == pytest.approx(expected, abs=1e-12)
        assert p[0] == pytest.approx(-1.1015, abs=1e-3)

    def test_out_of_domain(self):
        spec = exact.GrimReaperSpec(0.0, 1.0)
        with pytest.raises(OutOfDomainError):
            exact.grim_reaper_point(spec, 0.0, 0.5)

    def test_left_pointing_mirror(self):
        right = exact.GrimReaperSpec(0.0, 1.0, b=0.7, pointing="right")
        left = exact.GrimReaperSpec(0.0, 1.0, b=0.7, pointing="left")
        pr = exact.grim_reaper_point(right, -2.0, 0.2)
        pl = exact.grim_reaper_point(left, -2.0, 0.2)
        assert pl[0] == pytest.approx(2 * 0.7 - pr[0], abs=1e-12)
        assert pl[1] == pr[1]

    def test_soliton_property_short_run(self):
        # accumulated normal motion over dt = 0.01 equals the rigid translate
        spec = exact.GrimReaperSpec(0.0, math.pi)     # k = 1
        curve = exact.grim_reaper_curve(spec, 0.0, n=2048, z_margin=0.01)
        z_ends = (curve.points[0, 1] - spec.midline, curve.points[-1, 1] - spec.midline)

        def motion(t):
            return (exact.grim_reaper_point(spec, t, z_ends[0]),
                    exact.grim_reaper_point(spec, t, z_ends[1]))

        traj = flow.evolve(curve, 0.0, 0.01,
                           flow.EvolveOptions(dt=1e-5, scheme="explicit",
                                              endpoint_motion=motion))
        reference = exact.grim_reaper_curve(spec, 0.01, n=4096, z_margin=0.01)
        assert curves.hausdorff_distance(traj[-1].curve, reference) <= 1e-4

    def test_tip_curvature(self):
        spec = exact.GrimReaperSpec(0.0, 1.0)
        geo = curves.geometry(exact.grim_reaper_curve(spec, 0.0, n=1024))
        assert abs(np.abs(geo.kappa).max() - spec.k) <= 1e-3 * spec.k

    def test_angle_distance_law_sample(self):
        # pi/2 - |phi| trapped between e^{-d} and e^{-0.98 d} far down the tail
        mp.mp.dps = 300
        eps = mp.mpf(10) ** -80
        phi = mp.pi / 2 - eps
        d = mp.sqrt(phi ** 2 + mp.log(mp.cos(phi)) ** 2)
        assert mp.e ** (-d) <= eps <= mp.e ** (mp.mpf("-0.98") * d)


class TestPaperclip:
    def test_x_intercepts(self):
        x_star = exact.paperclip_x_intercept(-5.0)
        assert x_star == pytest.approx(math.acos(math.exp(-5.0)), abs=1e-14)
        assert x_star == pytest.approx(math.pi / 2 - math.exp(-5.0), abs=1e-6)

    def test_two_reaper_asymptote(self):
        # upper arc approaches -t + log cos(x1) + log 2 as t -> -inf
        t = -30.0
        x = np.linspace(-1.2, 1.2, 101)
        upper = np.arccosh(np.exp(-t) * np.cos(x))
        approx = -t + np.log(np.cos(x)) + math.log(2.0)
        assert np.abs(upper - approx).max() <= 1e-6

    def test_flow_residual(self, paperclip_curve):
        res = exact.paperclip_residual(-3.0, n=512)
        assert res.max() <= 1e-6

    def test_extinct(self):
        with pytest.raises(ExtinctSolutionError):
            exact.paperclip(0.0)

    def test_convex_closed_embedded(self, paperclip_curve):
        hit, _ = curves.self_intersects(paperclip_curve)
        assert not hit
        geo = curves.geometry(paperclip_curve)
        assert np.all(geo.kappa > 0)


class TestTrombone:
    def test_tip_positions(self, trombone_spec):
        t0 = -20.0
        c = exact.trombone_initial(trombone_spec, t0, n=4096)
        feats = analysis.detect_features(c)
        got = sorted([v.point for v in feats.sharp_vertices], key=lambda p: p[1])
        tips = [trombone_spec.finger_spec(i).tip(t0) for i in (1, 2)]
        for (gx, gy), want in zip(got, tips):
            assert abs(gx - want[0]) <= 5e-3
            assert abs(gy - want[1]) <= 5e-3

    def test_symmetric_spec_symmetry(self):
        spec = exact.TromboneSpec((0.0, 1.0, 2.0), (0.0, 0.0))
        c = exact.trombone_initial(spec, -20.0, n=4096)
        image = np.column_stack([-c.points[::-1, 0], 2.0 - c.points[::-1, 1]])
        assert np.abs(image - c.points).max() <= 1e-8

    def test_graphical_and_embedded(self, trombone_spec):
        c = exact.trombone_initial(trombone_spec, -20.0, n=4096)
        ok, _ = analysis.is_graph_over_x2(c)
        assert ok
        hit, _ = curves.self_intersects(c)
        assert not hit

    def test_strip_and_theta_pattern(self, trombone_spec):
        c = exact.trombone_initial(trombone_spec, -20.0, n=4096)
        assert np.abs(c.points[:, 1]).max() < trombone_spec.strip_bound()
        geo = curves.geometry(c)
        # graphicality: theta strictly inside (0, pi) at resolved samples
        assert geo.theta.min() > -1e-9
        assert geo.theta.max() < math.pi + 1e-9
        # alternation: theta rises to ~pi across finger 1 then falls back
        feats = analysis.detect_features(c)
        infl = feats.inflections
        assert len(infl) == 1
        i_infl = int(round(infl[0].index))
        assert np.all(np.diff(geo.theta[5:i_infl - 5]) > -1e-9)
        assert np.all(np.diff(geo.theta[i_infl + 5:-5]) < 1e-9)

    def test_gluing_infeasible(self, trombone_spec):
        with pytest.raises(GluingInfeasibleError):
            exact.trombone_initial(trombone_spec, -1.0, n=2048)

    def test_invalid_spec_rejected(self):
        spec = exact.TromboneSpec((0.0, 2.0, 1.0), (0.0, 0.0))
        with pytest.raises(InvalidInputError):
            exact.trombone_initial(spec, -20.0)

    def test_blend_stays_within_gluing_height(self, trombone_spec):
        t0 = -20.0
        c = exact.trombone_initial(trombone_spec, t0, n=4096)
        h = exact.gluing_height(trombone_spec, t0)
        mid = c.points[np.abs(c.points[:, 1] - 1.0) < h]
        assert len(mid) > 0       # the blend region crosses the shared asymptote

    def test_entropy_near_sheet_count(self, trombone_entropy):
        assert 2.9 <= trombone_entropy.value <= 3.0

    def test_sheet_profile_superposition(self, trombone_spec):
        x = np.linspace(-40.0, 40.0, 101)
        u1 = exact.sheet_profile_exact(trombone_spec, 1, x, -100.0)
        assert np.abs(u1 - 1.0).max() <= 1e-12
        u0 = exact.sheet_profile_exact(trombone_spec, 0, x, -100.0)
        assert np.abs(u0).max() <= 1e-12
