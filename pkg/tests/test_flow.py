"""Steppers, rescaling, avoidance, persistence-facing flow behavior."""

import math

import numpy as np
import pytest

from csflab import analysis, curves, exact, flow
from csflab.errors import (GraphicalityLostError, InvalidInputError, OutOfDomainError,
                           StabilityError)


def unit_circle(n, r=1.0):
    ang = 2.0 * np.pi * np.arange(n) / n
    return curves.PlanarCurve(np.column_stack([r * np.cos(ang), r * np.sin(ang)]),
                              closed=True, embedded=True)


class TestParametricStep:
    def test_circle_single_step(self):
        snap = flow.FlowSnapshot(t=0.0, curve=unit_circle(256))
        out = flow.step_parametric(snap, 1e-6, "explicit")
        r = np.hypot(*out.curve.points.T)
        assert np.abs(r - (1.0 - 1e-6)).max() <= 1e-9

    def test_line_fixed_point(self):
        pts = np.column_stack([np.linspace(0, 1, 64), np.zeros(64)])
        snap = flow.FlowSnapshot(t=0.0, curve=curves.PlanarCurve(pts))
        out = flow.step_parametric(snap, 1e-7, "explicit")
        assert np.abs(out.curve.points - pts).max() <= 1e-14

    def test_cfl_guard(self):
        snap = flow.FlowSnapshot(t=0.0, curve=unit_circle(256))
        h = unit_circle(256).segment_lengths().min()
        with pytest.raises(StabilityError):
            flow.step_parametric(snap, 0.5 * h * h, "explicit")

    def test_semi_implicit_large_step(self):
        snap = flow.FlowSnapshot(t=0.0, curve=unit_circle(256))
        out = flow.step_parametric(snap, 1e-3, "semi_implicit")
        r = np.hypot(*out.curve.points.T)
        assert np.abs(r - math.sqrt(1.0 - 2e-3)).max() <= 1e-3

    def test_unknown_scheme(self):
        snap = flow.FlowSnapshot(t=0.0, curve=unit_circle(64))
        with pytest.raises(InvalidInputError):
            flow.step_parametric(snap, 1e-6, "verlet")


class TestEvolve:
    def test_circle_closed_form(self):
        traj = flow.evolve(unit_circle(256), 0.0, 0.1,
                           flow.EvolveOptions(dt=1e-5, scheme="explicit",
                                              snapshot_dt=0.05))
        r = np.hypot(*traj[-1].curve.points.T)
        assert np.abs(r - math.sqrt(0.8)).max() <= 1e-5

    def test_length_decreases(self):
        traj = flow.evolve(unit_circle(256), 0.0, 0.1,
                           flow.EvolveOptions(dt=1e-3, scheme="semi_implicit",
                                              snapshot_dt=0.02))
        lengths = [s.curve.chord_length() for s in traj]
        assert np.all(np.diff(lengths) < 0)

    def test_area_rate_circle(self):
        traj = flow.evolve(unit_circle(512), 0.0, 0.2,
                           flow.EvolveOptions(dt=1e-5, scheme="explicit",
                                              snapshot_dt=0.02))
        areas = [_polygon_area(s.curve) for s in traj]
        rates = np.diff(areas) / np.diff(traj.times)
        assert np.abs(rates + 2.0 * math.pi).max() <= 1e-3

    def test_area_rate_paperclip(self):
        c = exact.paperclip(-3.0, n=512)
        traj = flow.evolve(c, -3.0, -2.8,
                           flow.EvolveOptions(dt=1e-5, scheme="explicit",
                                              snapshot_dt=0.02))
        areas = [_polygon_area(s.curve) for s in traj]
        rates = np.diff(areas) / np.diff(traj.times)
        assert np.abs(rates + 2.0 * math.pi).max() <= 1e-3

    def test_snapshot_cadence(self):
        traj = flow.evolve(unit_circle(64), 0.0, 0.01,
                           flow.EvolveOptions(dt=1e-4, scheme="semi_implicit",
                                              snapshot_dt=0.002))
        assert len(traj) == 6
        assert np.allclose(np.diff(traj.times), 0.002)

    def test_trajectory_invariants(self):
        snaps = [flow.FlowSnapshot(t=0.0, curve=unit_circle(64)),
                 flow.FlowSnapshot(t=0.0, curve=unit_circle(64))]
        with pytest.raises(InvalidInputError):
            flow.FlowTrajectory(snaps)
        open_curve = curves.PlanarCurve(
            np.column_stack([np.linspace(0, 1, 16), np.zeros(16)]))
        mixed = [flow.FlowSnapshot(t=0.0, curve=unit_circle(64)),
                 flow.FlowSnapshot(t=1.0, curve=open_curve)]
        with pytest.raises(InvalidInputError):
            flow.FlowTrajectory(mixed)


def _polygon_area(curve):
    x, y = curve.points[:, 0], curve.points[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


class TestGraphical:
    def test_constant_stationary(self):
        sheet = flow.SheetGraph(axis="x1", lo=0.0, hi=1.0,
                                values=np.full(101, 0.7), t=0.0)
        out = flow.step_graphical(sheet, 1e-3, flow.DirichletBC(0.7, 0.7))
        assert np.abs(out.values - 0.7).max() <= 1e-14

    def test_linear_heat_oracle(self):
        n = 2049
        x = np.linspace(0.0, 2.0 * np.pi, n)
        eps = 1e-3
        sheet = flow.SheetGraph(axis="x1", lo=0.0, hi=2.0 * np.pi,
                                values=eps * np.sin(x), t=0.0)
        series = flow.evolve_graphical(sheet, 0.1, 5e-5, flow.PeriodicBC())
        target = eps * math.exp(-0.1) * np.sin(x)
        assert np.abs(series[-1].values - target).max() <= 1e-8

    def test_reaper_sheet_translates(self):
        spec = exact.GrimReaperSpec(0.0, 1.0)
        xs = np.linspace(-10.0, 58.0, 4097)
        u0 = exact.grim_reaper_graph(spec, -20.0, "lower", xs)
        sheet = flow.SheetGraph(axis="x1", lo=xs[0], hi=xs[-1], values=u0, t=-20.0)
        bc = flow.ExactTailBC(lambda x, t: exact.grim_reaper_graph(spec, t, "lower", x))
        series = flow.evolve_graphical(sheet, -19.0, 2e-3, bc)
        target = exact.grim_reaper_graph(spec, -19.0, "lower", xs)
        assert np.abs(series[-1].values - target).max() <= 1e-4

    def test_graphicality_guard(self):
        x = np.linspace(-1.0, 1.0, 201)
        steep = flow.SheetGraph(axis="x1", lo=-1.0, hi=1.0, values=10.0 * x, t=0.0)
        with pytest.raises(GraphicalityLostError):
            flow.step_graphical(steep, 1e-4, flow.DirichletBC(-10.0, 10.0))

    def test_cross_validation_parametric_vs_graphical(self):
        # both steppers propagate the same sheet to within O(h^2 + dt)
        spec = exact.GrimReaperSpec(0.0, 1.0)
        xs = np.linspace(-5.0, 55.0, 2049)
        u0 = exact.grim_reaper_graph(spec, -20.0, "lower", xs)
        sheet = flow.SheetGraph(axis="x1", lo=xs[0], hi=xs[-1], values=u0, t=-20.0)
        bc = flow.ExactTailBC(lambda x, t: exact.grim_reaper_graph(spec, t, "lower", x))
        graphical = flow.evolve_graphical(sheet, -19.5, 1e-3, bc)[-1]

        pts = np.column_stack([xs, u0])
        curve = curves.PlanarCurve(pts)

        def motion(t):
            return (np.array([xs[0], exact.grim_reaper_graph(spec, t, "lower", xs[:1])[0]]),
                    np.array([xs[-1], exact.grim_reaper_graph(spec, t, "lower", xs[-1:])[0]]))

        traj = flow.evolve(curve, -20.0, -19.5,
                           flow.EvolveOptions(dt=1e-4, scheme="explicit",
                                              endpoint_motion=motion))
        p = traj[-1].curve.points
        u_param = np.interp(xs[5:-5], p[:, 0], p[:, 1])
        assert np.abs(u_param - graphical.values[5:-5]).max() <= 5e-4


class TestRescale:
    def test_constant_profile(self):
        grid = np.full(501, 1.5)
        sh = flow.SheetGraph(axis="x1", lo=-50.0, hi=50.0, values=grid,
                             t=-math.exp(2.0))
        rs = flow.rescale(sh, rho=8.0)
        assert rs.tau == pytest.approx(-2.0)
        assert np.abs(rs.u - 1.5 * math.exp(-1.0)).max() <= 1e-12

    def test_linear_profile_invariant(self):
        x = np.linspace(-50.0, 50.0, 501)
        sh = flow.SheetGraph(axis="x1", lo=-50.0, hi=50.0, values=0.3 * x,
                             t=-math.exp(2.0))
        rs = flow.rescale(sh, rho=8.0)
        assert np.abs(rs.u - 0.3 * rs.y).max() <= 1e-12

    def test_round_trip(self):
        x = np.linspace(-50.0, 50.0, 501)
        sh = flow.SheetGraph(axis="x1", lo=-50.0, hi=50.0,
                             values=np.sin(0.1 * x) + 1.5, t=-math.exp(2.0))
        rs = flow.rescale(sh, rho=8.0, ny=401)
        back = flow.unrescale(rs)
        from scipy.interpolate import CubicSpline
        ref = CubicSpline(x, sh.values)(back.grid)
        assert np.abs(back.values - ref).max() <= 1e-10

    def test_positive_time_rejected(self):
        sh = flow.SheetGraph(axis="x1", lo=-1.0, hi=1.0, values=np.zeros(11), t=1.0)
        with pytest.raises(OutOfDomainError):
            flow.rescale(sh)


class TestAvoidance:
    def test_concentric_circles(self):
        times = np.linspace(0.0, 0.4, 21)
        tr1 = flow.FlowTrajectory(
            [flow.FlowSnapshot(t=float(s), curve=exact.shrinking_circle(1.0, s, n=256))
             for s in times])
        tr2 = flow.FlowTrajectory(
            [flow.FlowSnapshot(t=float(s), curve=exact.shrinking_circle(2.0, s, n=256))
             for s in times])
        rep = flow.avoidance_check(tr1, tr2)
        assert rep.verdict == "PASS"
        assert rep.distances[-1] == pytest.approx(math.sqrt(3.2) - math.sqrt(0.2),
                                                  abs=2e-3)
        assert np.all(np.diff(rep.distances) > 0)

    def test_identical_not_applicable(self):
        times = np.linspace(0.0, 0.1, 5)
        tr = flow.constant_trajectory(unit_circle(64), times)
        rep = flow.avoidance_check(tr, flow.constant_trajectory(unit_circle(64), times))
        assert rep.verdict == "NOT-APPLICABLE"

    def test_mismatched_grids(self):
        tr1 = flow.constant_trajectory(unit_circle(64), [0.0, 1.0])
        tr2 = flow.constant_trajectory(unit_circle(64), [0.0, 2.0])
        with pytest.raises(InvalidInputError):
            flow.avoidance_check(tr1, tr2)


class TestMonotoneFlux:
    def test_offset_reapers_constant_distance(self):
        z = np.linspace(0.02, 0.98, 97)

        def graph(spec, t):
            return (spec.tip(t)[0]
                    + spec.sigma * np.log(np.cos(spec.k * (z - spec.midline))) / spec.k)

        def bcs(spec):
            def lo(t):
                return float(graph(spec, t)[0])

            def hi(t):
                return float(graph(spec, t)[-1])

            return lo, hi

        r1 = exact.GrimReaperSpec(0.0, 1.0, b=0.0)
        r2 = exact.GrimReaperSpec(0.0, 1.0, b=0.3)
        series = []
        for spec in (r1, r2):
            g = flow.SheetGraph(axis="x2", lo=z[0], hi=z[-1],
                                values=graph(spec, -20.0), t=-20.0)
            lo, hi = bcs(spec)
            series.append(flow.evolve_graph_flux(g, -18.0, None, lo, hi,
                                                 snapshot_dt=0.25))
        rep = analysis.l1_contraction_check(series[0], series[1])
        expected = 0.3 * (z[-1] - z[0])
        assert np.abs(rep.distances - expected).max() <= 1e-9
        assert rep.verdict == "PASS"

    def test_identical_flows_zero(self):
        z = np.linspace(0.02, 0.98, 49)
        spec = exact.GrimReaperSpec(0.0, 1.0)
        vals = (spec.tip(-20.0)[0]
                + np.log(np.cos(spec.k * (z - spec.midline))) / spec.k)
        g = flow.SheetGraph(axis="x2", lo=z[0], hi=z[-1], values=vals, t=-20.0)

        def lo(t):
            return float(spec.tip(t)[0]
                         + math.log(math.cos(spec.k * (z[0] - spec.midline))) / spec.k)

        def hi(t):
            return float(spec.tip(t)[0]
                         + math.log(math.cos(spec.k * (z[-1] - spec.midline))) / spec.k)

        s1 = flow.evolve_graph_flux(g, -19.5, None, lo, hi, snapshot_dt=0.25)
        s2 = flow.evolve_graph_flux(g, -19.5, None, lo, hi, snapshot_dt=0.25)
        rep = analysis.l1_contraction_check(s1, s2)
        assert np.all(rep.distances == 0.0)
