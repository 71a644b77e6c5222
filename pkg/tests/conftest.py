"""Shared fixtures: the expensive reference runs, computed once per session."""

import math

import numpy as np
import pytest

from csflab import analysis, exact, flow, functionals
from csflab.cli import run_sheet_pipeline

HEIGHTS = (0.0, 1.0, 2.0)
SHIFTS = (0.3, -0.2)


@pytest.fixture(scope="session")
def trombone_spec():
    return exact.TromboneSpec(HEIGHTS, SHIFTS, "left")


def trombone_tail_motion(spec, curve):
    p0 = curve.points[0].copy()
    p1 = curve.points[-1].copy()

    def motion(t):
        y_lo, y_hi = exact.trombone_endpoint_heights(spec, t, p0[0], p1[0])
        return np.array([p0[0], y_lo]), np.array([p1[0], y_hi])

    return motion


@pytest.fixture(scope="session")
def trombone_run(trombone_spec):
    """Main reference run: glued two-finger flow from t = -60 to -10."""
    curve = exact.trombone_initial(trombone_spec, -60.0, n=12288)
    opts = flow.EvolveOptions(
        dt=2e-3, scheme="explicit", snapshot_dt=0.5,
        endpoint_motion=trombone_tail_motion(trombone_spec, curve),
        monitor_embedded=True)
    return flow.evolve(curve, -60.0, -10.0, opts)


@pytest.fixture(scope="session")
def trombone_tracks(trombone_run, trombone_spec):
    return analysis.track_fingers(trombone_run, heights=trombone_spec.heights)


@pytest.fixture(scope="session")
def circle_acceptance_run():
    """Unit circle, N = 512, dt = 1e-6, evolved to t = 0.3."""
    curve = exact.shrinking_circle(1.0, 0.0, n=512)
    opts = flow.EvolveOptions(dt=1e-6, scheme="explicit", snapshot_dt=0.05)
    return flow.evolve(curve, 0.0, 0.3, opts)


@pytest.fixture(scope="session")
def reaper_acceptance_run():
    """Unit-speed reaper (k = 1), N = 2048, dt = 1e-5, evolved over 1 time unit."""
    spec = exact.GrimReaperSpec(0.0, math.pi)     # width pi -> k = 1
    curve = exact.grim_reaper_curve(spec, 0.0, n=2048, z_margin=0.01)
    z_lo = curve.points[0, 1] - spec.midline
    z_hi = curve.points[-1, 1] - spec.midline

    def motion(t):
        return (exact.grim_reaper_point(spec, t, z_lo),
                exact.grim_reaper_point(spec, t, z_hi))

    opts = flow.EvolveOptions(dt=1e-5, scheme="explicit", snapshot_dt=0.25,
                              endpoint_motion=motion)
    traj = flow.evolve(curve, 0.0, 1.0, opts)
    reference = exact.grim_reaper_curve(spec, 1.0, n=8192, z_margin=0.01)
    return {"spec": spec, "traj": traj, "reference": reference}


@pytest.fixture(scope="session")
def sheet_pipelines():
    """Rescaled-sheet mode data for every sheet of the reference trombone."""
    out = {}
    for sheet in (0, 1, 2):
        track, rescaled, rhos, rho_primes = run_sheet_pipeline(
            HEIGHTS, SHIFTS, "left", sheet,
            tau_start=-7.0, tau_end=-4.0, snapshots=51,
            rho_end=10.2, delta=0.4, nx=2048, ny=801)
        out[sheet] = {"track": track, "rescaled": rescaled,
                      "rhos": rhos, "rho_primes": rho_primes}
    return out


@pytest.fixture(scope="session")
def contraction_pair(trombone_spec, trombone_tracks):
    """Graph flows of the reference trombone and its fitted-shift twin."""
    fitted = []
    for track in trombone_tracks:
        fit = analysis.fit_best_reaper(track, fit_window=(-50.0, -25.0))
        fitted.append(fit.b)
    spec_b = exact.TromboneSpec(HEIGHTS, tuple(fitted), "left")

    delta = 0.05
    z = np.linspace(HEIGHTS[0] + delta, HEIGHTS[-1] - delta, 191)

    def bc_pair(spec):
        f1 = spec.finger_spec(1)
        fm = spec.finger_spec(spec.m)

        def lo(t):
            return float(f1.tip(t)[0]
                         + f1.sigma * math.log(math.cos(f1.k * (z[0] - f1.midline))) / f1.k)

        def hi(t):
            return float(fm.tip(t)[0]
                         + fm.sigma * math.log(math.cos(fm.k * (z[-1] - fm.midline))) / fm.k)

        return lo, hi

    series = []
    h = z[1] - z[0]
    dt_cfl = 0.45 * h * h
    for spec in (trombone_spec, spec_b):
        vals = exact.trombone_profile(spec, -50.0, z)
        graph = flow.SheetGraph(axis="x2", lo=z[0], hi=z[-1], values=vals, t=-50.0)
        lo, hi = bc_pair(spec)
        series.append(flow.evolve_graph_flux(graph, -10.0, None, lo, hi, snapshot_dt=0.5))
    steps_per_sample = int(math.ceil(0.5 / dt_cfl))
    return {"series_a": series[0], "series_b": series[1],
            "steps_per_sample": steps_per_sample, "spec_b": spec_b}


@pytest.fixture(scope="session")
def trombone_entropy(trombone_spec):
    curve = exact.trombone_initial(trombone_spec, -100.0, n=8192)
    return functionals.entropy(curve)


@pytest.fixture(scope="session")
def paperclip_curve():
    return exact.paperclip(-3.0, n=512)
