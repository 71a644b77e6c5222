"""Command-line entry point.

Subcommands: exact, evolve, spectral, entropy, fit, verify, plot. Each
takes ``--config path`` plus ``--set key=value`` overrides; the only
environment variable honored is CSFLAB_OUTDIR, the root for relative
output paths. Configs are flat key = value files with strict schemas.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import analysis, exact, flow, functionals, persist, spectral, svgplot
from .config import ConfigError, load_config
from .errors import CsfError

_FAMILY_KEYS = {
    "family": ("str", None),
    "n": ("int", 512),
    "r0": ("float", 1.0),
    "t": ("float", 0.0),
    "height": ("float", 0.0),
    "window_lo": ("float", -1.0),
    "window_hi": ("float", 1.0),
    "a_lo": ("float", 0.0),
    "a_hi": ("float", 1.0),
    "b": ("float", 0.0),
    "pointing": ("str", "right"),
    "heights": ("floatlist", ()),
    "shifts": ("floatlist", ()),
    "tail_direction": ("str", "left"),
    "t0": ("float", -50.0),
    "tail_extent": ("float", 0.0),
}


def _outdir() -> Path:
    return Path(os.environ.get("CSFLAB_OUTDIR", "."))


def _resolve(path: str) -> Path:
    p = Path(path)
    out = p if p.is_absolute() else _outdir() / p
    out.parent.mkdir(parents=True, exist_ok=True)
    return out


def build_curve(cfg) -> tuple:
    """Construct the configured exact-solution curve; returns (curve, meta)."""
    fam = cfg["family"]
    if fam == "circle":
        curve = exact.shrinking_circle(cfg["r0"], cfg["t"], n=cfg["n"])
        return curve, {"family": fam, "r0": cfg["r0"], "t": cfg["t"]}
    if fam == "line":
        curve = exact.line_curve(cfg["height"], (cfg["window_lo"], cfg["window_hi"]),
                                 n=cfg["n"])
        return curve, {"family": fam, "height": cfg["height"]}
    if fam == "reaper":
        spec = exact.GrimReaperSpec(cfg["a_lo"], cfg["a_hi"], cfg["b"], cfg["pointing"])
        return exact.grim_reaper_curve(spec, cfg["t"], n=cfg["n"]), {
            "family": fam, "k": spec.k, "t": cfg["t"]}
    if fam == "paperclip":
        return exact.paperclip(cfg["t"], n=cfg["n"]), {"family": fam, "t": cfg["t"]}
    if fam == "trombone":
        spec = exact.TromboneSpec(cfg["heights"], cfg["shifts"], cfg["tail_direction"])
        extent = cfg["tail_extent"] or None
        curve = exact.trombone_initial(spec, cfg["t0"], n=cfg["n"], tail_extent=extent)
        return curve, {"family": fam, "t0": cfg["t0"], "m": spec.m}
    raise ConfigError(f"unknown family {fam!r}")


def _tail_pin(cfg):
    """Endpoint motion callable for open exact families, or None."""
    fam = cfg["family"]
    if fam == "reaper":
        spec = exact.GrimReaperSpec(cfg["a_lo"], cfg["a_hi"], cfg["b"], cfg["pointing"])
        curve, _ = build_curve(cfg)
        z_lo = curve.points[0, 1] - spec.midline
        z_hi = curve.points[-1, 1] - spec.midline

        def motion(t):
            return (exact.grim_reaper_point(spec, t, z_lo),
                    exact.grim_reaper_point(spec, t, z_hi))
        return motion
    if fam == "trombone":
        spec = exact.TromboneSpec(cfg["heights"], cfg["shifts"], cfg["tail_direction"])
        curve, _ = build_curve(cfg)
        p0 = curve.points[0].copy()
        p1 = curve.points[-1].copy()

        def motion(t):
            y_lo, y_hi = exact.trombone_endpoint_heights(spec, t, p0[0], p1[0])
            return (np.array([p0[0], y_lo]), np.array([p1[0], y_hi]))
        return motion
    return None


def cmd_exact(args) -> int:
    cfg = load_config(args.config, {**_FAMILY_KEYS, "out": ("str", None)}, args.set)
    curve, meta = build_curve(cfg)
    out = _resolve(cfg["out"])
    persist.write_curve(out, curve)
    meta["points"] = curve.n
    meta["out"] = str(out)
    print(json.dumps(meta, sort_keys=True))
    return 0


_EVOLVE_KEYS = {
    **_FAMILY_KEYS,
    "t1": ("float", 0.0),
    "dt": ("float", 1e-4),
    "scheme": ("str", "semi_implicit"),
    "snapshot_dt": ("float", 0.0),
    "resample_n": ("int", 0),
    "out": ("str", None),
    "summary": ("str", ""),
    "entropy": ("bool", False),
    "monitor_embedded": ("bool", False),
}


def cmd_evolve(args) -> int:
    cfg = load_config(args.config, _EVOLVE_KEYS, args.set)
    curve, meta = build_curve(cfg)
    t0 = cfg["t"] if cfg["family"] != "trombone" else cfg["t0"]
    opts = flow.EvolveOptions(
        dt=cfg["dt"], scheme=cfg["scheme"],
        snapshot_dt=cfg["snapshot_dt"] or None,
        n=cfg["resample_n"] or None,
        monitor_embedded=cfg["monitor_embedded"],
        endpoint_motion=_tail_pin(cfg))
    traj = flow.evolve(curve, t0, cfg["t1"], opts)
    out = _resolve(cfg["out"])
    persist.write_trajectory(out, traj)
    summary = {
        "family": cfg["family"],
        "t0": t0,
        "t1": cfg["t1"],
        "snapshots": len(traj),
        "lengths": [persist.fmt12(s.curve.chord_length()) for s in traj],
    }
    if cfg["entropy"]:
        summary["entropy"] = [
            persist.fmt12(functionals.entropy(s.curve).value) for s in traj]
    if cfg["summary"]:
        persist.write_json_report(_resolve(cfg["summary"]), summary)
    print(json.dumps({"out": str(out), "snapshots": len(traj)}, sort_keys=True))
    return 0


_SPECTRAL_KEYS = {
    "heights": ("floatlist", None),
    "shifts": ("floatlist", None),
    "tail_direction": ("str", "left"),
    "sheet": ("int", 1),
    "tau_start": ("float", -7.0),
    "tau_end": ("float", -4.0),
    "snapshots": ("int", 51),
    "rho_end": ("float", 10.2),
    "delta": ("float", 0.4),
    "nx": ("int", 2048),
    "ny": ("int", 801),
    "mu": ("float", 0.4),
    "out_csv": ("str", None),
    "out_json": ("str", ""),
}


def run_sheet_pipeline(heights, shifts, tail_direction, sheet, tau_start, tau_end,
                       snapshots, rho_end, delta, nx, ny):
    """Evolve one trombone sheet with exact-tail pinning and project its modes.

    Returns (mode track, rescaled series, rhos, rho_primes). The radius
    schedule rho(tau) = rho_end e^{-delta (tau - tau_end)} satisfies the
    drift bounds with contraction rate delta. The rescaled windows shrink
    relative to the retreating tips, so each snapshot interval is evolved
    on its own grid, sized for the window at its start and re-pinned to the
    exact tails.
    """
    from scipy.interpolate import CubicSpline

    spec = exact.TromboneSpec(heights, shifts, tail_direction)
    taus = np.linspace(tau_start, tau_end, snapshots)
    rhos = rho_end * np.exp(-delta * (taus - tau_end))
    rho_primes = -delta * rhos
    t_grid = -np.exp(-taus)

    def tail(x, t):
        return exact.sheet_profile_exact(spec, sheet, x, t)

    bc = flow.ExactTailBC(tail)
    rescaled = []
    cur = None
    for j, t_target in enumerate(t_grid):
        x_half = 2.0 * rhos[j] * math.sqrt(-t_target) * 1.02
        grid = np.linspace(-x_half, x_half, nx)
        if cur is None:
            vals = tail(grid, t_target)
        else:
            spline = CubicSpline(cur.grid, cur.values)
            vals = spline(grid)
        cur = flow.SheetGraph(axis="x1", lo=-x_half, hi=x_half, values=vals,
                              t=float(cur.t if cur is not None else t_target))
        if j > 0:
            span = t_target - cur.t
            steps = max(int(math.ceil(span / 0.25)), 1)
            for _ in range(steps):
                cur = flow.step_graphical(cur, span / steps, bc)
            cur = flow.SheetGraph(axis="x1", lo=cur.lo, hi=cur.hi,
                                  values=cur.values, t=float(t_target))
        rs = flow.rescale(cur, rho=float(rhos[j]), ny=ny)
        rescaled.append((rs.tau, rs.y, rs.u))
    track = spectral.mode_track(rescaled, rhos, rho_primes)
    return track, rescaled, rhos, rho_primes


def cmd_spectral(args) -> int:
    cfg = load_config(args.config, _SPECTRAL_KEYS, args.set)
    track, rescaled, rhos, rho_primes = run_sheet_pipeline(
        cfg["heights"], cfg["shifts"], cfg["tail_direction"], cfg["sheet"],
        cfg["tau_start"], cfg["tau_end"], cfg["snapshots"], cfg["rho_end"],
        cfg["delta"], cfg["nx"], cfg["ny"])
    states = track.states
    dich = spectral.mz_classify(states, mu=cfg["mu"])
    rows = []
    margins = dict(zip(dich.taus.tolist(), dich.margin_mz2.tolist()))
    for s in states:
        rows.append((s.tau, s.rho, s.alpha1, s.alpha2, s.w_plus, s.w_zero,
                     s.w_minus, margins.get(s.tau, float("nan"))))
    persist.write_series_csv(_resolve(cfg["out_csv"]), rows,
                             header=("tau", "rho", "alpha1", "alpha2",
                                     "w_plus", "w_zero", "w_minus", "margin_mz2"))
    report = {"verdict": dich.verdict, "mu": cfg["mu"], "sheet": cfg["sheet"]}
    if dich.verdict == "MZ2":
        fit = spectral.sharp_limit_fit(states, mu=cfg["mu"])
        report["a"] = fit.a
        report["tail_pass"] = fit.tail_pass
    if cfg["out_json"]:
        persist.write_json_report(_resolve(cfg["out_json"]), report)
    print(json.dumps(report, sort_keys=True))
    return 0


_ENTROPY_KEYS = {
    "input": ("str", None),
    "out_csv": ("str", None),
}


def cmd_entropy(args) -> int:
    cfg = load_config(args.config, _ENTROPY_KEYS, args.set)
    traj = persist.read_trajectory(_resolve(cfg["input"]))
    rows = [(s.t, functionals.entropy(s.curve).value) for s in traj]
    persist.write_series_csv(_resolve(cfg["out_csv"]), rows, header=("t", "value"))
    print(json.dumps({"rows": len(rows)}, sort_keys=True))
    return 0


_FIT_KEYS = {
    "input": ("str", None),
    "heights": ("floatlist", None),
    "fit_lo": ("float", 0.0),
    "fit_hi": ("float", 0.0),
    "out_json": ("str", None),
}


def cmd_fit(args) -> int:
    cfg = load_config(args.config, _FIT_KEYS, args.set)
    traj = persist.read_trajectory(_resolve(cfg["input"]))
    tracks = analysis.track_fingers(traj, heights=cfg["heights"])
    window = None
    if cfg["fit_hi"] > cfg["fit_lo"]:
        window = (cfg["fit_lo"], cfg["fit_hi"])
    report = {}
    for track in tracks:
        fit = analysis.fit_best_reaper(track, fit_window=window)
        tip = analysis.tip_limit_check(track, fit.b)
        report[f"finger_{track.finger_id}"] = {
            "b": fit.b,
            "intercept": fit.intercept,
            "area_slope": fit.area_fit.slope,
            "pointing": fit.pointing,
            "tip_residual_final": tip.final,
            "tip_residual_decreasing": tip.decreasing,
        }
    persist.write_json_report(_resolve(cfg["out_json"]), report)
    print(json.dumps(report, sort_keys=True))
    return 0


_VERIFY_KEYS = {
    "input": ("str", None),
    "heights": ("floatlist", None),
    "checks": ("str", ""),
    "delta": ("float", 0.1),
    "lam": ("float", 1.0),
    "line_height_offset": ("float", 0.5),
    "fit_lo": ("float", 0.0),
    "fit_hi": ("float", 0.0),
    "out_json": ("str", ""),
    "out_text": ("str", ""),
}


def cmd_verify(args) -> int:
    cfg = load_config(args.config, _VERIFY_KEYS, args.set)
    checks = [c.strip() for c in cfg["checks"].split(",") if c.strip()]
    results = {}
    if checks:
        traj = persist.read_trajectory(_resolve(cfg["input"]))
        heights = cfg["heights"]
        tracks = None

        def get_tracks():
            nonlocal tracks
            if tracks is None:
                tracks = analysis.track_fingers(traj, heights=heights)
            return tracks

        window = None
        if cfg["fit_hi"] > cfg["fit_lo"]:
            window = (cfg["fit_lo"], cfg["fit_hi"])

        for name in checks:
            if name == "strip":
                rep = analysis.strip_confinement(traj, heights)
                results[name] = {"pass": rep.verdict == "PASS", "bound": rep.bound,
                                 "min_margin": float(rep.margins.min())}
            elif name == "slope":
                rep = analysis.asymptotic_slope_check(traj, cfg["delta"], cfg["lam"])
                results[name] = {"pass": rep.verdict == "PASS",
                                 "sup_ratio": float(rep.sup_ratio.max())}
            elif name == "avoidance":
                top = max(heights) + cfg["line_height_offset"]
                span = float(np.abs([s.curve.points[:, 0] for s in traj]).max())
                guard = exact.line_curve(top, (-2 * span, 2 * span), n=64)
                static = flow.constant_trajectory(guard, traj.times)
                rep = flow.avoidance_check(traj, static)
                results[name] = {"pass": rep.verdict == "PASS",
                                 "initial": float(rep.distances[0]),
                                 "final": float(rep.distances[-1])}
            elif name == "area":
                fits = {}
                ok = True
                for track in get_tracks():
                    fit = functionals.area_series(track.area_pairs(), fit_window=window)
                    good = abs(fit.slope + math.pi) <= 0.01 * math.pi
                    ok = ok and good
                    fits[f"finger_{track.finger_id}"] = fit.slope
                results[name] = {"pass": ok, "slopes": fits}
            elif name == "best_fit":
                vals = {}
                ok = True
                for track in get_tracks():
                    try:
                        fit = analysis.fit_best_reaper(track, fit_window=window)
                        vals[f"finger_{track.finger_id}"] = fit.b
                    except CsfError as exc:
                        ok = False
                        vals[f"finger_{track.finger_id}"] = str(exc)
                results[name] = {"pass": ok, "b": vals}
            elif name == "tip_limit":
                ok = True
                vals = {}
                for track in get_tracks():
                    fit = analysis.fit_best_reaper(track, fit_window=window)
                    rep = analysis.tip_limit_check(track, fit.b)
                    ok = ok and rep.passes
                    vals[f"finger_{track.finger_id}"] = rep.final
                results[name] = {"pass": ok, "final": vals}
            elif name == "decay":
                ok = True
                vals = {}
                for track in get_tracks():
                    region = next(r for r in reversed(track.regions) if r is not None)
                    dist, dev = analysis.sheet_deviation_profile(region, side="lower")
                    fit = analysis.height_decay_fit(dist, dev)
                    ok = ok and fit.passes
                    vals[f"finger_{track.finger_id}"] = fit.r_squared
                results[name] = {"pass": ok, "r_squared": vals}
            elif name == "vertex":
                ok = True
                vals = {}
                for track in get_tracks():
                    rep = analysis.vertex_asymptotics(track, heights)
                    good = bool(np.all(rep.kappa[-5:] >= 0.98 * rep.kappa_bound)
                                and np.all(rep.theta_err <= 0.05))
                    ok = ok and good
                    vals[f"finger_{track.finger_id}"] = float(rep.kappa[-1])
                results[name] = {"pass": ok, "kappa": vals}
            else:
                raise ConfigError(f"unknown check {name!r}")

    all_pass = all(r.get("pass", False) for r in results.values()) if results else True
    report = {"checks": results, "all_pass": all_pass}
    if cfg["out_json"]:
        persist.write_json_report(_resolve(cfg["out_json"]), report)
    lines = [f"{name}: {'PASS' if r.get('pass') else 'FAIL'}" for name, r in results.items()]
    text = "\n".join(lines) + ("\n" if lines else "")
    if cfg["out_text"]:
        _resolve(cfg["out_text"]).write_text(text, encoding="ascii")
    sys.stdout.write(text)
    print(json.dumps({"all_pass": all_pass}, sort_keys=True))
    return 0 if all_pass else 1


_PLOT_KEYS = {
    "kind": ("str", None),
    "input": ("str", None),
    "input2": ("str", ""),
    "out": ("str", None),
    "guide_slope": ("float", 0.0),
    "title": ("str", ""),
    "mu": ("float", 0.4),
}


def cmd_plot(args) -> int:
    cfg = load_config(args.config, _PLOT_KEYS, args.set)
    out = _resolve(cfg["out"])
    title = cfg["title"]
    if cfg["kind"] == "curves":
        trajs = [persist.read_trajectory(_resolve(cfg["input"]))]
        if cfg["input2"]:
            trajs.append(persist.read_trajectory(_resolve(cfg["input2"])))
        curves = [t[-1].curve for t in trajs]
        svgplot.plot_curves(out, curves, labels=[f"curve {i}" for i in range(len(curves))],
                            title=title or "curves")
    elif cfg["kind"] == "series":
        header, data = persist.read_series_csv(_resolve(cfg["input"]))
        svgplot.plot_series(out, [(data[:, 0], data[:, 1])], labels=[header[1]],
                            title=title or "series",
                            guide_slope=cfg["guide_slope"] or None,
                            xlab=header[0], ylab=header[1])
    elif cfg["kind"] == "modes":
        header, data = persist.read_series_csv(_resolve(cfg["input"]))
        taus = data[:, 0]
        wp, w0, wm = data[:, 4], data[:, 5], data[:, 6]
        svgplot.plot_mode_ratios(out, taus, [(w0 + wm) / np.maximum(wp, 1e-300)],
                                 ["(W0+W-)/W+"], mu=cfg["mu"],
                                 title=title or "mode ratios")
    else:
        raise ConfigError(f"unknown plot kind {cfg['kind']!r}")
    print(json.dumps({"out": str(out)}, sort_keys=True))
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="csflab",
                                     description="curve shortening flow laboratory")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (("exact", cmd_exact), ("evolve", cmd_evolve),
                     ("spectral", cmd_spectral), ("entropy", cmd_entropy),
                     ("fit", cmd_fit), ("verify", cmd_verify), ("plot", cmd_plot)):
        p = sub.add_parser(name)
        p.add_argument("--config", default=None)
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
        p.set_defaults(fn=fn)
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except CsfError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
