"""File formats: trajectory records, CSV series, JSON reports.

Trajectory files are line-delimited JSON: one header object
``{"version", "scheme", "dt", "topology"}`` followed by one object per
snapshot ``{"t", "n", "points"}`` with the point array flattened
x0, y0, x1, y1, ... Python's float repr is shortest-roundtrip, so writing
and re-reading reproduces every double bit-exactly.

CSV series use 12 significant digits, locale-independent.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .curves import PlanarCurve
from .errors import InvalidInputError
from .flow import FlowSnapshot, FlowTrajectory

FORMAT_VERSION = 1


def write_trajectory(path, traj: FlowTrajectory) -> None:
    path = Path(path)
    first = traj[0]
    header = {
        "version": FORMAT_VERSION,
        "scheme": first.scheme,
        "dt": first.dt,
        "topology": "closed" if traj.closed else "open",
    }
    with path.open("w", encoding="ascii", newline="\n") as fh:
        fh.write(json.dumps(header) + "\n")
        for snap in traj:
            rec = {
                "t": snap.t,
                "n": snap.curve.n,
                "points": snap.curve.points.reshape(-1).tolist(),
            }
            fh.write(json.dumps(rec) + "\n")


def read_trajectory(path) -> FlowTrajectory:
    path = Path(path)
    with path.open("r", encoding="ascii") as fh:
        lines = [line for line in fh if line.strip()]
    if not lines:
        raise InvalidInputError(f"{path}: empty trajectory file")
    header = json.loads(lines[0])
    if header.get("version") != FORMAT_VERSION:
        raise InvalidInputError(f"{path}: unsupported version {header.get('version')}")
    closed = header["topology"] == "closed"
    snaps = []
    for line in lines[1:]:
        rec = json.loads(line)
        pts = np.array(rec["points"], dtype=float).reshape(-1, 2)
        if len(pts) != rec["n"]:
            raise InvalidInputError(f"{path}: point count mismatch")
        curve = PlanarCurve(pts, closed=closed, embedded=True)
        snaps.append(FlowSnapshot(t=float(rec["t"]), curve=curve,
                                  scheme=header["scheme"], dt=float(header["dt"])))
    return FlowTrajectory(snaps)


def write_curve(path, curve: PlanarCurve) -> None:
    """Single-snapshot trajectory record at t = 0."""
    write_trajectory(path, FlowTrajectory([FlowSnapshot(t=0.0, curve=curve)]))


def read_curve(path) -> PlanarCurve:
    return read_trajectory(path)[0].curve


def fmt12(x: float) -> str:
    return f"{float(x):.12g}"


def write_series_csv(path, rows, header=("t", "value")) -> None:
    """Rows of floats at 12 significant digits."""
    path = Path(path)
    with path.open("w", encoding="ascii", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt12(x) for x in row) + "\n")


def read_series_csv(path):
    path = Path(path)
    with path.open("r", encoding="ascii") as fh:
        lines = [line.strip() for line in fh if line.strip()]
    header = lines[0].split(",")
    data = np.array([[float(x) for x in line.split(",")] for line in lines[1:]])
    return header, data


def write_json_report(path, report: dict) -> None:
    path = Path(path)
    with path.open("w", encoding="ascii", newline="\n") as fh:
        fh.write(json.dumps(report, indent=2, sort_keys=True) + "\n")
