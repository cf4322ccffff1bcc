"""Output layout and file formats.

Every run writes into ``<root>/<scenario>/<alpha>/`` where ``root`` is the
configured output directory or ``$FRACTO_OUT``.  Floats are written with
``repr`` precision so files are exact and byte-stable.
"""

from __future__ import annotations

import csv
import glob
import json
import os
import re
from pathlib import Path
from typing import Any, Iterable

import numpy as np

from .lattice import Trajectory

__all__ = [
    "alpha_tag",
    "load_trajectory",
    "output_root",
    "read_snapshot",
    "read_trace",
    "run_dir",
    "snapshot_files",
    "write_gl_weights",
    "write_report",
    "write_rows",
    "write_sidecar",
    "write_snapshots",
    "write_trace",
    "write_trace_compare",
]

ENV_OUT = "FRACTO_OUT"


def output_root(configured: str) -> Path:
    return Path(os.environ.get(ENV_OUT) or configured)


def alpha_tag(alpha: float) -> str:
    return f"{alpha:g}"


def run_dir(root: Path, scenario: str, alpha: float) -> Path:
    d = Path(root) / scenario / alpha_tag(alpha)
    d.mkdir(parents=True, exist_ok=True)
    return d


def _num(x: float) -> str:
    return repr(float(x))


def write_rows(path: Path, header: Iterable[str], rows: Iterable[Iterable[Any]]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_num(v) if isinstance(v, (float, np.floating)) else v for v in row])


def write_snapshots(directory: Path, traj: Trajectory, stem: str) -> list[Path]:
    """``<stem>_t<time>.csv`` per snapshot; column ``n`` for the chain, ``i`` for the field."""
    index = "n" if stem == "chain" else "i"
    half = traj.x.size // 2
    idx = np.arange(-half, half + 1)
    paths = []
    for t, u, v in zip(traj.times, traj.u, traj.v):
        path = Path(directory) / f"{stem}_t{t:.6f}.csv"
        write_rows(path, (index, "x", "u", "v"), zip(idx.tolist(), traj.x, u, v))
        paths.append(path)
    return paths


def write_trace(directory: Path, traj: Trajectory, stem: str) -> Path:
    path = Path(directory) / f"{stem}_trace.csv"
    write_rows(path, ("t", "u_center"), zip(traj.trace_t, traj.trace_u))
    return path


def write_sidecar(directory: Path, stem: str, config: dict[str, Any], energy=()) -> Path:
    """JSON lines: one ``config`` record, then one ``energy`` record per sample."""
    path = Path(directory) / f"{stem}_meta.jsonl"
    with open(path, "w") as fh:
        fh.write(json.dumps({"record": "config", **config}, sort_keys=True) + "\n")
        for t, h in energy:
            fh.write(json.dumps({"record": "energy", "t": t, "H": h}) + "\n")
    return path


def write_trace_compare(directory: Path, lat: Trajectory, fld: Trajectory) -> Path:
    tl, ul = lat.trace
    tf, uf = fld.trace
    uf_on_l = np.interp(tl, tf, uf)
    path = Path(directory) / "trace_compare.csv"
    write_rows(
        path,
        ("t", "u_center_lattice", "u_center_fsg", "abs_diff"),
        zip(tl, ul, uf_on_l, np.abs(ul - uf_on_l)),
    )
    return path


def write_report(directory: Path, report: dict[str, Any]) -> Path:
    path = Path(directory) / "report.json"

    def clean(v):
        if isinstance(v, float) and not np.isfinite(v):
            return str(v)
        if isinstance(v, list):
            return [clean(x) for x in v]
        return v

    with open(path, "w") as fh:
        json.dump({k: clean(v) for k, v in report.items()}, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def write_gl_weights(path: Path, weights: np.ndarray) -> Path:
    write_rows(Path(path), ("q", "w"), zip(range(weights.size), weights))
    return Path(path)


_SNAP = re.compile(r"_t(\d+\.\d+)\.csv$")


def snapshot_files(directory: Path, stem: str) -> list[tuple[float, Path]]:
    found = []
    for name in glob.glob(str(Path(directory) / f"{stem}_t*.csv")):
        m = _SNAP.search(name)
        if m:
            found.append((float(m.group(1)), Path(name)))
    return sorted(found)


def read_snapshot(path: Path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 1], data[:, 2], data[:, 3]


def read_trace(path: Path) -> tuple[np.ndarray, np.ndarray]:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 0], data[:, 1]


def load_trajectory(directory: Path, stem: str) -> Trajectory | None:
    """Rebuild a trajectory from its CSV files, or ``None`` when absent."""
    snaps = snapshot_files(directory, stem)
    trace = Path(directory) / f"{stem}_trace.csv"
    if not snaps or not trace.exists():
        return None
    x0 = read_snapshot(snaps[0][1])[0]
    traj = Trajectory(x0)
    for t, p in snaps:
        _, u, v = read_snapshot(p)
        traj.add_snapshot(t, u, v)
    tt, uu = read_trace(trace)
    traj.trace_t.extend(tt.tolist())
    traj.trace_u.extend(uu.tolist())
    return traj
