"""Energy logs, checkpoints, structured-points export and convergence tables.

Floats go to text with 17 significant digits so every file reads back
bit-for-bit.
"""
from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .energy import EnergyBreakdown
from .grid import Grid

FLOAT_FMT = "%.17g"
ENERGY_LOG_HEADER = ("step", "time", "F_surf", "F_vdw", "F_ele", "F_tot")


class CheckpointError(ValueError):
    pass


def fmt(x: float) -> str:
    return FLOAT_FMT % x


# ---------------------------------------------------------------------------
# energy log

def write_energy_log(path, steps, dt: float, energies: list[EnergyBreakdown]) -> None:
    if len(steps) != len(energies):
        raise ValueError("one energy per logged step is required")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ENERGY_LOG_HEADER)
        for s, e in zip(steps, energies):
            w.writerow([int(s), fmt(s * dt)] + [fmt(v) for v in e.as_tuple()])


def read_energy_log(path) -> tuple[list[int], list[float], list[EnergyBreakdown]]:
    steps, times, energies = [], [], []
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        if tuple(header) != ENERGY_LOG_HEADER:
            raise ValueError(f"unexpected energy-log header {header}")
        for row in r:
            steps.append(int(row[0]))
            times.append(float(row[1]))
            energies.append(EnergyBreakdown(float(row[2]), float(row[3]), float(row[4])))
    return steps, times, energies


# ---------------------------------------------------------------------------
# checkpoints

def _sidecar(path) -> Path:
    return Path(str(path) + ".json")


def write_checkpoint(path, phi: np.ndarray, grid: Grid, epsilon: float, step: int = 0,
                     scheme: str = "") -> None:
    """Raw little-endian float64 values, x index fastest, plus a JSON sidecar."""
    grid.check(phi, "checkpoint field")
    data = np.asarray(phi, dtype="<f8").ravel(order="F")
    Path(path).write_bytes(data.tobytes())
    meta = {
        "N": list(grid.N),
        "L": [float(v) for v in grid.L],
        "epsilon": float(epsilon),
        "step": int(step),
        "scheme": scheme,
        "dtype": "<f8",
        "order": "x-fastest",
    }
    _sidecar(path).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def read_checkpoint(path) -> tuple[np.ndarray, dict]:
    side = _sidecar(path)
    if not side.exists():
        raise CheckpointError(f"missing checkpoint metadata {side}")
    try:
        meta = json.loads(side.read_text())
        N = tuple(int(n) for n in meta["N"])
        L = tuple(float(v) for v in meta["L"])
    except (KeyError, TypeError, ValueError) as exc:
        raise CheckpointError(f"malformed checkpoint metadata: {exc}") from exc
    raw = Path(path).read_bytes()
    expected = 8 * N[0] * N[1] * N[2]
    if len(raw) != expected:
        raise CheckpointError(f"checkpoint holds {len(raw)} bytes, metadata implies {expected}")
    phi = np.frombuffer(raw, dtype="<f8").reshape(N, order="F").astype(float)
    meta["grid"] = Grid(L, N)
    return phi, meta


# ---------------------------------------------------------------------------
# legacy structured-points export

def vtk_text(phi: np.ndarray, grid: Grid, title: str = "pfvism phase field") -> str:
    grid.check(phi, "field")
    if "\n" in title or len(title) > 255:
        raise ValueError("title must be a single line of at most 255 characters")
    nx, ny, nz = grid.N
    origin = [-v for v in grid.L]
    lines = [
        "# vtk DataFile Version 3.0",
        title,
        "ASCII",
        "DATASET STRUCTURED_POINTS",
        f"DIMENSIONS {nx} {ny} {nz}",
        "ORIGIN " + " ".join(fmt(v) for v in origin),
        "SPACING " + " ".join(fmt(v) for v in grid.h),
        f"POINT_DATA {grid.size}",
        "SCALARS phi double 1",
        "LOOKUP_TABLE default",
    ]
    values = np.asarray(phi, dtype=float).ravel(order="F")
    lines.extend(fmt(v) for v in values)
    return "\n".join(lines) + "\n"


def export_vtk(checkpoint, out_path) -> Path:
    phi, meta = read_checkpoint(checkpoint)
    out = Path(out_path)
    with open(out, "w", newline="\n") as fh:
        fh.write(vtk_text(phi, meta["grid"]))
    return out


# ---------------------------------------------------------------------------
# convergence tables

@dataclass(frozen=True)
class RateRow:
    dt: float
    energy: float
    error: float
    rate: float | None


def check_halving(dts, rel_tol: float = 1e-12) -> None:
    dts = [float(v) for v in dts]
    if len(dts) < 3:
        raise ValueError("at least three step sizes are required")
    for a, b in zip(dts, dts[1:]):
        if not math.isclose(b, 0.5 * a, rel_tol=rel_tol):
            raise ValueError(f"step sizes must halve: {a} -> {b}")


def convergence_rates(dts, energies, benchmark: float) -> list[RateRow]:
    """error_k = |E_k - E_bench|, rate_k = log2(error_{k-1} / error_k)."""
    check_halving(dts)
    if len(dts) != len(energies):
        raise ValueError("one energy per step size is required")
    rows = []
    prev = None
    for dt, e in zip(dts, energies):
        err = abs(float(e) - benchmark)
        rate = None
        if prev is not None:
            rate = math.log2(prev / err) if prev > 0 and err > 0 else float("nan")
        rows.append(RateRow(float(dt), float(e), err, rate))
        prev = err
    return rows


def rates_report(dts, energies_by_scheme: dict[str, list[float]], benchmark: float) -> dict[str, list[RateRow]]:
    return {s: convergence_rates(dts, e, benchmark) for s, e in energies_by_scheme.items()}


def parse_dt_list(spec: str) -> list[float]:
    """'1e-1:halve:7' -> seven halving steps from 0.1; otherwise a comma-separated list."""
    parts = spec.split(":")
    if len(parts) == 3 and parts[1] == "halve":
        start, n = float(parts[0]), int(parts[2])
        if not start > 0 or n < 1:
            raise ValueError(f"bad step list {spec!r}")
        return [start / 2**k for k in range(n)]
    if len(parts) != 1:
        raise ValueError(f"bad step list {spec!r}")
    return [float(v) for v in spec.split(",") if v.strip()]


def write_rates_csv(path_or_file, report: dict[str, list[RateRow]], benchmark: float) -> None:
    """Wide table: dt then energy, error, rate per scheme; one trailing benchmark row."""
    schemes = list(report)
    rows = list(zip(*report.values()))
    own = isinstance(path_or_file, (str, os.PathLike))
    fh = open(path_or_file, "w", newline="") if own else path_or_file
    try:
        w = csv.writer(fh, lineterminator="\n")
        header = ["dt"]
        for s in schemes:
            header += [f"{s}_energy", f"{s}_error", f"{s}_rate"]
        w.writerow(header)
        for group in rows:
            line = [fmt(group[0].dt)]
            for r in group:
                line += [fmt(r.energy), fmt(r.error), "" if r.rate is None else fmt(r.rate)]
            w.writerow(line)
        w.writerow(["benchmark"] + [fmt(benchmark), "", ""] * len(schemes))
    finally:
        if own:
            fh.close()


def write_rows_csv(path_or_file, header, rows) -> None:
    """Generic CSV writer: floats at 17 significant digits, everything else via str."""
    own = isinstance(path_or_file, (str, os.PathLike))
    fh = open(path_or_file, "w", newline="") if own else path_or_file
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) if isinstance(v, float) else str(v) for v in row])
    finally:
        if own:
            fh.close()
