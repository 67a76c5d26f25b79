import io as stdio
import math

import numpy as np
import pytest

from pfvism.energy import EnergyBreakdown
from pfvism.grid import Grid
from pfvism.io import (
    ENERGY_LOG_HEADER, CheckpointError, check_halving, convergence_rates, export_vtk, parse_dt_list,
    read_checkpoint, read_energy_log, vtk_text, write_checkpoint, write_energy_log, write_rates_csv,
    write_rows_csv,
)


def test_energy_log_round_trip(tmp_path, rng):
    energies = [EnergyBreakdown(*rng.normal(size=3) * 100) for _ in range(5)]
    steps = [0, 1, 2, 5, 9]
    path = tmp_path / "log.csv"
    write_energy_log(path, steps, 0.05, energies)
    assert path.read_text().splitlines()[0] == "step,time,F_surf,F_vdw,F_ele,F_tot"
    s, t, e = read_energy_log(path)
    assert s == steps
    assert t == [k * 0.05 for k in steps]
    assert [x.as_tuple() for x in e] == [x.as_tuple() for x in energies]
    assert ENERGY_LOG_HEADER[0] == "step"


def test_energy_log_length_mismatch(tmp_path):
    with pytest.raises(ValueError):
        write_energy_log(tmp_path / "x.csv", [0, 1], 0.1, [EnergyBreakdown(0, 0, 0)])


def test_checkpoint_round_trip_and_layout(tmp_path, rng):
    g = Grid((3.0, 4.0, 5.0), (4, 6, 8))
    phi = rng.uniform(size=g.shape)
    path = tmp_path / "phi.bin"
    write_checkpoint(path, phi, g, 0.5, step=17, scheme="ETD2RK")
    raw = np.frombuffer(path.read_bytes(), dtype="<f8")
    assert raw[0] == phi[0, 0, 0] and raw[1] == phi[1, 0, 0] and raw[4] == phi[0, 1, 0]
    back, meta = read_checkpoint(path)
    assert np.array_equal(back, phi)
    assert meta["grid"] == g and meta["epsilon"] == 0.5 and meta["step"] == 17 and meta["scheme"] == "ETD2RK"


def test_checkpoint_errors(tmp_path, rng):
    g = Grid.cube(2.0, 8)
    path = tmp_path / "phi.bin"
    write_checkpoint(path, np.zeros(g.shape), g, 0.5)
    path.write_bytes(path.read_bytes()[:-8])
    with pytest.raises(CheckpointError, match="bytes"):
        read_checkpoint(path)
    with pytest.raises(CheckpointError, match="metadata"):
        read_checkpoint(tmp_path / "missing.bin")
    with pytest.raises(ValueError):
        write_checkpoint(path, np.zeros((8, 8, 4)), g, 0.5)


def parse_legacy_structured_points(text: str):
    """Minimal independent reader for the ASCII legacy structured-points grammar."""
    lines = text.split("\n")
    assert lines[-1] == ""
    lines = lines[:-1]
    assert lines[0].startswith("# vtk DataFile Version ")
    assert len(lines[1]) <= 255
    assert lines[2] == "ASCII"
    assert lines[3] == "DATASET STRUCTURED_POINTS"
    out = {}
    i = 4
    while not lines[i].startswith("POINT_DATA"):
        key, *vals = lines[i].split()
        assert key in ("DIMENSIONS", "ORIGIN", "SPACING")
        out[key] = [int(v) for v in vals] if key == "DIMENSIONS" else [float(v) for v in vals]
        assert len(vals) == 3
        i += 1
    assert set(out) == {"DIMENSIONS", "ORIGIN", "SPACING"}
    n = int(lines[i].split()[1])
    assert n == math.prod(out["DIMENSIONS"])
    kind, name, dtype, ncomp = lines[i + 1].split()
    assert kind == "SCALARS" and dtype in ("float", "double") and ncomp == "1"
    assert lines[i + 2] == "LOOKUP_TABLE default"
    values = [float(v) for line in lines[i + 3:] for v in line.split()]
    assert len(values) == n
    return out, name, np.array(values)


def test_vtk_export_grammar(tmp_path, rng):
    g = Grid((3.0, 4.0, 5.0), (4, 6, 8))
    phi = rng.uniform(size=g.shape)
    write_checkpoint(tmp_path / "c.bin", phi, g, 0.5)
    export_vtk(tmp_path / "c.bin", tmp_path / "c.vtk")
    hdr, name, values = parse_legacy_structured_points((tmp_path / "c.vtk").read_text())
    assert name == "phi"
    assert hdr["DIMENSIONS"] == [4, 6, 8]
    assert hdr["ORIGIN"] == [-3.0, -4.0, -5.0]
    assert np.allclose(hdr["SPACING"], g.h, rtol=1e-15)
    assert np.array_equal(values.reshape(g.shape, order="F"), phi)


def test_vtk_title_validation():
    g = Grid.cube(1.0, 8)
    with pytest.raises(ValueError):
        vtk_text(np.zeros(g.shape), g, "two\nlines")


# ---------------------------------------------------------------------------
# convergence tables

@pytest.mark.parametrize("order", [1, 2, 4])
def test_rates_of_synthetic_power_law(order):
    dts = parse_dt_list("1e-1:halve:6")
    bench = -10.0
    energies = [bench + 3.0 * dt**order for dt in dts]
    rows = convergence_rates(dts, energies, bench)
    assert rows[0].rate is None
    for r in rows[1:]:
        assert r.rate == pytest.approx(order, abs=1e-5)


def test_rates_reproduce_published_table():
    # second-order scheme, two-plate benchmark at full resolution
    dts = [0.1 / 2**k for k in range(7)]
    energies = [-646.0728, -651.7595, -653.6880, -654.3495, -654.5453, -654.5987, -654.6127]
    rows = convergence_rates(dts, energies, -654.61761379)
    printed = [1.58, 1.62, 1.79, 1.89, 1.94, 1.95]
    assert [r.rate for r in rows[1:]] == pytest.approx(printed, abs=0.01)
    assert rows[0].error == pytest.approx(8.5448, abs=1e-4)


def test_dt_list_parsing():
    assert parse_dt_list("0.2:halve:3") == [0.2, 0.1, 0.05]
    assert parse_dt_list("1,0.5,0.25") == [1.0, 0.5, 0.25]
    for bad in ("0:halve:3", "1:double:3", "a,b"):
        with pytest.raises(ValueError):
            parse_dt_list(bad)
    with pytest.raises(ValueError):
        check_halving([1.0, 0.5, 0.3])
    with pytest.raises(ValueError):
        check_halving([1.0, 0.5])


def test_rates_csv_layout():
    dts = [0.4, 0.2, 0.1]
    report = {s: convergence_rates(dts, [1 + dt**k for dt in dts], 1.0) for k, s in ((1, "ETD1RK"), (2, "ETD2RK"))}
    buf = stdio.StringIO()
    write_rates_csv(buf, report, 1.0)
    lines = buf.getvalue().splitlines()
    assert lines[0].split(",")[:4] == ["dt", "ETD1RK_energy", "ETD1RK_error", "ETD1RK_rate"]
    assert len(lines) == len(dts) + 2
    assert lines[-1].startswith("benchmark,1,")


def test_rows_csv_float_precision():
    buf = stdio.StringIO()
    x = 0.1 + 0.2
    write_rows_csv(buf, ("a", "b", "c"), [(x, "loose", True)])
    row = buf.getvalue().splitlines()[1].split(",")
    assert float(row[0]) == x and row[1:] == ["loose", "True"]
