import struct

import numpy as np
import pytest
import sympy

from fracrd import io, models
from fracrd.mesh import Domain, build_grid


@pytest.mark.parametrize("shape", [(7,), (5, 3), (4, 3, 2)])
def test_field_round_trip_bitwise(tmp_path, rng, shape):
    f = rng.standard_normal(shape)
    f.flat[0] = np.nextafter(1.0, 2.0)
    io.write_field(tmp_path / "f.frdf", f)
    g = io.read_field(tmp_path / "f.frdf")
    assert g.shape == shape
    assert g.tobytes() == f.tobytes()


def test_header_layout(tmp_path):
    io.write_field(tmp_path / "f.frdf", np.arange(6.0).reshape(2, 3))
    data = (tmp_path / "f.frdf").read_bytes()
    assert data[:4] == b"FRDF"
    assert struct.unpack("<HH2I", data[4:16]) == (1, 2, 2, 3)
    assert len(data) == 16 + 6 * 8
    assert struct.unpack("<d", data[16 + 8:16 + 16])[0] == 1.0


def test_bad_files(tmp_path):
    (tmp_path / "x").write_bytes(b"NOPE")
    with pytest.raises(ValueError):
        io.read_field(tmp_path / "x")
    io.write_field(tmp_path / "f.frdf", np.zeros(4))
    (tmp_path / "t.frdf").write_bytes((tmp_path / "f.frdf").read_bytes()[:-8])
    with pytest.raises(ValueError, match="payload"):
        io.read_field(tmp_path / "t.frdf")
    with pytest.raises(ValueError):
        io.write_field(tmp_path / "g.frdf", np.zeros((1, 1, 1, 1)))


def test_constant_field_outputs(tmp_path):
    sink = io.SnapshotWriter(tmp_path, cell_volume=0.25)
    sink(0, 0.0, 0, np.full((2, 2), 0.5))
    f = io.read_field(tmp_path / "s1_000000.frdf")
    assert np.all(f == 0.5) and f.size == 4
    assert np.all(io.read_pgm(tmp_path / "s1_000000.pgm") == 128)
    assert "min 0.5" in (tmp_path / "s1_000000.pgm.txt").read_text()
    row = io.read_metrics(tmp_path / "metrics.csv")[0]
    assert (row["min"], row["max"], row["mean"]) == (0.5, 0.5, 0.5)
    assert row["l2"] == pytest.approx(np.sqrt(0.25 * 4 * 0.25))


def test_pgm_orientation_and_scaling(tmp_path):
    f = np.array([[0.0, 1.0], [2.0, 3.0]])  # f[x, y]
    io.write_pgm(tmp_path / "a.pgm", f)
    img = io.read_pgm(tmp_path / "a.pgm")
    # top row is the largest y
    assert img.tolist() == [[85, 255], [0, 170]]
    header = (tmp_path / "a.pgm").read_bytes()[:11]
    assert header.startswith(b"P5\n2 2\n255\n")


def test_pgm_other_dims(tmp_path):
    io.write_pgm(tmp_path / "a.pgm", np.arange(5.0))
    assert io.read_pgm(tmp_path / "a.pgm").shape == (1, 5)
    io.write_pgm(tmp_path / "b.pgm", np.zeros((4, 3, 5)))
    assert io.read_pgm(tmp_path / "b.pgm").shape == (3, 4)


def test_metrics_monotone_and_species_numbering(tmp_path):
    sink = io.SnapshotWriter(tmp_path, images=False)
    for k in range(0, 30, 10):
        for i in range(2):
            sink(k, k * 0.5, i, np.full(3, float(k + i)))
    rows = io.read_metrics(tmp_path / "metrics.csv")
    steps = [r["step"] for r in rows]
    assert steps == sorted(steps)
    assert {r["species"] for r in rows} == {1, 2}
    assert [r["time"] for r in rows[::2]] == [0.0, 5.0, 10.0]
    assert not list(tmp_path.glob("*.pgm"))


def test_condition_a_mean_matches_integral(tmp_path):
    x, y = sympy.symbols("x y")
    us = sympy.Rational(6, 35)
    U = us - sympy.Rational(2, 10 ** 7) * (x - y / 10 - 225) * (x - y / 10 - 675)
    avg = sympy.integrate(U, (x, 0, 900), (y, 0, 300)) / (900 * 300)
    assert avg == us - sympy.Rational(3435, 10 ** 6)
    grid = build_grid(Domain((0.0, 0.0), (900.0, 300.0)), (256, 128))
    u0, _ = models.ic_condition_a(grid, 6 / 35, 116 / 245)
    sink = io.SnapshotWriter(tmp_path, cell_volume=grid.cell_volume, images=False)
    sink(0, 0.0, 0, u0)
    mean = io.read_metrics(tmp_path / "metrics.csv")[0]["mean"]
    assert abs(mean - float(avg)) < 1e-6


def test_unwritable_directory(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(OSError):
        io.SnapshotWriter(blocker / "sub")
