"""Snapshot output: binary fields, PGM heatmaps and a CSV metrics log.

Binary field layout (all little-endian)::

    b"FRDF"            magic
    u16 version        currently 1
    u16 dim
    u32 size[dim]      nodes per axis
    f64 values[...]    C order (axis 0 slowest)
"""
from __future__ import annotations

import csv
import struct
from pathlib import Path

import numpy as np

__all__ = [
    "FORMAT_VERSION",
    "MAGIC",
    "SnapshotWriter",
    "field_stats",
    "read_field",
    "read_metrics",
    "read_pgm",
    "to_gray",
    "write_field",
    "write_pgm",
]

MAGIC = b"FRDF"
FORMAT_VERSION = 1
CSV_HEADER = ("step", "time", "species", "min", "max", "mean", "l2")


def write_field(path, field) -> Path:
    path = Path(path)
    arr = np.ascontiguousarray(field, dtype="<f8")
    if not 1 <= arr.ndim <= 3:
        raise ValueError(f"fields must have 1 to 3 axes, got {arr.ndim}")
    header = MAGIC + struct.pack(f"<HH{arr.ndim}I", FORMAT_VERSION, arr.ndim, *arr.shape)
    try:
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(arr.tobytes(order="C"))
    except OSError as exc:
        raise OSError(f"cannot write field file {path}: {exc}") from exc
    return path


def read_field(path) -> np.ndarray:
    path = Path(path)
    data = path.read_bytes()
    if data[:4] != MAGIC:
        raise ValueError(f"{path}: not an FRDF field file")
    version, dim = struct.unpack_from("<HH", data, 4)
    if version != FORMAT_VERSION:
        raise ValueError(f"{path}: unsupported format version {version}")
    if not 1 <= dim <= 3:
        raise ValueError(f"{path}: bad dimension {dim}")
    shape = struct.unpack_from(f"<{dim}I", data, 8)
    offset = 8 + 4 * dim
    count = int(np.prod(shape))
    if len(data) - offset != 8 * count:
        raise ValueError(f"{path}: payload has {len(data) - offset} bytes, expected {8 * count}")
    return np.frombuffer(data, dtype="<f8", count=count, offset=offset).astype(np.float64).reshape(shape)


def _image_plane(field):
    """2-D image for a field: rows are y (top = high y), columns are x.

    1-D fields become a single row; 3-D fields show the middle slice of the
    last axis.
    """
    arr = np.asarray(field, dtype=float)
    if arr.ndim == 1:
        return arr[np.newaxis, :]
    if arr.ndim == 3:
        arr = arr[:, :, arr.shape[2] // 2]
    return arr.T[::-1]


def to_gray(field) -> tuple[np.ndarray, float, float]:
    """Linear min-max scaling to 0..255; constant images map to 128."""
    plane = _image_plane(field)
    lo, hi = float(plane.min()), float(plane.max())
    if hi > lo:
        pix = np.rint((plane - lo) * (255.0 / (hi - lo)))
        pix = np.clip(pix, 0, 255).astype(np.uint8)
    else:
        pix = np.full(plane.shape, 128, dtype=np.uint8)
    return pix, lo, hi


def write_pgm(path, field) -> tuple[float, float]:
    """Write a binary (P5) PGM heatmap and a ``.txt`` sidecar with the scaling bounds."""
    path = Path(path)
    pix, lo, hi = to_gray(field)
    rows, cols = pix.shape
    try:
        with open(path, "wb") as fh:
            fh.write(f"P5\n{cols} {rows}\n255\n".encode("ascii"))
            fh.write(pix.tobytes())
        path.with_suffix(path.suffix + ".txt").write_text(
            f"min {lo!r}\nmax {hi!r}\n# gray = round(255 * (value - min) / (max - min)); 128 if max == min\n"
        )
    except OSError as exc:
        raise OSError(f"cannot write heatmap {path}: {exc}") from exc
    return lo, hi


def read_pgm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    parts = data.split(maxsplit=4)
    if parts[0] != b"P5":
        raise ValueError(f"{path}: not a binary PGM")
    cols, rows, maxval = int(parts[1]), int(parts[2]), int(parts[3])
    if maxval != 255:
        raise ValueError(f"{path}: unsupported maxval {maxval}")
    return np.frombuffer(parts[4][: rows * cols], dtype=np.uint8).reshape(rows, cols)


def field_stats(field, cell_volume: float = 1.0) -> tuple[float, float, float, float]:
    """``(min, max, mean, l2)``; ``l2 = sqrt(cell_volume * sum f^2)``."""
    arr = np.asarray(field, dtype=float)
    return (float(arr.min()), float(arr.max()), float(arr.mean()),
            float(np.sqrt(cell_volume * np.sum(arr * arr))))


class SnapshotWriter:
    """Snapshot sink writing ``s{species}_{step:06d}.{frdf,pgm}`` plus ``metrics.csv``.

    Species are numbered from 1 in file names and in the CSV.
    """

    def __init__(self, out_dir, cell_volume: float = 1.0, images: bool = True):
        self.out_dir = Path(out_dir)
        try:
            self.out_dir.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise OSError(f"cannot create output directory {self.out_dir}: {exc}") from exc
        self.cell_volume = cell_volume
        self.images = images
        self.csv_path = self.out_dir / "metrics.csv"
        with open(self.csv_path, "w", newline="") as fh:
            csv.writer(fh).writerow(CSV_HEADER)
        self.rows = 0

    def __call__(self, step: int, time: float, species: int, field: np.ndarray) -> None:
        stem = f"s{species + 1}_{step:06d}"
        write_field(self.out_dir / f"{stem}.frdf", field)
        if self.images:
            write_pgm(self.out_dir / f"{stem}.pgm", field)
        lo, hi, mean, l2 = field_stats(field, self.cell_volume)
        with open(self.csv_path, "a", newline="") as fh:
            csv.writer(fh).writerow([step, repr(float(time)), species + 1, repr(lo), repr(hi), repr(mean), repr(l2)])
        self.rows += 1


def read_metrics(path) -> list[dict]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    for r in rows:
        r["step"] = int(r["step"])
        r["species"] = int(r["species"])
        for k in ("time", "min", "max", "mean", "l2"):
            r[k] = float(r[k])
    return rows
