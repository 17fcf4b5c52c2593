"""Cell-centred grids and spectral symbols of the fractional Laplacian.

Both boundary kinds use the staggered node set ``x_j = lo + (j - 1/2) h``,
``h = (hi - lo) / L``.  Per-axis wavenumbers are ``k pi / (hi - lo)`` with
``k = 1..L`` (Dirichlet) or ``k = 0..L-1`` (Neumann).  The multi-dimensional
symbol is the full, non-separable ``D * (sum_axes lambda^2) ** (alpha / 2)``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = [
    "BoundaryKind",
    "Domain",
    "Grid",
    "SpectrumTable",
    "axis_wavenumbers",
    "build_grid",
    "build_spectrum",
    "build_symbol",
    "check_alpha",
]


class BoundaryKind(enum.Enum):
    DIRICHLET = "dirichlet"
    NEUMANN = "neumann"

    @classmethod
    def parse(cls, value) -> "BoundaryKind":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        for kind in cls:
            if key in (kind.value, kind.value[0]):
                return kind
        raise ValueError(f"unknown boundary kind {value!r} (expected dirichlet or neumann)")


def as_bcs(bcs, dim: int) -> tuple[BoundaryKind, ...]:
    """Normalise a single kind or a per-axis sequence to a tuple of length ``dim``."""
    if isinstance(bcs, (BoundaryKind, str)):
        return (BoundaryKind.parse(bcs),) * dim
    out = tuple(BoundaryKind.parse(b) for b in bcs)
    if len(out) != dim:
        raise ValueError(f"expected {dim} boundary kinds, got {len(out)}")
    return out


@dataclass(frozen=True)
class Domain:
    """Axis-aligned box ``prod_i (lo[i], hi[i])`` with ``1 <= dim <= 3``."""

    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def __post_init__(self):
        lo = tuple(float(v) for v in np.atleast_1d(self.lo))
        hi = tuple(float(v) for v in np.atleast_1d(self.hi))
        if len(lo) != len(hi):
            raise ValueError(f"lo has {len(lo)} entries but hi has {len(hi)}")
        if not 1 <= len(lo) <= 3:
            raise ValueError(f"dimension must be 1, 2 or 3, got {len(lo)}")
        for axis, (a, b) in enumerate(zip(lo, hi)):
            if not (np.isfinite(a) and np.isfinite(b)) or b <= a:
                raise ValueError(f"axis {axis}: need lo < hi, got ({a}, {b})")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def lengths(self) -> tuple[float, ...]:
        return tuple(b - a for a, b in zip(self.lo, self.hi))

    @property
    def volume(self) -> float:
        return float(np.prod(self.lengths))


@dataclass(frozen=True)
class Grid:
    domain: Domain
    n: tuple[int, ...]
    nodes: tuple[np.ndarray, ...] = field(repr=False)
    h: tuple[float, ...]

    @property
    def dim(self) -> int:
        return self.domain.dim

    @property
    def shape(self) -> tuple[int, ...]:
        return self.n

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.h))

    def mesh(self) -> tuple[np.ndarray, ...]:
        """Coordinate arrays broadcast to the full grid shape (``ij`` indexing)."""
        return tuple(np.meshgrid(*self.nodes, indexing="ij"))


def build_grid(domain: Domain, n: int | Sequence[int]) -> Grid:
    """Cell-centred grid with ``n[i]`` nodes on axis ``i``.

    >>> build_grid(Domain((0.0,), (1.0,)), 4).nodes[0]
    array([0.125, 0.375, 0.625, 0.875])
    """
    counts = tuple(int(v) for v in np.atleast_1d(n))
    if len(counts) == 1 and domain.dim > 1:
        counts = counts * domain.dim
    if len(counts) != domain.dim:
        raise ValueError(f"expected {domain.dim} grid sizes, got {len(counts)}")
    for axis, L in enumerate(counts):
        if L < 2:
            raise ValueError(f"axis {axis}: need at least 2 nodes, got {L}")
    nodes, widths = [], []
    for a, b, L in zip(domain.lo, domain.hi, counts):
        h = (b - a) / L
        x = a + (np.arange(1, L + 1) - 0.5) * h
        x.setflags(write=False)
        nodes.append(x)
        widths.append(h)
    return Grid(domain, counts, tuple(nodes), tuple(widths))


def axis_wavenumbers(domain: Domain, axis: int, n: int, bc) -> np.ndarray:
    if n < 2:
        raise ValueError(f"need at least 2 modes, got {n}")
    bc = BoundaryKind.parse(bc)
    length = domain.hi[axis] - domain.lo[axis]
    k = np.arange(1, n + 1) if bc is BoundaryKind.DIRICHLET else np.arange(n)
    return k * np.pi / length


def check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not (1.0 < alpha <= 2.0):
        raise ValueError(f"alpha must satisfy 1 < alpha <= 2, got {alpha}")
    return alpha


def build_symbol(wavenumbers: Sequence[np.ndarray], alpha: float, diffusion: float = 1.0) -> np.ndarray:
    """Per-mode symbol ``D * (sum_axes lambda^2) ** (alpha/2)`` on the full mode grid.

    Axes are summed in increasing index order.  At ``alpha == 2`` the power is
    the identity, so the result is bitwise ``D * sum lambda^2``.
    """
    alpha = check_alpha(alpha)
    diffusion = float(diffusion)
    if not diffusion > 0:
        raise ValueError(f"diffusion must be positive, got {diffusion}")
    d = len(wavenumbers)
    total = None
    for axis, lam in enumerate(wavenumbers):
        shape = [1] * d
        shape[axis] = -1
        sq = np.square(np.asarray(lam, dtype=float)).reshape(shape)
        total = sq if total is None else total + sq
    total = np.broadcast_to(total, tuple(len(w) for w in wavenumbers))
    return diffusion * np.power(total, alpha / 2.0)


@dataclass(frozen=True)
class SpectrumTable:
    """Wavenumbers and per-species symbols for one grid, ``alpha`` and BC set.

    ``symbol`` has shape ``(n_species, *grid.shape)``; ``symbol[i]`` already
    contains the species' diffusion coefficient.
    """

    bcs: tuple[BoundaryKind, ...]
    wavenumbers: tuple[np.ndarray, ...] = field(repr=False)
    alpha: float
    diffusion: tuple[float, ...]
    symbol: np.ndarray = field(repr=False)

    @property
    def n_species(self) -> int:
        return len(self.diffusion)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(w) for w in self.wavenumbers)


def build_spectrum(grid: Grid, bcs, alpha: float, diffusion: float | Sequence[float] = 1.0) -> SpectrumTable:
    bcs = as_bcs(bcs, grid.dim)
    waves = tuple(axis_wavenumbers(grid.domain, i, grid.n[i], bcs[i]) for i in range(grid.dim))
    for w in waves:
        w.setflags(write=False)
    diffs = tuple(float(v) for v in np.atleast_1d(diffusion))
    symbol = np.stack([build_symbol(waves, alpha, D) for D in diffs])
    symbol.setflags(write=False)
    return SpectrumTable(bcs, waves, float(alpha), diffs, symbol)
