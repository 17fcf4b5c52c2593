"""Orthonormal sine/cosine transforms on the cell-centred grid.

Dirichlet axes use DST-II (inverse DST-III), Neumann axes DCT-II (inverse
DCT-III), both with orthonormal scaling so that ``inverse`` is the transpose
of ``forward`` and ``||f||_2 == ||c||_2``.  Coefficient index ``k`` on an
axis corresponds to wavenumber ``mesh.axis_wavenumbers(...)[k]``.

Arrays may carry leading batch axes (e.g. species); the transform always acts
on the trailing ``len(bcs)`` axes, in increasing axis order.
"""
from __future__ import annotations

import numpy as np
import scipy.fft

from .mesh import BoundaryKind, as_bcs

__all__ = [
    "forward",
    "inverse",
    "reference_forward",
    "reference_inverse",
    "basis_matrix",
    "REFERENCE_MAX_N",
]

REFERENCE_MAX_N = 64


def _check(f, bcs):
    f = np.asarray(f, dtype=float)
    if f.ndim < len(bcs):
        raise ValueError(f"array of rank {f.ndim} cannot carry {len(bcs)} transform axes")
    if not np.isfinite(f).all():
        raise ValueError("non-finite values in transform input")
    return f


def _bcs_for(f, bcs):
    if isinstance(bcs, (BoundaryKind, str)):
        raise TypeError("pass one boundary kind per transformed axis")
    return as_bcs(bcs, len(bcs))


def _apply(f, bcs, workers, inverse_):
    d = len(bcs)
    offset = f.ndim - d
    out = f
    for i, bc in enumerate(bcs):
        axis = offset + i
        if bc is BoundaryKind.DIRICHLET:
            fn = scipy.fft.idst if inverse_ else scipy.fft.dst
        else:
            fn = scipy.fft.idct if inverse_ else scipy.fft.dct
        out = fn(out, type=2, axis=axis, norm="ortho", workers=workers)
    return out


def forward(f, bcs, workers: int | None = None, check: bool = True) -> np.ndarray:
    """Field values at grid nodes -> orthonormal eigenfunction coefficients."""
    bcs = _bcs_for(f, bcs)
    if check:
        f = _check(f, bcs)
    return _apply(f, bcs, workers, inverse_=False)


def inverse(c, bcs, workers: int | None = None, check: bool = True) -> np.ndarray:
    """Exact inverse of :func:`forward` (to round-off)."""
    bcs = _bcs_for(c, bcs)
    if check:
        c = _check(c, bcs)
    return _apply(c, bcs, workers, inverse_=True)


def basis_matrix(n: int, bc) -> np.ndarray:
    """Sampled eigenfunctions as columns, each scaled to unit Euclidean norm.

    ``B[j, k] = phi_k(x_j)`` on the unit-free staggered grid
    ``(x_j - lo) / (hi - lo) = (j + 1/2) / n``.  Built by direct evaluation of
    sin/cos, independently of the FFT path.
    """
    bc = BoundaryKind.parse(bc)
    s = (np.arange(n) + 0.5) / n
    if bc is BoundaryKind.DIRICHLET:
        k = np.arange(1, n + 1)
        raw = np.sin(np.pi * np.outer(s, k))
    else:
        k = np.arange(n)
        raw = np.cos(np.pi * np.outer(s, k))
    return raw / np.sqrt(np.einsum("jk,jk->k", raw, raw))


def _reference(f, bcs, transpose):
    bcs = _bcs_for(f, bcs)
    f = _check(f, bcs)
    d = len(bcs)
    offset = f.ndim - d
    for i, bc in enumerate(bcs):
        n = f.shape[offset + i]
        if n > REFERENCE_MAX_N:
            raise ValueError(f"reference transform limited to n <= {REFERENCE_MAX_N}, got {n}")
        if n < 2:
            raise ValueError(f"need at least 2 nodes per axis, got {n}")
    out = f
    for i, bc in enumerate(bcs):
        B = basis_matrix(f.shape[offset + i], bc)
        M = B.T if transpose else B
        # c_k = sum_j M[k, j] f_j along this axis
        out = np.moveaxis(np.tensordot(M, out, axes=([1], [offset + i])), 0, offset + i)
    return out


def reference_forward(f, bcs) -> np.ndarray:
    """O(n^2)-per-axis direct summation against the sampled eigenfunctions."""
    return _reference(f, bcs, transpose=True)


def reference_inverse(c, bcs) -> np.ndarray:
    return _reference(c, bcs, transpose=False)
