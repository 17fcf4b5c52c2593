"""Matrix-free fractional diffusion term ``-D (-Laplacian)^(alpha/2) f``."""
from __future__ import annotations

from functools import reduce

import numpy as np

from .mesh import SpectrumTable
from .transforms import basis_matrix, forward, inverse

__all__ = ["apply", "dense_oracle", "DENSE_MAX_MODES"]

DENSE_MAX_MODES = 4096


def _symbol_for(spectra: SpectrumTable, species: int | None) -> np.ndarray:
    if species is not None:
        return spectra.symbol[species]
    if spectra.n_species != 1:
        raise ValueError("spectrum holds several species; pass species=")
    return spectra.symbol[0]


def apply(f, spectra: SpectrumTable, species: int | None = None, workers: int | None = None) -> np.ndarray:
    """Signed diffusion term of one species, computed spectrally.

    Returns ``inverse(-mu * forward(f))``; exact for any finite combination of
    grid eigenfunctions.  ``f`` must have the grid shape.
    """
    mu = _symbol_for(spectra, species)
    f = np.asarray(f, dtype=float)
    if f.shape != mu.shape:
        raise ValueError(f"field shape {f.shape} does not match mode shape {mu.shape}")
    c = forward(f, spectra.bcs, workers=workers)
    return inverse(-mu * c, spectra.bcs, workers=workers, check=False)


def dense_oracle(spectra: SpectrumTable, species: int | None = None) -> np.ndarray:
    """Dense matrix ``Phi diag(-mu) Phi^T`` acting on C-order flattened fields.

    ``Phi`` is the Kronecker product of the per-axis sampled eigenfunction
    matrices, so its columns are the orthonormal multi-dimensional modes.
    """
    mu = _symbol_for(spectra, species)
    if mu.size > DENSE_MAX_MODES:
        raise ValueError(f"dense oracle limited to {DENSE_MAX_MODES} modes, got {mu.size}")
    bases = [basis_matrix(n, bc) for n, bc in zip(mu.shape, spectra.bcs)]
    phi = reduce(np.kron, bases)
    return (phi * -mu.ravel()) @ phi.T
