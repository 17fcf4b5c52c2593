"""Reaction systems, the coexistence steady state and the initial conditions."""
from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from . import kernels
from .mesh import Grid

__all__ = [
    "FisherParams",
    "PredPreyParams",
    "ReactionKind",
    "ReactionSpec",
    "coexistence_steady_state",
    "custom",
    "fisher",
    "fisher_reaction",
    "holling2",
    "ic_condition_a",
    "ic_condition_b",
    "linear",
    "predprey",
    "predprey_reaction",
    "zero",
]


@dataclass(frozen=True)
class FisherParams:
    r: float = 1.0
    K: float = 1.0

    def __post_init__(self):
        if not (self.r > 0 and self.K > 0):
            raise ValueError(f"Fisher parameters must be positive, got r={self.r}, K={self.K}")


@dataclass(frozen=True)
class PredPreyParams:
    """Holling type-II predator-prey coefficients (nondimensional)."""

    a: float = 2.5
    b: float = 2.0
    c: float = 0.6
    delta: float = 1.0

    def __post_init__(self):
        for name in ("a", "b", "c", "delta"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"predator-prey parameter {name} must be positive, got {value}")


class ReactionKind(enum.Enum):
    FISHER = "fisher"
    PREDPREY = "predprey"
    CUSTOM = "custom"


@dataclass(frozen=True)
class ReactionSpec:
    """Pointwise reaction map for ``n_species`` coupled densities.

    ``func`` takes an array of shape ``(n_species, ...)`` and returns one of
    the same shape.  ``is_zero`` marks the trivial reaction so steppers can
    skip transforms.
    """

    kind: ReactionKind
    n_species: int
    func: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    params: Any = None
    is_zero: bool = False

    def __call__(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if u.shape[0] != self.n_species:
            raise ValueError(f"expected {self.n_species} species, got {u.shape[0]}")
        out = np.asarray(self.func(u), dtype=float)
        if out.shape != u.shape:
            raise ValueError(f"reaction returned shape {out.shape}, expected {u.shape}")
        return out


def holling2(eta):
    """Holling type-II functional response ``eta / (1 + eta)``.

    Negative arguments above the pole at -1 are evaluated but warned about,
    since they have no biological meaning.
    """
    eta_arr = np.asarray(eta, dtype=float)
    if np.any(eta_arr <= -1.0):
        raise ValueError("holling2 has a pole at eta = -1; got eta <= -1")
    if np.any(eta_arr < 0):
        warnings.warn("holling2 evaluated at negative eta", RuntimeWarning, stacklevel=2)
    out = eta_arr / (1.0 + eta_arr)
    return float(out) if np.ndim(eta) == 0 else out


def predprey_reaction(u, v, p: PredPreyParams, backend: kernels.Kernels | None = None):
    """``(u(1-u) - v h(au), b v h(au) - c v)``, elementwise."""
    k = backend or kernels.default
    scalar = np.ndim(u) == 0 and np.ndim(v) == 0
    u_arr, v_arr = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
    fu, fv = k.predprey(u_arr, v_arr, p.a, p.b, p.c)
    if scalar:
        return float(fu.reshape(-1)[0]), float(fv.reshape(-1)[0])
    return fu, fv


def fisher_reaction(u, p: FisherParams = FisherParams(), backend: kernels.Kernels | None = None):
    k = backend or kernels.default
    out = k.fisher(np.asarray(u, dtype=float), p.r, p.K)
    return float(out.reshape(-1)[0]) if np.ndim(u) == 0 else out


def predprey(p: PredPreyParams = PredPreyParams(), backend: str | None = None) -> ReactionSpec:
    k = kernels.default if backend is None else kernels.Kernels(backend)

    def func(w):
        fu, fv = k.predprey(w[0], w[1], p.a, p.b, p.c)
        return np.stack((fu, fv))

    return ReactionSpec(ReactionKind.PREDPREY, 2, func, p)


def fisher(p: FisherParams = FisherParams(), backend: str | None = None) -> ReactionSpec:
    k = kernels.default if backend is None else kernels.Kernels(backend)
    return ReactionSpec(ReactionKind.FISHER, 1, lambda w: k.fisher(w, p.r, p.K), p)


def custom(func: Callable[[np.ndarray], np.ndarray], n_species: int, params: Any = None) -> ReactionSpec:
    return ReactionSpec(ReactionKind.CUSTOM, int(n_species), func, params)


def zero(n_species: int = 1) -> ReactionSpec:
    return ReactionSpec(ReactionKind.CUSTOM, int(n_species), np.zeros_like, None, is_zero=True)


def linear(rate: float, n_species: int = 1) -> ReactionSpec:
    rate = float(rate)
    return ReactionSpec(ReactionKind.CUSTOM, int(n_species), lambda w: rate * w, {"rate": rate})


def coexistence_steady_state(p: PredPreyParams) -> tuple[float, float]:
    """Spatially uniform equilibrium with both species present.

    Solves ``h(a u*) = c / b`` and ``v* = u* (1 - u*) / h(a u*)``.
    """
    if p.c >= p.b:
        raise ValueError(f"no coexistence state for c >= b (c={p.c}, b={p.b})")
    ratio = p.c / p.b
    u_star = ratio / (p.a * (1.0 - ratio))
    if u_star >= 1.0:
        raise ValueError(f"u* = {u_star:g} >= 1 gives a nonpositive predator density")
    v_star = u_star * (1.0 - u_star) / ratio
    return u_star, v_star


def _require_2d(grid: Grid):
    if grid.dim != 2:
        raise ValueError(f"this initial condition is defined on 2-D grids, got dim={grid.dim}")


def ic_condition_a(grid: Grid, u_star: float, v_star: float) -> tuple[np.ndarray, np.ndarray]:
    """Oblique quadratic prey profile with a linear predator gradient."""
    _require_2d(grid)
    x, y = grid.mesh()
    s = x - 0.1 * y
    u0 = u_star - 2e-7 * (s - 225.0) * (s - 675.0)
    v0 = v_star - 3e-5 * (x - 450.0) - 1.2e-4 * (y - 150.0)
    return u0, v0


def ic_condition_b(grid: Grid, u_star: float, v_star: float) -> tuple[np.ndarray, np.ndarray]:
    """Separable quadratic prey profile with a linear predator gradient."""
    _require_2d(grid)
    x, y = grid.mesh()
    u0 = u_star - 2e-7 * (x - 180.0) * (x - 720.0) - 6e-7 * (y - 90.0) * (y - 210.0)
    v0 = v_star - 3e-5 * (x - 450.0) - 6e-5 * (y - 135.0)
    return u0, v0
