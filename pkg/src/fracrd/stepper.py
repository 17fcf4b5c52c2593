"""Exponential time differencing in coefficient space.

All species are stacked into one array of shape ``(M, *grid_shape)``.  Per
mode the linear part is ``-mu * u`` with ``mu = D (sum lambda^2)^(alpha/2)``;
reactions are evaluated pointwise in physical space (pseudo-spectral).

Schemes, per mode with ``c = tau * mu``:

ETD1
    ``u+ = exp(-c) u + tau phi1(c) F(u)``
ETDCN
    ``a = (4/(2+c) - 1) v + 2 tau/(2+c) F(v)``,
    ``v+ = a + tau/(2+c) (F(a) - F(v))``
ETDCN_EXP
    ``b = exp(-c) u + tau phi1(c) F(u)``,
    ``u+ = b + tau phi2(c) (F(b) - F(u))``
"""
from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Callable

import numpy as np

from . import kernels
from .mesh import SpectrumTable
from .models import ReactionKind, ReactionSpec
from .transforms import forward, inverse

if TYPE_CHECKING:
    from .config import RunConfig

__all__ = [
    "RunResult",
    "Scheme",
    "SimulationAbort",
    "Stepper",
    "StepperState",
    "etd1_step",
    "etdcn_exp_step",
    "etdcn_step",
    "eval_reaction_spectral",
    "initial_state",
    "integrate",
    "pade11",
    "phi1",
    "phi2",
    "run",
    "step_count",
]

log = logging.getLogger(__name__)

SnapshotSink = Callable[[int, float, int, np.ndarray], None]

PHI1_SERIES_BELOW = 1e-8
PHI2_SERIES_BELOW = 0.1
NEGATIVE_TOLERANCE = 1e-10


class Scheme(enum.Enum):
    ETD1 = "etd1"
    ETDCN = "etdcn"
    ETDCN_EXP = "etdcn-exp"

    @classmethod
    def parse(cls, value) -> "Scheme":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("_", "-")
        for s in cls:
            if key == s.value:
                return s
        raise ValueError(f"unknown scheme {value!r} (expected etd1, etdcn or etdcn-exp)")


class SimulationAbort(RuntimeError):
    """A step produced non-finite values."""

    def __init__(self, message: str, step: int, time: float, species: int | None = None):
        where = f"step {step} (t={time:g})"
        if species is not None:
            where += f", species {species}"
        super().__init__(f"{message} at {where}")
        self.step = step
        self.time = time
        self.species = species


def phi1(z):
    """``(1 - exp(-z)) / z`` with ``phi1(0) = 1``."""
    z = np.asarray(z, dtype=float)
    small = np.abs(z) < PHI1_SERIES_BELOW
    safe = np.where(small, 1.0, z)
    out = np.where(small, 1.0 - z / 2.0 + z * z / 6.0 - z ** 3 / 24.0, -np.expm1(-safe) / safe)
    return out if out.ndim else float(out)


def phi2(z):
    """``(exp(-z) - 1 + z) / z^2`` with ``phi2(0) = 1/2``."""
    z = np.asarray(z, dtype=float)
    small = np.abs(z) < PHI2_SERIES_BELOW
    safe = np.where(small, 1.0, z)
    series = np.zeros_like(z)
    term = np.full_like(z, 0.5)
    for n in range(2, 14):
        series += term
        term = term * (-z) / (n + 1)
    out = np.where(small, series, (np.expm1(-safe) + safe) / (safe * safe))
    return out if out.ndim else float(out)


def pade11(c):
    """(1,1)-Pade approximant ``(2 - c) / (2 + c)`` of ``exp(-c)``."""
    c = np.asarray(c, dtype=float)
    out = 4.0 / (2.0 + c) - 1.0
    return out if out.ndim else float(out)


def step_count(t_final: float, tau: float) -> int:
    """Number of steps ``T / tau``; refuses step sizes that do not divide ``T``."""
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    if t_final < 0:
        raise ValueError(f"final time must be nonnegative, got {t_final}")
    ratio = t_final / tau
    n = round(ratio)
    if abs(ratio - n) > math.ulp(ratio) and not math.isclose(n * tau, t_final, rel_tol=2**-50, abs_tol=0.0):
        raise ValueError(f"t_final/tau = {ratio!r} is not an integer step count")
    return int(n)


@dataclass(frozen=True)
class StepperState:
    k: int
    tau: float
    coeffs: np.ndarray = field(repr=False)
    spectra: SpectrumTable = field(repr=False)

    @property
    def t(self) -> float:
        return self.k * self.tau


def initial_state(fields, spectra: SpectrumTable, tau: float, workers: int | None = None) -> StepperState:
    u0 = np.asarray(fields, dtype=float)
    if u0.ndim == len(spectra.bcs):
        u0 = u0[np.newaxis]
    if u0.shape != spectra.symbol.shape:
        raise ValueError(f"initial fields {u0.shape} do not match spectrum {spectra.symbol.shape}")
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    return StepperState(0, float(tau), forward(u0, spectra.bcs, workers=workers), spectra)


def dealias_mask(shape: tuple[int, ...]) -> np.ndarray:
    """Keep modes whose index is below two thirds of the axis length on every axis."""
    keep = np.ones(shape, dtype=bool)
    for axis, n in enumerate(shape):
        idx = np.arange(n) < (2 * n) // 3
        sl = [np.newaxis] * len(shape)
        sl[axis] = slice(None)
        keep &= idx[tuple(sl)]
    return keep


class Stepper:
    """Cached per-mode weights for one spectrum, reaction, step size and scheme."""

    def __init__(self, spectra: SpectrumTable, model: ReactionSpec, tau: float, scheme=Scheme.ETDCN,
                 workers: int | None = None, dealias: bool = False, backend: str | None = None):
        if model.n_species != spectra.n_species:
            raise ValueError(f"reaction has {model.n_species} species, spectrum has {spectra.n_species}")
        if not tau > 0:
            raise ValueError(f"tau must be positive, got {tau}")
        self.spectra = spectra
        self.model = model
        self.tau = float(tau)
        self.scheme = Scheme.parse(scheme)
        self.workers = workers
        self.kernels = kernels.default if backend is None else kernels.Kernels(backend)
        self.mask = dealias_mask(spectra.shape) if dealias else None

        c = self.tau * spectra.symbol
        if self.scheme is Scheme.ETDCN:
            denom = 2.0 + c
            self.e = 4.0 / denom - 1.0
            self.w = 2.0 * self.tau / denom
            self.q = self.tau / denom
        else:
            self.e = np.exp(-c)
            self.w = self.tau * phi1(c)
            self.q = self.tau * phi2(c) if self.scheme is Scheme.ETDCN_EXP else None

    def to_physical(self, coeffs):
        return inverse(coeffs, self.spectra.bcs, workers=self.workers, check=False)

    def reaction_hat(self, coeffs, physical=None, step: int = 0, stage: str = ""):
        """Forward transform of the pointwise reaction evaluated at ``inverse(coeffs)``."""
        if self.model.is_zero:
            return np.zeros_like(coeffs)
        u = self.to_physical(coeffs) if physical is None else physical
        f = self.model(u)
        bad = ~np.isfinite(f)
        if bad.any():
            species = int(np.argwhere(bad.reshape(len(f), -1).any(axis=1))[0, 0])
            raise SimulationAbort(f"non-finite reaction{stage}", step, step * self.tau, species)
        fh = forward(f, self.spectra.bcs, workers=self.workers, check=False)
        if self.mask is not None:
            fh *= self.mask
        return fh

    def advance(self, coeffs, k: int = 0, physical=None):
        """Coefficients after one step from step index ``k``."""
        ker = self.kernels
        fu = self.reaction_hat(coeffs, physical, k)
        if self.scheme is Scheme.ETD1:
            return ker.lincomb(self.e, coeffs, self.w, fu)
        pred = ker.lincomb(self.e, coeffs, self.w, fu)
        if not np.isfinite(pred).all():
            bad = ~np.isfinite(pred.reshape(len(pred), -1)).all(axis=1)
            raise SimulationAbort("non-finite predictor", k, k * self.tau, int(np.argmax(bad)))
        fp = self.reaction_hat(pred, None, k, " at predictor stage")
        return ker.correct(pred, self.q, fp, fu)

    def step(self, state: StepperState) -> StepperState:
        if state.spectra is not self.spectra or state.tau != self.tau:
            raise ValueError("state does not belong to this stepper")
        return StepperState(state.k + 1, state.tau, self.advance(state.coeffs, state.k), state.spectra)


def eval_reaction_spectral(coeffs, model: ReactionSpec, spectra: SpectrumTable, workers: int | None = None):
    if model.is_zero:
        return np.zeros_like(np.asarray(coeffs, dtype=float))
    u = inverse(coeffs, spectra.bcs, workers=workers)
    f = model(u)
    if not np.isfinite(f).all():
        raise SimulationAbort("non-finite reaction", 0, 0.0)
    return forward(f, spectra.bcs, workers=workers)


def etd1_step(state: StepperState, model: ReactionSpec, **kw) -> StepperState:
    return Stepper(state.spectra, model, state.tau, Scheme.ETD1, **kw).step(state)


def etdcn_step(state: StepperState, model: ReactionSpec, **kw) -> StepperState:
    return Stepper(state.spectra, model, state.tau, Scheme.ETDCN, **kw).step(state)


def etdcn_exp_step(state: StepperState, model: ReactionSpec, **kw) -> StepperState:
    return Stepper(state.spectra, model, state.tau, Scheme.ETDCN_EXP, **kw).step(state)


@dataclass
class RunResult:
    fields: np.ndarray
    state: StepperState
    max_norm: np.ndarray
    """``max_norm[k, i]`` is ``max |u_i|`` at step ``k`` (``k = 0..N``)."""
    min_value: np.ndarray


def integrate(u0, spectra: SpectrumTable, model: ReactionSpec, tau: float, n_steps: int,
              scheme=Scheme.ETDCN, sink: SnapshotSink | None = None, snapshot_every: int = 0,
              workers: int | None = None, dealias: bool = False, backend: str | None = None) -> RunResult:
    """Advance ``u0`` (shape ``(M, *grid)``) by ``n_steps`` steps of size ``tau``.

    ``sink(step, time, species, field)`` receives read-only physical fields at
    step 0 and every ``snapshot_every`` steps (or step 0 and the last step
    when ``snapshot_every`` is 0).
    """
    state = initial_state(u0, spectra, tau, workers)
    stepper = Stepper(spectra, model, tau, scheme, workers=workers, dealias=dealias, backend=backend)
    if n_steps < 0:
        raise ValueError(f"negative step count {n_steps}")
    M = spectra.n_species
    max_norm = np.empty((n_steps + 1, M))
    min_value = np.empty((n_steps + 1, M))

    def want(k):
        if snapshot_every > 0:
            return k % snapshot_every == 0
        return k in (0, n_steps)

    initial = np.array(u0, dtype=float).reshape(state.coeffs.shape)
    coeffs = state.coeffs
    for k in range(n_steps + 1):
        physical = stepper.to_physical(coeffs)
        # step 0 reports the initial condition itself, not its round trip
        shown = initial if k == 0 else physical
        flat = shown.reshape(M, -1)
        max_norm[k] = np.abs(flat).max(axis=1)
        min_value[k] = flat.min(axis=1)
        if sink is not None and want(k):
            for i in range(M):
                view = shown[i].view()
                view.flags.writeable = False
                sink(k, k * stepper.tau, i, view)
        if k == n_steps:
            break
        coeffs = stepper.advance(coeffs, k, physical)
        if not np.isfinite(coeffs).all():
            bad = ~np.isfinite(coeffs.reshape(M, -1)).all(axis=1)
            raise SimulationAbort("non-finite solution", k + 1, (k + 1) * stepper.tau, int(np.argmax(bad)))
    # densities only; ignore round-off relative to the solution size
    negative = min_value < -NEGATIVE_TOLERANCE * max_norm.max(initial=0.0)
    if model.kind is not ReactionKind.CUSTOM and negative.any():
        k, i = np.argwhere(negative)[0]
        log.warning("species %d goes negative (%.3g) at step %d (t=%g)",
                    i + 1, min_value[k, i], k, k * stepper.tau)
    final = StepperState(n_steps, stepper.tau, coeffs, spectra)
    return RunResult(shown, final, max_norm, min_value)


def run(config: "RunConfig", sink: SnapshotSink | None = None, workers: int | None = None,
        backend: str | None = None) -> RunResult:
    problem = config.build(backend)
    return integrate(problem.u0, problem.spectra, problem.model, config.tau, problem.n_steps,
                     config.scheme, sink=sink, snapshot_every=config.snapshot_every,
                     workers=workers, dealias=config.dealias, backend=backend)
