"""Run configuration: a flat ``key = value`` file with ``[species.N]`` sections.

Example::

    # predator-prey, Condition A
    lo = 0, 0
    hi = 900, 300
    n = 256, 128
    bc = neumann
    alpha = 1.5
    tau = 0.5
    t_final = 400
    scheme = etdcn
    model = predprey
    model.a = 2.5
    ic = condA
    snapshot_every = 100

    [species.2]
    diffusion = 1.0

Unknown keys are rejected and every violation is reported with its line.
"""
from __future__ import annotations

import dataclasses
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import models
from .mesh import BoundaryKind, Domain, Grid, SpectrumTable, build_grid, build_spectrum
from .stepper import Scheme, step_count

__all__ = ["ConfigError", "Problem", "RunConfig", "load_config", "parse_config"]

MODELS = ("predprey", "fisher", "none", "linear")
ICS = ("condA", "condB", "constant", "eigenfunction", "file", "bump", "random")

_SECTION = re.compile(r"^\[species\.(\d+)\]$")


class ConfigError(ValueError):
    """One or more configuration problems; ``problems`` holds ``(line, key, message)``."""

    def __init__(self, problems: list[tuple[int | None, str, str]]):
        self.problems = problems
        lines = []
        for line, key, msg in problems:
            where = f"line {line}: " if line else ""
            lines.append(f"{where}{key}: {msg}")
        super().__init__("invalid configuration:\n  " + "\n  ".join(lines))


def _floats(text):
    return tuple(float(v) for v in text.replace(",", " ").split())


def _ints(text):
    out = []
    for v in text.replace(",", " ").split():
        f = float(v)
        if f != int(f):
            raise ValueError(f"{v} is not an integer")
        out.append(int(f))
    return tuple(out)


def _float(text):
    vals = _floats(text)
    if len(vals) != 1:
        raise ValueError("expected a single number")
    return vals[0]


def _int(text):
    vals = _ints(text)
    if len(vals) != 1:
        raise ValueError("expected a single integer")
    return vals[0]


def _bool(text):
    key = text.strip().lower()
    if key in ("1", "true", "yes", "on"):
        return True
    if key in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _words(text):
    return tuple(v for v in text.replace(",", " ").split())


def _str(text):
    return text.strip()


# key -> (RunConfig field, converter)
TOP_KEYS: dict[str, tuple[str, Any]] = {
    "dim": ("dim", _int),
    "lo": ("lo", _floats),
    "hi": ("hi", _floats),
    "n": ("n", _ints),
    "bc": ("bc", _words),
    "alpha": ("alpha", _float),
    "tau": ("tau", _float),
    "t_final": ("t_final", _float),
    "scheme": ("scheme", _str),
    "model": ("model", _str),
    "species": ("n_species", _int),
    "diffusion": ("diffusion", _float),
    "ic": ("ic", _str),
    "snapshot_every": ("snapshot_every", _int),
    "out_dir": ("out_dir", _str),
    "seed": ("seed", _int),
    "dealias": ("dealias", _bool),
    "converge.taus": ("converge_taus", _floats),
    "converge.tau_ref": ("tau_ref", _float),
    "converge.reference_scheme": ("reference_scheme", _str),
    "spread.alphas": ("spread_alphas", _floats),
}
MODEL_KEYS = {
    "model.a": _float, "model.b": _float, "model.c": _float, "model.delta": _float,
    "model.r": _float, "model.K": _float, "model.rate": _float,
}
IC_KEYS = {
    "ic.mode": _ints, "ic.amplitude": _float, "ic.center": _floats, "ic.width": _float,
    "ic.height": _float, "ic.noise": _float, "ic.value": _float,
}
SPECIES_KEYS = {"diffusion": _float, "value": _float, "file": _str}


@dataclass(frozen=True)
class Problem:
    grid: Grid
    spectra: SpectrumTable
    model: models.ReactionSpec
    u0: np.ndarray
    n_steps: int


@dataclass(frozen=True)
class RunConfig:
    lo: tuple[float, ...] = (0.0, 0.0)
    hi: tuple[float, ...] = (900.0, 300.0)
    n: tuple[int, ...] = (256, 128)
    bc: tuple[str, ...] = ("neumann",)
    alpha: float = 2.0
    tau: float = 0.5
    t_final: float = 0.0
    scheme: str = "etdcn"
    model: str = "predprey"
    model_params: dict = field(default_factory=dict)
    n_species: int | None = None
    diffusion: float = 1.0
    ic: str = "condA"
    ic_params: dict = field(default_factory=dict)
    species: dict = field(default_factory=dict)
    """Per-species overrides keyed by 1-based species number."""
    snapshot_every: int = 0
    out_dir: str = "out"
    seed: int = 0
    dealias: bool = False
    converge_taus: tuple[float, ...] | None = None
    tau_ref: float | None = None
    reference_scheme: str = "etdcn"
    spread_alphas: tuple[float, ...] = (2.0, 1.8, 1.5, 1.2)
    dim: int | None = None
    base_dir: str = "."

    def __post_init__(self):
        problems = self.problems()
        if problems:
            raise ConfigError([(None, k, m) for k, m in problems])

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)

    # -- validation -------------------------------------------------------

    def problems(self) -> list[tuple[str, str]]:
        """Every violated constraint as ``(key, message)``; empty when valid."""
        out = []
        d = len(self.lo)
        if self.dim is not None and self.dim != d:
            out.append(("dim", f"dim = {self.dim} but lo has {d} entries"))
        if not 1 <= d <= 3:
            out.append(("lo", f"dimension must be 1, 2 or 3, got {d}"))
        if len(self.hi) != d:
            out.append(("hi", f"expected {d} entries to match lo, got {len(self.hi)}"))
        else:
            for i, (a, b) in enumerate(zip(self.lo, self.hi)):
                if not b > a:
                    out.append(("hi", f"axis {i}: need lo < hi, got ({a:g}, {b:g})"))
        if len(self.n) not in (1, d):
            out.append(("n", f"expected 1 or {d} grid sizes, got {len(self.n)}"))
        if any(v < 2 for v in self.n):
            out.append(("n", "grid must have at least 2 nodes per axis"))
        if len(self.bc) not in (1, d):
            out.append(("bc", f"expected 1 or {d} boundary kinds, got {len(self.bc)}"))
        for b in self.bc:
            try:
                BoundaryKind.parse(b)
            except ValueError as exc:
                out.append(("bc", str(exc)))
        if not (1.0 < self.alpha <= 2.0):
            out.append(("alpha", "alpha must satisfy 1 < alpha <= 2"))
        if not self.tau > 0:
            out.append(("tau", "tau must be positive"))
        if not self.t_final >= 0:
            out.append(("t_final", "t_final must be nonnegative"))
        elif self.tau > 0:
            try:
                step_count(self.t_final, self.tau)
            except ValueError:
                out.append(("tau", f"t_final/tau = {self.t_final / self.tau:.6g} is not an integer step count"))
        try:
            Scheme.parse(self.scheme)
        except ValueError as exc:
            out.append(("scheme", str(exc)))
        if self.model not in MODELS:
            out.append(("model", f"unknown model {self.model!r} (expected one of {', '.join(MODELS)})"))
        else:
            out.extend(self._model_problems())
        if not self.diffusion > 0:
            out.append(("diffusion", "diffusion must be positive"))
        for num, sect in self.species.items():
            if not 1 <= num <= (self.species_count or num):
                out.append((f"species.{num}", f"no species {num} in a {self.species_count}-species model"))
            if "diffusion" in sect and not sect["diffusion"] > 0:
                out.append((f"species.{num}.diffusion", "diffusion must be positive"))
        if self.ic not in ICS:
            out.append(("ic", f"unknown initial condition {self.ic!r} (expected one of {', '.join(ICS)})"))
        else:
            out.extend(self._ic_problems(d))
        if self.snapshot_every < 0:
            out.append(("snapshot_every", "must be nonnegative"))
        if self.converge_taus is not None:
            taus = self.converge_taus
            if len(taus) < 2 or any(b >= a for a, b in zip(taus, taus[1:])):
                out.append(("converge.taus", "need at least two strictly decreasing step sizes"))
            for t in taus:
                if not t > 0:
                    out.append(("converge.taus", "step sizes must be positive"))
                    break
                try:
                    step_count(self.t_final, t)
                except ValueError:
                    out.append(("converge.taus", f"tau = {t:g} does not divide t_final"))
        if self.tau_ref is not None and not self.tau_ref > 0:
            out.append(("converge.tau_ref", "must be positive"))
        try:
            Scheme.parse(self.reference_scheme)
        except ValueError as exc:
            out.append(("converge.reference_scheme", str(exc)))
        for a in self.spread_alphas:
            if not (1.0 < a <= 2.0):
                out.append(("spread.alphas", "alpha must satisfy 1 < alpha <= 2"))
                break
        return out

    def _model_problems(self):
        out = []
        allowed = {
            "predprey": {"a", "b", "c", "delta"},
            "fisher": {"r", "K"},
            "linear": {"rate"},
            "none": set(),
        }[self.model]
        for k, v in self.model_params.items():
            if k not in allowed:
                out.append((f"model.{k}", f"not a parameter of model {self.model!r}"))
            elif k != "rate" and not v > 0:
                out.append((f"model.{k}", "must be positive"))
        if self.model == "predprey" and not out:
            p = self.predprey_params()
            if p.c >= p.b:
                out.append(("model.c", "need c < b for a coexistence state"))
        if self.model in ("predprey", "fisher") and self.n_species not in (None, self.species_count):
            out.append(("species", f"model {self.model!r} has {self.species_count} species"))
        if self.n_species is not None and self.n_species < 1:
            out.append(("species", "need at least one species"))
        return out

    def _ic_problems(self, d):
        out = []
        if self.ic in ("condA", "condB"):
            if d != 2:
                out.append(("ic", f"{self.ic} needs a 2-D domain"))
            if self.model != "predprey":
                out.append(("ic", f"{self.ic} needs model = predprey"))
        if self.ic == "eigenfunction":
            mode = self.ic_params.get("mode")
            if mode is None:
                out.append(("ic.mode", "eigenfunction initial condition needs ic.mode"))
            elif len(mode) not in (1, d) or any(m < 1 for m in mode):
                out.append(("ic.mode", f"need 1 or {d} mode indices >= 1"))
            elif len(self.n) in (1, d):
                sizes = self.n if len(self.n) == d else self.n * d
                modes = mode if len(mode) == d else mode * d
                if any(m > L for m, L in zip(modes, sizes)):
                    out.append(("ic.mode", "mode index exceeds the grid size"))
        if self.ic == "bump":
            c = self.ic_params.get("center")
            if c is not None and len(c) not in (1, d):
                out.append(("ic.center", f"expected 1 or {d} coordinates"))
            if not self.ic_params.get("width", 1.0) > 0:
                out.append(("ic.width", "must be positive"))
        if self.ic == "file":
            for i in range(1, (self.species_count or 1) + 1):
                if "file" not in self.species.get(i, {}):
                    out.append((f"species.{i}.file", "file initial condition needs a path per species"))
        return out

    # -- derived objects --------------------------------------------------

    @property
    def species_count(self) -> int:
        if self.model == "predprey":
            return 2
        if self.model == "fisher":
            return 1
        return self.n_species or 1

    @property
    def bcs(self) -> tuple[BoundaryKind, ...]:
        kinds = tuple(BoundaryKind.parse(b) for b in self.bc)
        return kinds * len(self.lo) if len(kinds) == 1 else kinds

    def predprey_params(self) -> models.PredPreyParams:
        return models.PredPreyParams(**{k: self.model_params[k] for k in ("a", "b", "c", "delta")
                                        if k in self.model_params})

    def diffusions(self) -> tuple[float, ...]:
        out = []
        for i in range(1, self.species_count + 1):
            D = self.diffusion
            if self.model == "predprey" and i == 2:
                D = self.predprey_params().delta * self.diffusion
            out.append(self.species.get(i, {}).get("diffusion", D))
        return tuple(out)

    def domain(self) -> Domain:
        return Domain(self.lo, self.hi)

    def grid(self) -> Grid:
        return build_grid(self.domain(), self.n)

    def spectrum(self, grid: Grid | None = None, alpha: float | None = None) -> SpectrumTable:
        grid = grid or self.grid()
        return build_spectrum(grid, self.bcs, self.alpha if alpha is None else alpha, self.diffusions())

    def reaction(self, backend: str | None = None) -> models.ReactionSpec:
        if self.model == "predprey":
            return models.predprey(self.predprey_params(), backend)
        if self.model == "fisher":
            p = models.FisherParams(**{k: self.model_params[k] for k in ("r", "K") if k in self.model_params})
            return models.fisher(p, backend)
        if self.model == "linear":
            return models.linear(self.model_params.get("rate", 0.0), self.species_count)
        return models.zero(self.species_count)

    def initial_fields(self, grid: Grid | None = None) -> np.ndarray:
        """Initial densities, shape ``(species, *grid.shape)``."""
        grid = grid or self.grid()
        M = self.species_count
        ic = self.ic
        if ic in ("condA", "condB"):
            us, vs = models.coexistence_steady_state(self.predprey_params())
            fn = models.ic_condition_a if ic == "condA" else models.ic_condition_b
            return np.stack(fn(grid, us, vs))
        if ic == "constant":
            return np.stack([np.full(grid.shape, self._species_value(i)) for i in range(1, M + 1)])
        if ic == "random":
            rng = np.random.default_rng(self.seed)
            noise = self.ic_params.get("noise", 0.01)
            return np.stack([self._species_value(i) + noise * rng.uniform(-1.0, 1.0, grid.shape)
                             for i in range(1, M + 1)])
        if ic == "eigenfunction":
            field_ = self.ic_params.get("amplitude", 1.0) * eigenfunction(grid, self.bcs, self.ic_modes())
            return np.stack([field_] * M)
        if ic == "bump":
            center = self.ic_params.get("center")
            if center is None:
                center = tuple((a + b) / 2 for a, b in zip(self.lo, self.hi))
            elif len(center) == 1:
                center = center * grid.dim
            r2 = sum((x - c) ** 2 for x, c in zip(grid.mesh(), center))
            width = self.ic_params.get("width", 1.0)
            bump = self.ic_params.get("height", 1.0) * np.exp(-r2 / width ** 2)
            return np.stack([bump] * M)
        from .io import read_field

        out = []
        for i in range(1, M + 1):
            path = Path(self.species[i]["file"])
            if not path.is_absolute():
                path = Path(self.base_dir) / path
            arr = read_field(path)
            if arr.shape != grid.shape:
                raise ConfigError([(None, f"species.{i}.file", f"field shape {arr.shape} != grid {grid.shape}")])
            out.append(arr)
        return np.stack(out)

    def _species_value(self, i):
        return self.species.get(i, {}).get("value", self.ic_params.get("value", 0.0))

    def ic_modes(self):
        mode = self.ic_params["mode"]
        return mode if len(mode) == len(self.lo) else mode * len(self.lo)

    def build(self, backend: str | None = None) -> Problem:
        grid = self.grid()
        return Problem(grid, self.spectrum(grid), self.reaction(backend), self.initial_fields(grid),
                       step_count(self.t_final, self.tau))


def eigenfunction(grid: Grid, bcs, modes) -> np.ndarray:
    """Analytic eigenfunction with 1-based per-axis mode indices, sampled at the nodes.

    Dirichlet mode ``j`` is ``sin(j pi s)``, Neumann mode ``j`` is
    ``cos((j-1) pi s)`` with ``s = (x - lo) / (hi - lo)``; unnormalised.
    """
    out = np.ones(grid.shape)
    for axis, (x, bc, j) in enumerate(zip(grid.mesh(), bcs, modes)):
        s = (x - grid.domain.lo[axis]) / grid.domain.lengths[axis]
        if BoundaryKind.parse(bc) is BoundaryKind.DIRICHLET:
            out = out * np.sin(j * np.pi * s)
        else:
            out = out * np.cos((j - 1) * np.pi * s)
    return out


def parse_config(text: str, base_dir: str | Path = ".") -> RunConfig:
    """Parse and validate configuration text; raises :class:`ConfigError` listing every problem."""
    problems: list[tuple[int | None, str, str]] = []
    lines_of: dict[str, int] = {}
    kwargs: dict[str, Any] = {}
    model_params: dict[str, float] = {}
    ic_params: dict[str, Any] = {}
    species: dict[int, dict[str, Any]] = {}
    section: int | None = None

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            m = _SECTION.match(line)
            if m is None or int(m.group(1)) < 1:
                problems.append((lineno, line, "unknown section (expected [species.N], N >= 1)"))
                section = -1
            else:
                section = int(m.group(1))
                species.setdefault(section, {})
            continue
        if "=" not in line:
            problems.append((lineno, line, "expected key = value"))
            continue
        key, value = (part.strip() for part in line.split("=", 1))
        full = key if section is None else f"species.{section}.{key}"
        if section == -1:
            continue
        if full in lines_of:
            problems.append((lineno, full, f"duplicate key (first set on line {lines_of[full]})"))
            continue
        lines_of[full] = lineno
        try:
            if section is not None:
                if key not in SPECIES_KEYS:
                    raise KeyError(key)
                species[section][key] = SPECIES_KEYS[key](value)
            elif key in TOP_KEYS:
                name, conv = TOP_KEYS[key]
                kwargs[name] = conv(value)
            elif key in MODEL_KEYS:
                model_params[key.split(".", 1)[1]] = MODEL_KEYS[key](value)
            elif key in IC_KEYS:
                ic_params[key.split(".", 1)[1]] = IC_KEYS[key](value)
            else:
                raise KeyError(key)
        except KeyError:
            problems.append((lineno, full, "unknown key"))
        except ValueError as exc:
            problems.append((lineno, full, f"bad value {value!r}: {exc}"))

    kwargs.update(model_params=model_params, ic_params=ic_params, species=species, base_dir=str(base_dir))
    if "lo" in kwargs and "hi" not in kwargs:
        problems.append((lines_of.get("lo"), "hi", "lo given without hi"))
    config = None
    try:
        config = RunConfig(**kwargs)
    except ConfigError as exc:
        for _, key, msg in exc.problems:
            problems.append((_line_for(key, lines_of), key, msg))
    if problems:
        problems.sort(key=lambda p: p[0] or 0)
        raise ConfigError(problems)
    return config


def _line_for(key, lines_of):
    if key in lines_of:
        return lines_of[key]
    head = key.split(".", 1)[0]
    for k, line in lines_of.items():
        if k.startswith(key) or k == head:
            return line
    return None


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    return parse_config(path.read_text(encoding="utf-8"), base_dir=path.parent)
