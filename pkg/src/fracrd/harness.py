"""Convergence studies and oracle cross-checks."""
from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import operator, transforms
from .config import RunConfig
from .mesh import BoundaryKind, Domain, build_grid, build_spectrum
from .stepper import Scheme, Stepper, integrate, step_count

__all__ = [
    "ConvergenceTable",
    "OracleReport",
    "alpha_spreading",
    "discrete_l2",
    "front_position",
    "oracle_suite",
    "pade_gap_ratios",
    "spatial_accuracy",
    "temporal_convergence",
    "write_table",
]

TRANSFORM_TOL = 1e-12
OPERATOR_TOL = 1e-10


def discrete_l2(diff, cell_volume: float) -> float:
    """``sqrt(cell_volume * sum diff^2)`` over all species and nodes."""
    diff = np.asarray(diff, dtype=float)
    return float(np.sqrt(cell_volume * np.sum(diff * diff)))


@dataclass
class ConvergenceTable:
    taus: list[float]
    errors: list[float]
    scheme: str
    reference: str

    @property
    def orders(self) -> list[float]:
        """``log(e_i / e_{i+1}) / log(tau_i / tau_{i+1})``; ``log2`` of the ratio for halvings."""
        return [math.log(e0 / e1) / math.log(t0 / t1)
                for (t0, e0), (t1, e1) in zip(zip(self.taus, self.errors), zip(self.taus[1:], self.errors[1:]))]

    @property
    def final_order(self) -> float:
        return self.orders[-1]

    def rows(self):
        orders = [None] + self.orders
        return [{"tau": t, "error": e, "order": p} for t, e, p in zip(self.taus, self.errors, orders)]

    def to_text(self) -> str:
        lines = [f"scheme {self.scheme}, reference {self.reference}",
                 f"{'tau':>12} {'error':>14} {'order':>8}"]
        for r in self.rows():
            order = "" if r["order"] is None else f"{r['order']:.4f}"
            lines.append(f"{r['tau']:>12.6g} {r['error']:>14.6e} {order:>8}")
        return "\n".join(lines)


def _solve(config: RunConfig, problem, tau: float, scheme, workers=None, backend=None):
    n = step_count(config.t_final, tau)
    res = integrate(problem.u0, problem.spectra, problem.model, tau, n, scheme,
                    workers=workers, dealias=config.dealias, backend=backend)
    return res.fields


def _exact_linear(problem, t_final, workers=None):
    """Per-mode ``exp(-mu T)`` propagation of the initial coefficients (zero reaction only)."""
    bcs = problem.spectra.bcs
    c0 = transforms.forward(problem.u0, bcs, workers=workers)
    return transforms.inverse(np.exp(-problem.spectra.symbol * t_final) * c0, bcs, workers=workers)


def temporal_convergence(config: RunConfig, taus=None, tau_ref=None, scheme=None,
                         reference_scheme=None, workers=None, backend=None) -> ConvergenceTable:
    """Errors at ``t_final`` for each step size against a same-grid reference.

    Zero-reaction problems are compared with the exact per-mode solution;
    otherwise a reference run at ``tau_ref`` (default ``min(taus) / 8``) with
    ``reference_scheme`` (default ETD-CN) is used.
    """
    taus = list(taus or config.converge_taus or [config.tau / 2 ** i for i in range(4)])
    if len(taus) < 2 or any(b >= a for a, b in zip(taus, taus[1:])):
        raise ValueError("taus must hold at least two strictly decreasing step sizes")
    for t in taus:
        step_count(config.t_final, t)
    scheme = Scheme.parse(scheme or config.scheme)
    problem = config.build(backend)
    cell = problem.grid.cell_volume
    if problem.model.is_zero:
        ref = _exact_linear(problem, config.t_final, workers)
        ref_name = "exact"
    else:
        tau_ref = tau_ref or config.tau_ref or min(taus) / 8
        if tau_ref > min(taus) / 8 * (1 + 1e-12):
            raise ValueError(f"reference step {tau_ref:g} must be at most min(taus)/8 = {min(taus) / 8:g}")
        ref_scheme = Scheme.parse(reference_scheme or config.reference_scheme)
        ref = _solve(config, problem, tau_ref, ref_scheme, workers, backend)
        ref_name = f"{ref_scheme.value} tau={tau_ref:g}"
    errors = [discrete_l2(_solve(config, problem, t, scheme, workers, backend) - ref, cell) for t in taus]
    return ConvergenceTable(taus, errors, scheme.value, ref_name)


def spatial_accuracy(config: RunConfig, workers=None) -> float:
    """Max error of a single resolved eigenmode against its analytic decay.

    Uses ETD1, which propagates each mode exactly when the reaction is zero,
    so the measured error isolates the spatial representation.
    """
    if config.model != "none" or config.ic != "eigenfunction":
        raise ValueError("spatial accuracy needs model = none and ic = eigenfunction")
    problem = config.build()
    n = step_count(config.t_final, config.tau)
    res = integrate(problem.u0, problem.spectra, problem.model, config.tau, n, Scheme.ETD1, workers=workers)
    modes = config.ic_modes()
    wave_sq = 0.0
    for j, bc, length in zip(modes, config.bcs, problem.grid.domain.lengths):
        k = j if bc is BoundaryKind.DIRICHLET else j - 1
        wave_sq += (k * math.pi / length) ** 2
    worst = 0.0
    for i, D in enumerate(problem.spectra.diffusion):
        decay = math.exp(-D * wave_sq ** (config.alpha / 2) * config.t_final)
        exact = decay * problem.u0[i]
        worst = max(worst, float(np.abs(res.fields[i] - exact).max()))
    return worst


def front_position(u, grid, center) -> float:
    """Largest distance from ``center`` of a node where ``u > max(u) / 2``."""
    u = np.asarray(u)
    r = np.sqrt(sum((x - c) ** 2 for x, c in zip(grid.mesh(), center)))
    return float(r[u > 0.5 * u.max()].max())


def alpha_spreading(config: RunConfig, alphas=None, workers=None) -> list[tuple[float, float]]:
    """Front position at ``t_final`` for each ``alpha`` (single-species runs)."""
    alphas = list(alphas or config.spread_alphas)
    grid = config.grid()
    center = config.ic_params.get("center")
    if center is None:
        center = tuple((a + b) / 2 for a, b in zip(config.lo, config.hi))
    elif len(center) == 1:
        center = tuple(center) * grid.dim
    out = []
    for alpha in alphas:
        res = integrate(config.initial_fields(grid), config.spectrum(grid, alpha), config.reaction(),
                        config.tau, step_count(config.t_final, config.tau), config.scheme, workers=workers)
        out.append((alpha, front_position(res.fields[0], grid, center)))
    return out


def pade_gap_ratios(taus, rate: float = 0.5, n: int = 32, alpha: float = 1.5) -> list[float]:
    """Ratios of one-step gaps between the exponential and Pade ETD-CN forms.

    A 1-D Neumann problem on ``(0, 1)`` with the linear reaction ``f = rate * u``
    and a smooth initial profile; for halved step sizes the ratios approach 8.
    """
    from .models import linear

    grid = build_grid(Domain((0.0,), (1.0,)), n)
    spectra = build_spectrum(grid, "neumann", alpha, 1e-3)
    u0 = np.cos(np.pi * grid.nodes[0])[np.newaxis] + 1.0
    c0 = transforms.forward(u0, spectra.bcs)
    model = linear(rate)
    gaps = []
    for tau in taus:
        pade = Stepper(spectra, model, tau, Scheme.ETDCN).advance(c0)
        expo = Stepper(spectra, model, tau, Scheme.ETDCN_EXP).advance(c0)
        gaps.append(float(np.abs(pade - expo).max()))
    return [g0 / g1 for g0, g1 in zip(gaps, gaps[1:])]


@dataclass
class OracleReport:
    rows: list[dict] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(r["pass"] for r in self.rows)

    @property
    def failures(self) -> list[dict]:
        return [r for r in self.rows if not r["pass"]]

    def to_text(self) -> str:
        lines = []
        for r in self.rows:
            status = "PASS" if r["pass"] else "FAIL"
            lines.append(f"{status} {r['check']:<18} d={r['dim']} n={r['n']} alpha={r['alpha']} "
                         f"bc={'/'.join(b[0].upper() for b in r['bc'])} residual={r['residual']:.3e} "
                         f"(tol {r['tol']:.0e})")
        return "\n".join(lines)


def oracle_suite(sizes=(4, 8, 16), alphas=(1.1, 1.5, 2.0), dims=(1, 2), bcs=None, seed: int = 0) -> OracleReport:
    """Cross-check fast transforms and the spectral operator against direct oracles.

    For each dimension, size, boundary combination (all of them unless ``bcs``
    restricts the per-axis kinds) and ``alpha``:

    * ``roundtrip``:  ``max|inverse(forward(f)) - f| / max|f|``
    * ``reference``:  ``max|forward(f) - reference_forward(f)| / max|f|``
    * ``dense``:      ``max|apply(f) - A f| / (max(mu) max|f|)``
    """
    rng = np.random.default_rng(seed)
    kinds = (BoundaryKind.DIRICHLET, BoundaryKind.NEUMANN)
    report = OracleReport()
    for d in dims:
        combos = [tuple(BoundaryKind.parse(b) for b in bcs)] if bcs else list(itertools.product(kinds, repeat=d))
        for n in sizes:
            shape = (n,) * d
            for combo in combos:
                if len(combo) != d:
                    continue
                names = tuple(b.value for b in combo)
                f = rng.standard_normal(shape)
                scale = np.abs(f).max()
                c = transforms.forward(f, combo)
                rt = np.abs(transforms.inverse(c, combo) - f).max() / scale
                ref = np.abs(c - transforms.reference_forward(f, combo)).max() / scale
                base = {"dim": d, "n": n, "bc": names, "alpha": None, "tol": TRANSFORM_TOL}
                report.rows.append({**base, "check": "roundtrip", "residual": float(rt), "pass": rt <= TRANSFORM_TOL})
                report.rows.append({**base, "check": "reference", "residual": float(ref), "pass": ref <= TRANSFORM_TOL})
                if n ** d > operator.DENSE_MAX_MODES:
                    continue
                grid = build_grid(Domain((0.0,) * d, (1.0,) * d), shape)
                for alpha in alphas:
                    spectra = build_spectrum(grid, combo, alpha, 1.0)
                    A = operator.dense_oracle(spectra)
                    fast = operator.apply(f, spectra)
                    dense = (A @ f.ravel()).reshape(shape)
                    res = np.abs(fast - dense).max() / (spectra.symbol.max() * scale)
                    report.rows.append({"dim": d, "n": n, "bc": names, "alpha": alpha, "tol": OPERATOR_TOL,
                                        "check": "dense", "residual": float(res), "pass": res <= OPERATOR_TOL})
    return report


def write_table(rows: list[dict], out_dir, name: str) -> tuple[Path, Path]:
    """Write ``rows`` as ``name.csv`` and ``name.md`` in ``out_dir``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    keys = list(rows[0]) if rows else []
    csv_path = out_dir / f"{name}.csv"
    with open(csv_path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=keys)
        w.writeheader()
        w.writerows({k: ("" if v is None else v) for k, v in r.items()} for r in rows)
    md_path = out_dir / f"{name}.md"

    def fmt(v):
        if v is None:
            return ""
        if isinstance(v, float):
            return f"{v:.6g}"
        if isinstance(v, tuple):
            return "/".join(map(str, v))
        return str(v)

    lines = ["| " + " | ".join(keys) + " |", "|" + "---|" * len(keys)]
    lines += ["| " + " | ".join(fmt(r[k]) for k in keys) + " |" for r in rows]
    md_path.write_text("\n".join(lines) + "\n")
    return csv_path, md_path
