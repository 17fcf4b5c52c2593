"""Command-line interface.

Exit codes: 0 success, 1 configuration/usage error, 2 runtime abort.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .config import ConfigError, load_config
from .models import PredPreyParams, coexistence_steady_state
from .stepper import SimulationAbort

log = logging.getLogger("fracrd")

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def resolve_threads(value: int | None) -> int:
    """``--threads`` with ``FRACRD_THREADS`` as fallback; 0 means all cores, default 1."""
    if value is None:
        env = os.environ.get("FRACRD_THREADS", "").strip()
        value = int(env) if env else 1
    if value < 0:
        raise ValueError(f"thread count must be >= 0, got {value}")
    return value or (os.cpu_count() or 1)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output directory (overrides out_dir)")
    common.add_argument("--threads", type=int, help="transform worker threads, 0 = auto (env FRACRD_THREADS)")
    common.add_argument("--quiet", action="store_true", help="only print errors")
    common.add_argument("--snapshot-every", type=int, help="override snapshot_every")

    parser = _Parser(prog="fracrd", description="Space-fractional reaction-diffusion simulator.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("run", parents=[common], help="run a simulation from a config file")
    p.add_argument("config")

    p = sub.add_parser("steady-state", help="print the coexistence state (u*, v*) for a, b, c")
    p.add_argument("a", type=float)
    p.add_argument("b", type=float)
    p.add_argument("c", type=float)

    p = sub.add_parser("converge", parents=[common], help="temporal or spatial convergence study")
    p.add_argument("kind", choices=("time", "space"))
    p.add_argument("config")

    p = sub.add_parser("oracle-check", parents=[common], help="cross-check transforms and operator against oracles")
    p.add_argument("config")
    return parser


def _cmd_run(args, threads):
    from .io import SnapshotWriter
    from .stepper import run

    config = load_config(args.config)
    if args.snapshot_every is not None:
        config = config.replace(snapshot_every=args.snapshot_every)
    out_dir = Path(args.out or config.out_dir)
    grid = config.grid()
    writer = SnapshotWriter(out_dir, cell_volume=grid.cell_volume)
    result = run(config, sink=writer, workers=threads)
    log.info("%d steps of %s, t=%g; %d snapshot rows in %s",
             result.state.k, config.scheme, result.state.t, writer.rows, writer.csv_path)
    for i in range(result.fields.shape[0]):
        f = result.fields[i]
        log.info("species %d: min %.6g max %.6g mean %.6g", i + 1, f.min(), f.max(), f.mean())
    return EXIT_OK


def _cmd_steady_state(args):
    u, v = coexistence_steady_state(PredPreyParams(a=args.a, b=args.b, c=args.c))
    print(f"u*={u:.10f}")
    print(f"v*={v:.10f}")
    return EXIT_OK


def _cmd_converge(args, threads):
    from .harness import spatial_accuracy, temporal_convergence, write_table

    config = load_config(args.config)
    out_dir = Path(args.out or config.out_dir)
    if args.kind == "time":
        table = temporal_convergence(config, workers=threads)
        print(table.to_text())
        print(f"final observed order {table.final_order:.4f}")
        write_table(table.rows(), out_dir, f"converge_time_{table.scheme}")
    else:
        err = spatial_accuracy(config, workers=threads)
        print(f"max error vs analytic eigenmode decay: {err:.3e}")
        write_table([{"alpha": config.alpha, "t_final": config.t_final, "max_error": err}], out_dir, "converge_space")
    return EXIT_OK


def _cmd_oracle(args):
    from .harness import oracle_suite, write_table

    config = load_config(args.config)
    d = len(config.lo)
    sizes = (4, 8, 16) if d < 3 else (4, 8)
    report = oracle_suite(sizes=sizes, alphas=(config.alpha,), dims=(d,), bcs=config.bcs)
    print(report.to_text())
    if args.out:
        write_table(report.rows, args.out, "oracle_check")
    if not report.ok:
        for r in report.failures:
            print(f"FAILED: check={r['check']} dim={r['dim']} n={r['n']} bc={r['bc']} alpha={r['alpha']}",
                  file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_CONFIG
    quiet = getattr(args, "quiet", False)
    logging.basicConfig(level=logging.WARNING if quiet else logging.INFO, format="%(levelname)s: %(message)s")
    try:
        if args.command == "steady-state":
            return _cmd_steady_state(args)
        threads = resolve_threads(args.threads)
        if args.command == "run":
            return _cmd_run(args, threads)
        if args.command == "converge":
            return _cmd_converge(args, threads)
        return _cmd_oracle(args)
    except FileNotFoundError as exc:
        print(f"fracrd: file not found: {exc.filename}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConfigError, ValueError) as exc:
        print(f"fracrd: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SimulationAbort, OSError) as exc:
        print(f"fracrd: aborted: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
