"""Compare the compiled and pure-numpy kernel backends.

Times the raw pointwise kernels on a 256x128 predator-prey state and full
ETD-CN steps (two transforms per reaction evaluation dominate those).

    python benchmarks/bench_kernels.py [--repeat 20]
"""
import argparse
import timeit

import numpy as np

from fracrd import kernels, models
from fracrd.mesh import Domain, build_grid, build_spectrum
from fracrd.stepper import Scheme, Stepper
from fracrd.transforms import forward


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--shape", type=int, nargs=2, default=(256, 128))
    args = ap.parse_args()

    grid = build_grid(Domain((0.0, 0.0), (900.0, 300.0)), tuple(args.shape))
    p = models.PredPreyParams()
    u, v = models.ic_condition_a(grid, *models.coexistence_steady_state(p))
    spec = build_spectrum(grid, "neumann", 1.5, (1.0, 1.0))
    coeffs = forward(np.stack([u, v]), spec.bcs)
    rng = np.random.default_rng(0)
    e, x, w, f = rng.standard_normal((4, 2) + grid.shape)

    backends = kernels.available_backends()
    if "cython" not in backends:
        print("compiled extension not built; only the numpy backend is available")
    rows = []
    for name in backends:
        k = kernels.Kernels(name)
        stepper = Stepper(spec, models.predprey(p, name), 0.5, Scheme.ETDCN, backend=name)
        cases = {
            "predprey": lambda: k.predprey(u, v, p.a, p.b, p.c),
            "lincomb": lambda: k.lincomb(e, x, w, f),
            "correct": lambda: k.correct(e, x, w, f),
            "etdcn step": lambda: stepper.advance(coeffs),
        }
        for case, fn in cases.items():
            fn()
            best = min(timeit.repeat(fn, number=5, repeat=args.repeat)) / 5
            rows.append((case, name, best))

    print(f"grid {args.shape[0]}x{args.shape[1]}, best of {args.repeat} (per call)")
    print(f"{'kernel':<12} {'backend':<8} {'time [ms]':>10} {'speedup':>8}")
    base = {case: t for case, name, t in rows if name == "numpy"}
    for case, name, t in rows:
        print(f"{case:<12} {name:<8} {t * 1e3:>10.3f} {base[case] / t:>7.2f}x")


if __name__ == "__main__":
    main()
