"""Compare the compiled and numpy kernel backends on a representative sweep.

    python benchmarks/bench_kernels.py [--steps 201] [--repeat 5]

The workload is the 18-element stent sweep (3 rings x 6 columns) over a
steps x steps (k1, k2) grid, which is the inner loop of ``mearray sweep``.
"""

import argparse
import time

import numpy as np

from mearray import _kernels_py
from mearray.geometry import StentLayoutSpec, stent_layout
from mearray.phases import FAMILY_A, FAMILY_C, PhaseFamily, custom_phase_table
from mearray.sweeps import SweepSpec, _SweepEvaluator

try:
    from mearray import _kernels_c
except ImportError:
    _kernels_c = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, default=201)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    stent = stent_layout(StentLayoutSpec(0.002, [0.0, 0.004, 0.008], 6))
    omega = 2 * np.pi * 2.5e9
    rng = (-2.0, 2.0, args.steps)
    cells = args.steps**2
    backends = {"numpy": _kernels_py}
    if _kernels_c is not None:
        backends["cython"] = _kernels_c
    else:
        print("compiled extension not built; timing numpy only")

    print(f"grid {args.steps}x{args.steps}, 18 elements, best of {args.repeat}")
    print(f"{'workload':<22}{'backend':<9}{'seconds':>10}{'Mcell*el/s':>12}")
    custom = PhaseFamily.custom("2*pi*(m*k1 + l*k2 + l*sqrt(k1*k1 + k2*k2))")
    for label, fam in [("family A (linear)", FAMILY_A), ("family C (linear)", FAMILY_C), ("custom expression", custom)]:
        ev = _SweepEvaluator(SweepSpec(rng, rng, fam, stent, (0.0, 0.5, 0.004), omega))
        k1 = k2 = np.linspace(*rng[:2], args.steps)
        results = {}
        for name, impl in backends.items():
            if fam.is_linear:
                a, b, c, shift = ev.coef
                run = lambda: impl.sweep_linear(k1, k2, a, b, c, shift, ev.comp, ev.prop)
            else:
                table = custom_phase_table(fam, ev.l, ev.m, k1, k2) + ev.comp + ev.prop
                run = lambda: impl.phasor_power(table)
            results[name] = run()
            sec = best_of(run, args.repeat)
            print(f"{label:<22}{name:<9}{sec:>10.4f}{cells * 18 / sec / 1e6:>12.1f}")
        if len(results) == 2:
            diff = np.abs(results["numpy"] - results["cython"]).max()
            print(f"{'':<22}max |numpy - cython| = {diff:.1e}")


if __name__ == "__main__":
    main()
