"""Benchmark the compiled propagation kernel against the pure-numpy fallback.

Runs the default gate scenario (chirped pulse pair, five-state tower) through
both backends for the coherent and the dissipative propagators, checks they
agree, and prints wall times.

Usage: python3 benchmarks/bench_kernels.py [--repeats N]
"""

import argparse
import time

import numpy as np

from berrygate._kernels import available_backends, get_backend
from berrygate.dynamics import _kernel_args
from berrygate.scenario import build_model, build_propagation, default_scenario


def _time(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()

    names = available_backends()
    print(f"available backends: {', '.join(names)}")
    if len(names) < 2:
        print("compiled kernel not built; nothing to compare")
        return

    cfg = default_scenario()
    model = build_model(cfg)
    prop = build_propagation(cfg)
    kargs = _kernel_args(model)
    t0, t1 = model.window(prop.window_multiplier)
    psi0 = np.zeros(model.dim, dtype=complex)
    psi0[model.ground_index(-0.5)] = 1.0
    rho0 = np.outer(psi0, psi0.conj())

    results = {}
    for case, y0, lindblad in [("schrodinger", psi0, False),
                               ("lindblad", rho0, True)]:
        finals = {}
        for name in names:
            kern = get_backend(name)

            def run(kern=kern, y0=y0, lindblad=lindblad):
                out, _ = kern.propagate(*kargs, y0, t0, t1, prop.rel_tol,
                                        prop.abs_tol, None, None, lindblad)
                return out

            finals[name] = run()
            results[(case, name)] = _time(run, args.repeats)
        mismatch = np.max(np.abs(finals[names[0]] - finals[names[1]]))
        print(f"\n{case} (dim {model.dim}, window {t1 - t0:.1f} ps, "
              f"rtol {prop.rel_tol:g}):")
        for name in names:
            print(f"  {name:10s} {1e3 * results[(case, name)]:10.2f} ms")
        ratio = results[(case, "python")] / results[(case, "compiled")]
        print(f"  speedup    {ratio:10.1f}x   (max |diff| {mismatch:.2e})")


if __name__ == "__main__":
    main()
