"""Compiled vs NumPy kernels, alone and inside a full HR-PCA run.

    python benchmarks/bench_core.py [--repeat 5]

Each timing is the best of ``--repeat`` runs. Rows for the compiled
backend are skipped when the extension is not built.
"""
import argparse
import timeit

import numpy as np

from hrpca import _backend
from hrpca.algorithm import HrPcaConfig, run
from hrpca.datagen import GenSpec, generate
from hrpca.kernel import KernelFn, run_kernel


def kernel_cases(rng):
    proj = rng.standard_normal((2000, 3))
    weights = rng.random(2000)
    S = rng.standard_normal((200, 200))
    y = rng.standard_normal(200)
    return {
        "trimmed_sums n=2000 d=3": lambda c: c.trimmed_sums(proj, 1000),
        "row_sq_norms n=2000 d=3": lambda c: c.row_sq_norms(proj),
        "sample_index n=2000": lambda c: c.sample_index(weights, 0.637),
        "rank1_downdate m=200": lambda c: c.rank1_downdate(S, y),
    }


def run_cases():
    cases = {}
    for n, m in ((200, 50), (400, 400)):
        Y, _ = generate(GenSpec(n=n, m=m, lam=0.2, sigma=3.0, mag=10.0, seed=1))
        cases[f"run n={n} m={m}"] = lambda c, Y=Y: run(Y, HrPcaConfig(seed=0))
    Y, _ = generate(GenSpec(n=200, m=50, lam=0.2, sigma=3.0, mag=10.0, seed=1))
    cases["run_kernel rbf n=200 m=50"] = lambda c: run_kernel(Y, KernelFn.rbf(0.05), HrPcaConfig(seed=0))
    return cases


def best_of(fn, core, repeat, number):
    return min(timeit.repeat(lambda: fn(core), repeat=repeat, number=number)) / number


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    names = _backend.available()
    rng = np.random.default_rng(0)

    print(f"backends: {', '.join(names)}")
    header = f"{'case':32s}" + "".join(f"{n + ' (ms)':>16s}" for n in names)
    if len(names) == 2:
        header += f"{'speedup':>10s}"
    print(header)
    for group, number in ((kernel_cases(rng), 200), (run_cases(), 1)):
        for label, fn in group.items():
            times = []
            for name in names:
                with _backend.use_backend(name) as core:
                    times.append(1e3 * best_of(fn, core, args.repeat, number))
            line = f"{label:32s}" + "".join(f"{t:16.4f}" for t in times)
            if len(times) == 2:
                line += f"{times[names.index('python')] / times[names.index('cython')]:9.2f}x"
            print(line)


if __name__ == "__main__":
    main()
