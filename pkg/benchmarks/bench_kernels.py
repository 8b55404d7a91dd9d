"""Compare the compiled and numpy kernels on the two hot loops.

    python benchmarks/bench_kernels.py [--repeat 3]
"""

import argparse
import time

import numpy as np

from catqed import _backend, fock


def best_of(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def cases():
    for dim, n in ((30, 41), (60, 81), (60, 121)):
        rho = fock.as_density(fock.cat_state(2.0, 1, dim)).matrix
        axis = np.linspace(-4, 4, n)
        yield f"wigner_grid dim={dim} grid={n}x{n}", lambda k, r=rho, a=axis: k.wigner_grid(r, a, a)
    for dim, shots in ((30, 2000), (60, 2000)):
        pops = fock.coherent_state(np.sqrt(dim / 8), dim).populations()
        u = np.random.default_rng(0).random((shots, dim))
        yield f"sample_jumps dim={dim} shots={shots}", lambda k, p=pops, u=u: k.sample_jumps(p, 1.0, 1.0, u)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    names = _backend.available()
    if "cython" not in names:
        print("compiled backend not built; run `python setup.py build_ext --inplace` first")
    mods = {name: _backend.load(name) for name in names}
    print(f"{'case':40s}" + "".join(f"{n:>12s}" for n in names) + ("     speedup" if len(names) > 1 else ""))
    for label, fn in cases():
        times = {name: best_of(lambda: fn(mod), args.repeat) for name, mod in mods.items()}
        row = f"{label:40s}" + "".join(f"{times[n]:11.4f}s" for n in names)
        if len(names) > 1:
            row += f"{times['python'] / times['cython']:11.1f}x"
        print(row)


if __name__ == "__main__":
    main()
