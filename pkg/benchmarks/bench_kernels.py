"""Compare the compiled and pure-Python kernel backends.

    python benchmarks/bench_kernels.py [--sizes 12 24 48] [--repeats 5]

Both backends run the same inputs; results are checked for equality before
timings are reported.
"""

import argparse
import statistics
import time

import numpy as np

from qae._backend import compiled_kernels, python_kernels


def _random_coupling(n, rng):
    u = np.triu(rng.normal(size=(n, n)))
    return u + np.triu(u, 1).T


def _time(fn, repeats):
    out, times = None, []
    for _ in range(repeats):
        start = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - start)
    return statistics.median(times), out


def _cases(n, rng):
    W = _random_coupling(n, rng)
    x0 = rng.integers(0, 2, n).astype(np.int8)
    e0 = python_kernels.sequential_energy(W, x0)
    tenure = max(1, min(20, n // 4))
    betas = 1.0 / np.geomspace(10.0 * n, 1e-3, 50)
    a = rng.normal(size=(n, n))
    yield "tabu_search", lambda k: k.tabu_search(W, x0, e0, tenure, 500, 1e-12, 2 * n, 0.5, 7)
    yield "anneal", lambda k: k.anneal(W, betas, 20, 3, 1e-12)
    yield "jacobi", lambda k: k.jacobi(a + a.T, 1e-12, 100)
    if n <= 16:
        yield "exact_search", lambda k: k.exact_search(W, 1e-12)


def _same(a, b):
    if isinstance(a, tuple):
        return all(_same(x, y) for x, y in zip(a, b))
    if isinstance(a, np.ndarray):
        return a.shape == b.shape and np.allclose(a, b, rtol=0, atol=1e-9)
    if isinstance(a, list):
        return a == b
    return a == b or abs(a - b) <= 1e-9 * max(1.0, abs(a))


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[12, 24, 48])
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)
    if compiled_kernels is None:
        parser.exit(1, "compiled kernels are not built; run `pip install -e .` first\n")
    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':<14}{'n':>5}{'python [ms]':>14}{'compiled [ms]':>15}{'speedup':>10}  match")
    for n in args.sizes:
        for name, run in _cases(n, rng):
            t_py, r_py = _time(lambda: run(python_kernels), args.repeats)
            t_c, r_c = _time(lambda: run(compiled_kernels), args.repeats)
            print(f"{name:<14}{n:>5}{t_py * 1e3:>14.2f}{t_c * 1e3:>15.3f}{t_py / t_c:>10.1f}  "
                  f"{'yes' if _same(r_py, r_c) else 'NO'}")


if __name__ == "__main__":
    main()
