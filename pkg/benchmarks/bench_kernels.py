"""Compare the compiled and pure-Python kernels.

    python benchmarks/bench_kernels.py [--repeat 3]
"""

import argparse
import time

import numpy as np

from rwa_markov import BathKernel, SystemModel
from rwa_markov._backend import get_kernels
from rwa_markov.exact_dynamics import memory_kernel_samples


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def bench_volterra(backends, repeat):
    kernel = BathKernel.single(1.0, 1.0, 0.0)
    for N, T in [(1, 10.0), (2, 10.0), (4, 5.0)]:
        rng = np.random.default_rng(N)
        X = rng.normal(size=(N, N)) + 1j * rng.normal(size=(N, N))
        model = SystemModel(0.5 * (X + X.conj().T) / N, np.zeros((N, N)), 1.0)
        h = 1e-3
        K = memory_kernel_samples(kernel, model.H_S, 1.0, h, int(round(T / h)))
        row = {}
        for name, (volterra, _) in backends.items():
            row[name], V = best_of(lambda: volterra(K, h), repeat)
            row[name + "_out"] = V
        line = f"volterra N={N} steps={K.shape[0] - 1:>6}"
        for name in backends:
            line += f"  {name}={row[name]:.3f}s"
        if len(backends) == 2:
            diff = np.max(np.abs(row["python_out"] - row["compiled_out"]))
            line += f"  speedup={row['python'] / row['compiled']:.1f}x  max|diff|={diff:.1e}"
        print(line)


def bench_jacobi(backends, repeat):
    for n in (4, 16, 48):
        rng = np.random.default_rng(n)
        X = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        A = 0.5 * (X + X.conj().T)
        ref = np.linalg.eigvalsh(A)
        line = f"jacobi   n={n:>3}"
        times = {}
        for name, (_, jacobi) in backends.items():
            times[name], (w, _, sweeps) = best_of(lambda: jacobi(A, 100, 1e-15), repeat)
            line += f"  {name}={times[name] * 1e3:.2f}ms (sweeps={sweeps}, err={np.max(np.abs(np.sort(w) - ref)):.1e})"
        if len(times) == 2:
            line += f"  speedup={times['python'] / times['compiled']:.1f}x"
        print(line)


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    backends = {"python": get_kernels("python")}
    try:
        backends["compiled"] = get_kernels("compiled")
    except ImportError:
        print("compiled extension not built; timing the Python kernels only")
    bench_volterra(backends, args.repeat)
    bench_jacobi(backends, args.repeat)


if __name__ == "__main__":
    main()
