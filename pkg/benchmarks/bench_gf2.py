"""Benchmark the GF(2) kernels: compiled extension vs NumPy fallback.

Times full row reduction (the dominant cost of every degreewise
computation) and the matrix product on random square matrices.

    python benchmarks/bench_gf2.py [--sizes 256,512,1024,2000] [--repeats 3]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from usteen import _gf2py

try:
    from usteen import _gf2c
except ImportError:
    _gf2c = None


def random_words(rng, n):
    nwords = (n + 63) >> 6
    words = rng.integers(0, 2**63, size=(n, nwords), dtype=np.uint64)
    mask_bits = n & 63
    if mask_bits:
        words[:, -1] &= np.uint64((1 << mask_bits) - 1)
    return words


def time_rref(kernel, words, n, repeats):
    best = float("inf")
    for _ in range(repeats):
        work = words.copy()
        t = time.monotonic()
        kernel.rref_inplace(work, n, n, n)
        best = min(best, time.monotonic() - t)
    return best


def time_mult(kernel, words, n, repeats):
    best = float("inf")
    out = np.zeros_like(words)
    for _ in range(repeats):
        out[:] = 0
        t = time.monotonic()
        kernel.mat_mult(words, n, n, words, n, out)
        best = min(best, time.monotonic() - t)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="256,512,1024,2000")
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]
    rng = np.random.default_rng(0)

    kernels = [("numpy", _gf2py)]
    if _gf2c is not None:
        kernels.append(("compiled", _gf2c))
    else:
        print("compiled kernel not built; showing the fallback only")

    header = f"{'op':8s} {'n':>6s}" + "".join(f" {name:>12s}" for name, _ in kernels)
    if len(kernels) == 2:
        header += f" {'speedup':>9s}"
    print(header)
    for op, timer in (("rref", time_rref), ("matmul", time_mult)):
        for n in sizes:
            words = random_words(rng, n)
            times = [timer(k, words, n, args.repeats) for _, k in kernels]
            line = f"{op:8s} {n:6d}" + "".join(f" {t * 1000:10.1f}ms" for t in times)
            if len(times) == 2 and times[1] > 0:
                line += f" {times[0] / times[1]:8.1f}x"
            print(line)


if __name__ == "__main__":
    main()
