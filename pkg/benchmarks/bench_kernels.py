"""Compare the compiled kernels with the numpy fallback.

    python benchmarks/bench_kernels.py [--quick]

Prints one line per kernel with the best-of-N wall time for each backend and
the speedup. Results are also checked for agreement before timing.
"""

import argparse
import time

import numpy as np

from ssbm import kernels
from ssbm.core import couplings, evolved_update
from ssbm.problems import gen_circulant, gen_complete


def best_time(fn, repeats):
    fn()
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def cases(quick):
    rng = np.random.default_rng(0)
    n_dense = 1000 if quick else 2000
    dense = gen_complete(n_dense, "random-pm1", seed=7)
    ring = gen_circulant(20000 if quick else 200000, [1, 7, 100])
    small = gen_complete(16 if quick else 20, "random-pm1", seed=3)
    phi_d = np.clip(0.5 + 0.1 * rng.standard_normal(dense.n), 0, 1)
    phi_r = np.clip(0.5 + 0.1 * rng.standard_normal(ring.n), 0, 1)
    a_d, b_d = np.sqrt(phi_d), np.sqrt(1 - phi_d)
    a_r, b_r = np.sqrt(phi_r), np.sqrt(1 - phi_r)
    w_dense = np.ascontiguousarray(dense.dense(np.float64))
    w_small = np.ascontiguousarray(small.dense(np.float64))
    s0 = 2.0 * rng.integers(0, 2, size=dense.n) - 1.0

    def dense_sums(k):
        h = k.prepare_dense(dense.dense(np.int8))
        return lambda: k.dense_sums(h, a_d, b_d)

    def sparse_sums(k):
        indptr, idx, w = ring.csr()
        h = k.prepare_sparse(indptr, idx, w, ring.n)
        return lambda: k.sparse_sums(h, a_r, b_r)

    def gray(k):
        return lambda: k.gray_enumerate(w_small, 0.25)

    def local(k):
        return lambda: k.local_search(w_dense, s0, 1e-9)

    def step(k):
        couplings(dense, k.NAME)
        return lambda: evolved_update(phi_d, dense, 4.96e-4, 6, backend=k.NAME)

    return [
        (f"dense_sums K_{dense.n}", dense_sums),
        (f"sparse_sums C_{ring.n}(1,7,100)", sparse_sums),
        (f"gray_enumerate n={small.n}", gray),
        (f"local_search K_{dense.n}", local),
        (f"evolved step K_{dense.n} n=6", step),
    ]


def agree(name, make, backends):
    outs = [make(kernels.get(b))() for b in backends]
    first = outs[0]
    for other in outs[1:]:
        if isinstance(first, tuple) and name.startswith("gray"):
            ok = np.isclose(first[0], other[0]) and np.array_equal(first[1], other[1])
        elif isinstance(first, tuple) and name.startswith("local"):
            ok = np.array_equal(first[0], other[0])
        elif isinstance(first, tuple):
            ok = all(np.allclose(x, y, atol=1e-9) for x, y in zip(first, other))
        else:
            ok = np.allclose(first, other, atol=1e-9)
        if not ok:
            raise SystemExit(f"backends disagree on {name}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--quick", action="store_true", help="smaller problem sizes")
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()
    backends = kernels.available()
    print(f"backends: {', '.join(backends)} (default {kernels.BACKEND})")
    header = f"{'kernel':34s}" + "".join(f"{b:>12s}" for b in backends)
    if len(backends) > 1:
        header += f"{'speedup':>10s}"
    print(header)
    for name, make in cases(args.quick):
        agree(name, make, backends)
        times = [best_time(make(kernels.get(b)), args.repeats) for b in backends]
        line = f"{name:34s}" + "".join(f"{t * 1e3:10.2f}ms" for t in times)
        if len(times) > 1:
            line += f"{times[1] / times[0]:9.1f}x"
        print(line)


if __name__ == "__main__":
    main()
