"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 3]
"""
import argparse
import time

import numpy as np

from heavy_elliptic import _fallback
from heavy_elliptic.heavy_sampler import angular_moments, preset

try:
    from heavy_elliptic import _kernels
except ImportError:
    _kernels = None


def best_of(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def cases():
    spec = preset("circle", 1.25)
    params = (spec.alpha, spec.total_mass, spec.kernel_params())
    mom = angular_moments(spec)
    eta, z = 1j, 0.5 + 0j

    def pwit_case(mod, B, H, tol, trees):
        return lambda: [mod.pwit_root(k, B, H, *params, eta, z, tol, True, mom) for k in range(trees)]

    P = 5_000
    pool = [np.full(P, v, dtype=complex) for v in _fallback.neg_inverse(eta, z, np.conj(z), eta)]

    def rde_case(mod, K):
        return lambda: mod.rde_generation(*pool, 7, 1, K, *params, eta, z, True, mom)

    return [
        ("pwit_root B=8 H=4 exact, 10 trees", lambda m: pwit_case(m, 8, 4, 0.0, 10)),
        ("pwit_root B=50 H=6 tol=1e-3, 3 trees", lambda m: pwit_case(m, 50, 6, 1e-3, 3)),
        ("rde_generation P=5000 K=50", lambda m: rde_case(m, 50)),
    ]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if _kernels is None:
        print("compiled extension not built; only the fallback is timed")
    print(f"{'case':42s} {'python [s]':>11s} {'compiled [s]':>13s} {'speedup':>8s}")
    for name, make in cases():
        tp = best_of(make(_fallback), args.repeat)
        if _kernels is None:
            print(f"{name:42s} {tp:11.4f} {'-':>13s} {'-':>8s}")
            continue
        tc = best_of(make(_kernels), args.repeat)
        print(f"{name:42s} {tp:11.4f} {tc:13.4f} {tp / tc:8.1f}")


if __name__ == "__main__":
    main()
