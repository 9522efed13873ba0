"""Time the numba kernels against the pure-numpy fallbacks.

    python benchmarks/bench_kernels.py [--repeat 5]

Shapes mirror a seasonal analysis: n=1460 daily samples, P=365, B=2000.
"""

import argparse
from timeit import repeat

import numpy as np

from vbpbb import _kernels as k


def _cases(rng):
    n, P, B = 1460, 365, 2000
    x = rng.normal(size=n)
    w = rng.normal(size=731) + 1j * rng.normal(size=731)
    wr, wi = np.ascontiguousarray(w.real), np.ascontiguousarray(w.imag)

    nb = n // P
    blocks = rng.normal(size=(nb, P))
    fixed = np.zeros(P)
    counts = np.full(P, float(nb))
    draws = rng.integers(0, nb, size=(B, nb))

    phases = np.arange(n) % P
    pc = np.bincount(phases, minlength=P)
    pool = x[np.argsort(phases, kind="stable")]
    start = np.concatenate([[0], np.cumsum(pc)[:-1]])
    offsets = rng.integers(0, pc[phases], size=(B, n))

    return {
        "window_sum": ((x, wr, wi), "window_sum"),
        "block_means": ((blocks, fixed, counts, draws), "block_means"),
        "phase_means": ((pool, start, phases, pc.astype(float), offsets), "phase_means"),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not k.HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")

    cases = _cases(np.random.default_rng(0))
    print(f"{'kernel':<14}{'numpy ms':>12}{'numba ms':>12}{'speedup':>10}")
    for name, (argv, base) in cases.items():
        fast = getattr(k, f"{base}_numba")
        slow = getattr(k, f"{base}_numpy")
        a, b = fast(*argv), slow(*argv)  # also compiles
        a = a if isinstance(a, tuple) else (a,)
        b = b if isinstance(b, tuple) else (b,)
        assert all(np.allclose(u, v, rtol=1e-12, atol=1e-12) for u, v in zip(a, b)), name
        t_fast = min(repeat(lambda: fast(*argv), number=1, repeat=args.repeat)) * 1e3
        t_slow = min(repeat(lambda: slow(*argv), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:<14}{t_slow:>12.2f}{t_fast:>12.2f}{t_slow / t_fast:>9.1f}x")


if __name__ == "__main__":
    main()
