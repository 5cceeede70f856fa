"""Benchmark the compiled kernels against the NumPy fallback.

Runs every hot kernel on identical inputs under both backends, checks the
outputs are bit-identical, and reports best-of-N wall times. Usage:

    python3 benchmarks/bench_kernels.py --size medium --repeats 5
"""

import argparse
import time

import numpy as np

from dnasim import _kernels_py

try:
    from dnasim import _ckernels
except ImportError:
    _ckernels = None

SIZES = {
    # trials, molecules, payload_space, reads, codewords
    "small": dict(b=32, m=64, p=2, n=128, c=256),
    "medium": dict(b=256, m=128, p=4, n=512, c=2048),
    "large": dict(b=1024, m=128, p=4, n=512, c=8192),
}


def build_workload(b, m, p, n, c, seed=20240901):
    rng = np.random.default_rng(seed)
    span = m * p
    threshold = 2.0

    book = _kernels_py.payload_block(7, 0, c, m, p)
    sent = rng.integers(0, c, size=b)
    truth_payload = book[sent]

    draws = rng.integers(0, m, size=(b, n))
    rows = np.arange(b)[:, None]
    true_flat = draws * p + truth_payload[rows, draws]
    errors = rng.random((b, n)) < 0.05
    shift = rng.integers(1, span, size=(b, n))
    reads = np.where(errors, (true_flat + shift) % span, true_flat)

    decided = _kernels_py.resolve_batch(reads, m, p, threshold)
    return {
        "payload_block": (11, 0, c, m, p),
        "resolve_batch": (reads, m, p, threshold),
        "decode_batch": (decided, book, sent),
        "classify_batch": (draws, errors, reads // p, decided, truth_payload, threshold),
        "pair_histogram": (book[: min(c, 1024)],),
    }


def time_call(fn, args, repeats):
    fn(*args)  # warm up
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def same(a, b):
    if isinstance(a, tuple):
        return all(np.array_equal(x, y) for x, y in zip(a, b))
    return np.array_equal(a, b)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", choices=sorted(SIZES), default="medium")
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()

    work = build_workload(**SIZES[args.size])
    print(f"workload: {SIZES[args.size]}, best of {args.repeats}")
    if _ckernels is None:
        print("compiled backend not built; timing the NumPy fallback only")

    header = f"{'kernel':<16} {'py (ms)':>10}"
    if _ckernels is not None:
        header += f" {'c (ms)':>10} {'speedup':>8} {'match':>6}"
    print(header)
    for name, call_args in work.items():
        py_fn = getattr(_kernels_py, name)
        t_py = time_call(py_fn, call_args, args.repeats)
        line = f"{name:<16} {1e3 * t_py:>10.3f}"
        if _ckernels is not None:
            c_fn = getattr(_ckernels, name)
            t_c = time_call(c_fn, call_args, args.repeats)
            ok = same(py_fn(*call_args), c_fn(*call_args))
            line += f" {1e3 * t_c:>10.3f} {t_py / t_c:>7.1f}x {'yes' if ok else 'NO':>6}"
            if not ok:
                raise SystemExit(f"backend mismatch in {name}")
        print(line)


if __name__ == "__main__":
    main()
