"""Benchmark the compiled kernels against the numpy fallback.

Run: python3 benchmarks/bench_kernels.py
"""

import time

import numpy as np

from vfseg.kernels import _fallback

try:
    from vfseg.kernels import _corekern
except ImportError:
    _corekern = None


def bench(label, fn, repeats=5):
    fn()  # warm up
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    print(f"  {label:<28} {best * 1e3:8.2f} ms")
    return best


def main():
    rng = np.random.default_rng(0)
    img = np.ascontiguousarray(rng.normal(size=(64, 64, 512)))
    txt = np.ascontiguousarray(rng.normal(size=(150, 512)))
    feat = np.ascontiguousarray(rng.normal(size=(64, 64, 150)))

    cases = [
        ("cost_volume 64x64x512, N=150", lambda m: m.cost_volume(img, txt)),
        ("bilinear 64x64 -> 512x512", lambda m: m.bilinear_resize(feat, 512, 512)),
        (
            "argmax 512x512x150",
            lambda m, big=np.ascontiguousarray(rng.normal(size=(512, 512, 150))): m.argmax_labels(big),
        ),
    ]
    backends = [("python (numpy fallback)", _fallback)]
    if _corekern is not None:
        backends.append(("cython (compiled)", _corekern))

    for case_label, case in cases:
        print(case_label)
        times = {}
        for name, mod in backends:
            times[name] = bench(name, lambda m=mod: case(m))
        if len(times) == 2:
            py, cy = times["python (numpy fallback)"], times["cython (compiled)"]
            print(f"  speedup cython vs numpy: {py / cy:.2f}x")
        print()

    # numerical agreement spot check
    if _corekern is not None:
        a = _fallback.cost_volume(img[:8, :8], txt)
        b = _corekern.cost_volume(np.ascontiguousarray(img[:8, :8]), txt)
        print(f"max |cython - numpy| on cost volume: {np.abs(a - b).max():.2e}")


if __name__ == "__main__":
    main()
