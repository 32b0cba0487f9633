"""Benchmark the numba kernels against their pure-numpy twins.

Run as a script. The numba path needs XREC_NUMBA unset or "1" (default);
this harness calls both implementation tables directly, so the env flag
only changes which one the package itself binds at import.
"""

from __future__ import annotations

import time

import numpy as np

from xrec.nn import kernels


def _time(fn, args, repeats=30, warmup=3):
    for _ in range(warmup):
        fn(*args)
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def _cases(rng):
    rows, width = 4096, 64
    x = rng.standard_normal((rows, width)).astype(np.float32)
    y = kernels.np_softmax_rows(x)
    gy = rng.standard_normal((rows, width)).astype(np.float32)
    gain = rng.standard_normal(width).astype(np.float32)
    bias = rng.standard_normal(width).astype(np.float32)
    _, mean, rstd = kernels.np_layernorm_fwd(x, gain, bias, 1e-5)
    logits = rng.standard_normal((rows, 512)).astype(np.float32)
    targets = rng.integers(0, 512, size=rows).astype(np.int64)
    probs = kernels.np_softmax_rows(logits)
    bits = (rng.random((rows, width)) < 0.3).astype(np.float32)
    p = rng.standard_normal(width * 256).astype(np.float32)
    g = rng.standard_normal(width * 256).astype(np.float32)
    m = np.zeros_like(p)
    v = np.zeros_like(p)
    table = np.zeros((512, width), dtype=np.float32)
    idx = rng.integers(0, 512, size=rows).astype(np.int64)

    return [
        ("softmax_rows", (x,)),
        ("softmax_rows_bwd", (y, gy)),
        ("layernorm_fwd", (x, gain, bias, np.float32(1e-5))),
        ("layernorm_bwd", (x, gain, mean, rstd, gy)),
        ("leaky_relu_fwd", (x, np.float32(0.2))),
        ("leaky_relu_bwd", (x, np.float32(0.2), gy)),
        ("lsce_fwd", (logits, targets, np.float32(0.1), np.int64(0))),
        ("lsce_bwd", (probs, targets, np.float32(0.1), np.int64(0), np.float32(1.0))),
        ("bce_logits_fwd", (x, bits)),
        ("bce_logits_bwd", (x, bits, np.float32(1.0))),
        ("adam_update", (p.copy(), g, m.copy(), v.copy(), np.float32(1e-3),
                         np.float32(0.9), np.float32(0.98), np.float32(1e-9), 7)),
        ("scatter_add_rows", (table.copy(), idx, gy)),
    ]


def main():
    if not kernels.HAS_NUMBA:
        print("numba unavailable; nothing to compare")
        return
    rng = np.random.default_rng(0)
    rows = []
    for name, args in _cases(rng):
        t_np = _time(kernels.IMPLS["numpy"][name], args)
        t_nb = _time(kernels.IMPLS["numba"][name], args)
        rows.append((name, t_np * 1e3, t_nb * 1e3, t_np / t_nb))
    width = max(len(r[0]) for r in rows)
    print(f"{'kernel'.ljust(width)}  numpy_ms  numba_ms  speedup")
    for name, t_np, t_nb, ratio in rows:
        print(f"{name.ljust(width)}  {t_np:8.3f}  {t_nb:8.3f}  {ratio:6.2f}x")


if __name__ == "__main__":
    main()
