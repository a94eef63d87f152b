#!/usr/bin/env python3
"""Compare the numba and pure-numpy kernel backends.

Times each hot kernel on training-sized inputs, then one full SGD step
(forward + backward on a batch of 32 at 64x64) with each backend swapped in.

    python benchmarks/bench_kernels.py [--repeat 20]
"""
import argparse
import contextlib
import time

import numpy as np

from phishvis import classifier, kernels

KERNELS = ("hilbert_curve", "hilbert_index", "im2col", "col2im", "maxpool2", "maxpool2_backward")


def time_call(func, *args, repeat=20, warmup=2):
    for _ in range(warmup):
        func(*args)
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        func(*args)
        times.append(time.perf_counter() - start)
    return float(np.median(times)) * 1e3


@contextlib.contextmanager
def backend(name):
    saved = {k: getattr(kernels, k) for k in KERNELS}
    impl = kernels.BACKENDS[name]
    for k in KERNELS:
        setattr(kernels, k, getattr(impl, k))
    try:
        yield
    finally:
        for k, v in saved.items():
            setattr(kernels, k, v)


def cases(rng):
    x1 = rng.random((32, 3, 64, 64))
    x2 = rng.random((32, 8, 32, 32))
    cols = rng.random((32, 72, 32 * 32))
    act = rng.random((32, 8, 64, 64))
    pooled, arg = kernels.BACKENDS["numpy"].maxpool2(act)
    xs, ys = kernels.BACKENDS["numpy"].hilbert_curve(7)
    return [
        ("hilbert_curve order 7", "hilbert_curve", (7,)),
        ("hilbert_index order 7", "hilbert_index", (7, xs, ys)),
        ("im2col 32x3x64x64", "im2col", (x1,)),
        ("im2col 32x8x32x32", "im2col", (x2,)),
        ("col2im 32x72x1024", "col2im", (cols, 32, 32)),
        ("maxpool2 32x8x64x64", "maxpool2", (act,)),
        ("maxpool2_backward", "maxpool2_backward", (pooled, arg)),
    ]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()
    names = sorted(kernels.BACKENDS)
    if "numba" not in names:
        print("numba not importable; only the numpy backend is available")
    rng = np.random.default_rng(0)

    print(f"{'kernel':<26}" + "".join(f"{n + ' ms':>12}" for n in names) + f"{'speedup':>10}")
    for label, kname, kargs in cases(rng):
        row = {n: time_call(getattr(kernels.BACKENDS[n], kname), *kargs, repeat=args.repeat)
               for n in names}
        speed = row["numpy"] / row["numba"] if "numba" in row else float("nan")
        print(f"{label:<26}" + "".join(f"{row[n]:>12.3f}" for n in names) + f"{speed:>9.2f}x")

    cfg = classifier.TrainConfig(seed=0)
    model = classifier.init_model(cfg)
    x = rng.random((32, 3, 64, 64))
    y = rng.integers(0, 2, 32)
    step = {}
    grads = {}
    for n in names:
        with backend(n):
            step[n] = time_call(classifier.loss_and_gradients, model, x, y, repeat=max(3, args.repeat // 4))
            grads[n] = classifier.gradients(model, x, y)
    speed = step["numpy"] / step["numba"] if "numba" in step else float("nan")
    print(f"{'SGD step (batch 32, 64px)':<26}" + "".join(f"{step[n]:>12.3f}" for n in names)
          + f"{speed:>9.2f}x")
    if len(names) == 2:
        same = all(a.tobytes() == b.tobytes() for a, b in zip(grads["numpy"], grads["numba"]))
        print(f"gradients bit-identical across backends: {same}")
    print(f"estimated 4000-step training: " + ", ".join(
        f"{n} {step[n] * 4000 / 1e3 / 60:.1f} min" for n in names))


if __name__ == "__main__":
    main()
