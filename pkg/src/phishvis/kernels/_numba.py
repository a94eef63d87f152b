"""numba versions of the hot loops. Same contracts as ``_numpy``."""
import numba as nb
import numpy as np

_jit = nb.njit(cache=True, nogil=True)


@_jit
def hilbert_curve(order):
    side = 1 << order
    total = side * side
    xs = np.empty(total, dtype=np.int64)
    ys = np.empty(total, dtype=np.int64)
    for d in range(total):
        t = d
        x = 0
        y = 0
        s = 1
        while s < side:
            rx = 1 & (t >> 1)
            ry = 1 & (t ^ rx)
            if ry == 0:
                if rx == 1:
                    x = s - 1 - x
                    y = s - 1 - y
                x, y = y, x
            x += s * rx
            y += s * ry
            t >>= 2
            s <<= 1
        xs[d] = x
        ys[d] = y
    return xs, ys


@_jit
def hilbert_index(order, xs, ys):
    side = 1 << order
    out = np.empty(len(xs), dtype=np.int64)
    for i in range(len(xs)):
        x = np.int64(xs[i])
        y = np.int64(ys[i])
        d = 0
        s = side >> 1
        while s > 0:
            rx = 1 if x & s else 0
            ry = 1 if y & s else 0
            d += s * s * ((3 * rx) ^ ry)
            if ry == 0:
                if rx == 1:
                    x = side - 1 - x
                    y = side - 1 - y
                x, y = y, x
            s >>= 1
        out[i] = d
    return out


@_jit
def im2col(x):
    n, c, h, w = x.shape
    cols = np.empty((n, c * 9, h * w))
    for b in range(n):
        for ch in range(c):
            for ki in range(3):
                for kj in range(3):
                    row = ch * 9 + ki * 3 + kj
                    for i in range(h):
                        si = i + ki - 1
                        base = i * w
                        if si < 0 or si >= h:
                            for j in range(w):
                                cols[b, row, base + j] = 0.0
                            continue
                        for j in range(w):
                            sj = j + kj - 1
                            if 0 <= sj < w:
                                cols[b, row, base + j] = x[b, ch, si, sj]
                            else:
                                cols[b, row, base + j] = 0.0
    return cols


@_jit
def col2im(cols, h, w):
    n, k, _ = cols.shape
    c = k // 9
    dxp = np.zeros((n, c, h + 2, w + 2))
    for b in range(n):
        for ch in range(c):
            for ki in range(3):
                for kj in range(3):
                    row = ch * 9 + ki * 3 + kj
                    for i in range(h):
                        for j in range(w):
                            dxp[b, ch, i + ki, j + kj] += cols[b, row, i * w + j]
    return np.ascontiguousarray(dxp[:, :, 1:h + 1, 1:w + 1])


@_jit
def maxpool2(x):
    n, c, h, w = x.shape
    hh = h // 2
    wh = w // 2
    out = np.empty((n, c, hh, wh))
    arg = np.empty((n, c, hh, wh), dtype=np.int8)
    for b in range(n):
        for ch in range(c):
            for i in range(hh):
                for j in range(wh):
                    best = x[b, ch, 2 * i, 2 * j]
                    k = 0
                    for a in range(1, 4):
                        v = x[b, ch, 2 * i + a // 2, 2 * j + a % 2]
                        if v > best:
                            best = v
                            k = a
                    out[b, ch, i, j] = best
                    arg[b, ch, i, j] = k
    return out, arg


@_jit
def maxpool2_backward(dout, arg):
    n, c, hh, wh = dout.shape
    dx = np.zeros((n, c, 2 * hh, 2 * wh))
    for b in range(n):
        for ch in range(c):
            for i in range(hh):
                for j in range(wh):
                    a = arg[b, ch, i, j]
                    dx[b, ch, 2 * i + a // 2, 2 * j + a % 2] = dout[b, ch, i, j]
    return dx
