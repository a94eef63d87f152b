"""Pure-numpy reference kernels.

The numba twins in ``_numba`` must produce bit-identical output; keep the
accumulation order in ``col2im`` in sync with them.
"""
import numpy as np


def hilbert_curve(order):
    """Return (xs, ys) for every curve index at the given order."""
    side = 1 << order
    t = np.arange(side * side, dtype=np.int64)
    x = np.zeros_like(t)
    y = np.zeros_like(t)
    s = 1
    while s < side:
        rx = 1 & (t >> 1)
        ry = 1 & (t ^ rx)
        flip = (ry == 0) & (rx == 1)
        x = np.where(flip, s - 1 - x, x)
        y = np.where(flip, s - 1 - y, y)
        swap = ry == 0
        x, y = np.where(swap, y, x), np.where(swap, x, y)
        x += s * rx
        y += s * ry
        t >>= 2
        s <<= 1
    return x, y


def hilbert_index(order, xs, ys):
    """Curve index for each ``(xs[i], ys[i])`` cell."""
    side = 1 << order
    x = np.array(xs, dtype=np.int64)
    y = np.array(ys, dtype=np.int64)
    d = np.zeros_like(x)
    s = side >> 1
    while s > 0:
        rx = ((x & s) > 0).astype(np.int64)
        ry = ((y & s) > 0).astype(np.int64)
        d += s * s * ((3 * rx) ^ ry)
        flip = (ry == 0) & (rx == 1)
        x = np.where(flip, side - 1 - x, x)
        y = np.where(flip, side - 1 - y, y)
        swap = ry == 0
        x, y = np.where(swap, y, x), np.where(swap, x, y)
        s >>= 1
    return d


def im2col(x):
    n, c, h, w = x.shape
    xp = np.zeros((n, c, h + 2, w + 2))
    xp[:, :, 1:-1, 1:-1] = x
    cols = np.empty((n, c, 3, 3, h, w))
    for ki in range(3):
        for kj in range(3):
            cols[:, :, ki, kj] = xp[:, :, ki:ki + h, kj:kj + w]
    return cols.reshape(n, c * 9, h * w)


def col2im(cols, h, w):
    n, k, _ = cols.shape
    c = k // 9
    cols = cols.reshape(n, c, 3, 3, h, w)
    dxp = np.zeros((n, c, h + 2, w + 2))
    for ki in range(3):
        for kj in range(3):
            dxp[:, :, ki:ki + h, kj:kj + w] += cols[:, :, ki, kj]
    return np.ascontiguousarray(dxp[:, :, 1:-1, 1:-1])


def _windows(x):
    n, c, h, w = x.shape
    return (x.reshape(n, c, h // 2, 2, w // 2, 2)
            .transpose(0, 1, 2, 4, 3, 5)
            .reshape(n, c, h // 2, w // 2, 4))


def maxpool2(x):
    """2x2/stride-2 max pool. Returns (out, arg) with arg in 0..3 row-major."""
    win = _windows(x)
    arg = win.argmax(axis=-1)  # argmax picks the first maximum
    out = np.take_along_axis(win, arg[..., None], axis=-1)[..., 0]
    return out, arg.astype(np.int8)


def maxpool2_backward(dout, arg):
    n, c, hh, wh = dout.shape
    dwin = np.zeros((n, c, hh, wh, 4))
    np.put_along_axis(dwin, arg[..., None].astype(np.intp), dout[..., None], axis=-1)
    return np.ascontiguousarray(
        dwin.reshape(n, c, hh, wh, 2, 2)
        .transpose(0, 1, 2, 4, 3, 5)
        .reshape(n, c, 2 * hh, 2 * wh))
