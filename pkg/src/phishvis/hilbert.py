"""Hilbert curve index <-> grid cell conversions.

Orientation: index 0 sits at (0, 0) and the last index at (side - 1, 0).
``x`` is the column, ``y`` the row.
"""
from functools import lru_cache

import numpy as np

from . import kernels
from .errors import OutOfRange

MIN_ORDER = 1
MAX_ORDER = 12
DEFAULT_ORDER = 7  # 128 x 128


def check_order(order):
    if not isinstance(order, (int, np.integer)) or not MIN_ORDER <= order <= MAX_ORDER:
        raise OutOfRange(f"curve order must be in [{MIN_ORDER}, {MAX_ORDER}], got {order!r}")
    return int(order)


def side_of(order):
    return 1 << check_order(order)


def _rotate(s, x, y, rx, ry):
    if ry == 0:
        if rx == 1:
            x, y = s - 1 - x, s - 1 - y
        x, y = y, x
    return x, y


def d2xy(order, d):
    """Cell ``(x, y)`` visited at step ``d`` of the curve."""
    side = side_of(order)
    if not 0 <= d < side * side:
        raise OutOfRange(f"index {d} outside [0, {side * side})")
    t = int(d)
    x = y = 0
    s = 1
    while s < side:
        rx = 1 & (t >> 1)
        ry = 1 & (t ^ rx)
        x, y = _rotate(s, x, y, rx, ry)
        x += s * rx
        y += s * ry
        t >>= 2
        s <<= 1
    return x, y


def xy2d(order, cell):
    """Inverse of :func:`d2xy`."""
    side = side_of(order)
    x, y = int(cell[0]), int(cell[1])
    if not (0 <= x < side and 0 <= y < side):
        raise OutOfRange(f"cell {(x, y)} outside {side}x{side} grid")
    d = 0
    s = side >> 1
    while s > 0:
        rx = 1 if x & s else 0
        ry = 1 if y & s else 0
        d += s * s * ((3 * rx) ^ ry)
        x, y = _rotate(side, x, y, rx, ry)
        s >>= 1
    return d


@lru_cache(maxsize=None)
def _curve(order):
    xs, ys = kernels.hilbert_curve(order)
    xs.setflags(write=False)
    ys.setflags(write=False)
    return xs, ys


def curve(order=DEFAULT_ORDER):
    """Read-only arrays ``(xs, ys)`` of every cell in curve order."""
    return _curve(check_order(order))


def cells_to_index(order, xs, ys):
    """Vectorized :func:`xy2d` over coordinate arrays."""
    order = check_order(order)
    xs = np.asarray(xs, dtype=np.int64)
    ys = np.asarray(ys, dtype=np.int64)
    side = 1 << order
    if xs.shape != ys.shape:
        raise ValueError("xs and ys must have the same shape")
    if xs.size and (xs.min() < 0 or ys.min() < 0 or xs.max() >= side or ys.max() >= side):
        raise OutOfRange(f"cells outside {side}x{side} grid")
    return kernels.hilbert_index(order, xs.ravel(), ys.ravel()).reshape(xs.shape)
