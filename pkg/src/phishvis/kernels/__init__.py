"""Hot numeric kernels with a numba path and a pure-numpy fallback.

The backend is chosen once at import time. Set ``PHISHVIS_NUMBA=0`` to force
the numpy path; it is also used when numba is not installed. Both backends
return bit-identical results.
"""
import logging
import os

from . import _numpy

log = logging.getLogger(__name__)

BACKENDS = {"numpy": _numpy}

try:
    from . import _numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    _numba = None
else:
    BACKENDS["numba"] = _numba

if os.environ.get("PHISHVIS_NUMBA", "1").strip().lower() in ("0", "false", "no", "off") or _numba is None:
    BACKEND = "numpy"
else:
    BACKEND = "numba"

_impl = BACKENDS[BACKEND]
log.debug("phishvis kernels: %s backend", BACKEND)

hilbert_curve = _impl.hilbert_curve
hilbert_index = _impl.hilbert_index
im2col = _impl.im2col
col2im = _impl.col2im
maxpool2 = _impl.maxpool2
maxpool2_backward = _impl.maxpool2_backward

__all__ = ["BACKEND", "BACKENDS", "hilbert_curve", "hilbert_index", "im2col", "col2im",
           "maxpool2", "maxpool2_backward"]
