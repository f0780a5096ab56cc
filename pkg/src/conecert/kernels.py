"""Hot loops, compiled when the extension is available.

The Cython module `conecert._kernels` is used when it imports; otherwise,
or when CLS_KERNELS=python is set, the numpy fallback is used.  BACKEND
names the active implementation.
"""

import os

import numpy as np

from . import _kernels_py

if os.environ.get("CLS_KERNELS", "").lower() == "python":
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:  # pragma: no cover - depends on the build
        _impl = _kernels_py
        BACKEND = "python"


def _c(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def batch_switch_counts(A1, A2, K, X0, steps, tol=1e-9, backend=None):
    impl = _pick(backend)
    X0 = np.atleast_2d(X0)
    return impl.batch_switch_counts(_c(A1), _c(A2), _c(np.ravel(K)), _c(X0), int(steps), float(tol))


def row_orbit_extrema(r0, A, G, steps, backend=None):
    impl = _pick(backend)
    return impl.row_orbit_extrema(_c(np.ravel(r0)), _c(A), _c(G), int(steps))


def _pick(backend):
    if backend is None:
        return _impl
    if backend == "python":
        return _kernels_py
    if backend == "compiled":
        from . import _kernels  # type: ignore[attr-defined]

        return _kernels
    raise ValueError(f"unknown backend {backend!r}")
