"""Kernel backend selection.

The compiled Cython extension is preferred when importable; the numpy
reference implementation is the fallback. Set ``WEYLSIM_KERNELS`` to
``numpy`` or ``cython`` to force a backend (``cython`` raises if the
extension is unavailable).
"""

import os

from . import _ref

_choice = os.environ.get("WEYLSIM_KERNELS", "auto").lower()

if _choice not in ("auto", "numpy", "cython"):
    raise ValueError(f"WEYLSIM_KERNELS must be auto|numpy|cython, got {_choice!r}")

if _choice == "numpy":
    _impl = _ref
    BACKEND = "numpy"
else:
    try:
        from . import _cykernels as _impl  # type: ignore[no-redef]
        BACKEND = "cython"
    except ImportError:
        if _choice == "cython":
            raise
        _impl = _ref
        BACKEND = "numpy"

import numpy as _np


def _c(a, dtype):
    return _np.ascontiguousarray(a, dtype=dtype)


def weyl_propagate(c0, c1, px, py, t):
    return _impl.weyl_propagate(_c(c0, _np.complex128), _c(c1, _np.complex128),
                                _c(px, _np.float64), _c(py, _np.float64), float(t))


def trajectory_sums(px, py, wts, n, m, width, times):
    return _impl.trajectory_sums(_c(px, _np.float64), _c(py, _np.float64),
                                 _c(wts, _np.float64), float(n), float(m),
                                 float(width), _c(times, _np.float64))


def backend_name() -> str:
    return BACKEND
