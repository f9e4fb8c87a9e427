"""Integration backend selection.

The compiled extension is preferred; the pure-Python twin is used when the
extension is unavailable or when ``SIAFLOW_PURE_PYTHON=1`` is set.  Both
produce bit-for-bit identical results (asserted by the test suite); they
differ only in speed.
"""

import os

if os.environ.get("SIAFLOW_PURE_PYTHON", "") == "1":
    from . import _core_py as _backend
else:
    try:
        from . import _core as _backend
    except ImportError:
        from . import _core_py as _backend

Core = _backend.Core
BACKEND = _backend.BACKEND


def kernel_backend():
    """Name of the active integration backend: 'cython' or 'python'."""
    return BACKEND
