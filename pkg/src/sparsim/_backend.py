"""Select the kernel implementation at import time.

The compiled extension ``sparsim._ckernels`` is preferred; set
``SPARSIM_PURE_PYTHON=1`` to force the pure-Python fallback.
"""
import os

from . import _pykernels

if os.environ.get("SPARSIM_PURE_PYTHON", "") not in ("", "0"):
    kernels = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as kernels
    except ImportError:
        kernels = _pykernels
        BACKEND = "python"
    else:
        BACKEND = "cython"


def available_backends():
    """Map of backend name to kernel module for every importable backend."""
    found = {"python": _pykernels}
    try:
        from . import _ckernels
    except ImportError:
        pass
    else:
        found["cython"] = _ckernels
    return found
