"""Import-time selection between the compiled kernels and the NumPy fallback."""

from __future__ import annotations

import os

if os.environ.get("NFHOLO_FORCE_NUMPY"):
    from . import _core_np as _impl

    _BACKEND = "numpy"
else:
    try:
        from . import _core as _impl  # type: ignore[no-redef]

        _BACKEND = "cython"
    except ImportError:
        from . import _core_np as _impl  # type: ignore[no-redef]

        _BACKEND = "numpy"

contract = _impl.contract
stolt_gather = _impl.stolt_gather


def backend_name() -> str:
    """Which kernel implementation is active, "cython" or "numpy"."""
    return _BACKEND
