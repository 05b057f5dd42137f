"""Kernel backend selection.

The compiled extension is used when importable; set
``MEARRAY_PURE_PYTHON=1`` to force the numpy fallback.
"""

import os

from . import _kernels_py

if os.environ.get("MEARRAY_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels_c as _impl
    except ImportError:
        _impl = _kernels_py

BACKEND = "python" if _impl is _kernels_py else "cython"

array_factor = _impl.array_factor
phasor_power = _impl.phasor_power
sweep_linear = _impl.sweep_linear
