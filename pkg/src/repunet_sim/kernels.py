"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the numpy fallback.
Set ``REPUNET_SIM_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _kernels_py

if os.environ.get("REPUNET_SIM_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

similarity_stats = _impl.similarity_stats
fraction_above = _impl.fraction_above
sgd_epoch = _impl.sgd_epoch
