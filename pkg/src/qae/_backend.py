"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the numpy fallback
is loaded. Setting ``QAE_PURE_PYTHON=1`` forces the fallback.
"""

import os

from . import _kernels_py as python_kernels

try:
    from . import _kernels as compiled_kernels
except ImportError:  # extension not built
    compiled_kernels = None

if compiled_kernels is not None and os.environ.get("QAE_PURE_PYTHON", "") in ("", "0"):
    kernels = compiled_kernels
    BACKEND = "compiled"
else:
    kernels = python_kernels
    BACKEND = "python"
