"""Select the Bessel kernel implementation at import.

The compiled module is preferred; setting ``SHC_PURE_PYTHON=1`` forces the
numpy fallback (used by the benchmark and the cross-route tests).
"""

import os

from . import _kernels_py

if os.environ.get("SHC_PURE_PYTHON") == "1":
    jv = _kernels_py.jv
    BACKEND = "python"
else:
    try:
        from ._kernels import jv  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        jv = _kernels_py.jv
        BACKEND = "python"

jv_python = _kernels_py.jv
