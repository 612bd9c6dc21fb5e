"""Backend selection for the modular kernels.

The compiled module is used when it was built and importable; set
``SPRINGERFIB_PURE_PYTHON=1`` to force the pure-Python reference.
"""

from __future__ import annotations

import os

from . import _kernels_py

BACKEND = "python"
rref_modp = _kernels_py.rref_modp
matmul_modp = _kernels_py.matmul_modp

if os.environ.get("SPRINGERFIB_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels
    except ImportError:  # extension not built; stay on the fallback
        pass
    else:
        rref_modp = _ckernels.rref_modp
        matmul_modp = _ckernels.matmul_modp
        BACKEND = "cython"
