"""Select the compiled kernels when available, else the numpy fallback.

Set ``FBMSDE_PURE_PYTHON=1`` before import to force the fallback.
"""

import os

from . import _kernels_py

BACKENDS = {"python": _kernels_py}
try:
    from . import _ckernels
except ImportError:
    pass
else:
    BACKENDS["cython"] = _ckernels

if "cython" in BACKENDS and os.environ.get("FBMSDE_PURE_PYTHON", "") not in ("1", "true", "yes"):
    NAME = "cython"
else:
    NAME = "python"
kernels = BACKENDS[NAME]
