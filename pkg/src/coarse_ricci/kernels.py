"""Backend selection for the hot kernels.

The compiled extension is used when it imports; otherwise the pure-Python
module is.  Set ``COARSE_RICCI_BACKEND=python`` to force the fallback.
"""

import os

from . import _pykernels

BACKEND = "python"
if os.environ.get("COARSE_RICCI_BACKEND", "").lower() != "python":
    try:
        from . import _ckernels as _impl

        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _pykernels
else:
    _impl = _pykernels

transport_simplex = _impl.transport_simplex
jacobi_eigh = _impl.jacobi_eigh

__all__ = ["BACKEND", "transport_simplex", "jacobi_eigh"]
