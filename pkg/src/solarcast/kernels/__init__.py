"""Hot-loop kernels for MLP training, with backend selection at import.

The compiled Cython extension is preferred; the numpy implementation is
the fallback when the extension was not built (or when the environment
variable SOLARCAST_PURE_PYTHON is set).  Both expose the same functions
and agree to floating-point roundoff; `benchmarks/bench_kernels.py`
compares their speed.
"""

import os

from . import _lmcore_py

if os.environ.get("SOLARCAST_PURE_PYTHON"):
    _impl = _lmcore_py
else:
    try:
        from . import _lmcore as _impl
    except ImportError:
        _impl = _lmcore_py

BACKEND = _impl.BACKEND

mlp_forward = _impl.mlp_forward
mlp_forward_jacobian = _impl.mlp_forward_jacobian

__all__ = ["BACKEND", "mlp_forward", "mlp_forward_jacobian"]
