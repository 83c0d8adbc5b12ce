"""Hot-loop kernels, compiled when the Cython extension is built.

Set ``EPSUPPRESS_PURE_PYTHON=1`` to force the numpy fallback.
"""

import os

from . import _pycore

if os.environ.get("EPSUPPRESS_PURE_PYTHON"):
    _impl = _pycore
else:
    try:
        from . import _core as _impl
    except ImportError:
        _impl = _pycore

BACKEND = "python" if _impl is _pycore else "cython"

pauli_dense = _impl.pauli_dense
pv_paired_sum = _impl.pv_paired_sum
