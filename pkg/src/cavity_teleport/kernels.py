"""Backend selection for the state-vector kernels.

The compiled extension is used when it was built; otherwise the numpy
implementation is loaded. Set ``CAVITY_TELEPORT_PURE=1`` to force numpy.
"""
import os

from . import _kernels_py

if os.environ.get("CAVITY_TELEPORT_PURE", "") not in ("", "0"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl
    except ImportError:  # extension not built
        _impl = _kernels_py

BACKEND = _impl.BACKEND
apply_1q = _impl.apply_1q
apply_2q = _impl.apply_2q
marginal = _impl.marginal
project = _impl.project
select = _impl.select

__all__ = ["BACKEND", "apply_1q", "apply_2q", "marginal", "project", "select"]
