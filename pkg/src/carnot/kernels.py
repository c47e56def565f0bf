"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the numpy
fallback.  ``CARNOT_KERNELS=python`` forces the fallback.
"""

import os

from . import _kernels_py

backend = "python"
_impl = _kernels_py

if os.environ.get("CARNOT_KERNELS", "").lower() != "python":
    try:
        from ._ext import _kernels as _impl  # type: ignore[no-redef]
        backend = "cython"
    except ImportError:
        _impl = _kernels_py

bracket = _impl.bracket
bch_multiply = _impl.bch_multiply
heat_compose = _impl.heat_compose


def get_backend(name=None):
    """Return the kernel module called ``name`` (``"python"`` or ``"cython"``)."""
    if name is None:
        return _impl
    if name == "python":
        return _kernels_py
    if name == "cython":
        from ._ext import _kernels
        return _kernels
    raise ValueError(f"unknown kernel backend {name!r}")
