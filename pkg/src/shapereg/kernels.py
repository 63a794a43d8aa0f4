"""Kernel backend selection.

The compiled extension is used when it imports; otherwise, or when the
environment variable ``SHAPEREG_PURE_PYTHON`` is set to a non-empty value
other than ``0``, the numpy implementations are used.  Both backends give
identical results.
"""
import os

from . import _pykernels

_force_python = os.environ.get("SHAPEREG_PURE_PYTHON", "") not in ("", "0")

if _force_python:
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl
    except ImportError:  # extension not built
        _impl = _pykernels

BACKEND = _impl.BACKEND

nearest_site = _impl.nearest_site
tree_apply = _impl.tree_apply
cart_scan = _impl.cart_scan
prt_paths = _impl.prt_paths
prt_sides = _impl.prt_sides
mondrian_paths = _impl.mondrian_paths


def available_backends():
    """Map backend name to kernel module for every importable backend."""
    found = {"python": _pykernels}
    try:
        from . import _ckernels

        found["cython"] = _ckernels
    except ImportError:
        pass
    return found
