"""Kernel selection.

The compiled ``_ckernels`` extension is used when it imports; otherwise the
pure-Python ``_pykernels`` module.  Setting ``GRIDAUTH_PURE_PYTHON=1``
forces the fallback.
"""
import os

from gridauth import _pykernels

if os.environ.get("GRIDAUTH_PURE_PYTHON", "").strip() not in ("", "0"):
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from gridauth import _ckernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels
        BACKEND = "python"

ec_mul = _impl.ec_mul
majority_decode = _impl.majority_decode

__all__ = ["BACKEND", "ec_mul", "majority_decode"]
