"""Kernel selection.

The compiled extension is used when it imports; setting
``HEAVY_ELLIPTIC_PURE=1`` forces the numpy fallback.
"""
import os

from . import _fallback

BACKEND = "python"
_impl = _fallback
if os.environ.get("HEAVY_ELLIPTIC_PURE") != "1":
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]
        BACKEND = "compiled"
    except ImportError:
        _impl = _fallback

pwit_root = _impl.pwit_root
rde_generation = _impl.rde_generation

__all__ = ["BACKEND", "pwit_root", "rde_generation"]
