"""Selects the compiled orbit kernels when available.

Set QRDYN_PURE_PYTHON=1 to force the numpy fallback.
"""
import os

if os.environ.get("QRDYN_PURE_PYTHON", "") == "1":
    from . import _pykernels as kernels
    BACKEND = "python"
else:
    try:
        from . import _kernels as kernels
        BACKEND = "cython"
    except ImportError:
        from . import _pykernels as kernels
        BACKEND = "python"


def get_kernels(name: str | None = None):
    """Kernel module by name ("cython" / "python"); None gives the default."""
    if name is None or name == BACKEND:
        return kernels
    if name == "python":
        from . import _pykernels
        return _pykernels
    if name == "cython":
        from . import _kernels
        return _kernels
    raise ValueError(f"unknown backend {name!r}")
