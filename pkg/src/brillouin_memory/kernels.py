"""Selection of the RK4 moment kernel.

The compiled Cython kernel is used when it can be imported; otherwise the
pure-numpy implementation is used.  Setting the environment variable
``BRILLOUIN_MEMORY_PURE_PYTHON=1`` forces the fallback.
"""
import os

from . import _rk4_py

__all__ = ["lyapunov_rk4", "BACKEND", "get_kernel", "available_kernels"]

_compiled = None
if os.environ.get("BRILLOUIN_MEMORY_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _rk4 as _compiled
    except ImportError:  # extension not built
        _compiled = None

if _compiled is not None:
    lyapunov_rk4 = _compiled.lyapunov_rk4
    BACKEND = "cython"
else:
    lyapunov_rk4 = _rk4_py.lyapunov_rk4
    BACKEND = "python"


def available_kernels():
    """Names of the kernels importable in this environment."""
    names = ["python"]
    try:
        from . import _rk4  # noqa: F401
        names.insert(0, "cython")
    except ImportError:
        pass
    return names


def get_kernel(name=None):
    """Return the kernel function called ``name`` (default: the selected one)."""
    if name is None:
        return lyapunov_rk4
    if name == "python":
        return _rk4_py.lyapunov_rk4
    if name == "cython":
        from . import _rk4
        return _rk4.lyapunov_rk4
    raise ValueError(f"unknown kernel {name!r}")
