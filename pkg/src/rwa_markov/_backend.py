"""Select the compiled kernels when built, the numpy fallback otherwise.

Set ``RWA_MARKOV_PURE=1`` to force the fallback.
"""

import os

from . import _kernels_py

BACKEND = "python"
volterra_trapezoid = _kernels_py.volterra_trapezoid
jacobi_hermitian = _kernels_py.jacobi_hermitian

if os.environ.get("RWA_MARKOV_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels
    except ImportError:
        pass
    else:
        BACKEND = "compiled"
        volterra_trapezoid = _kernels.volterra_trapezoid
        jacobi_hermitian = _kernels.jacobi_hermitian


def get_kernels(name=None):
    """Return ``(volterra_trapezoid, jacobi_hermitian)`` for a named backend."""
    if name is None:
        return volterra_trapezoid, jacobi_hermitian
    if name == "python":
        return _kernels_py.volterra_trapezoid, _kernels_py.jacobi_hermitian
    if name == "compiled":
        from . import _kernels
        return _kernels.volterra_trapezoid, _kernels.jacobi_hermitian
    raise ValueError(f"unknown backend {name!r}")
