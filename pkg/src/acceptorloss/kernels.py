"""Kernel dispatch: compiled extension when importable, NumPy fallback otherwise.

Set ``ACCEPTORLOSS_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("ACCEPTORLOSS_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl  # noqa: F811

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py

orbital_splittings = _impl.orbital_splittings
weighted_histogram = _impl.weighted_histogram


def backends():
    """Available kernel modules keyed by name, for tests and benchmarks."""
    out = {"python": _kernels_py}
    try:
        from . import _kernels

        out["cython"] = _kernels
    except ImportError:
        pass
    return out
