"""Select the compiled polynomial kernels when available.

Set ``INSTANTON_RMATRIX_PURE=1`` to force the pure-Python kernels.
"""

from __future__ import annotations

import os

if os.environ.get("INSTANTON_RMATRIX_PURE", "") not in ("", "0"):
    from . import _kernels_py as kernels

    BACKEND = "python"
else:
    try:
        from . import _kernels as kernels  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on the build
        from . import _kernels_py as kernels

        BACKEND = "python"

__all__ = ["kernels", "BACKEND"]
