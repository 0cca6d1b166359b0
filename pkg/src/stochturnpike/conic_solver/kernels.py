"""Select the compiled cone kernels when available.

Set ``STOCHTURNPIKE_PURE_PYTHON=1`` to force the numpy fallback.
"""
from __future__ import annotations

import os

from . import _fallback

fallback = _fallback

compiled = None
if os.environ.get("STOCHTURNPIKE_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as compiled  # type: ignore[no-redef]
    except ImportError:  # extension not built
        compiled = None

active = compiled if compiled is not None else fallback
BACKEND = "cython" if compiled is not None else "python"

soc_project_blocks = active.soc_project_blocks
cone_update = active.cone_update
