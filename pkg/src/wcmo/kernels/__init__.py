"""Element-kernel backend selection.

The compiled extension (``_fast``, Cython) is used when available; the
pure-numpy implementation in ``_ref`` is the fallback.  Set WCMO_FORCE_PY=1
to force the fallback (used by the kernel benchmark and tests).
"""

import os

from . import _ref

if os.environ.get("WCMO_FORCE_PY"):
    _impl = _ref
    HAVE_COMPILED = False
else:
    try:
        from . import _fast as _impl
        HAVE_COMPILED = True
    except ImportError:
        _impl = _ref
        HAVE_COMPILED = False

local_stiffness = _impl.local_stiffness
local_mass = _impl.local_mass
local_load = _impl.local_load

__all__ = ["local_stiffness", "local_mass", "local_load", "HAVE_COMPILED"]
