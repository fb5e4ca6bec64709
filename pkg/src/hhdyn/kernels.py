"""Backend selection for the HEOM right-hand-side kernel.

The compiled extension is preferred; the numpy implementation is used
when the extension is unavailable or when HHDYN_FORCE_PYTHON is set to a
non-empty value.  Both backends implement identical arithmetic with a
fixed accumulation order, so trajectories agree to rounding.
"""

from __future__ import annotations

import os

from . import _heom_py

rhs_general = _heom_py.rhs_general

if os.environ.get("HHDYN_FORCE_PYTHON"):
    _impl = _heom_py
else:
    try:
        from . import _heom_core as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = _heom_py

rhs_diag = _impl.rhs_diag
ACTIVE_BACKEND: str = _impl.BACKEND
