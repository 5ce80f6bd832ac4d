"""Kernel backend selection.

The compiled extension is preferred when importable; the numpy fallback
keeps the package fully functional without a compiler. Set
CROSSTALK_KERNELS=python to force the fallback, or =compiled to make a
missing extension a hard error instead of a silent downgrade.
"""

from __future__ import annotations

import os

_requested = os.environ.get("CROSSTALK_KERNELS", "auto").strip().lower()

if _requested in ("auto", ""):
    try:
        from . import _ckernels as _impl

        BACKEND = "compiled"
    except ImportError:
        from . import _pykernels as _impl

        BACKEND = "python"
elif _requested == "compiled":
    from . import _ckernels as _impl

    BACKEND = "compiled"
elif _requested == "python":
    from . import _pykernels as _impl

    BACKEND = "python"
else:
    raise ImportError(
        f"CROSSTALK_KERNELS={_requested!r} not recognized "
        "(expected auto, compiled, or python)"
    )

prefix_rss = _impl.prefix_rss
ols_fit = _impl.ols_fit
betainc_reg = _impl.betainc_reg

__all__ = ["BACKEND", "prefix_rss", "ols_fit", "betainc_reg"]
