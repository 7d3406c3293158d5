"""Kernel backend selection.

The hot pointwise field kernels exist twice: a compiled Cython extension
(`_kernels_cy`) and a NumPy fallback (`_kernels_py`).  The compiled backend
is picked at import when available; set SPECTRALNS_DISABLE_EXT=1 to force
the fallback.  Both backends produce bitwise-identical results, so the
choice affects speed only.
"""

import os

if os.environ.get("SPECTRALNS_DISABLE_EXT", "") not in ("", "0"):
    from . import _kernels_py as _impl
else:
    try:
        from . import _kernels_cy as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _kernels_py as _impl

BACKEND = _impl.__name__.rsplit("_", 1)[-1]  # "cy" or "py"

advective_sum = _impl.advective_sum
project = _impl.project
combine_rhs = _impl.combine_rhs
apply_mask = _impl.apply_mask
max_magnitude = _impl.max_magnitude
max_divergence = _impl.max_divergence
shell_max = _impl.shell_max
