"""Backend selection for the hot kernels.

Prefers the compiled extension, falls back to the NumPy implementation when
the extension is unavailable.  Set BORNFORGE_PURE_PYTHON=1 to force the
fallback (the benchmark and the equivalence tests import both directly).
"""

from __future__ import annotations

import os

if os.environ.get("BORNFORGE_PURE_PYTHON", "") == "1":
    from . import _corepure as _impl
else:
    try:
        from . import _corefast as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _corepure as _impl

BACKEND: str = _impl.BACKEND
hamming_matrix = _impl.hamming_matrix
phase_table = _impl.phase_table
sinkhorn_cross = _impl.sinkhorn_cross
sinkhorn_auto = _impl.sinkhorn_auto
