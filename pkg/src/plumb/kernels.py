"""Backend selection for the bulk discharge kernel.

The compiled Cython module is used when it was built; otherwise the numpy
implementation takes over.  Setting ``PLUMB_PURE=1`` forces the fallback.
"""

from __future__ import annotations

import os

from . import _fallback

try:
    if os.environ.get("PLUMB_PURE"):
        raise ImportError("compiled kernel disabled by PLUMB_PURE")
    from . import _discharge as _compiled
except ImportError:  # pragma: no cover - depends on the build
    _compiled = None

BACKENDS = {"python": _fallback.full_path_starts}
if _compiled is not None:
    BACKENDS["compiled"] = _compiled.full_path_starts

BACKEND = "compiled" if _compiled is not None else "python"

# int64 accumulators in the compiled kernel must not overflow
_SAFE = 2**62


def full_path_starts(Q, adj_mod, modulus, targets, backend: str | None = None):
    """Dispatch to the selected backend; refuses inputs that could overflow int64."""
    import numpy as np

    name = backend or BACKEND
    Q = np.ascontiguousarray(Q, dtype=np.int64)
    adj_mod = np.ascontiguousarray(adj_mod, dtype=np.int64)
    n = Q.shape[0]
    targets = np.ascontiguousarray(np.asarray(targets, dtype=np.int64).reshape(-1, n))
    bound = n * int(modulus) * max(1, int(np.abs(np.diag(Q)).max(initial=1)))
    if bound >= _SAFE:
        raise OverflowError("lattice too large for the int64 discharge kernels")
    return BACKENDS[name](Q, adj_mod, int(modulus), targets)
