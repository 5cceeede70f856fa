"""Backend selection for the simulation hot kernels.

Prefers the compiled extension (dnasim._ckernels) and falls back to the NumPy
implementation when it is not built. Set DNASIM_KERNELS=c|py to force a
backend; "c" raises if the extension is missing.
"""

from __future__ import annotations

import os

_choice = os.environ.get("DNASIM_KERNELS", "auto").lower()
if _choice not in {"auto", "c", "py"}:
    raise ValueError("DNASIM_KERNELS must be one of auto, c, py")

_impl = None
if _choice in {"auto", "c"}:
    try:
        from dnasim import _ckernels as _impl
    except ImportError:
        if _choice == "c":
            raise
        _impl = None
if _impl is None:
    from dnasim import _kernels_py as _impl

BACKEND = _impl.BACKEND
payload_block = _impl.payload_block
resolve_batch = _impl.resolve_batch
decode_batch = _impl.decode_batch
classify_batch = _impl.classify_batch
pair_histogram = _impl.pair_histogram
