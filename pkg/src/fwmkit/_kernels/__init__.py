"""Hot-loop kernels with a compiled core and a numpy fallback.

The compiled extension is preferred when present; set the environment
variable ``FWMKIT_KERNELS=python`` before import to force the fallback
(used by the benchmark and the parity tests).
"""

import os

from . import pykernels

_forced = os.environ.get("FWMKIT_KERNELS", "").strip().lower()

if _forced in ("python", "py", "numpy"):
    _impl = pykernels
    BACKEND = "python"
elif _forced in ("", "auto", "c", "compiled", "cython"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        if _forced in ("c", "compiled", "cython"):
            raise
        _impl = pykernels
        BACKEND = "python"
else:
    raise ValueError(f"unrecognized FWMKIT_KERNELS value: {_forced!r}")

kerr_phase = _impl.kerr_phase
l2_diff = _impl.l2_diff
# The pure reductions are BLAS-backed in numpy and beat a scalar loop
# (see benchmarks/bench_kernels.py), so they always come from the fallback.
total_power = pykernels.total_power
edge_power = pykernels.edge_power

__all__ = ["BACKEND", "kerr_phase", "total_power", "l2_diff", "edge_power", "pykernels"]
