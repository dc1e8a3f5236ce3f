"""Backend selection for the Bloch-evolution kernel.

The compiled extension is preferred when importable; otherwise the numpy
fallback is used.  Set QSENSE_BACKEND=python to force the fallback (useful
for benchmarking and debugging).  Both backends implement the same
``evolve_bloch`` contract, documented in :mod:`qsense._kernels.fallback`.
"""

import os

from . import fallback

_FORCED = os.environ.get("QSENSE_BACKEND", "").strip().lower()

if _FORCED == "python":
    evolve_bloch = fallback.evolve_bloch
    BACKEND = "python"
else:
    try:
        from ._evolve import evolve_bloch

        BACKEND = "compiled"
    except ImportError:
        if _FORCED == "compiled":
            raise
        evolve_bloch = fallback.evolve_bloch
        BACKEND = "python"


def backend_name():
    """Name of the kernel backend in use: 'compiled' or 'python'."""
    return BACKEND


def available_backends():
    """Mapping of backend name to its evolve_bloch implementation."""
    out = {"python": fallback.evolve_bloch}
    try:
        from ._evolve import evolve_bloch as compiled

        out["compiled"] = compiled
    except ImportError:
        pass
    return out
