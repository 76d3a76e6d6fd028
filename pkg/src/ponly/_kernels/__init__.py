"""Hot-loop kernels: compiled core with a pure-numpy fallback.

The backend is chosen once at import time. Set ``PONLY_KERNELS=numpy`` to
force the fallback, or ``PONLY_KERNELS=cython`` to require the compiled
extension (raising if it was not built).
"""

import os

from ._ref import U_MAX

_choice = os.environ.get("PONLY_KERNELS", "auto").lower()

if _choice == "numpy":
    from ._ref import exp_moments, logit_moments

    BACKEND = "numpy"
elif _choice == "cython":
    from ._core import exp_moments, logit_moments

    BACKEND = "cython"
elif _choice == "auto":
    try:
        from ._core import exp_moments, logit_moments

        BACKEND = "cython"
    except ImportError:
        from ._ref import exp_moments, logit_moments

        BACKEND = "numpy"
else:
    raise ImportError(f"PONLY_KERNELS must be auto, cython or numpy, got {_choice!r}")

__all__ = ["exp_moments", "logit_moments", "BACKEND", "U_MAX"]
