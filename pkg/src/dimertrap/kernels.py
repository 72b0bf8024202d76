"""Backend selection for the Monte-Carlo sweep kernel.

The compiled Cython extension is preferred; the pure-Python fallback is used
when the extension is missing or when DIMERTRAP_FORCE_FALLBACK is set. Both
consume identical pre-generated random streams and implement identical
arithmetic, so chains are reproducible across backends.
"""

import os

if os.environ.get("DIMERTRAP_FORCE_FALLBACK"):
    from . import _mc_fallback as backend

    BACKEND = "fallback"
else:
    try:
        from . import _mc_kernel as backend  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        from . import _mc_fallback as backend  # type: ignore[no-redef]

        BACKEND = "fallback"


def backend_name() -> str:
    return BACKEND
