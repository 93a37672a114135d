"""Pick the compiled query kernels when available, else the pure-Python ones.

Set ``SOGRAND_BACKEND=python`` to force the fallback.
"""

import os

from . import _fallback

kernels = _fallback
NAME = "python"

if os.environ.get("SOGRAND_BACKEND", "").lower() != "python":
    try:
        from . import _kernels as kernels  # noqa: F811
        NAME = "cython"
    except ImportError:
        kernels = _fallback
