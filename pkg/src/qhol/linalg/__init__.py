"""Linear algebra kernels.

:class:`ModEchelon` is taken from the compiled extension when it is
available and from the numpy implementation otherwise.  Set the environment
variable ``QHOL_FORCE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import os

from . import _modkernel_py

BACKEND = "python"
if os.environ.get("QHOL_FORCE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from ._modkernel import ModEchelon  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:  # extension not built
        ModEchelon = _modkernel_py.ModEchelon
else:
    ModEchelon = _modkernel_py.ModEchelon

PyModEchelon = _modkernel_py.ModEchelon

from .modular import nullspace_mod, rank_mod, rational_reconstruct  # noqa: E402

__all__ = ["ModEchelon", "PyModEchelon", "BACKEND", "nullspace_mod", "rank_mod", "rational_reconstruct"]
