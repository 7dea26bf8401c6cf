"""Backend selection for interval jet arithmetic.

The compiled ``_ckernel`` extension is used when it imports; otherwise the
pure-Python ``_pyjet.Jet`` takes over with identical results.  Setting
``CRITDET_PURE_PYTHON=1`` forces the fallback.
"""

import os

from ._pyjet import Jet as PyJet

BACKEND = "python"
IntervalJet = PyJet

if os.environ.get("CRITDET_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from ._ckernel import IJet as IntervalJet  # noqa: F811

        BACKEND = "cython"
    except ImportError:  # extension not built
        pass

FloatJet = PyJet

__all__ = ["BACKEND", "IntervalJet", "FloatJet", "PyJet"]
