"""Integer linear-algebra micro-kernels with two interchangeable lanes.

The compiled Cython lane is preferred when the extension built; the
pure-Python twin has identical semantics (same Bareiss elimination, same
first-nonzero pivoting) and is selected automatically when the extension
is missing or when SFPAS_PURE_PYTHON=1 is set.

These kernels dominate the runtime of the exhaustive pencil/minor
stability sweeps, which evaluate millions of small exact ranks and
determinants.
"""

import os

if os.environ.get("SFPAS_PURE_PYTHON"):
    from . import pure as _impl

    IMPLEMENTATION = "pure"
else:
    try:
        from . import _speedups as _impl  # type: ignore[attr-defined]

        IMPLEMENTATION = "compiled"
    except ImportError:
        from . import pure as _impl

        IMPLEMENTATION = "pure"

rank_int = _impl.rank_int
det_int = _impl.det_int

__all__ = ["rank_int", "det_int", "IMPLEMENTATION"]
