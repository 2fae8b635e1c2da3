"""Backend selection for the hot sweep kernels.

The environment flag TOROQUAD_BACKEND picks the implementation:

    TOROQUAD_BACKEND=numba   numba-compiled loops (default when importable)
    TOROQUAD_BACKEND=numpy   pure-numpy blocked broadcasting

Both backends expose the same functions (see _sweeps_numba for the list);
``benchmarks/bench_backends.py`` compares them.
"""

from __future__ import annotations

import os
import warnings

_requested = os.environ.get("TOROQUAD_BACKEND", "").strip().lower()
if _requested not in ("", "numba", "numpy"):
    raise ValueError(
        f"TOROQUAD_BACKEND must be 'numba' or 'numpy', got {_requested!r}"
    )

if _requested == "numpy":
    from . import _sweeps_numpy as sweeps

    BACKEND = "numpy"
else:
    try:
        from . import _sweeps_numba as sweeps

        BACKEND = "numba"
    except ImportError as err:
        if _requested == "numba":
            raise
        warnings.warn(f"numba unavailable ({err}); falling back to numpy sweeps")
        from . import _sweeps_numpy as sweeps

        BACKEND = "numpy"


def backend_name() -> str:
    return BACKEND


def set_num_threads(n: int):
    """Cap worker parallelism of the numba backend (no-op for numpy)."""
    if BACKEND == "numba":
        import numba

        numba.set_num_threads(max(1, min(n, numba.config.NUMBA_NUM_THREADS)))
