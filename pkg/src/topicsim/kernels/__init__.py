"""Backend dispatch for the per-epoch simulation kernel.

Two interchangeable implementations exist:

* ``numba`` -- jit-compiled loops (default when numba imports cleanly);
* ``numpy`` -- pure vectorized numpy.

Both produce bit-identical results; the env var ``TOPICS_SIM_BACKEND``
(``numba`` or ``numpy``) overrides the default.  ``benchmarks/bench_backends.py``
compares their throughput.
"""

from __future__ import annotations

import os

_BACKENDS = ("numba", "numpy")


def default_backend_name() -> str:
    name = os.environ.get("TOPICS_SIM_BACKEND", "").strip().lower()
    if name:
        if name not in _BACKENDS:
            raise ValueError(
                f"TOPICS_SIM_BACKEND must be one of {_BACKENDS}, got {name!r}"
            )
        return name
    try:
        import numba  # noqa: F401

        return "numba"
    except ImportError:
        return "numpy"


def get_backend(name: str | None = None):
    """Return the kernel module for ``name`` (or the environment default)."""
    name = name or default_backend_name()
    if name == "numba":
        from . import numba_backend

        return numba_backend
    if name == "numpy":
        from . import numpy_backend

        return numpy_backend
    raise ValueError(f"unknown backend {name!r}; expected one of {_BACKENDS}")
