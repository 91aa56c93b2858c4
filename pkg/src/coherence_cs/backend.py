"""Select the numerical kernel backend at import time.

The compiled extension (coherence_cs._kernels, built from Cython) is used
when it imports cleanly; otherwise the pure-numpy twin takes over. Set
COHERENCE_CS_BACKEND=python or =compiled to force a choice — forcing the
compiled backend in an environment where it did not build raises
immediately rather than silently falling back.
"""

import os

from . import _kernels_py

_requested = os.environ.get("COHERENCE_CS_BACKEND", "").strip().lower()

if _requested == "python":
    _impl = _kernels_py
elif _requested == "compiled":
    from . import _kernels as _impl  # noqa: F401  (ImportError is the point)
elif _requested == "":
    try:
        from . import _kernels as _impl
    except ImportError:
        _impl = _kernels_py
else:
    raise ValueError(
        f"COHERENCE_CS_BACKEND={_requested!r}: expected 'compiled' or 'python'"
    )

NAME = _impl.NAME

fista_l1 = _impl.fista_l1
fista_group = _impl.fista_group
subgrad_l1 = _impl.subgrad_l1
subgrad_group = _impl.subgrad_group
subgrad_ds = _impl.subgrad_ds
prox_sql1 = _impl.prox_sql1
quasi_rip_scan = _impl.quasi_rip_scan


def backend_name():
    """Name of the active kernel backend: 'compiled' or 'python'."""
    return NAME
