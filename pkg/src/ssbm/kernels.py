"""Backend selection for the hot kernels.

The compiled module is used when it imports; set ``SSBM_KERNELS=python`` to
force the numpy fallback (``SSBM_KERNELS=cython`` makes a missing build an error).
"""

import os

from . import _pykernels

_choice = os.environ.get("SSBM_KERNELS", "auto").lower()

if _choice == "python":
    backend = _pykernels
else:
    try:
        from . import _ckernels as backend
    except ImportError:
        if _choice == "cython":
            raise
        backend = _pykernels

BACKEND = backend.NAME


def available():
    """Names of the kernel modules importable in this environment."""
    names = ["python"]
    try:
        from . import _ckernels  # noqa: F401
    except ImportError:
        pass
    else:
        names.insert(0, "cython")
    return names


def get(name):
    if name == "python":
        return _pykernels
    if name == "cython":
        from . import _ckernels

        return _ckernels
    raise ValueError(f"unknown kernel backend {name!r}")
