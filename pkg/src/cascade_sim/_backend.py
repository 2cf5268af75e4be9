"""Selects the evolution kernel: compiled extension or pure python.

The compiled kernel is preferred when importable.  ``CASCADE_SIM_BACKEND``
(``compiled`` or ``python``) overrides the choice at import time, and
:func:`set_backend` switches it at runtime (used by the benchmark and the
cross-backend tests).
"""

import os

from . import _core_py
from .errors import InvalidParameterError

try:
    from . import _core
except ImportError:
    _core = None

_BACKENDS = {"python": _core_py}
if _core is not None:
    _BACKENDS["compiled"] = _core

_active = None


def set_backend(name):
    """Select the kernel by name ('compiled' or 'python')."""
    global _active
    if name not in _BACKENDS:
        raise InvalidParameterError(
            f"unknown backend '{name}'; available: {sorted(_BACKENDS)}")
    _active = _BACKENDS[name]
    return _active


def active_kernel():
    return _active


def backend_name():
    return "compiled" if _active is _core and _core is not None else "python"


def available_backends():
    return sorted(_BACKENDS)


_env = os.environ.get("CASCADE_SIM_BACKEND", "").strip().lower()
if _env:
    set_backend(_env)
else:
    set_backend("compiled" if _core is not None else "python")
