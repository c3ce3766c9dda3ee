"""Kernel backend selection: compiled extension when built, numpy otherwise.

Set RINGQEC_KERNELS=python|compiled to override; `get_backend()` returns the
module used by the simulator.
"""

import os

from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built; fall back silently
    _compiled = None


def available_backends() -> dict:
    out = {"python": _kernels_py}
    if _compiled is not None:
        out["compiled"] = _compiled
    return out


def get_backend(name: str | None = None):
    if name is None:
        name = os.environ.get("RINGQEC_KERNELS")
    backends = available_backends()
    if name is None:
        return backends.get("compiled", _kernels_py)
    if name not in backends:
        raise ValueError(f"kernel backend {name!r} unavailable "
                         f"(have: {sorted(backends)})")
    return backends[name]
