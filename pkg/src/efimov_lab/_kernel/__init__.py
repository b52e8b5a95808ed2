"""Radial integrator kernel with compiled and pure-Python backends.

The compiled backend is preferred when its extension module imports;
otherwise the pure-Python twin takes over transparently.  Both expose
the same ``integrate_numerov`` and produce identical output.
"""

from __future__ import annotations

from . import _pure

try:
    from . import _compiled as _impl
    BACKEND = "compiled"
except ImportError:
    _impl = _pure
    BACKEND = "pure"

integrate_numerov = _impl.integrate_numerov


def get_backend(name: str):
    """Return a specific backend module ("pure" or "compiled") for
    benchmarking and cross-checks; raises ImportError when the compiled
    extension was not built."""
    if name == "pure":
        return _pure
    if name == "compiled":
        from . import _compiled
        return _compiled
    raise ValueError(f"unknown backend {name!r}")
