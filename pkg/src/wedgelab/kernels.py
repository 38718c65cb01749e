"""Backend selection for the hot loops.

The compiled extension is preferred; when it is missing (no compiler at
install time) the interpreted twin in _kernels_py takes over with the
same call signatures and the same results, only slower.  BACKEND records
which one is active.
"""

try:
    from . import _kernels as _impl

    BACKEND = "compiled"
except ImportError:  # pragma: no cover - depends on the build environment
    from . import _kernels_py as _impl

    BACKEND = "python"

from . import _kernels_py

map_orbit = _impl.map_orbit
ode_final = _impl.ode_final
ode_sample = _impl.ode_sample
ode_spectrum = _impl.ode_spectrum


def get_backend(name):
    """Return the kernel module for `name` ("compiled" or "python").

    Raises ValueError for unknown names and RuntimeError when the
    compiled backend was requested but is not installed.  Used by the
    benchmark and the backend agreement tests.
    """
    if name == "python":
        return _kernels_py
    if name == "compiled":
        if BACKEND != "compiled":
            raise RuntimeError("compiled backend is not available")
        return _impl
    raise ValueError(f"unknown backend: {name!r}")
