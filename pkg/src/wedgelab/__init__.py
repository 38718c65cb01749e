"""Resonance wedges of a periodically forced spiral-saddle return map.

Modules
-------
retmap
    The truncated annulus map, its lift, Jacobian and inverse, plus the
    derived constants (contraction exponent, twist, peak height).
resonance
    Closed-form fixed points, wedge membership, stability surfaces and
    the double-unit-eigenvalue (codimension-2) machinery.
orbits
    Orbit iteration, attractor classification on parameter grids, and
    saddle manifold tracing on the cylinder.
odelab
    The companion four-dimensional vector field: integration, Lyapunov
    spectra and the (tau1, tau2) classification scan.
gridio
    Deterministic CSV/JSON serialization for everything above.
cli
    The `wedgelab` command-line entry point.

The hot kernels run through a compiled extension when it is available
and a pure-Python mirror otherwise; `BACKEND` names the one in use.
"""

__version__ = "0.1.0"

from .kernels import BACKEND, get_backend
from .retmap import (
    LiftPoint,
    MapConstants,
    Params,
    SaddleValues,
    derive_constants,
    peak_value,
    return_map,
)
from .resonance import (
    BTPoint,
    FixedPointRecord,
    Membership,
    PointClass,
    SurfaceSample,
    bt_points,
    fixed_points,
    peak_omega,
    sample_surfaces,
    wedge_center,
    wedge_membership,
)
from .orbits import (
    AttractorClass,
    OrbitResult,
    ScanAxis,
    ScanGrid,
    classify_attractor,
    iterate,
    manifold_trace,
    rotation_number,
    scan,
)
from .odelab import (
    OdeParams,
    SpectrumResult,
    State4,
    equilibria_check,
    integrate,
    lyapunov_spectrum,
    ode_scan,
    vector_field,
)

__all__ = [
    "BACKEND",
    "get_backend",
    "__version__",
    "LiftPoint",
    "MapConstants",
    "Params",
    "SaddleValues",
    "derive_constants",
    "peak_value",
    "return_map",
    "BTPoint",
    "FixedPointRecord",
    "Membership",
    "PointClass",
    "SurfaceSample",
    "bt_points",
    "fixed_points",
    "peak_omega",
    "sample_surfaces",
    "wedge_center",
    "wedge_membership",
    "AttractorClass",
    "OrbitResult",
    "ScanAxis",
    "ScanGrid",
    "classify_attractor",
    "iterate",
    "manifold_trace",
    "rotation_number",
    "scan",
    "OdeParams",
    "SpectrumResult",
    "State4",
    "equilibria_check",
    "integrate",
    "lyapunov_spectrum",
    "ode_scan",
    "vector_field",
]
