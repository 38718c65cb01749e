"""The four-dimensional flow: field, integration, spectra, structure checks.

The vector field couples a planar rotation (x1, x2) to the (x3, x4) pair
on an attracting unit sphere; two symmetry-breaking terms with weights
tau1 and tau2 deform a heteroclinic network between the two polar
equilibria (0,0,0,+-1).  The field is implemented verbatim, including
the tau1*x4**3 term that shifts the north pole off equilibrium for
tau1 > 0; equilibria_check reports that residual rather than hiding it.

Integration and Benettin spectra run in the kernel backend (adaptive
Dormand-Prince 5(4)); this module owns parameter validation, the
analytic Jacobian as a numpy array, and the (tau1, tau2) scan.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import kernels
from .orbits import ScanAxis
from .retmap import MapConstants, SaddleValues, derive_constants

ZERO_TOL = 5e-4  # an exponent this close to zero counts as zero
NEAR_POLE = 0.1  # orbit distance to a pole that flags a near-network cell


class IntegrationError(RuntimeError):
    """Step-size underflow; .t_reached is where the integrator gave up."""

    def __init__(self, t_reached: float):
        super().__init__(f"step size underflow at t = {t_reached!r}")
        self.t_reached = t_reached


@dataclass(frozen=True)
class OdeParams:
    """Field coefficients.  alpha/beta shape the sphere dynamics and
    must satisfy beta < 0 < alpha, beta**2 < 8*alpha**2, |beta| < |alpha|;
    tau1 and tau2 are the deformation weights, in [0, 1]."""

    alpha: float
    beta: float
    omega: float
    tau1: float = 0.0
    tau2: float = 0.0

    def __post_init__(self):
        if not self.beta < 0.0 < self.alpha:
            raise ValueError(f"need beta < 0 < alpha, got {self.beta}, {self.alpha}")
        if not self.beta * self.beta < 8.0 * self.alpha * self.alpha:
            raise ValueError("need beta**2 < 8*alpha**2")
        if not abs(self.beta) < abs(self.alpha):
            raise ValueError("need |beta| < |alpha|")
        for name in ("tau1", "tau2"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")


@dataclass(frozen=True)
class State4:
    x1: float
    x2: float
    x3: float
    x4: float

    @property
    def r2(self) -> float:
        return self.x1**2 + self.x2**2 + self.x3**2 + self.x4**2

    def astuple(self) -> tuple[float, float, float, float]:
        return (self.x1, self.x2, self.x3, self.x4)


O1 = State4(0.0, 0.0, 0.0, 1.0)
O2 = State4(0.0, 0.0, 0.0, -1.0)


def vector_field(s: State4, p: OdeParams) -> State4:
    """Velocity at s, all terms verbatim."""
    x1, x2, x3, x4 = s.x1, s.x2, s.x3, s.x4
    g = 1.0 - (x1 * x1 + x2 * x2 + x3 * x3 + x4 * x4)
    f1 = x1 * g - p.omega * x2 - p.alpha * x1 * x4 + p.beta * x1 * x4 * x4 \
        + p.tau2 * x1 * x3 * x4
    f2 = x2 * g + p.omega * x1 - p.alpha * x2 * x4 + p.beta * x2 * x4 * x4
    f3 = x3 * g + p.alpha * x3 * x4 + p.beta * x3 * x4 * x4 \
        + p.tau1 * x4 * x4 * x4 - p.tau2 * x1 * x1 * x4
    f4 = x4 * g - p.alpha * (x3 * x3 - x1 * x1 - x2 * x2) \
        - p.beta * x4 * (x1 * x1 + x2 * x2 + x3 * x3) - p.tau1 * x3 * x4 * x4
    return State4(f1, f2, f3, f4)


def ode_jacobian(s: State4, p: OdeParams) -> np.ndarray:
    """Analytic 4x4 derivative of the field at s (row i = gradient of the
    i-th component)."""
    x1, x2, x3, x4 = s.x1, s.x2, s.x3, s.x4
    al, be, om, t1, t2 = p.alpha, p.beta, p.omega, p.tau1, p.tau2
    g = 1.0 - (x1 * x1 + x2 * x2 + x3 * x3 + x4 * x4)
    return np.array(
        [
            [
                g - 2.0 * x1 * x1 - al * x4 + be * x4 * x4 + t2 * x3 * x4,
                -2.0 * x1 * x2 - om,
                -2.0 * x1 * x3 + t2 * x1 * x4,
                -2.0 * x1 * x4 - al * x1 + 2.0 * be * x1 * x4 + t2 * x1 * x3,
            ],
            [
                -2.0 * x2 * x1 + om,
                g - 2.0 * x2 * x2 - al * x4 + be * x4 * x4,
                -2.0 * x2 * x3,
                -2.0 * x2 * x4 - al * x2 + 2.0 * be * x2 * x4,
            ],
            [
                -2.0 * x3 * x1 - 2.0 * t2 * x1 * x4,
                -2.0 * x3 * x2,
                g - 2.0 * x3 * x3 + al * x4 + be * x4 * x4,
                -2.0 * x3 * x4 + al * x3 + 2.0 * be * x3 * x4
                + 3.0 * t1 * x4 * x4 - t2 * x1 * x1,
            ],
            [
                -2.0 * x4 * x1 + 2.0 * al * x1 - 2.0 * be * x4 * x1,
                -2.0 * x4 * x2 + 2.0 * al * x2 - 2.0 * be * x4 * x2,
                -2.0 * x4 * x3 - 2.0 * al * x3 - 2.0 * be * x4 * x3 - t1 * x4 * x4,
                g - 2.0 * x4 * x4 - be * (x1 * x1 + x2 * x2 + x3 * x3)
                - 2.0 * t1 * x3 * x4,
            ],
        ]
    )


def integrate(s0: State4, p: OdeParams, t_final: float, tol: float = 1e-9) -> State4:
    """Final state at t_final from s0, adaptive 5(4) with mixed
    absolute/relative error control at tol."""
    if not t_final > 0.0:
        raise ValueError(f"t_final must be positive, got {t_final}")
    if not tol > 0.0:
        raise ValueError(f"tol must be positive, got {tol}")
    status, t, z = kernels.ode_final(
        s0.astuple(), p.alpha, p.beta, p.omega, p.tau1, p.tau2, t_final, tol
    )
    if status != 0:
        raise IntegrationError(t)
    return State4(*z)


def sample(s0: State4, p: OdeParams, times, tol: float = 1e-9) -> np.ndarray:
    """States at the given increasing times (t >= 0), shape (len(times), 4)."""
    times = np.ascontiguousarray(times, dtype=np.float64)
    if times.ndim != 1 or times.size == 0:
        raise ValueError("times must be a nonempty 1D sequence")
    if np.any(np.diff(times) < 0.0) or times[0] < 0.0:
        raise ValueError("times must be nondecreasing and start at >= 0")
    out = np.zeros((times.size, 4))
    status, t = kernels.ode_sample(
        s0.astuple(), p.alpha, p.beta, p.omega, p.tau1, p.tau2, times, out, tol
    )
    if status != 0:
        raise IntegrationError(t)
    return out


@dataclass(frozen=True)
class EquilibriaReport:
    """Residuals and, at tau1 = 0, linearizations at the two poles.

    eig_dev is the worst deviation of the computed eigenvalues from the
    closed-form sets {-(alpha-beta) +- i*omega, alpha+beta, -2} at the
    north pole and the alpha+beta / -(alpha-beta) swap at the south one
    (the -2 is the radial direction).  constants carries the derived
    return-map data; None when the spiral rates are not hyperbolic in
    the weakly-attracting sense.
    """

    residual_o1: float
    residual_o2: float
    eigs_o1: tuple[complex, ...] | None
    eigs_o2: tuple[complex, ...] | None
    eig_dev: float | None
    constants: MapConstants | None


def _matched_deviation(eigs, expected) -> float:
    """Worst-case distance under the best pairing (greedy on 4 values)."""
    eigs = list(eigs)
    dev = 0.0
    for e in expected:
        j = min(range(len(eigs)), key=lambda i: abs(eigs[i] - e))
        dev = max(dev, abs(eigs[j] - e))
        eigs.pop(j)
    return dev


def equilibria_check(p: OdeParams) -> EquilibriaReport:
    fo1 = vector_field(O1, p)
    fo2 = vector_field(O2, p)
    r1 = math.sqrt(sum(v * v for v in fo1.astuple()))
    r2 = math.sqrt(sum(v * v for v in fo2.astuple()))
    if p.tau1 != 0.0:
        # the poles move off equilibrium; eigenvalues there mean nothing
        return EquilibriaReport(r1, r2, None, None, None, None)
    e1 = np.linalg.eigvals(ode_jacobian(O1, p))
    e2 = np.linalg.eigvals(ode_jacobian(O2, p))
    spiral = p.alpha - p.beta  # contraction rate of the focus pair
    rate = p.alpha + p.beta
    exp_o1 = [complex(-spiral, p.omega), complex(-spiral, -p.omega), rate, -2.0]
    exp_o2 = [complex(rate, p.omega), complex(rate, -p.omega), -spiral, -2.0]
    dev = max(_matched_deviation(e1, exp_o1), _matched_deviation(e2, exp_o2))
    try:
        constants = derive_constants(SaddleValues(spiral, rate, spiral, rate, p.omega))
    except ValueError:
        constants = None
    return EquilibriaReport(
        r1, r2, tuple(e1), tuple(e2), dev, constants
    )


@dataclass(frozen=True)
class SpectrumResult:
    """Benettin spectrum over the post-transient window.

    count_nonnegative applies the zero threshold: exponents above
    -ZERO_TOL count (those within the band are "zero", larger ones
    "positive").  div_avg is the independently integrated divergence
    average; the exponent sum must reproduce it.  min_pole_dist is the
    orbit's closest post-transient approach to the two polar equilibria.
    """

    exponents: tuple[float, float, float, float]
    count_nonnegative: int
    t_final: float
    renorm_dt: float
    transient: float
    div_avg: float
    min_pole_dist: float
    window: float
    flags: tuple[str, ...]


def _count_nonnegative(les) -> int:
    return sum(1 for le in les if le >= -ZERO_TOL)


def lyapunov_spectrum(
    s0: State4,
    p: OdeParams,
    t_final: float,
    renorm_dt: float = 0.5,
    transient: float | None = None,
    tol: float = 1e-9,
) -> SpectrumResult:
    """Four exponents from s0, renormalizing every renorm_dt.

    transient defaults to 10% of t_final.  An integration failure does
    not raise: the result carries whatever window was accumulated and an
    "underflow" flag (partial data is still data, e.g. for scan cells
    that fall onto the heteroclinic network).
    """
    if transient is None:
        transient = 0.1 * t_final
    if not t_final > transient >= 0.0:
        raise ValueError(f"need t_final > transient >= 0, got {t_final}, {transient}")
    if not renorm_dt > 0.0:
        raise ValueError(f"renorm_dt must be positive, got {renorm_dt}")
    status, t, les, div_avg, min_pole, window = kernels.ode_spectrum(
        s0.astuple(), p.alpha, p.beta, p.omega, p.tau1, p.tau2,
        t_final, renorm_dt, transient, tol, 0, 0.0, 0.0, 0.0, 0.0,
    )
    flags: list[str] = []
    if status != 0:
        flags.append(f"underflow:t={t:.6g}")
    if min_pole < NEAR_POLE:
        flags.append("near-network")
        flags.append("slow-convergence")
    count = _count_nonnegative(les) if window > 0.0 else 0
    return SpectrumResult(
        tuple(les), count, t, renorm_dt, transient, div_avg, min_pole, window,
        tuple(flags),
    )


def diagonal_test_spectrum(
    rates: tuple[float, float, float, float],
    t_final: float = 50.0,
    renorm_dt: float = 0.5,
    transient: float = 5.0,
    tol: float = 1e-9,
) -> tuple[float, float, float, float]:
    """Spectrum of the decoupled linear system dx_i/dt = rates[i]*x_i,
    started at (1,1,1,1).  Harness hook: the exact answer is rates
    sorted descending, which pins the whole Benettin pipeline."""
    status, t, les, div_avg, min_pole, window = kernels.ode_spectrum(
        (1.0, 1.0, 1.0, 1.0), 1.0, -0.5, 0.0, 0.0, 0.0,
        t_final, renorm_dt, transient, tol, 1, *rates,
    )
    if status != 0:
        raise IntegrationError(t)
    return les


# -- (tau1, tau2) scan --------------------------------------------------------


SCAN_IC = State4(0.1, 0.1, 0.0, -0.99)


class OdeCellClass(Enum):
    """Cell color: number of nonnegative exponents (0, 1, 2; larger
    counts reported verbatim)."""

    ZERO = 0
    ONE = 1
    TWO = 2
    THREE = 3
    FOUR = 4


@dataclass
class OdeScanGrid:
    """(tau1, tau2) classification grid, row-major like ScanGrid."""

    axes: tuple[ScanAxis, ScanAxis]
    base: OdeParams
    t_final: float
    renorm_dt: float
    transient: float
    tol: float
    classes: np.ndarray  # int, -1 for a failed cell
    exponents: np.ndarray  # (n0, n1, 4)
    flags: list[list[tuple[str, ...]]]

    @property
    def shape(self) -> tuple[int, int]:
        return (self.axes[0].count, self.axes[1].count)

    def cell_params(self, i: int, j: int) -> OdeParams:
        kw = {
            "alpha": self.base.alpha,
            "beta": self.base.beta,
            "omega": self.base.omega,
            "tau1": self.base.tau1,
            "tau2": self.base.tau2,
        }
        kw[self.axes[0].name] = float(self.axes[0].values()[i])
        kw[self.axes[1].name] = float(self.axes[1].values()[j])
        return OdeParams(**kw)


def ode_scan(
    axes: tuple[ScanAxis, ScanAxis],
    base: OdeParams,
    t_final: float = 1000.0,
    renorm_dt: float = 0.5,
    transient: float | None = None,
    tol: float = 1e-9,
    threads: int | None = None,
) -> OdeScanGrid:
    """Classify every (tau1, tau2) cell by its exponent count.

    Every cell integrates the fixed initial condition SCAN_IC; cells are
    independent, dispatched per row, and the arrays are preallocated, so
    results are bit-identical for any thread count.  Failures mark the
    cell class -1 with an "error:" flag and the scan continues.
    """
    a0, a1 = axes
    if {a0.name, a1.name} != {"tau1", "tau2"}:
        raise ValueError("flow scans sweep exactly tau1 and tau2")
    for ax in axes:
        if ax.lo < 0.0 or ax.hi > 1.0:
            raise ValueError(f"{ax.name} range must stay in [0, 1]")
    if transient is None:
        transient = 0.1 * t_final
    n0, n1 = a0.count, a1.count
    v0, v1 = a0.values(), a1.values()
    classes = np.full((n0, n1), -1, dtype=np.int64)
    exponents = np.full((n0, n1, 4), np.nan)
    flags: list[list[tuple[str, ...]]] = [[()] * n1 for _ in range(n0)]

    def fill_row(i: int) -> None:
        for j in range(n1):
            kw = {
                "alpha": base.alpha, "beta": base.beta, "omega": base.omega,
                "tau1": base.tau1, "tau2": base.tau2,
                a0.name: float(v0[i]), a1.name: float(v1[j]),
            }
            try:
                p = OdeParams(**kw)
                res = lyapunov_spectrum(SCAN_IC, p, t_final, renorm_dt, transient, tol)
            except Exception as exc:
                flags[i][j] = (f"error:{type(exc).__name__}",)
                continue
            if res.window > 0.0:
                classes[i, j] = res.count_nonnegative
                exponents[i, j] = res.exponents
            flags[i][j] = res.flags

    if threads is not None and threads <= 1:
        for i in range(n0):
            fill_row(i)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(fill_row, range(n0)))
    return OdeScanGrid(
        axes, base, t_final, renorm_dt, transient, tol, classes, exponents, flags
    )
