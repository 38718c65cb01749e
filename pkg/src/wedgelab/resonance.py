"""Fixed points, stability classes, and bifurcation structures of the map.

Everything here concerns (1, ell)-fixed points: points whose lift advances
by exactly 2*ell*pi in x under one application of the truncated return map.
Their existence region in (A, lam, omega) is a wedge bounded by the two
saddle-node surfaces A = wedge_center(omega) -+ lam, and inside it the
trace/determinant pair of the map Jacobian organizes saddle-node, Hopf,
period-doubling, and node-focus transitions, all of which are sampled here
by bisection on their defining residuals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .retmap import (
    TWO_PI,
    LiftPoint,
    MapConstants,
    Params,
    jacobian,
    return_map,
)

# Eigenvalue modulus within this band of 1 is treated as non-hyperbolic.
# Narrower than solver residuals would suggest: surface locators refine
# parameters before classification ever runs.
NONHYP_TOL = 1e-10

NEWTON_TOL = 1e-12
NEWTON_MAXIT = 50


class SolverError(RuntimeError):
    """A polish or continuation step failed to converge."""


class DegenerateCircle(ValueError):
    """lam = 0 with A = wedge_center(omega): the fixed-point equation is
    x-independent and a whole circle of fixed points appears."""


class PointClass(Enum):
    SINK_NODE = "SinkNode"
    SINK_FOCUS = "SinkFocus"
    SADDLE = "Saddle"
    SOURCE_NODE = "SourceNode"
    SOURCE_FOCUS = "SourceFocus"
    NON_HYPERBOLIC = "NonHyperbolic"


class Membership(Enum):
    INSIDE = "Inside"
    BOUNDARY = "Boundary"
    OUTSIDE = "Outside"


def wedge_center(omega: float, ell: int, c: MapConstants) -> float:
    """Center curve of the (1, ell) wedge: the offset A at which the forcing
    term must vanish for a fixed point, exp(-2*ell*pi/(K*omega)) -
    exp(-2*ell*delta*pi/(K*omega)).  Always in (0, peak]."""
    if not omega > 0.0:
        raise ValueError(f"omega must be positive, got {omega!r}")
    a = -2.0 * ell * math.pi / (c.twist * omega)
    return math.exp(a) - math.exp(c.delta * a)


def peak_omega(ell: int, c: MapConstants) -> float:
    """Unique maximizer of the wedge-center curve,
    2*ell*pi*(delta-1)/(K*log(delta))."""
    return 2.0 * ell * math.pi * (c.delta - 1.0) / (c.twist * math.log(c.delta))


def wedge_center_inverse(
    value: float, ell: int, c: MapConstants, rising: bool = True
) -> float:
    """omega with wedge_center(omega) = value, on the rising branch
    (omega < peak_omega) or the falling one.  value must lie in (0, peak)."""
    if not 0.0 < value < c.peak:
        raise ValueError(f"value must lie in (0, peak = {c.peak!r}), got {value!r}")
    w_star = peak_omega(ell, c)
    if rising:
        lo, hi = w_star, w_star
        while wedge_center(lo, ell, c) > value:
            lo *= 0.5
    else:
        lo, hi = w_star, w_star
        while wedge_center(hi, ell, c) > value:
            hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        inside = wedge_center(mid, ell, c) > value
        if rising == inside:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def wedge_membership(mu: Params, ell: int, c: MapConstants) -> Membership:
    """Inside iff |wedge_center(omega) - A| < lam, with a 1e-10 band for
    Boundary."""
    gap = abs(wedge_center(mu.omega, ell, c) - mu.A)
    if abs(gap - mu.lam) <= 1e-10:
        return Membership.BOUNDARY
    return Membership.INSIDE if gap < mu.lam else Membership.OUTSIDE


def classify(trace: float, det: float) -> PointClass:
    """Stability class of a 2x2 Jacobian from its trace and determinant.

    The discriminant trace**2 - 4*det decides node (real pair) versus focus
    (conjugate pair); eigenvalue moduli against the unit circle decide sink,
    saddle, or source.  Moduli, not signs: a real pair {0.5, -0.5} is a
    SinkNode.  Any modulus within NONHYP_TOL of 1 wins NonHyperbolic.
    """
    disc = trace * trace - 4.0 * det
    if disc < 0.0:
        modulus = math.sqrt(det)  # conjugate pair: |eig|^2 = det > 0 here
        if abs(modulus - 1.0) <= NONHYP_TOL:
            return PointClass.NON_HYPERBOLIC
        return PointClass.SINK_FOCUS if modulus < 1.0 else PointClass.SOURCE_FOCUS
    root = math.sqrt(disc)
    m1 = abs(0.5 * (trace - root))
    m2 = abs(0.5 * (trace + root))
    if abs(m1 - 1.0) <= NONHYP_TOL or abs(m2 - 1.0) <= NONHYP_TOL:
        return PointClass.NON_HYPERBOLIC
    inside = (m1 < 1.0) + (m2 < 1.0)
    if inside == 2:
        return PointClass.SINK_NODE
    if inside == 0:
        return PointClass.SOURCE_NODE
    return PointClass.SADDLE


@dataclass(frozen=True)
class FixedPointRecord:
    """A (1, ell)-fixed point of the truncated map with its linearization."""

    ell: int
    x: float
    y: float
    s: float
    trace: float
    det: float
    eigenvalues: tuple[complex, complex]
    cls: PointClass
    residual: float
    newton_iters: int

    @property
    def point(self) -> LiftPoint:
        return LiftPoint(self.x, self.y)


def _lift_residual(
    x: float, y: float, mu: Params, c: MapConstants, ell: int
) -> tuple[float, float]:
    p = return_map(LiftPoint(x, y), mu, c)
    return p.x - x - TWO_PI * ell, p.y - y


def polish_fixed_point(
    x0: float,
    y0: float,
    mu: Params,
    c: MapConstants,
    ell: int,
    tol: float = NEWTON_TOL,
    maxit: int = NEWTON_MAXIT,
) -> tuple[float, float, float, int]:
    """2-variable Newton for a (1, ell)-fixed point on the lift.

    Returns (x, y, residual, iterations).  Raises :class:`SolverError` when
    the residual fails to reach tol within maxit iterations; a failure is
    never silently accepted.
    """
    x, y = x0, y0
    for it in range(1, maxit + 1):
        r1, r2 = _lift_residual(x, y, mu, c, ell)
        res = max(abs(r1), abs(r2))
        if res < tol:
            return x, y, res, it - 1
        jac = jacobian(LiftPoint(x, y), mu, c)
        # derivative of the residual is J - I
        h11, h12 = jac.a11 - 1.0, jac.a12
        h21, h22 = jac.a21, jac.a22 - 1.0
        den = h11 * h22 - h12 * h21
        if den == 0.0:
            raise SolverError(f"singular Newton system at ({x!r}, {y!r})")
        x -= (r1 * h22 - r2 * h12) / den
        y -= (r2 * h11 - r1 * h21) / den
    raise SolverError(
        f"fixed-point Newton stalled at residual {res!r} after {maxit} iterations "
        f"(mu = {mu!r}, ell = {ell})"
    )


def _record_at(x: float, y: float, mu: Params, c: MapConstants, ell: int,
               residual: float, iters: int) -> FixedPointRecord:
    xw = x % TWO_PI
    jac = jacobian(LiftPoint(xw, y), mu, c)
    tr, det = jac.trace, jac.det
    return FixedPointRecord(
        ell=ell,
        x=xw,
        y=y,
        s=y + mu.A + mu.lam * math.sin(xw),
        trace=tr,
        det=det,
        eigenvalues=jac.eigenvalues,
        cls=classify(tr, det),
        residual=residual,
        newton_iters=iters,
    )


def fixed_points(mu: Params, c: MapConstants, ell: int) -> list[FixedPointRecord]:
    """All (1, ell)-fixed points at mu, polished and classified.

    Seeds come from the closed form: s = exp(-2*ell*pi/(K*omega)) forces
    sin(x) = (wedge_center(omega) - A)/lam, giving two branches inside the
    wedge, one tangent point on its boundary (|ratio| = 1 within 1e-12),
    and none outside.  Each seed is then polished by Newton to residual
    1e-12.

    Raises
    ------
    DegenerateCircle
        When lam = 0 and A equals wedge_center(omega): every x solves the
        fixed-point equation.
    SolverError
        When a Newton polish fails (propagated from polish_fixed_point).
    """
    center = wedge_center(mu.omega, ell, c)
    y_star = math.exp(-2.0 * ell * c.delta * math.pi / (c.twist * mu.omega))
    if mu.lam == 0.0:
        if abs(mu.A - center) <= 1e-14:
            raise DegenerateCircle(
                f"degenerate circle of fixed points: lam = 0 with "
                f"A = wedge_center = {center!r}"
            )
        return []
    q = (center - mu.A) / mu.lam
    if abs(abs(q) - 1.0) <= 1e-12:
        x0 = 0.5 * math.pi if q > 0.0 else 1.5 * math.pi
        # tangent point: Newton's system is singular there, keep the seed
        r1, r2 = _lift_residual(x0, y_star, mu, c, ell)
        return [_record_at(x0, y_star, mu, c, ell, max(abs(r1), abs(r2)), 0)]
    if abs(q) > 1.0:
        return []
    records = []
    for x0 in (math.asin(q), math.pi - math.asin(q)):
        x, y, res, iters = polish_fixed_point(x0, y_star, mu, c, ell)
        records.append(_record_at(x, y, mu, c, ell, res, iters))
    return records


# -- double-unit-eigenvalue (BT) points --------------------------------------


class BTBranch(Enum):
    """The two tangency branches, named by the angle of the fixed point."""

    PI_HALF = "x=pi/2"
    THREE_PI_HALF = "x=3pi/2"

    @property
    def angle(self) -> float:
        return 0.5 * math.pi if self is BTBranch.PI_HALF else 1.5 * math.pi

    @property
    def wave(self) -> float:
        """sin at the branch angle: +1 or -1."""
        return 1.0 if self is BTBranch.PI_HALF else -1.0


@dataclass(frozen=True)
class BTPoint:
    """A codimension-2 point where a fixed point has double eigenvalue 1.

    Sits at the top of the wedge: omega is the maximizer of the center
    curve and A = peak -+ lam depending on the branch.  coeffC is the
    second-coordinate scale of the normal-form frame; a20, b11, b20 the
    measured quadratic coefficients of the transformed map (conventions:
    x'' carries a20/2 x^2, y'' carries b20/2 x^2 and b11 xy).  cf_a20 and
    cf_b are the closed-form curvature values, kept separate because they
    come from a reduced frame that the finite differences of the literal
    scaling cannot reproduce (see bt_nondegeneracy).
    """

    ell: int
    branch: BTBranch
    A: float
    lam: float
    omega: float
    x: float
    y: float
    coeffC: float = math.nan
    a20: float = math.nan
    b11: float = math.nan
    b20: float = math.nan
    nondegenerate: bool = False
    cf_a20: float = math.nan
    cf_b: float = math.nan
    noise_a20: float = math.nan
    noise_b11: float = math.nan
    noise_b20: float = math.nan
    stable_circle: bool = False
    inconclusive: tuple[str, ...] = ()
    flags: tuple[str, ...] = ()


def scale_coefficient(ell: int, c: MapConstants) -> float:
    """Second-coordinate scale C of the normal-form frame,
    -2*K*ell*pi*(delta-1)/(delta**(delta/(1-delta)) * log(delta))."""
    d = c.delta
    return (
        -2.0 * c.twist * ell * math.pi * (d - 1.0)
        / (d ** (d / (1.0 - d)) * math.log(d))
    )


def _bt_location(lam: float, ell: int, c: MapConstants, branch: BTBranch):
    omega = peak_omega(ell, c)
    A = c.peak - branch.wave * lam
    d = c.delta
    s_star = d ** (1.0 / (1.0 - d))  # independent of ell and K at the peak
    y_star = d ** (d / (1.0 - d))
    return omega, A, s_star, y_star


def bt_points(lam: float, ell: int, c: MapConstants) -> tuple[BTPoint, BTPoint]:
    """The two double-unit-eigenvalue points of the (1, ell) wedge at
    amplitude lam, with quadratic coefficients filled in.

    The first element is the branch at x = pi/2 (A = peak - lam), the
    second x = 3pi/2 (A = peak + lam).  When lam >= peak the first branch
    would need A < 0; that point is returned with flag "offset-negative"
    and no coefficients.  At lam = 0 the two locations coincide and every
    quadratic coefficient vanishes, so nondegenerate stays False.
    """
    if lam < 0.0:
        raise ValueError(f"lam must be >= 0, got {lam!r}")
    out = []
    for branch in (BTBranch.PI_HALF, BTBranch.THREE_PI_HALF):
        omega, A, s_star, y_star = _bt_location(lam, ell, c, branch)
        bt = BTPoint(
            ell=ell, branch=branch, A=A, lam=lam, omega=omega,
            x=branch.angle, y=y_star,
        )
        if A < 0.0:
            bt = replace(bt, flags=("offset-negative",))
        else:
            bt = bt_nondegeneracy(bt, c)
        out.append(bt)
    return out[0], out[1]


def bt_nondegeneracy(bt: BTPoint, c: MapConstants, step: float = 1e-4) -> BTPoint:
    """Quadratic coefficients of the map in the normal-form frame at bt.

    The frame translates the fixed point (on the lift) to the origin and
    rescales the second coordinate by C = scale_coefficient.  a20, b20, b11
    are extracted by central finite differences with the given step; the
    noise floor of each is estimated by halving the step and differencing.

    The analytic mixed partial of the second component is proportional to
    cos(x) and hence vanishes exactly on both branches, and no diagonal
    rescaling changes that: the measured b11 sits at the noise floor, while
    the closed-form curvature table (cf_a20, cf_b, with equal b-entries by
    construction) lives in a reduced frame this scaling does not reach.
    Both sets are reported; nondegenerate and stable_circle are judged on
    the measured set.

    nondegenerate demands the branch sign pattern (b20 < 0 and
    a20 + b11 - b20 > 0 at x = 3pi/2; mirrored at x = pi/2); stable_circle
    is the product condition b20*(a20 + b11 - b20) < 0, branch independent.
    Coefficients below 10x their noise floor are listed in
    ``inconclusive``; if all three are, nondegenerate is False with flag
    "inconclusive".
    """
    mu = Params(A=bt.A, lam=bt.lam, omega=bt.omega)
    shift = TWO_PI * bt.ell
    C = scale_coefficient(bt.ell, c)
    x0, y0 = bt.branch.angle, bt.y

    def transformed(u: float, v: float) -> tuple[float, float]:
        img = return_map(LiftPoint(x0 + u, y0 + v / C), mu, c)
        return img.x - x0 - shift, C * (img.y - y0)

    def coeffs(h: float) -> tuple[float, float, float]:
        tp = transformed(h, 0.0)
        tm = transformed(-h, 0.0)
        a20 = (tp[0] + tm[0]) / (h * h)
        b20 = (tp[1] + tm[1]) / (h * h)
        tpp = transformed(h, h)[1]
        tpm = transformed(h, -h)[1]
        tmp = transformed(-h, h)[1]
        tmm = transformed(-h, -h)[1]
        b11 = (tpp - tpm - tmp + tmm) / (4.0 * h * h)
        return a20, b20, b11

    a20, b20, b11 = coeffs(step)
    a20h, b20h, b11h = coeffs(0.5 * step)
    noise = (abs(a20 - a20h), abs(b20 - b20h), abs(b11 - b11h))

    inconclusive = tuple(
        name
        for name, value, nz in zip(("a20", "b20", "b11"), (a20, b20, b11), noise)
        if abs(value) < 10.0 * nz or value == 0.0
    )
    combo = a20 + b11 - b20
    if bt.branch is BTBranch.THREE_PI_HALF:
        signs_ok = b20 < 0.0 and combo > 0.0
    else:
        signs_ok = b20 > 0.0 and combo < 0.0
    all_flat = len(inconclusive) == 3
    flags = bt.flags + (("inconclusive",) if all_flat else ())

    # Closed-form curvature table, edge = A + lam on the x = 3pi/2 branch;
    # the mirror at x = pi/2 swaps the edge to A - lam and flips both signs.
    if bt.branch is BTBranch.THREE_PI_HALF:
        edge, sign = bt.A + bt.lam, 1.0
    else:
        edge, sign = bt.A - bt.lam, -1.0
    if edge > 0.0:
        cf_a20 = sign * (-C) * c.twist * bt.omega * bt.lam / (edge * edge)
        cf_b = sign * edge ** (c.delta - 2.0) * bt.lam * c.delta * (1.0 - c.delta)
    else:
        cf_a20 = cf_b = math.nan

    return replace(
        bt,
        coeffC=C,
        a20=a20,
        b11=b11,
        b20=b20,
        nondegenerate=signs_ok and not all_flat,
        cf_a20=cf_a20,
        cf_b=cf_b,
        noise_a20=noise[0],
        noise_b20=noise[1],
        noise_b11=noise[2],
        stable_circle=b20 * combo < 0.0,
        inconclusive=inconclusive,
        flags=flags,
    )


@dataclass(frozen=True)
class ContinuedBT:
    """Result of the free Newton search for a double-unit-eigenvalue point."""

    x: float
    y: float
    A: float
    omega: float
    residual: float
    iters: int


def bt_locate(
    lam: float,
    ell: int,
    c: MapConstants,
    branch: BTBranch,
    x0: float | None = None,
    y0: float | None = None,
    A0: float | None = None,
    omega0: float | None = None,
    tol: float = 1e-10,
    maxit: int = 50,
) -> ContinuedBT:
    """Locate a double-unit-eigenvalue point by Newton on (x, y, A, omega).

    Solves the 4-d system {fixed point on the lift, trace = 2, det = 1}
    without using the closed-form location: seeds default to deliberately
    rough offsets from it, and the residual Jacobian comes from central
    finite differences.  Raises :class:`SolverError` on stall.
    """
    omega_c, A_c, _, y_c = _bt_location(lam, ell, c, branch)
    x = branch.angle * 1.03 if x0 is None else x0
    w = omega_c * 0.9 if omega0 is None else omega0
    A = max(A_c, 1e-3) * 1.05 if A0 is None else A0
    y = math.exp(-2.0 * ell * c.delta * math.pi / (c.twist * w)) if y0 is None else y0

    def residuals(v: np.ndarray) -> np.ndarray:
        xx, yy, aa, ww = v
        mu = Params(A=max(aa, 0.0), lam=lam, omega=max(ww, 1e-8))
        img = return_map(LiftPoint(xx, yy), mu, c)
        jac = jacobian(LiftPoint(xx, yy), mu, c)
        return np.array(
            [
                img.x - xx - TWO_PI * ell,
                img.y - yy,
                jac.trace - 2.0,
                jac.det - 1.0,
            ]
        )

    v = np.array([x, y, A, w], dtype=float)
    for it in range(1, maxit + 1):
        r = residuals(v)
        res = float(np.max(np.abs(r)))
        if res < tol:
            return ContinuedBT(
                x=float(v[0]), y=float(v[1]), A=float(v[2]), omega=float(v[3]),
                residual=res, iters=it - 1,
            )
        jac = np.empty((4, 4))
        for k in range(4):
            h = 1e-7 * max(1.0, abs(v[k]))
            vp, vm = v.copy(), v.copy()
            vp[k] += h
            vm[k] -= h
            jac[:, k] = (residuals(vp) - residuals(vm)) / (2.0 * h)
        try:
            dv = np.linalg.solve(jac, r)
        except np.linalg.LinAlgError as exc:
            raise SolverError(f"singular continuation system at {v!r}") from exc
        v = v - dv
    raise SolverError(
        f"double-unit-eigenvalue Newton stalled at residual {res!r} "
        f"(lam = {lam!r}, ell = {ell}, branch = {branch.value})"
    )


# -- bifurcation surface sampling --------------------------------------------


class SurfaceLabel(Enum):
    SN1 = "SN1"  # saddle-node sheet A = center - lam (tangency at x = pi/2)
    SN2 = "SN2"  # saddle-node sheet A = center + lam (tangency at x = 3pi/2)
    HOPF = "HOPF"  # det = 1 with |trace| < 2
    PD = "PD"  # 1 + trace + det = 0
    NF = "NF"  # trace^2 = 4 det, node-focus transition


@dataclass(frozen=True)
class SurfaceSample:
    """One bisection-located point of a bifurcation surface."""

    label: SurfaceLabel
    A: float
    lam: float
    omega: float
    branch: str
    residual: float
    ell: int


def _principal_trace_det(A, lam, omega, ell, c):
    """trace and det on the cos(x) > 0 fixed-point branch, numpy-broadcast.

    Outside the wedge the square root is clamped to zero, extending the
    residuals continuously; validity is rechecked before emitting samples.
    """
    a = -2.0 * ell * np.pi / (c.twist * omega)
    s = np.exp(a)
    center = s - np.exp(c.delta * a)
    det = c.delta * s ** (c.delta - 1.0)
    gap2 = lam * lam - (center - A) ** 2
    root = np.sqrt(np.maximum(gap2, 0.0))
    trace = 1.0 + det - c.twist * omega * root / s
    return trace, det, gap2


def _bisect_edges(f, lo, hi, maxit: int = 80):
    """Vectorized bisection of f between bracketing arrays lo < hi."""
    flo = f(lo)
    for _ in range(maxit):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        take_lo = (flo <= 0.0) == (fm <= 0.0)
        lo = np.where(take_lo, mid, lo)
        flo = np.where(take_lo, fm, flo)
        hi = np.where(take_lo, hi, mid)
        if np.all(hi - lo < 1e-13 * np.maximum(1.0, np.abs(hi))):
            break
    return 0.5 * (lo + hi)


def sample_surfaces(
    region: tuple[tuple[float, float], tuple[float, float], tuple[float, float]],
    ell: int,
    c: MapConstants,
    grid: tuple[int, int, int],
) -> list[SurfaceSample]:
    """Bisection samples of all five surface families in a parameter box.

    region is ((A_lo, A_hi), (lam_lo, lam_hi), (omega_lo, omega_hi)) and
    grid the node counts per axis, each >= 2.  Along every grid edge, each
    family's defining residual is checked for a sign change and bisected;
    emitted samples satisfy |residual| < 1e-8.  An empty result just means
    the box misses every surface.

    Residuals, at a (1, ell)-fixed point: the saddle-node sheets are
    center(omega) - A -+ lam; HOPF is det - 1 restricted to |trace| < 2;
    PD is 1 + trace + det and NF is trace^2 - 4*det, both on the
    cos(x) > 0 branch (on the other branch the trace is too large for
    either to vanish).
    """
    (a_lo, a_hi), (l_lo, l_hi), (w_lo, w_hi) = region
    n_a, n_l, n_w = grid
    if min(n_a, n_l, n_w) < 2:
        raise ValueError(f"grid must be >= 2 per axis, got {grid!r}")
    axes = (
        np.linspace(a_lo, a_hi, n_a),
        np.linspace(l_lo, l_hi, n_l),
        np.linspace(max(w_lo, 1e-12), w_hi, n_w),
    )
    A = axes[0][:, None, None]
    L = axes[1][None, :, None]
    W = axes[2][None, None, :]

    def center_of(w):
        a = -2.0 * ell * np.pi / (c.twist * w)
        return np.exp(a) - np.exp(c.delta * a)

    samples: list[SurfaceSample] = []

    def emit(label, branch, residual_of, valid_of=None):
        shape = (n_a, n_l, n_w)
        res = np.broadcast_to(np.asarray(residual_of(A, L, W), float), shape)
        valid = (
            np.ones(shape, bool)
            if valid_of is None
            else np.broadcast_to(np.asarray(valid_of(A, L, W), bool), shape)
        )
        for axis in range(3):
            sl_lo = [slice(None)] * 3
            sl_hi = [slice(None)] * 3
            sl_lo[axis] = slice(None, -1)
            sl_hi[axis] = slice(1, None)
            r0, r1 = res[tuple(sl_lo)], res[tuple(sl_hi)]
            ok = (
                valid[tuple(sl_lo)]
                & valid[tuple(sl_hi)]
                & np.isfinite(r0)
                & np.isfinite(r1)
                & ((r0 <= 0.0) != (r1 <= 0.0))
            )
            idx = np.nonzero(ok)
            if idx[0].size == 0:
                continue
            coords = [np.broadcast_to(g, res.shape)[idx] for g in (A, L, W)]
            lo = coords[axis]
            hi_idx = tuple(
                i + 1 if ax == axis else i for ax, i in enumerate(idx)
            )
            hi = np.broadcast_to((A, L, W)[axis], res.shape)[hi_idx]

            def f(t, _axis=axis, _coords=coords):
                args = [cc.copy() for cc in _coords]
                args[_axis] = t
                return residual_of(*args)

            t_hit = _bisect_edges(f, lo.astype(float), hi.astype(float))
            args = [cc.copy() for cc in coords]
            args[axis] = t_hit
            final = residual_of(*args)
            keep = np.abs(final) < 1e-8
            if valid_of is not None:
                keep &= valid_of(*args)
            for aa, ll, ww, rr in zip(
                args[0][keep], args[1][keep], args[2][keep], final[keep]
            ):
                samples.append(
                    SurfaceSample(
                        label=label, A=float(aa), lam=float(ll), omega=float(ww),
                        branch=branch, residual=float(rr), ell=ell,
                    )
                )

    emit(SurfaceLabel.SN1, "x=pi/2", lambda a, l, w: center_of(w) - a - l)
    emit(SurfaceLabel.SN2, "x=3pi/2", lambda a, l, w: center_of(w) - a + l)

    def wedge_valid(a, l, w):
        return np.abs(center_of(w) - a) <= l

    def hopf_res(a, l, w):
        _, det, _ = _principal_trace_det(a, l, w, ell, c)
        return det - 1.0

    def hopf_valid(a, l, w):
        trace, _, gap2 = _principal_trace_det(a, l, w, ell, c)
        return (gap2 >= 0.0) & (np.abs(trace) < 2.0)

    emit(SurfaceLabel.HOPF, "principal", hopf_res, hopf_valid)

    def pd_res(a, l, w):
        trace, det, _ = _principal_trace_det(a, l, w, ell, c)
        return 1.0 + trace + det

    def nf_res(a, l, w):
        trace, det, _ = _principal_trace_det(a, l, w, ell, c)
        return trace * trace - 4.0 * det

    emit(SurfaceLabel.PD, "principal", pd_res, wedge_valid)
    emit(SurfaceLabel.NF, "principal", nf_res, wedge_valid)
    return samples
