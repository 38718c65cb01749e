"""Orbit-level diagnostics for the truncated return map.

Iteration statistics, rotation numbers, attractor classification by
Lyapunov signature, one-dimensional invariant-manifold traces of saddle
fixed points, and deterministic two-parameter scans.  All hot loops run
in the kernel backend; everything here is bookkeeping around it.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import kernels
from .resonance import FixedPointRecord, PointClass
from .retmap import (
    TWO_PI,
    DomainError,
    LiftPoint,
    MapConstants,
    Params,
    inverse_map,
    jacobian,
    return_map,
)


class Outcome(Enum):
    CONVERGED = "Converged"
    BOUNDED = "Bounded"
    ESCAPED = "Escaped"


_OUTCOMES = {0: Outcome.BOUNDED, 1: Outcome.CONVERGED, 2: Outcome.ESCAPED, 3: Outcome.ESCAPED}


class EscapedOrbit(RuntimeError):
    """Raised when an orbit left the domain but the caller needed it whole."""

    def __init__(self, index: int):
        super().__init__(f"orbit escaped the domain at iterate {index}")
        self.index = index


@dataclass(frozen=True)
class OrbitResult:
    """Outcome of iterating one seed.

    `drift` is the lift displacement per completed iterate; `exponents`
    are the per-iterate Lyapunov exponents (natural log, descending)
    measured over the post-transient window, nan when the window is
    empty.  `escape_index` is the orbit index of the first point
    violating the domain, None for surviving orbits.
    """

    final: LiftPoint
    drift: float
    exponents: tuple[float, float]
    outcome: Outcome
    escape_index: int | None
    completed: int
    window: int
    last_step: float


def iterate(
    p0: LiftPoint,
    mu: Params,
    c: MapConstants,
    n: int,
    transient: int,
    conv_tol: float = 1e-13,
) -> OrbitResult:
    """Apply the return map n times from p0 on the lift.

    Escape is data: orbits that violate the domain after the first point
    return Outcome.ESCAPED with the offending index.  Only a violation
    at p0 itself raises, since then there is no orbit at all.
    """
    if not n > transient >= 0:
        raise ValueError(f"need n > transient >= 0, got n={n}, transient={transient}")
    status, completed, esc, xr, y, winding, le1, le2, window, dd = kernels.map_orbit(
        p0.x, p0.y, mu.A, mu.lam, mu.omega, c.twist, c.delta, n, transient, conv_tol
    )
    if esc == 0:
        return_map(p0, mu, c)  # raises the precise domain error
        raise DomainError("domain violation at p0")  # pragma: no cover
    final = LiftPoint(xr + TWO_PI * (winding + math.floor(p0.x / TWO_PI)), y)
    drift = (final.x - p0.x) / completed if completed else math.nan
    return OrbitResult(
        final=final,
        drift=drift,
        exponents=(le1, le2),
        outcome=_OUTCOMES[status],
        escape_index=esc if esc >= 0 else None,
        completed=completed,
        window=window,
        last_step=dd,
    )


def rotation_number(p0: LiftPoint, mu: Params, c: MapConstants, n: int) -> float:
    """Average lift displacement in turns, (x_n - x_0)/(2*pi*n).

    The orbit must survive all n iterates; EscapedOrbit otherwise.
    """
    if n <= 0:
        raise ValueError(f"need n > 0, got {n}")
    r = iterate(p0, mu, c, n, 0)
    if r.outcome is Outcome.ESCAPED:
        raise EscapedOrbit(r.escape_index)
    return (r.final.x - p0.x) / (TWO_PI * n)


class AttractorClass(Enum):
    PERIODIC_SINK = "PeriodicSink"
    INVARIANT_CIRCLE = "InvariantCircle"
    CHAOTIC = "Chaotic"
    ESCAPED = "Escaped"


@dataclass(frozen=True)
class OrbitSettings:
    """Knobs shared by classify_attractor and scan."""

    n: int = 2000
    transient: int = 500
    conv_tol: float = 1e-13
    threshold: float = 5e-4  # |le| below this counts as numerically zero
    seed_count: int = 8


def default_seeds(
    mu: Params, c: MapConstants, ell: int = 1, count: int = 8
) -> list[LiftPoint]:
    """Seeds equally spaced in angle at the expected attractor height
    y = exp(-2*ell*pi*delta/(K*omega))."""
    y = math.exp(-2.0 * ell * math.pi * c.delta / (c.twist * mu.omega))
    return [LiftPoint(TWO_PI * i / count, y) for i in range(count)]


@dataclass(frozen=True)
class CellRecord:
    """One classified cell: representative-seed exponents and rotation."""

    cls: AttractorClass
    le1: float
    le2: float
    rotation: float
    flags: tuple[str, ...]


def _measure_cell(
    mu: Params, c: MapConstants, seeds: list[LiftPoint], settings: OrbitSettings
) -> CellRecord:
    best: OrbitResult | None = None
    escapes = 0
    for p0 in seeds:
        try:
            r = iterate(p0, mu, c, settings.n, settings.transient, settings.conv_tol)
        except DomainError:
            escapes += 1
            continue
        if r.outcome is Outcome.ESCAPED:
            escapes += 1
            continue
        if best is None or r.exponents[0] > best.exponents[0]:
            best = r
    flags = [] if escapes == 0 else [f"escapes:{escapes}/{len(seeds)}"]
    if best is None:
        return CellRecord(AttractorClass.ESCAPED, math.nan, math.nan, math.nan, tuple(flags))
    le1, le2 = best.exponents
    thr = settings.threshold
    if le1 > thr:
        cls = AttractorClass.CHAOTIC
    elif le1 < -thr:
        cls = AttractorClass.PERIODIC_SINK
    else:
        cls = AttractorClass.INVARIANT_CIRCLE
        if le2 >= -thr:
            # both exponents numerically zero: no contraction transverse to
            # the putative circle, so the signature is only suggestive
            flags.append("flat-pair")
    rotation = (best.final.x - seeds[0].x) / (TWO_PI * best.completed)
    return CellRecord(cls, le1, le2, rotation, tuple(flags))


def classify_attractor(
    mu: Params,
    c: MapConstants,
    seeds: list[LiftPoint],
    settings: OrbitSettings = OrbitSettings(),
) -> AttractorClass:
    """Class of the attractor seen from the given seeds.

    The call measures every seed, keeps the largest leading exponent
    among survivors, and applies the zero-threshold signature; Escaped
    only when every seed leaves the domain.
    """
    if not seeds:
        raise ValueError("need at least one seed")
    return _measure_cell(mu, c, seeds, settings).cls


# -- parameter scans ----------------------------------------------------------


_PARAM_NAMES = ("A", "lam", "omega")


@dataclass(frozen=True)
class ScanAxis:
    """A swept parameter: name, range, sample count.  Which names are
    allowed depends on the scan (map scans sweep A/lam/omega, flow scans
    tau1/tau2)."""

    name: str
    lo: float
    hi: float
    count: int

    def __post_init__(self):
        if self.count < 2:
            raise ValueError("axis needs at least 2 samples")
        if not self.hi > self.lo:
            raise ValueError("need hi > lo")

    def values(self) -> np.ndarray:
        step = (self.hi - self.lo) / (self.count - 1)
        return self.lo + step * np.arange(self.count)


@dataclass
class ScanGrid:
    """Result of a two-parameter scan, cells indexed row-major (axis0, axis1).

    `classes` holds AttractorClass values (None for a cell whose worker
    failed), exponents/rotation the representative-seed measurements.
    """

    axes: tuple[ScanAxis, ScanAxis]
    fixed: dict[str, float]
    ell: int
    settings: OrbitSettings
    classes: list[list[AttractorClass | None]]
    le1: np.ndarray
    le2: np.ndarray
    rotation: np.ndarray
    flags: list[list[tuple[str, ...]]]

    @property
    def shape(self) -> tuple[int, int]:
        return (self.axes[0].count, self.axes[1].count)

    def cell_params(self, i: int, j: int) -> Params:
        kw = dict(self.fixed)
        kw[self.axes[0].name] = float(self.axes[0].values()[i])
        kw[self.axes[1].name] = float(self.axes[1].values()[j])
        return Params(**kw)


def scan(
    axes: tuple[ScanAxis, ScanAxis],
    fixed: dict[str, float],
    c: MapConstants,
    settings: OrbitSettings = OrbitSettings(),
    ell: int = 1,
    threads: int | None = None,
) -> ScanGrid:
    """Classify every cell of a 2-parameter grid.

    Cells are independent; rows are dispatched to a thread pool and each
    worker writes only its own row, so the result is bit-identical for
    any thread count.  Worker exceptions are recorded in the cell flags
    and leave the class None, never aborting the scan.
    """
    a0, a1 = axes
    given = {a0.name, a1.name} | set(fixed)
    if given != set(_PARAM_NAMES) or a0.name == a1.name:
        raise ValueError(
            f"axes plus fixed must cover {_PARAM_NAMES} exactly, got {sorted(given)}"
        )
    n0, n1 = a0.count, a1.count
    v0, v1 = a0.values(), a1.values()
    classes: list[list[AttractorClass | None]] = [[None] * n1 for _ in range(n0)]
    le1 = np.full((n0, n1), np.nan)
    le2 = np.full((n0, n1), np.nan)
    rotation = np.full((n0, n1), np.nan)
    flags: list[list[tuple[str, ...]]] = [[()] * n1 for _ in range(n0)]

    def fill_row(i: int) -> None:
        for j in range(n1):
            kw = dict(fixed)
            kw[a0.name] = float(v0[i])
            kw[a1.name] = float(v1[j])
            try:
                mu = Params(**kw)
                seeds = default_seeds(mu, c, ell, settings.seed_count)
                rec = _measure_cell(mu, c, seeds, settings)
            except Exception as exc:  # per-cell failure is data
                flags[i][j] = (f"error:{type(exc).__name__}",)
                continue
            classes[i][j] = rec.cls
            le1[i, j] = rec.le1
            le2[i, j] = rec.le2
            rotation[i, j] = rec.rotation
            flags[i][j] = rec.flags

    if threads is not None and threads <= 1:
        for i in range(n0):
            fill_row(i)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(fill_row, range(n0)))
    return ScanGrid(axes, dict(fixed), ell, settings, classes, le1, le2, rotation, flags)


# -- invariant manifolds ------------------------------------------------------


class Side(Enum):
    UNSTABLE = "Unstable"
    STABLE = "Stable"


@dataclass(frozen=True)
class ManifoldTrace:
    """Polyline along one branch of a saddle manifold, in lift coordinates."""

    saddle: FixedPointRecord
    side: Side
    points: np.ndarray  # (N, 2)
    arclength: float
    flags: tuple[str, ...]


def _saddle_direction(fp: FixedPointRecord, mu: Params, c: MapConstants, side: Side):
    """Unit eigenvector and eigenvalue of the Jacobian for the given side."""
    J = jacobian(fp.point, mu, c)
    m = np.array([[J.a11, J.a12], [J.a21, J.a22]])
    w, vecs = np.linalg.eig(m)
    if np.iscomplexobj(w) and np.any(np.abs(w.imag) > 1e-12):
        raise ValueError("fixed point has complex eigenvalues, no 1D manifolds")
    w = w.real
    vecs = vecs.real
    k = int(np.argmax(np.abs(w))) if side is Side.UNSTABLE else int(np.argmin(np.abs(w)))
    lam = float(w[k])
    v = vecs[:, k]
    v = v / math.hypot(v[0], v[1])
    if abs(lam) <= 1.0 and side is Side.UNSTABLE:
        raise ValueError(f"no expanding eigenvalue at the fixed point ({lam})")
    if abs(lam) >= 1.0 and side is Side.STABLE:
        raise ValueError(f"no contracting eigenvalue at the fixed point ({lam})")
    return v, lam


def manifold_trace(
    fp: FixedPointRecord,
    mu: Params,
    c: MapConstants,
    side: Side,
    steps: int = 6,
    step_cap: float = 0.05,
    eps: float = 1e-6,
    orientation: int = 1,
    max_points: int = 20000,
) -> ManifoldTrace:
    """Grow one branch of a saddle manifold by iterating a fundamental
    segment.

    Images are taken under the cylinder map, the lift return map
    recentered by the 2*pi*ell drift of this fixed-point family, so the
    polyline chains continuously; the stable side uses the closed-form
    inverse.  The seed runs from p0 + eps*v to its image.  Within each
    image the seed parameter is bisected until consecutive points are at
    most step_cap apart (depth-capped).  A domain violation truncates
    the trace and sets the "truncated" flag; hitting max_points sets
    "point-cap".
    """
    if fp.cls is not PointClass.SADDLE:
        raise ValueError(f"manifold tracing needs a Saddle, got {fp.cls.value}")
    v, _ = _saddle_direction(fp, mu, c, side)
    if orientation < 0:
        v = -v
    drift = TWO_PI * fp.ell

    if side is Side.UNSTABLE:

        def image(p: LiftPoint) -> LiftPoint:
            q = return_map(p, mu, c)
            q = LiftPoint(q.x - drift, q.y)
            if abs(q.y) > 1.0:
                raise DomainError("outside the section strip")
            return q

    else:

        def image(p: LiftPoint) -> LiftPoint:
            q = inverse_map(LiftPoint(p.x + drift, p.y), mu, c)
            if abs(q.y) > 1.0:
                raise DomainError("outside the section strip")
            return q

    p0 = fp.point
    a = LiftPoint(p0.x + eps * v[0], p0.y + eps * v[1])
    flags: list[str] = []
    try:
        b = image(a)
    except DomainError:
        return ManifoldTrace(fp, side, np.array([[a.x, a.y]]), 0.0, ("truncated",))

    # point t in [0,1] on the seed chord, mapped k times
    cache: dict[tuple[int, float], LiftPoint | None] = {}

    def pmap(t: float, k: int) -> LiftPoint | None:
        key = (k, t)
        if key in cache:
            return cache[key]
        if k == 0:
            q = LiftPoint(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y))
        else:
            prev = pmap(t, k - 1)
            if prev is None:
                q = None
            else:
                try:
                    q = image(prev)
                except DomainError:
                    q = None
        cache[key] = q
        return q

    pts: list[tuple[float, float]] = [(a.x, a.y)]
    truncated = False
    capped = False

    def dist(p: LiftPoint, q: LiftPoint) -> float:
        return math.hypot(q.x - p.x, q.y - p.y)

    for k in range(steps + 1):
        if truncated or capped:
            break
        start = pmap(0.0, k)
        if start is None:
            truncated = True
            break
        # adaptively refine t in [0,1]; stack of (t_lo, p_lo, t_hi, p_hi,
        # depth), left halves processed first so points stay ordered.  A
        # subinterval whose right end escapes is bisected toward the escape
        # boundary until the depth cap, then the trace stops there.
        stack = [(0.0, start, 1.0, pmap(1.0, k), 0)]
        while stack:
            t_lo, p_lo, t_hi, p_hi, depth = stack.pop()
            if p_lo is None:
                truncated = True
                break
            if p_hi is not None and (dist(p_lo, p_hi) <= step_cap or depth >= 40):
                if depth >= 40 and dist(p_lo, p_hi) > step_cap:
                    if "spacing-exceeded" not in flags:
                        flags.append("spacing-exceeded")
                pts.append((p_hi.x, p_hi.y))
                if len(pts) >= max_points:
                    capped = True
                    break
                continue
            if depth >= 40:
                truncated = True
                break
            tm = 0.5 * (t_lo + t_hi)
            p_mid = pmap(tm, k)
            stack.append((tm, p_mid, t_hi, p_hi, depth + 1))
            stack.append((t_lo, p_lo, tm, p_mid, depth + 1))

    if truncated:
        flags.append("truncated")
    if capped:
        flags.append("point-cap")
    arr = np.array(pts)
    arclength = float(np.sum(np.hypot(np.diff(arr[:, 0]), np.diff(arr[:, 1]))))
    return ManifoldTrace(fp, side, arr, arclength, tuple(flags))


def crossing_count(unstable: ManifoldTrace, stable: ManifoldTrace) -> int:
    """Number of transversal crossings between the two traces on the
    cylinder (the stable trace is compared at every 2*pi translate that
    overlaps the unstable one).  Touching endpoints do not count."""
    pu = unstable.points
    ps = stable.points
    if len(pu) < 2 or len(ps) < 2:
        return 0
    a = pu[:-1]
    b = pu[1:]
    total = 0
    lo = math.floor((pu[:, 0].min() - ps[:, 0].max()) / TWO_PI)
    hi = math.ceil((pu[:, 0].max() - ps[:, 0].min()) / TWO_PI)
    for j in range(lo, hi + 1):
        shift = np.array([j * TWO_PI, 0.0])
        q1 = ps[:-1] + shift
        q2 = ps[1:] + shift
        total += _proper_intersections(a, b, q1, q2)
    return total


def _proper_intersections(a, b, q1, q2) -> int:
    """Count strictly transversal segment crossings between polyline edge
    sets {a->b} and {q1->q2} (vectorized orientation tests)."""

    def orient(p, q, r):
        return (q[..., 0] - p[..., 0]) * (r[..., 1] - p[..., 1]) - (
            q[..., 1] - p[..., 1]
        ) * (r[..., 0] - p[..., 0])

    A = a[:, None, :]
    B = b[:, None, :]
    P = q1[None, :, :]
    Q = q2[None, :, :]
    d1 = orient(A, B, P)
    d2 = orient(A, B, Q)
    d3 = orient(P, Q, A)
    d4 = orient(P, Q, B)
    crossing = (d1 * d2 < 0.0) & (d3 * d4 < 0.0)
    return int(np.count_nonzero(crossing))


def homoclinic_bracket(
    A: float,
    lam: float,
    omegas,
    c: MapConstants,
    ell: int = 1,
    steps: int = 5,
    step_cap: float = 0.05,
    eps: float = 1e-6,
) -> list[tuple[float, float]]:
    """Bracketing intervals in omega where the saddle's stable/unstable
    crossing count changes, the tangency indicator.

    For each omega with a saddle (1, ell)-fixed point, both orientations
    of both manifolds are traced and their transversal crossings summed;
    consecutive omegas with different counts form a bracket.  Counts are
    never interpolated: the tangency is only ever located as an
    interval.
    """
    from .resonance import fixed_points

    counts: list[tuple[float, int | None]] = []
    for w in omegas:
        mu = Params(A, lam, float(w))
        try:
            fps = [r for r in fixed_points(mu, c, ell) if r.cls is PointClass.SADDLE]
        except Exception:
            fps = []
        if not fps:
            counts.append((float(w), None))
            continue
        fp = fps[0]
        n = 0
        for ou in (1, -1):
            try:
                tu = manifold_trace(fp, mu, c, Side.UNSTABLE, steps, step_cap, eps, ou)
            except ValueError:
                continue
            for os_ in (1, -1):
                try:
                    ts = manifold_trace(fp, mu, c, Side.STABLE, steps, step_cap, eps, os_)
                except ValueError:
                    continue
                n += crossing_count(tu, ts)
        counts.append((float(w), n))
    brackets = []
    prev: tuple[float, int] | None = None
    for w, n in counts:
        if n is None:
            prev = None
            continue
        if prev is not None and n != prev[1]:
            brackets.append((prev[0], w))
        prev = (w, n)
    return brackets
