"""Truncated return map of a two-saddle spiral network.

A pair of saddle-foci joined by a one-dimensional connecting cycle produces,
on a cross-section near the cycle, a return map of the cylinder.  After
truncating the higher-order remainders of the local passages, the map takes
the closed form

    F(x, y) = (x - K*omega*log(s), s**delta),      s = y + A + lam*sin(x),

with x an angle and y the transverse coordinate on the section strip
|y| <= 1.  Everything in this package that iterates, linearizes, or
continues structures of "the map" means this truncation, not the full
return map of the flow: remainder terms are dropped exactly, so results
quantify the leading-order model only.

x is tracked on the universal cover (no reduction mod 2*pi during
composition); reduce at output with :meth:`LiftPoint.wrapped` when a
fundamental-domain representative is wanted.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace
from enum import Enum

TWO_PI = 2.0 * math.pi


class DomainError(ValueError):
    """A point violated a precondition of the map."""


class LeftDomain(DomainError):
    """The spiral coordinate s = y + A + lam*sin(x) was not positive.

    Carries the offending value in ``s``.
    """

    def __init__(self, s: float):
        self.s = s
        super().__init__(f"left the return domain: s = {s!r} <= 0")


@dataclass(frozen=True)
class SaddleValues:
    """Linearization data of the two saddle-foci.

    c1, e1 are the contracting/expanding rate magnitudes at the first
    saddle-focus, c2, e2 at the second, and spin is the rotation frequency
    of the focal planes.  All four rate magnitudes must be positive.
    """

    c1: float
    e1: float
    c2: float
    e2: float
    spin: float

    def __post_init__(self):
        for name in ("c1", "e1", "c2", "e2"):
            v = getattr(self, name)
            if not v > 0.0:
                raise ValueError(f"saddle rate {name} must be positive, got {v!r}")


@dataclass(frozen=True)
class MapConstants:
    """Derived constants of the truncated map.

    delta1, delta2 are the saddle indices of the two passages, delta their
    product (the composite contraction exponent), twist the coefficient K of
    the logarithmic phase shift, and peak the maximum value of the
    wedge-center curve, peak = delta**(1/(1-delta)) - delta**(delta/(1-delta)).

    e1 and e2 keep the individual expansion rates when the constants were
    derived from saddle values; they are only needed to evaluate the local
    factor stages on their own and may be None for hand-built constants.
    """

    delta1: float
    delta2: float
    delta: float
    twist: float
    peak: float
    e1: float | None = None
    e2: float | None = None

    @property
    def K(self) -> float:
        return self.twist


def peak_value(delta: float) -> float:
    """Maximum over omega of the wedge-center curve, closed form in delta."""
    return delta ** (1.0 / (1.0 - delta)) - delta ** (delta / (1.0 - delta))


def derive_constants(sv: SaddleValues) -> MapConstants:
    """Build :class:`MapConstants` from saddle linearization data.

    Raises
    ------
    ValueError
        If the composite exponent delta = (c1/e1)*(c2/e2) is <= 1, in which
        case the network is not weakly attracting and the truncated map has
        no contracting regime to study.
    """
    delta1 = sv.c1 / sv.e1
    delta2 = sv.c2 / sv.e2
    delta = delta1 * delta2
    if delta <= 1.0:
        raise ValueError(
            f"not weakly attracting: delta = {delta!r} <= 1 "
            f"(delta1 = {delta1!r}, delta2 = {delta2!r})"
        )
    twist = (sv.e2 + sv.c1) / (sv.e1 * sv.e2)
    return MapConstants(
        delta1=delta1,
        delta2=delta2,
        delta=delta,
        twist=twist,
        peak=peak_value(delta),
        e1=sv.e1,
        e2=sv.e2,
    )


@dataclass(frozen=True)
class Params:
    """Perturbation parameters: offset A, forcing amplitude lam, frequency omega."""

    A: float
    lam: float
    omega: float

    def __post_init__(self):
        if self.A < 0.0:
            raise ValueError(f"offset A must be >= 0, got {self.A!r}")
        if self.lam < 0.0:
            raise ValueError(f"amplitude lam must be >= 0, got {self.lam!r}")
        if not self.omega > 0.0:
            raise ValueError(f"frequency omega must be positive, got {self.omega!r}")


def admissibility(mu: Params, c: MapConstants) -> list[str]:
    """Conditions for the perturbation to sit in the admissible cone.

    Returns the violated conditions as human-readable strings; an empty list
    means the cone conditions 0 <= lam < A and A + lam <= peak hold.  The
    map itself is defined outside the cone; callers use this only to warn.
    """
    bad = []
    if not mu.lam < mu.A:
        bad.append(f"lam < A fails (lam = {mu.lam!r}, A = {mu.A!r})")
    if not mu.A + mu.lam <= c.peak:
        bad.append(f"A + lam <= peak fails (A + lam = {mu.A + mu.lam!r}, peak = {c.peak!r})")
    return bad


@dataclass(frozen=True)
class LiftPoint:
    """A point of the section with x on the universal cover."""

    x: float
    y: float

    @property
    def wrapped(self) -> "LiftPoint":
        """Representative with x reduced to [0, 2*pi)."""
        return LiftPoint(self.x % TWO_PI, self.y)


class Stage(Enum):
    """Factor maps whose composition gives the truncated return map.

    LOCAL_FIRST     passage near the first saddle-focus, (x, y) -> (r, phi)
                    with r = y**delta1, phi = x - (omega/e1)*log(y)
    CROSS           transition between the two local charts (identity after
                    truncation)
    LOCAL_SECOND    passage near the second saddle-focus, (r, phi) ->
                    (phi - (omega/e2)*log(r), r**delta2)
    GLUE            global reinjection with the manifold-splitting profile,
                    (x, y) -> (x, y + A + lam*sin(x))
    COMPOSED        LOCAL_SECOND o CROSS o LOCAL_FIRST in one closed form,
                    (x, y) -> (x - K*omega*log(y), y**delta)
    """

    LOCAL_FIRST = "local-first"
    CROSS = "cross"
    LOCAL_SECOND = "local-second"
    GLUE = "glue"
    COMPOSED = "composed"


def _require_rates(stage: Stage, c: MapConstants) -> None:
    if c.e1 is None or c.e2 is None:
        raise ValueError(
            f"stage {stage.value} needs the individual expansion rates; "
            "build the constants with derive_constants"
        )


def factor_map(stage: Stage, p: LiftPoint, mu: Params, c: MapConstants) -> LiftPoint:
    """Apply one factor stage of the return map.

    The local stages interpret and produce coordinates in their own charts:
    LOCAL_FIRST maps section coordinates (x, y) to the cross chart (r, phi),
    stored in the (x, y) slots of the result in that order, and LOCAL_SECOND
    maps (r, phi) back to section coordinates.  Logarithmic stages require
    a positive radial input and raise :class:`LeftDomain` otherwise.
    """
    if stage is Stage.LOCAL_FIRST:
        _require_rates(stage, c)
        if not p.y > 0.0:
            raise LeftDomain(p.y)
        return LiftPoint(p.y**c.delta1, p.x - (mu.omega / c.e1) * math.log(p.y))
    if stage is Stage.CROSS:
        return p
    if stage is Stage.LOCAL_SECOND:
        _require_rates(stage, c)
        r, phi = p.x, p.y
        if not r > 0.0:
            raise LeftDomain(r)
        return LiftPoint(phi - (mu.omega / c.e2) * math.log(r), r**c.delta2)
    if stage is Stage.GLUE:
        return LiftPoint(p.x, p.y + mu.A + mu.lam * math.sin(p.x))
    if stage is Stage.COMPOSED:
        if not p.y > 0.0:
            raise LeftDomain(p.y)
        return LiftPoint(p.x - c.twist * mu.omega * math.log(p.y), p.y**c.delta)
    raise ValueError(f"unknown stage {stage!r}")


def spiral_coordinate(p: LiftPoint, mu: Params) -> float:
    """s = y + A + lam*sin(x), the radial coordinate entering the spiral pass."""
    return p.y + mu.A + mu.lam * math.sin(p.x)


def return_map(p: LiftPoint, mu: Params, c: MapConstants) -> LiftPoint:
    """One application of the truncated return map, on the lift.

    Preconditions: |y| <= 1 (the section strip) and s = y + A + lam*sin(x)
    positive.  The first failure raises :class:`DomainError`, the second
    :class:`LeftDomain` carrying s.  The output x is not reduced; use
    ``return_map(p, mu, c).wrapped`` for the fundamental-domain point.
    """
    if abs(p.y) > 1.0:
        raise DomainError(f"outside the section strip: |y| = {abs(p.y)!r} > 1")
    s = spiral_coordinate(p, mu)
    if not s > 0.0:
        raise LeftDomain(s)
    return LiftPoint(p.x - c.twist * mu.omega * math.log(s), s**c.delta)


@dataclass(frozen=True)
class Jacobian2:
    """2x2 derivative of the return map at a point."""

    a11: float
    a12: float
    a21: float
    a22: float

    @property
    def trace(self) -> float:
        return self.a11 + self.a22

    @property
    def det(self) -> float:
        return self.a11 * self.a22 - self.a12 * self.a21

    @property
    def discriminant(self) -> float:
        return self.trace * self.trace - 4.0 * self.det

    @property
    def eigenvalues(self) -> tuple[complex, complex]:
        """Eigenvalue pair, complex-typed even when real."""
        half_tr = 0.5 * self.trace
        root = cmath.sqrt(complex(self.discriminant)) * 0.5
        return (half_tr - root, half_tr + root)


def jacobian(p: LiftPoint, mu: Params, c: MapConstants) -> Jacobian2:
    """Exact derivative of the truncated return map at p.

    Entries, with s = y + A + lam*sin(x), cx = cos(x):

        [ 1 - K*omega*lam*cx/s    -K*omega/s        ]
        [ delta*s**(delta-1)*lam*cx   delta*s**(delta-1) ]

    The determinant simplifies to delta*s**(delta-1) algebraically; the
    returned object computes det from the entries, and the simplification
    is asserted in the test suite.  Same preconditions as ``return_map``.
    """
    if abs(p.y) > 1.0:
        raise DomainError(f"outside the section strip: |y| = {abs(p.y)!r} > 1")
    s = spiral_coordinate(p, mu)
    if not s > 0.0:
        raise LeftDomain(s)
    cx = math.cos(p.x)
    kw = c.twist * mu.omega
    col = c.delta * s ** (c.delta - 1.0)
    return Jacobian2(
        a11=1.0 - kw * mu.lam * cx / s,
        a12=-kw / s,
        a21=col * mu.lam * cx,
        a22=col,
    )


def inverse_map(p: LiftPoint, mu: Params, c: MapConstants) -> LiftPoint:
    """Inverse of the truncated return map, closed form on the lift.

    Given an image point (x', y') with y' > 0: s = y'**(1/delta),
    x = x' + K*omega*log(s), y = s - A - lam*sin(x).  Raises
    :class:`LeftDomain` when y' <= 0.
    """
    if not p.y > 0.0:
        raise LeftDomain(p.y)
    s = p.y ** (1.0 / c.delta)
    x = p.x + c.twist * mu.omega * math.log(s)
    return LiftPoint(x, s - mu.A - mu.lam * math.sin(x))


def with_rates(c: MapConstants, e1: float, e2: float) -> MapConstants:
    """Copy of c carrying explicit expansion rates for the local stages."""
    return replace(c, e1=e1, e2=e2)
