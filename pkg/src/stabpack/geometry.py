"""Exact geometric primitives: points, closed axis-parallel boxes, balls, hypercubes.

All box coordinates are integers over a shared per-instance denominator, so every
predicate reduces to exact integer or Fraction comparison.  Boxes are closed:
touching at a facet, edge or corner counts as intersecting.  Spheres (used only
by the sphere-separator solver) are the one tolerance-bearing type.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import DenominatorMismatch, DimensionMismatch, InvalidInput

Point = tuple[Fraction, ...]


class BoxClass(enum.Enum):
    INSIDE = "inside"
    OUTSIDE = "outside"
    CROSSING = "crossing"


@dataclass(frozen=True)
class AxisBox:
    """Closed axis-parallel box; lo/hi are integer multiples of 1/denom."""

    lo: tuple[int, ...]
    hi: tuple[int, ...]
    denom: int = 1

    def __post_init__(self):
        if self.denom < 1:
            raise InvalidInput(f"denominator must be >= 1, got {self.denom}")
        if len(self.lo) != len(self.hi) or not self.lo:
            raise DimensionMismatch("lo and hi must be nonempty and equal length")
        if any(a > b for a, b in zip(self.lo, self.hi)):
            raise InvalidInput(f"empty box: lo={self.lo} hi={self.hi}")
        if self.lo == self.hi:
            raise InvalidInput("point-degenerate box")

    @property
    def dim(self) -> int:
        return len(self.lo)

    def lo_frac(self) -> Point:
        return tuple(Fraction(v, self.denom) for v in self.lo)

    def hi_frac(self) -> Point:
        return tuple(Fraction(v, self.denom) for v in self.hi)

    def side_lengths(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(b - a, self.denom) for a, b in zip(self.lo, self.hi))

    def center(self) -> Point:
        return tuple(Fraction(a + b, 2 * self.denom) for a, b in zip(self.lo, self.hi))

    def translate(self, vec: Sequence[int]) -> "AxisBox":
        """Translate by an integer vector in scaled units (multiples of 1/denom)."""
        if len(vec) != self.dim:
            raise DimensionMismatch("translation vector dimension mismatch")
        return AxisBox(
            tuple(a + v for a, v in zip(self.lo, vec)),
            tuple(b + v for b, v in zip(self.hi, vec)),
            self.denom,
        )

    def rescaled(self, factor: int) -> "AxisBox":
        """Multiply all scaled coordinates and the denominator by factor > 0."""
        if factor < 1:
            raise InvalidInput("rescale factor must be >= 1")
        return AxisBox(
            tuple(a * factor for a in self.lo),
            tuple(b * factor for b in self.hi),
            self.denom * factor,
        )


@dataclass(frozen=True)
class Ball:
    center: Point
    radius_sq: Fraction

    def __post_init__(self):
        if self.radius_sq <= 0:
            raise InvalidInput("ball must have positive radius")

    @property
    def dim(self) -> int:
        return len(self.center)


@dataclass(frozen=True)
class HyperCube:
    center: tuple[Fraction, ...]
    side: Fraction

    def __post_init__(self):
        if self.side <= 0:
            raise InvalidInput("hypercube must have positive side")

    @property
    def dim(self) -> int:
        return len(self.center)

    def lo(self) -> Point:
        h = self.side / 2
        return tuple(c - h for c in self.center)

    def hi(self) -> Point:
        h = self.side / 2
        return tuple(c + h for c in self.center)


@dataclass(frozen=True)
class Sphere:
    """Floating-point sphere (boundary surface), for the parameterized solver."""

    center: tuple[float, ...]
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise InvalidInput("sphere must have positive radius")

    @property
    def dim(self) -> int:
        return len(self.center)


def _check_pair(a: AxisBox, b: AxisBox) -> None:
    if a.dim != b.dim:
        raise DimensionMismatch(f"box dimensions differ: {a.dim} vs {b.dim}")
    if a.denom != b.denom:
        raise DenominatorMismatch(f"denominators differ: {a.denom} vs {b.denom}")


def boxes_intersect(a: AxisBox, b: AxisBox) -> bool:
    """Closed-box overlap test; facet contact counts as intersection."""
    _check_pair(a, b)
    return all(
        max(al, bl) <= min(ah, bh)
        for al, ah, bl, bh in zip(a.lo, a.hi, b.lo, b.hi)
    )


def box_contains_point(b: AxisBox, p: Sequence[Fraction | int]) -> bool:
    if len(p) != b.dim:
        raise DimensionMismatch(f"point dimension {len(p)} vs box {b.dim}")
    return all(
        Fraction(lo, b.denom) <= Fraction(x) <= Fraction(hi, b.denom)
        for lo, hi, x in zip(b.lo, b.hi, p)
    )


def classify_against_hypercube(b: AxisBox, cube: HyperCube) -> BoxClass:
    """Inside iff b is in the open interior; Outside iff disjoint; else Crossing.

    Boundary touch on either side counts as Crossing.
    """
    if b.dim != cube.dim:
        raise DimensionMismatch(f"box dimension {b.dim} vs cube {cube.dim}")
    clo, chi = cube.lo(), cube.hi()
    inside = all(
        cl < Fraction(bl, b.denom) and Fraction(bh, b.denom) < ch
        for bl, bh, cl, ch in zip(b.lo, b.hi, clo, chi)
    )
    if inside:
        return BoxClass.INSIDE
    outside = any(
        Fraction(bh, b.denom) < cl or Fraction(bl, b.denom) > ch
        for bl, bh, cl, ch in zip(b.lo, b.hi, clo, chi)
    )
    if outside:
        return BoxClass.OUTSIDE
    return BoxClass.CROSSING


def circumscribed_ball(b: AxisBox) -> Ball:
    """Smallest ball containing the box: centered at the midpoint."""
    r_sq = sum((Fraction(h - l, 2 * b.denom)) ** 2 for l, h in zip(b.lo, b.hi))
    return Ball(center=b.center(), radius_sq=r_sq)


def diameter_sq(b: AxisBox) -> Fraction:
    return sum((Fraction(h - l, b.denom)) ** 2 for l, h in zip(b.lo, b.hi))


def common_denominator(boxes: Iterable[AxisBox]) -> int:
    denoms = {b.denom for b in boxes}
    if len(denoms) > 1:
        raise DenominatorMismatch(f"mixed denominators: {sorted(denoms)}")
    return denoms.pop() if denoms else 1


def ball_contains_box(ball: Ball, b: AxisBox) -> bool:
    """Exact containment test: the farthest box corner must be inside the ball."""
    if ball.dim != b.dim:
        raise DimensionMismatch("ball/box dimension mismatch")
    far_sq = Fraction(0)
    for lo, hi, c in zip(b.lo, b.hi, ball.center):
        dlo = abs(Fraction(lo, b.denom) - c)
        dhi = abs(Fraction(hi, b.denom) - c)
        far_sq += max(dlo, dhi) ** 2
    return far_sq <= ball.radius_sq
