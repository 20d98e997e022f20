"""Stabbing sets (piercing points) for closed axis-parallel boxes.

A family is alpha-stabbed when, for every radius r, the members of diameter in
[r/2, r) lying inside any radius-r ball can be pierced by alpha^d points.  This
module provides a Monte Carlo stabber for fat-relative-to-a-ball inputs, a
deterministic greedy stabber over the corner grid, an exponential exact
minimum (the oracle), a lattice construction for 1 x ... x 1 x L boxes, and an
upper-bound estimator for the stabbing number of a concrete instance.
"""
from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import CapExceeded, InvalidInput, StabRetryExhausted
from .geometry import AxisBox, Ball, ball_contains_box, box_contains_point, diameter_sq

EXACT_MIN_CAP = 15
MONTECARLO_RETRIES = 20


@dataclass(frozen=True)
class StabSet:
    points: tuple[tuple[Fraction, ...], ...]
    covered: tuple[frozenset[int], ...]

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class AlphaEstimate:
    alpha: float
    # One row per (diameter class, witness ball): (radius, ball_index, points_used, alpha_class)
    rows: tuple[tuple[Fraction, int, int, float], ...]


def verify_stab(points: Sequence[Sequence[Fraction | int]],
                objects: Sequence[AxisBox]) -> tuple[bool, list[int]]:
    """True iff every object contains at least one of the points (exact)."""
    unstabbed = [
        i for i, b in enumerate(objects)
        if not any(box_contains_point(b, p) for p in points)
    ]
    return (not unstabbed, unstabbed)


def montecarlo_sample_count(n: int, alpha: float, d: int) -> int:
    """floor((4 alpha)^d (ln n + 1)); natural log gives the e-based retry bound."""
    if n <= 0:
        return 0
    return math.floor((4 * alpha) ** d * (math.log(n) + 1))


def stab_montecarlo(objects: Sequence[AxisBox], ball: Ball, alpha: float,
                    rng: random.Random | None = None,
                    retries: int = MONTECARLO_RETRIES) -> StabSet:
    """Sample k = floor((4 alpha)^d (ln n + 1)) uniform points in the ball.

    The caller guarantees the objects are inside the ball and weakly fat
    relative to it; only containment in the ball is enforced here.  Retries a
    fresh sample on failure, then raises StabRetryExhausted with the residue.
    """
    rng = rng or random.Random(0)
    n = len(objects)
    if n == 0:
        return StabSet((), ())
    d = objects[0].dim
    for b in objects:
        if not ball_contains_box(ball, b):
            raise InvalidInput("object not contained in the sampling ball")
    k = montecarlo_sample_count(n, alpha, d)
    radius = math.sqrt(float(ball.radius_sq))
    center = [float(c) for c in ball.center]
    last_unstabbed: list[int] = list(range(n))
    for _ in range(retries):
        points: list[tuple[Fraction, ...]] = []
        while len(points) < k:
            cand = [rng.uniform(-radius, radius) for _ in range(d)]
            if sum(x * x for x in cand) <= radius * radius:
                points.append(tuple(Fraction(c + x) for c, x in zip(center, cand)))
        ok, unstabbed = verify_stab(points, objects)
        if ok:
            covered = tuple(
                frozenset(i for i, b in enumerate(objects) if box_contains_point(b, p))
                for p in points
            )
            return StabSet(tuple(points), covered)
        last_unstabbed = unstabbed
    raise StabRetryExhausted(
        f"no stabbing found in {retries} tries (alpha={alpha} too small "
        f"or objects too thin); {len(last_unstabbed)} objects unstabbed",
        last_unstabbed,
    )


def _corner_grid_axes(objects: Sequence[AxisBox], cap_per_axis: int | None) -> list[list[int]]:
    d = objects[0].dim
    axes = []
    for t in range(d):
        values = sorted({b.lo[t] for b in objects})
        if cap_per_axis is not None and len(values) > cap_per_axis:
            step = len(values) / cap_per_axis
            values = sorted({values[int(i * step)] for i in range(cap_per_axis)})
        axes.append(values)
    return axes


def _greedy_cover_numpy(objects: Sequence[AxisBox], axes: list[list[int]],
                        extra_points: list[tuple[int, ...]]) -> list[tuple[int, ...]]:
    """Greedy max-coverage over the candidate grid; exact int64 comparisons."""
    n = len(objects)
    d = objects[0].dim
    lo = np.array([b.lo for b in objects], dtype=np.int64)
    hi = np.array([b.hi for b in objects], dtype=np.int64)
    grid = np.array(list(itertools.product(*axes)), dtype=np.int64)
    if extra_points:
        grid = np.vstack([grid, np.array(extra_points, dtype=np.int64)])
    # coverage[c, i]: candidate c lies in box i
    coverage = np.ones((grid.shape[0], n), dtype=bool)
    for t in range(d):
        col = grid[:, t][:, None]
        coverage &= (lo[None, :, t] <= col) & (col <= hi[None, :, t])
    chosen: list[tuple[int, ...]] = []
    uncovered = np.ones(n, dtype=bool)
    while uncovered.any():
        counts = coverage[:, uncovered].sum(axis=1)
        best = int(counts.argmax())
        if counts[best] == 0:
            raise AssertionError("corner-grid candidates failed to cover a box")
        chosen.append(tuple(int(x) for x in grid[best]))
        uncovered &= ~coverage[best]
    return chosen


def stab_greedy(objects: Sequence[AxisBox], cap_per_axis: int = 34) -> StabSet:
    """Deterministic greedy piercing over the box lower-corner grid.

    For closed boxes any piercing point can be pushed to a combination of
    lower-corner coordinates, so the grid is a sufficient candidate family.
    When the full grid is too large it is thinned, but each box's own lower
    corner is always kept, so the greedy always terminates with a valid cover.
    """
    if not objects:
        return StabSet((), ())
    full_axes = _corner_grid_axes(objects, None)
    total = math.prod(len(a) for a in full_axes)
    if total <= 46_000:
        axes, extras = full_axes, []
    else:
        axes = _corner_grid_axes(objects, cap_per_axis)
        extras = [b.lo for b in objects]
    denom = objects[0].denom
    chosen = _greedy_cover_numpy(objects, axes, extras)
    points = tuple(tuple(Fraction(v, denom) for v in p) for p in chosen)
    ok, _ = verify_stab(points, objects)
    assert ok
    covered = tuple(
        frozenset(i for i, b in enumerate(objects) if box_contains_point(b, p))
        for p in points
    )
    return StabSet(points, covered)


def stab_exact_min(objects: Sequence[AxisBox], cap: int = EXACT_MIN_CAP) -> StabSet:
    """Minimum-cardinality stabbing set over the corner grid (exponential)."""
    n = len(objects)
    if n > cap:
        raise CapExceeded(f"exact stabbing cap {cap} exceeded: n={n}")
    if n == 0:
        return StabSet((), ())
    axes = _corner_grid_axes(objects, None)
    denom = objects[0].denom
    cand_masks: dict[int, tuple[int, ...]] = {}
    for p in itertools.product(*axes):
        frac = tuple(Fraction(v, denom) for v in p)
        mask = 0
        for i, b in enumerate(objects):
            if box_contains_point(b, frac):
                mask |= 1 << i
        if mask:
            prev = cand_masks.get(mask)
            if prev is None:
                cand_masks[mask] = p
    # Keep only maximal coverage masks.
    masks = sorted(cand_masks, key=lambda m: -m.bit_count())
    maximal: list[int] = []
    for m in masks:
        if not any(m | big == big for big in maximal):
            maximal.append(m)
    full = (1 << n) - 1
    best: list[int] | None = None

    def search(covered: int, chosen: list[int]) -> None:
        nonlocal best
        if best is not None and len(chosen) >= len(best):
            return
        if covered == full:
            best = list(chosen)
            return
        # Branch on the uncovered object with the fewest candidates.
        rest = full & ~covered
        target, options = -1, None
        t = rest
        while t:
            i = (t & -t).bit_length() - 1
            t &= t - 1
            opts = [m for m in maximal if (m >> i) & 1]
            if options is None or len(opts) < len(options):
                target, options = i, opts
            if options is not None and len(options) <= 1:
                break
        assert options
        for m in options:
            chosen.append(m)
            search(covered | m, chosen)
            chosen.pop()

    search(0, [])
    assert best is not None
    points = tuple(tuple(Fraction(v, denom) for v in cand_masks[m]) for m in best)
    covered = tuple(
        frozenset(i for i in range(n) if (m >> i) & 1) for m in best
    )
    return StabSet(points, covered)


def _diameter_class(diam_sq: Fraction) -> int:
    """Smallest k with diam in [2^(k-1), 2^k), computed exactly from diam^2."""
    k = 0
    while diam_sq >= 4**k:
        k += 1
    while diam_sq < 4 ** (k - 1):
        k -= 1
    return k


def estimate_stabbing_number(objects: Sequence[AxisBox]) -> AlphaEstimate:
    """Upper-bound estimate of the stabbing number of a concrete instance.

    Buckets objects into dyadic diameter classes, covers each class with balls
    of the class radius centered at object centers, and reports the worst
    greedy piercing count over all (class, ball) pairs as alpha^d.  The finite
    object-centered witness family makes this an upper-bound estimator, not
    the exact infimum.
    """
    if not objects:
        return AlphaEstimate(1.0, ())
    d = objects[0].dim
    by_class: dict[int, list[int]] = {}
    for i, b in enumerate(objects):
        by_class.setdefault(_diameter_class(diameter_sq(b)), []).append(i)
    rows: list[tuple[Fraction, int, int, float]] = []
    alpha = 1.0
    for k, members in sorted(by_class.items()):
        r = Fraction(2**k) if k >= 0 else Fraction(1, 2 ** (-k))
        r_sq = r * r
        # Bitmask of class members inside each witness ball; keep maximal sets.
        ball_sets: dict[int, int] = {}
        for bi in members:
            center = objects[bi].center()
            mask = 0
            for i in members:
                if _center_dist_ok(objects[i], center, r_sq):
                    mask |= 1 << i
            if mask and mask not in ball_sets:
                ball_sets[mask] = bi
        maximal: list[tuple[int, int]] = []
        for mask, bi in sorted(ball_sets.items(), key=lambda kv: -kv[0].bit_count()):
            if not any(mask | big == big for big, _ in maximal):
                maximal.append((mask, bi))
        for mask, bi in maximal:
            subset = [objects[i] for i in members if (mask >> i) & 1]
            used = len(stab_greedy(subset))
            a_class = max(1.0, used ** (1.0 / d))
            rows.append((r, bi, used, a_class))
            alpha = max(alpha, a_class)
    return AlphaEstimate(alpha, tuple(rows))


def _center_dist_ok(box: AxisBox, center, r_sq: Fraction) -> bool:
    far = Fraction(0)
    for lo, hi, c in zip(box.lo, box.hi, center):
        far += max(abs(Fraction(lo, box.denom) - c), abs(Fraction(hi, box.denom) - c)) ** 2
    return far <= r_sq


def canonical_box_stab_lattice(long_side: int, d: int, region: Ball) -> StabSet:
    """Piercing lattice for 1 x ... x 1 x L boxes of any orientation.

    For each of the d axis orientations, emits the lattice with step 1 on the
    short axes and step L on the long axis, clipped to the region ball.  Any
    closed unit interval contains an integer and any closed length-L interval
    contains a multiple of L, so every canonical box inside the region is
    stabbed.  Inside a radius-O(L) ball this is O(L^(d-1)) points/orientation.
    """
    if long_side < 1:
        raise InvalidInput("long side must be >= 1")
    if region.dim != d:
        raise InvalidInput("region dimension mismatch")
    radius = math.isqrt(math.ceil(float(region.radius_sq))) + 1
    center = region.center
    points: set[tuple[Fraction, ...]] = set()
    for axis in range(d):
        ranges = []
        for t in range(d):
            step = long_side if t == axis else 1
            c = float(center[t])
            lo = math.floor((c - radius) / step)
            hi = math.ceil((c + radius) / step)
            ranges.append([step * v for v in range(lo, hi + 1)])
        r_sq = region.radius_sq
        for p in itertools.product(*ranges):
            dist = sum((Fraction(x) - c) ** 2 for x, c in zip(p, center))
            if dist <= r_sq:
                points.add(tuple(Fraction(x) for x in p))
    pts = tuple(sorted(points))
    return StabSet(pts, tuple(frozenset() for _ in pts))
