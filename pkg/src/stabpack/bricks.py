"""Bricks and box gadgets for realizing cell graphs with 1 x ... x 1 x L boxes.

A brick is a grid of (L/8)^(d-1) parallel boxes of side multiset {1,..,1,L},
indexed by tuples in [L/8]^(d-1), spaced 3 units apart on the short axes.
Every coordinate is an integer multiple of 1/L and is stored scaled by L, so
all predicates are exact.  Per-box perturbations are multiples of 3 along the
brick axis (bounded by 3L/8) and multiples of 1/L on the short axes (bounded
by L/8); gadgets couple these perturbations so that exactly the intended
index-to-index contacts occur.

Conventions: a conduit is a chain of bricks carrying one box per active wire;
each gadget constructor takes the previous brick (already emitted by the
caller), emits its own boxes chain-ordered per index, and returns the exit
brick.  Directions are +-1 along the brick axis.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

from .errors import InvalidInput
from .geometry import AxisBox
from .wiring import GridPermutation, decompose_axes, from_dict, identity_perm

Index = tuple[int, ...]


def index_range(L: int, d: int) -> list[Index]:
    return list(itertools.product(*(range(L // 8) for _ in range(d - 1))))


@dataclass
class Brick:
    """One grid layer of a conduit; corners are scaled by L.

    corner(i)[axis] = axis_base + axis_delta[i]; on a short dim v it is
    short_base[v] + 3L * sign[v] * i[pos[v]] + frac[i][v].
    """

    L: int
    dim: int
    axis: int
    direction: int
    axis_base: int
    short_base: tuple[int, ...]
    pos_of_dim: tuple[int, ...]
    sign_of_dim: tuple[int, ...]
    indices: tuple[Index, ...]
    axis_delta: dict[Index, int] = field(default_factory=dict)
    frac: dict[Index, tuple[int, ...]] = field(default_factory=dict)

    def __post_init__(self):
        if self.L % 8 != 0 or self.L < 16:
            raise InvalidInput("L must be a multiple of 8, at least 16")
        for i in self.indices:
            delta = self.axis_delta.get(i, 0)
            if delta % (3 * self.L) != 0 or abs(delta) > 3 * self.L * self.L // 8:
                raise InvalidInput(f"axis perturbation {delta} out of range")
            for v, f in enumerate(self.frac.get(i, ())):
                if v == self.axis and f:
                    raise InvalidInput("fractional perturbation on the axis")
                if abs(f) > self.L // 8:
                    raise InvalidInput(f"fractional perturbation {f} out of range")

    def corner(self, i: Index) -> tuple[int, ...]:
        out = []
        fr = self.frac.get(i)
        for v in range(self.dim):
            if v == self.axis:
                out.append(self.axis_base + self.axis_delta.get(i, 0))
            else:
                c = self.short_base[v] + 3 * self.L * self.sign_of_dim[v] * i[self.pos_of_dim[v]]
                if fr is not None:
                    c += fr[v]
                out.append(c)
        return tuple(out)

    def box(self, i: Index) -> AxisBox:
        lo = self.corner(i)
        hi = tuple(c + (self.L * self.L if v == self.axis else self.L)
                   for v, c in enumerate(lo))
        return AxisBox(lo, hi, denom=self.L)

    def boxes(self) -> dict[Index, AxisBox]:
        return {i: self.box(i) for i in self.indices}

    def with_indices(self, indices: Iterable[Index]) -> "Brick":
        return replace(self, indices=tuple(indices))

    def travel_dim_for(self, position: int) -> int:
        for v in range(self.dim):
            if v != self.axis and self.pos_of_dim[v] == position:
                return v
        raise InvalidInput(f"no short dim carries index position {position}")


def basic_brick(L: int, d: int, axis: int, origin: Sequence[int],
                indices: Iterable[Index], direction: int = 1) -> Brick:
    """Unperturbed brick: short dims in ascending order carry index positions
    0..d-2 with positive stride; origin is the scaled corner of index 0."""
    pos = []
    sign = []
    p = 0
    for v in range(d):
        if v == axis:
            pos.append(-1)
            sign.append(0)
        else:
            pos.append(p)
            sign.append(1)
            p += 1
    return Brick(L=L, dim=d, axis=axis, direction=direction,
                 axis_base=origin[axis],
                 short_base=tuple(origin[v] if v != axis else 0 for v in range(d)),
                 pos_of_dim=tuple(pos), sign_of_dim=tuple(sign),
                 indices=tuple(indices))


Chains = dict[Index, list[AxisBox]]


def _merge(chains: Chains, brick: Brick) -> None:
    for i in brick.indices:
        chains.setdefault(i, []).append(brick.box(i))


def advance_steps(L: int, distance: int) -> list[int]:
    """Split an axis advance into touching steps, each in [L^2/2 + L, L^2], so
    consecutive boxes overlap but no box meets its second-next neighbor.

    distance is scaled and must be a positive multiple of L; some values just
    above L^2 are unreachable, so planners round waypoint gaps up to reachable
    ones.
    """
    unit = L * L
    lo = unit // 2 + L
    if distance % L != 0 or distance < lo:
        raise InvalidInput(f"axis advance {distance} not reachable (L={L})")
    k = -(-distance // unit)
    if k * lo > distance:
        raise InvalidInput(f"axis advance {distance} not splittable (L={L})")
    steps = []
    rem = distance
    for j in range(k, 0, -1):
        step = min(unit, rem - (j - 1) * lo)
        steps.append(step)
        rem -= step
    assert rem == 0 and all(lo <= s <= unit and s % L == 0 for s in steps)
    return steps


def make_closing_advance(brick: Brick, distance: int) -> tuple[Chains, Brick]:
    """Advance by full-length steps plus at most one short final step.

    A short step is safe only right after a full-length one (the box before
    the pair cannot reach past it), so the caller must guarantee the previous
    emitted piece was a full-length step; used to land exactly on a face.
    """
    L = brick.L
    unit = L * L
    if distance % L or distance < L:
        raise InvalidInput(f"closing advance {distance} invalid")
    fulls, short = divmod(distance, unit)
    steps = [unit] * fulls + ([short] if short else [])
    chains: Chains = {}
    cur = brick
    for step in steps:
        cur = replace(cur, axis_base=cur.axis_base + cur.direction * step)
        _merge(chains, cur)
    return chains, cur


def make_bridge(brick: Brick, count: int) -> tuple[Chains, Brick]:
    """`count` full-length brick steps along the flow direction."""
    chains: Chains = {}
    cur = brick
    for _ in range(count):
        cur = replace(cur, axis_base=cur.axis_base + cur.direction * cur.L * cur.L)
        _merge(chains, cur)
    return chains, cur


def make_advance(brick: Brick, distance: int) -> tuple[Chains, Brick]:
    """Advance the conduit by an arbitrary multiple of L (scaled)."""
    chains: Chains = {}
    cur = brick
    for step in advance_steps(brick.L, distance):
        cur = replace(cur, axis_base=cur.axis_base + cur.direction * step)
        _merge(chains, cur)
    return chains, cur


def morph_deltas(brick: Brick, new_delta: dict[Index, int]) -> tuple[Chains, Brick]:
    """One full step that changes the per-index axis perturbations.

    Same-index boxes keep overlapping iff the perturbation never moves against
    the flow; enforced here.
    """
    for i in brick.indices:
        change = new_delta.get(i, 0) - brick.axis_delta.get(i, 0)
        if brick.direction * change > 0:
            raise InvalidInput("axis perturbation morph must not move with the flow")
    cur = replace(brick, axis_base=brick.axis_base + brick.direction * brick.L**2,
                  axis_delta=dict(new_delta))
    chains: Chains = {}
    _merge(chains, cur)
    return chains, cur


def set_frac(brick: Brick, frac: dict[Index, tuple[int, ...]]) -> Brick:
    """Fractional perturbations may change freely between consecutive bricks
    (short-axis overlap tolerates shifts up to L/8); returns the adjusted
    template for the next emission, without emitting."""
    return replace(brick, frac=dict(frac))


def make_adjustment(brick: Brick, shift_dim: int, shift_sign: int = 1
                    ) -> tuple[Chains, Brick]:
    """Reset to an unperturbed brick, shifted one unit along shift_dim and a
    half box length along the flow; clears fractional and axis perturbations.

    Requires every fractional perturbation on shift_dim to agree in sign with
    the shift, so the facet contact survives.
    """
    if shift_dim == brick.axis:
        raise InvalidInput("adjustment shift must be off-axis")
    for i in brick.indices:
        fr = brick.frac.get(i)
        if fr is not None and shift_sign * fr[shift_dim] < 0:
            raise InvalidInput("adjustment shift against the fractional perturbation")
    base = list(brick.short_base)
    base[shift_dim] += shift_sign * brick.L
    cur = replace(brick,
                  axis_base=brick.axis_base + brick.direction * brick.L**2 // 2,
                  short_base=tuple(base), axis_delta={}, frac={})
    chains: Chains = {}
    _merge(chains, cur)
    return chains, cur


def make_parity_fix(brick: Brick, variants: dict[Index, int]
                    ) -> tuple[Chains, Brick]:
    """Per index, 3 or 4 boxes covering the next three brick lengths, inducing
    a path with 1 or 2 internal vertices in the same footprint; the exit brick
    sits exactly three lengths along the flow either way."""
    L = brick.L
    unit = L * L
    c1 = round(2 * unit / 3 / L) * L
    c2 = round(4 * unit / 3 / L) * L
    assert L < c1 < unit and unit < c2 < 2 * unit and c2 - c1 <= unit
    chains: Chains = {}
    for i in brick.indices:
        variant = variants.get(i, 3)
        if variant == 3:
            offsets = [0, unit, 2 * unit]
        elif variant == 4:
            offsets = [0, c1, c2, 2 * unit]
        else:
            raise InvalidInput(f"parity variant {variant} not in (3, 4)")
        start = brick.corner(i)
        for off in offsets:
            lo = list(start)
            lo[brick.axis] += brick.direction * (unit + off)
            hi = [c + (unit if v == brick.axis else L) for v, c in enumerate(lo)]
            chains.setdefault(i, []).append(AxisBox(tuple(lo), tuple(hi), denom=L))
    exit_brick = replace(brick, axis_base=brick.axis_base + brick.direction * 3 * unit)
    return chains, exit_brick


def elbow_deltas(brick: Brick, new_axis: int, new_direction: int
                 ) -> dict[Index, int]:
    """Axis perturbations an elbow entry must carry: each box's old-axis
    corner mirrors its grid column on the turn axis, with the mirror sign
    chosen so the entry-exit contacts are exactly index-matched, and the
    constant chosen so the pattern is introducible along the flow."""
    sign_p = brick.sign_of_dim[new_axis]
    pos_p = brick.pos_of_dim[new_axis]
    coef = -brick.direction * new_direction
    raw = {i: coef * 3 * brick.L * sign_p * i[pos_p] for i in brick.indices}
    peak = max(brick.direction * v for v in raw.values())
    if peak > 0:
        raw = {i: v - brick.direction * peak for i, v in raw.items()}
    bound = 3 * brick.L * brick.L // 8
    if any(abs(v) > bound for v in raw.values()):
        raise InvalidInput("elbow grid span exceeds the perturbation bound")
    return raw


def make_elbow(brick: Brick, new_axis: int, new_direction: int
               ) -> tuple[Chains, Brick]:
    """Turn the conduit onto a new axis.

    Emits one preparation step introducing the coupled axis perturbations,
    then the turned brick seated on the conduit's end facets.  The coupling
    makes old-axis and turn-axis overlaps demand opposite index orders, so
    only same-index boxes touch.  The entry must be free of fractional
    perturbation on the turn axis; other dims pass through.
    """
    if new_axis == brick.axis:
        raise InvalidInput("elbow must change axis")
    L, unit = brick.L, brick.L ** 2
    for i in brick.indices:
        fr = brick.frac.get(i)
        if fr is not None and fr[new_axis] != 0:
            raise InvalidInput("elbow entry carries fractional perturbation on "
                               "the turn axis")
    old_axis, old_dir = brick.axis, brick.direction
    pos_p = brick.pos_of_dim[new_axis]
    prep_chains, prep = morph_deltas(brick, elbow_deltas(brick, new_axis,
                                                         new_direction))
    ref = prep.indices[0]
    corners = {i: prep.corner(i) for i in prep.indices}
    # Exit position along the turn axis: covers the entry column.
    col = {i: corners[i][new_axis] for i in prep.indices}
    new_base_of = {i: (c if new_direction > 0 else c + L - unit)
                   for i, c in col.items()}
    # Exit position along the old axis: seated on the conduit's end facet.
    zeta = {i: (corners[i][old_axis] + unit if old_dir > 0
                else corners[i][old_axis] - L) for i in prep.indices}

    short_base = list(prep.short_base)
    pos_of_dim = list(prep.pos_of_dim)
    sign_of_dim = list(prep.sign_of_dim)
    pos_of_dim[new_axis] = -1
    sign_of_dim[new_axis] = 0
    short_base[new_axis] = 0
    pos_of_dim[old_axis] = pos_p
    stride_sign = -old_dir * new_direction * prep.sign_of_dim[new_axis]
    sign_of_dim[old_axis] = stride_sign
    short_base[old_axis] = zeta[ref] - 3 * L * stride_sign * ref[pos_p]
    for i in prep.indices:
        assert short_base[old_axis] + 3 * L * stride_sign * i[pos_p] == zeta[i]
    axis_base = new_base_of[ref] - 3 * L * prep.sign_of_dim[new_axis] * ref[pos_p]

    def exit_frac(i: Index) -> tuple[int, ...]:
        fr = brick.frac[i]
        return tuple(0 if v in (old_axis, new_axis) else fr[v]
                     for v in range(brick.dim))

    turned = Brick(L=L, dim=brick.dim, axis=new_axis, direction=new_direction,
                   axis_base=axis_base,
                   short_base=tuple(short_base),
                   pos_of_dim=tuple(pos_of_dim),
                   sign_of_dim=tuple(sign_of_dim),
                   indices=prep.indices,
                   axis_delta={i: new_base_of[i] - axis_base
                               for i in prep.indices},
                   frac={i: exit_frac(i) for i in prep.indices
                         if i in brick.frac})
    chains: Chains = {i: list(v) for i, v in prep_chains.items()}
    _merge(chains, turned)
    return chains, turned


def make_parallel_matching(brick: Brick, position: int,
                           perms: dict[tuple[int, ...], dict[int, int]],
                           column_dim: int | None = None
                           ) -> tuple[Chains, Brick, dict[Index, Index]]:
    """Permute one index position with the four-brick crossing gadget.

    perms maps a column (the index tuple with `position` removed) to a
    permutation of that position's values; missing columns stay identity.
    The chain rises into a brick whose axis and fractional perturbations both
    encode the permuted value, crosses through two long bricks laid along the
    travel dim (the short dim carrying `position`), and resumes the rise in
    permuted order one and a half box lengths across.  Boxes of one column
    stay inside a window of width under three units on the fractional dim, so
    distinct columns never interact.

    Entry must be an unperturbed upward brick.  Returns the chains keyed by
    entry index, the unperturbed exit brick (one adjustment past the last
    crossing brick), and the entry-to-exit index remap.
    """
    if brick.axis_delta or brick.frac:
        raise InvalidInput("parallel matching entry must be unperturbed")
    if brick.direction != 1:
        raise InvalidInput("parallel matching flows along +axis only")
    L, d, unit = brick.L, brick.dim, brick.L ** 2
    axis = brick.axis
    travel = brick.travel_dim_for(position)
    if column_dim is None:
        column_dim = next(v for v in range(d) if v not in (axis, travel))
    if column_dim in (axis, travel):
        raise InvalidInput("column dim must differ from the axis and travel dims")

    def column_of(i: Index) -> tuple[int, ...]:
        return tuple(x for p, x in enumerate(i) if p != position)

    def sigma(i: Index) -> int:
        mapping = perms.get(column_of(i))
        return mapping.get(i[position], i[position]) if mapping else i[position]

    remap = {}
    for i in brick.indices:
        out = list(i)
        out[position] = sigma(i)
        remap[i] = tuple(out)
    if len(set(remap.values())) != len(remap):
        raise InvalidInput("column permutations are not injective")

    z1 = brick.axis_base + unit
    t_min = min(brick.corner(i)[travel] for i in brick.indices)

    def frac_vec(value: int) -> tuple[int, ...]:
        return tuple(value if v == column_dim else 0 for v in range(d))

    chains: Chains = {}
    # Rising brick with coupled perturbations.
    b1 = replace(brick, axis_base=z1,
                 axis_delta={i: -3 * L * i[position] for i in brick.indices},
                 frac={i: frac_vec(i[position]) for i in brick.indices})
    _merge(chains, b1)

    # Two crossing bricks along the travel dim, then the permuted riser.
    riser_delta: dict[Index, int] = {}
    riser_frac: dict[Index, tuple[int, ...]] = {}
    for i in brick.indices:
        ip, iq = i[position], sigma(i)
        c1 = b1.corner(i)
        z_layer = c1[axis] + unit  # = z1 + unit - 3L*ip

        lo2 = list(c1)
        lo2[axis] = z_layer
        lo2[travel] = t_min
        lo2[column_dim] = c1[column_dim] - ip + L + ip  # grid + L + frac ip
        hi2 = [c + (unit if v == travel else L) for v, c in enumerate(lo2)]
        chains[i].append(AxisBox(tuple(lo2), tuple(hi2), denom=L))

        lo3 = list(lo2)
        lo3[travel] = t_min + unit // 2 + 3 * L * iq
        lo3[column_dim] = lo2[column_dim] - ip + iq
        hi3 = [c + (unit if v == travel else L) for v, c in enumerate(lo3)]
        chains[i].append(AxisBox(tuple(lo3), tuple(hi3), denom=L))

        lo4 = list(lo3)
        lo4[travel] = t_min + 3 * unit // 2 + 3 * L * iq
        lo4[column_dim] = lo3[column_dim] - L
        lo4[axis] = z_layer
        hi4 = [c + (unit if v == axis else L) for v, c in enumerate(lo4)]
        chains[i].append(AxisBox(tuple(lo4), tuple(hi4), denom=L))
        riser_delta[remap[i]] = -3 * L * ip
        riser_frac[remap[i]] = frac_vec(iq)

    # The permuted riser as a brick over the remapped indices.
    short_base = list(brick.short_base)
    short_base[travel] = t_min + 3 * unit // 2
    pos_of_dim = list(brick.pos_of_dim)
    sign_of_dim = list(brick.sign_of_dim)
    sign_of_dim[travel] = 1
    b4 = Brick(L=L, dim=d, axis=axis, direction=1, axis_base=z1 + unit,
               short_base=tuple(short_base), pos_of_dim=tuple(pos_of_dim),
               sign_of_dim=tuple(sign_of_dim),
               indices=tuple(sorted(remap[i] for i in brick.indices)),
               axis_delta=riser_delta, frac=riser_frac)
    for i in brick.indices:
        assert b4.box(remap[i]) == chains[i][-1], "riser brick mismatch"
    adj_chains, exit_brick = make_adjustment(b4, column_dim, +1)
    inverse = {v: k for k, v in remap.items()}
    for j, bs in adj_chains.items():
        chains[inverse[j]].extend(bs)
    return chains, exit_brick, remap


@dataclass
class BranchingPieces:
    """One degree-3 star per index: rise box, center box, up box, side box."""

    rise: dict[Index, AxisBox]
    center: dict[Index, AxisBox]
    up: dict[Index, AxisBox]
    side: dict[Index, AxisBox]
    up_brick: Brick
    side_brick: Brick


def make_branching(brick: Brick, position: int) -> BranchingPieces:
    """Per index, a degree-3 star: the conduit rises into a hub box touching
    the riser, a sideways continuation, and a second riser.

    Built from the first two parallel-matching bricks: the coupled riser, the
    long crossing brick (the star center), the riser's translate continuing
    upward, and the center's translate leaving along the travel dim (the
    short dim carrying `position`).  The up exit keeps the coupled
    perturbations; the side exit brick runs along the travel dim with the
    former axis as a mirrored short dim.
    """
    if brick.axis_delta or brick.frac:
        raise InvalidInput("branching entry must be unperturbed")
    if brick.direction != 1:
        raise InvalidInput("branching flows along +axis only")
    L, d, unit = brick.L, brick.dim, brick.L ** 2
    axis = brick.axis
    travel = brick.travel_dim_for(position)
    column_dim = next(v for v in range(d) if v not in (axis, travel))

    def frac_vec(value: int) -> tuple[int, ...]:
        return tuple(value if v == column_dim else 0 for v in range(d))

    z1 = brick.axis_base + unit
    t_min = min(brick.corner(i)[travel] for i in brick.indices)
    b1 = replace(brick, axis_base=z1,
                 axis_delta={i: -3 * L * i[position] for i in brick.indices},
                 frac={i: frac_vec(i[position]) for i in brick.indices})
    rise = b1.boxes()

    center: dict[Index, AxisBox] = {}
    for i in brick.indices:
        c1 = b1.corner(i)
        lo2 = list(c1)
        lo2[axis] = c1[axis] + unit
        lo2[travel] = t_min
        lo2[column_dim] = c1[column_dim] + L
        hi2 = [c + (unit if v == travel else L) for v, c in enumerate(lo2)]
        center[i] = AxisBox(tuple(lo2), tuple(hi2), denom=L)

    # Up continuation: the riser translated by (3, 2, L-1) along
    # (travel, column, axis).
    up_brick = replace(
        b1, axis_base=b1.axis_base + unit - L,
        short_base=tuple(
            b + (3 * L if v == travel else 2 * L if v == column_dim else 0)
            for v, b in enumerate(b1.short_base)))
    up = up_brick.boxes()

    # Side continuation: the center brick translated one box length along
    # travel; as a brick, the former axis becomes a mirrored short dim.
    side: dict[Index, AxisBox] = {}
    for i in brick.indices:
        cb = center[i]
        lo = tuple(c + (unit if v == travel else 0) for v, c in enumerate(cb.lo))
        hi = tuple(c + (unit if v == travel else 0) for v, c in enumerate(cb.hi))
        side[i] = AxisBox(lo, hi, denom=L)
    pos_of_dim = list(brick.pos_of_dim)
    sign_of_dim = list(brick.sign_of_dim)
    pos_of_dim[axis] = position
    sign_of_dim[axis] = -1
    pos_of_dim[travel] = -1
    sign_of_dim[travel] = 0
    short_base = list(brick.short_base)
    short_base[axis] = z1 + unit
    short_base[column_dim] += L
    short_base[travel] = 0
    side_brick = Brick(
        L=L, dim=d, axis=travel, direction=1,
        axis_base=t_min + unit,
        short_base=tuple(short_base),
        pos_of_dim=tuple(pos_of_dim), sign_of_dim=tuple(sign_of_dim),
        indices=brick.indices,
        frac={i: frac_vec(i[position]) for i in brick.indices},
    )
    for i in brick.indices:
        assert side_brick.box(i) == side[i], (i, side_brick.box(i), side[i])
    return BranchingPieces(rise, center, up, side, up_brick, side_brick)
