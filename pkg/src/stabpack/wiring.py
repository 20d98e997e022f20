"""Grid permutation decomposition and vertex-disjoint path routing.

Any permutation of a product A x B factors into (change-B, change-A, change-B)
steps; iterating over a d-fold product gives a palindromic sequence of 2d-1
single-axis permutations.  Axis permutations are realized inside a Euclidean
grid by odd-even-transposition routing: each comparator round swaps disjoint
adjacent token pairs, and every swap detours through a spare parallel plane,
since a flat two-dimensional slab cannot host a crossing pair of vertex-
disjoint paths.  Stacking phases along one axis routes arbitrary matchings
between opposite facets of a grid cube, and of its blown-up variant where
every grid vertex is a t-clique cell.

Coordinates are 0-based throughout; the routing height axis is the last one.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import InvalidInput

Vertex = tuple[int, ...]


# ---------------------------------------------------------------------------
# permutations over index tuples


@dataclass(frozen=True)
class GridPermutation:
    """Bijection on index tuples range(shape[0]) x ... x range(shape[-1])."""

    shape: tuple[int, ...]
    mapping: tuple[tuple[int, ...], ...]  # indexed by lexicographic rank of source

    def __post_init__(self):
        size = 1
        for s in self.shape:
            size *= s
        if len(self.mapping) != size or len(set(self.mapping)) != size:
            raise InvalidInput("mapping is not a bijection on the index domain")

    def rank(self, tup: Sequence[int]) -> int:
        r = 0
        for s, v in zip(self.shape, tup):
            if not 0 <= v < s:
                raise InvalidInput(f"tuple {tuple(tup)} out of domain {self.shape}")
            r = r * s + v
        return r

    def __call__(self, tup: Sequence[int]) -> tuple[int, ...]:
        return self.mapping[self.rank(tup)]

    def domain(self) -> list[tuple[int, ...]]:
        return list(itertools.product(*(range(s) for s in self.shape)))

    def is_identity(self) -> bool:
        return all(self(t) == t for t in self.domain())

    def is_axis_restricted(self, axis: int) -> bool:
        """True if only the given coordinate ever changes."""
        return all(
            all(src[i] == dst[i] for i in range(len(self.shape)) if i != axis)
            for src, dst in zip(self.domain(), self.mapping)
        )

    def compose(self, first: "GridPermutation") -> "GridPermutation":
        """Returns self o first (apply `first`, then self)."""
        if self.shape != first.shape:
            raise InvalidInput("shape mismatch in composition")
        return GridPermutation(self.shape, tuple(self(dst) for dst in first.mapping))

    def inverse(self) -> "GridPermutation":
        return from_dict(self.shape, {dst: src for src, dst
                                      in zip(self.domain(), self.mapping)})


def identity_perm(shape: Sequence[int]) -> GridPermutation:
    shape = tuple(shape)
    return GridPermutation(shape, tuple(itertools.product(*(range(s) for s in shape))))


def from_dict(shape: Sequence[int], mapping: dict) -> GridPermutation:
    shape = tuple(shape)
    out = [tuple(mapping.get(tup, tup))
           for tup in itertools.product(*(range(s) for s in shape))]
    return GridPermutation(shape, tuple(out))


def compose_all(factors: Sequence[GridPermutation]) -> GridPermutation:
    """Apply factors left to right: result = f_last o ... o f_first."""
    if not factors:
        raise InvalidInput("no factors")
    acc = factors[0]
    for f in factors[1:]:
        acc = f.compose(acc)
    return acc


def _perfect_matching_rounds(num_left: int, regularity: int,
                             edges: list[tuple[int, int]]) -> list[int]:
    """Split a regular bipartite multigraph into `regularity` perfect matchings.

    edges[i] = (left, right); returns the matching index of every edge.
    Repeated augmenting-path matchings; regularity keeps every round perfect.
    """
    round_of = [-1] * len(edges)
    incident: list[list[int]] = [[] for _ in range(num_left)]
    for eid, (a, _b) in enumerate(edges):
        incident[a].append(eid)
    for rnd in range(regularity):
        match_right: dict[int, int] = {}  # right node -> edge id

        def try_augment(a: int, visited: set[int]) -> bool:
            for eid in incident[a]:
                if round_of[eid] != -1:
                    continue
                b = edges[eid][1]
                if b in visited:
                    continue
                visited.add(b)
                if b not in match_right or try_augment(edges[match_right[b]][0], visited):
                    match_right[b] = eid
                    return True
            return False

        for a in range(num_left):
            if not try_augment(a, set()):
                raise AssertionError("regular multigraph round was not perfect")
        for eid in match_right.values():
            round_of[eid] = rnd
    return round_of


def _three_factor(pi: GridPermutation, outer: str
                  ) -> tuple[GridPermutation, GridPermutation, GridPermutation]:
    """Factor pi on A x B as g2 o mid o g1 (g1 applied first).

    outer="B": g1, g2 change only the B coordinate, mid changes only A.
    outer="A": g1, g2 change only the A coordinate, mid changes only B.
    """
    if len(pi.shape) != 2:
        raise InvalidInput("three-factor decomposition needs a 2-axis domain")
    na, nb = pi.shape
    elems = pi.domain()
    if outer == "B":
        edges = [(a, pi((a, b))[0]) for a, b in elems]
        rounds = _perfect_matching_rounds(na, nb, edges)
        mid_of = {elem: rounds[i] for i, elem in enumerate(elems)}
        g1 = from_dict(pi.shape, {e: (e[0], mid_of[e]) for e in elems})
        mid = from_dict(pi.shape, {(e[0], mid_of[e]): (pi(e)[0], mid_of[e])
                                   for e in elems})
        g2 = from_dict(pi.shape, {(pi(e)[0], mid_of[e]): pi(e) for e in elems})
    elif outer == "A":
        edges = [(b, pi((a, b))[1]) for a, b in elems]
        rounds = _perfect_matching_rounds(nb, na, edges)
        mid_of = {elem: rounds[i] for i, elem in enumerate(elems)}
        g1 = from_dict(pi.shape, {e: (mid_of[e], e[1]) for e in elems})
        mid = from_dict(pi.shape, {(mid_of[e], e[1]): (mid_of[e], pi(e)[1])
                                   for e in elems})
        g2 = from_dict(pi.shape, {(mid_of[e], pi(e)[1]): pi(e) for e in elems})
    else:
        raise InvalidInput(f"unknown outer {outer!r}")
    assert compose_all([g1, mid, g2]).mapping == pi.mapping
    return g1, mid, g2


def decompose_rowcol(pi: GridPermutation
                     ) -> tuple[GridPermutation, GridPermutation, GridPermutation]:
    """pi = sigma_B2 o sigma_A o sigma_B1: outer factors move only the second
    (B) coordinate, the middle factor only the first (A)."""
    g1, mid, g2 = _three_factor(pi, outer="B")
    assert g1.is_axis_restricted(1) and g2.is_axis_restricted(1)
    assert mid.is_axis_restricted(0)
    return g1, mid, g2


def decompose_axes(pi: GridPermutation) -> list[GridPermutation]:
    """Palindromic single-axis factorization, axes (0, 1, ..., m-1, ..., 1, 0).

    Returns 2m-1 factors in application order; their composition equals pi.
    """
    m = len(pi.shape)
    if m < 2:
        raise InvalidInput("need at least two axes")
    if m == 2:
        return list(_three_factor(pi, outer="A"))
    rest_shape = pi.shape[1:]
    rest_tuples = list(itertools.product(*(range(s) for s in rest_shape)))
    rest_rank = {tup: i for i, tup in enumerate(rest_tuples)}
    flat_map = {(t[0], rest_rank[t[1:]]): (pi(t)[0], rest_rank[pi(t)[1:]])
                for t in pi.domain()}
    flat = from_dict((pi.shape[0], len(rest_tuples)), flat_map)
    g1, mid, g2 = _three_factor(flat, outer="A")

    def unflatten(grid2: GridPermutation) -> GridPermutation:
        out = {}
        for (a, br), (a2, br2) in zip(grid2.domain(), grid2.mapping):
            out[(a,) + rest_tuples[br]] = (a2,) + rest_tuples[br2]
        return from_dict(pi.shape, out)

    # mid fixes axis 0: decompose each slice and reassemble per factor slot.
    slots: list[dict] = [dict() for _ in range(2 * (m - 1) - 1)]
    for a in range(pi.shape[0]):
        slice_map = {tup: rest_tuples[mid((a, br))[1]]
                     for br, tup in enumerate(rest_tuples)}
        for j, f in enumerate(decompose_axes(from_dict(rest_shape, slice_map))):
            for src, dst in zip(f.domain(), f.mapping):
                slots[j][(a,) + src] = (a,) + dst
    factors = [unflatten(g1)] + [from_dict(pi.shape, mp) for mp in slots] + [unflatten(g2)]
    assert compose_all(factors).mapping == pi.mapping
    for f, ax in zip(factors, _palindrome_axes(m)):
        assert f.is_axis_restricted(ax)
    return factors


def _palindrome_axes(m: int) -> list[int]:
    return list(range(m)) + list(range(m - 2, -1, -1))


# ---------------------------------------------------------------------------
# host graphs and path sets


@dataclass(frozen=True)
class GridGraph:
    """Euclidean grid graph on a product of ranges; unit-step adjacency."""

    dims: tuple[int, ...]

    def has_vertex(self, v: Vertex) -> bool:
        return len(v) == len(self.dims) and all(0 <= x < s for x, s in zip(v, self.dims))

    def adjacent(self, u: Vertex, v: Vertex) -> bool:
        if not (self.has_vertex(u) and self.has_vertex(v)):
            return False
        return sum(abs(a - b) for a, b in zip(u, v)) == 1


@dataclass(frozen=True)
class BlownCube:
    """Blown-up grid cube: vertices (x_1..x_d, i), cells fully joined to
    neighboring cells ([side]^d grid) and internally cliques of size t."""

    side: int
    t: int
    d: int

    def __post_init__(self):
        if self.side < 1 or self.t < 1 or self.d < 1:
            raise InvalidInput("side, t, d must be positive")

    def has_vertex(self, v: Vertex) -> bool:
        if len(v) != self.d + 1:
            return False
        return all(0 <= x < self.side for x in v[:-1]) and 0 <= v[-1] < self.t

    def adjacent(self, u: Vertex, v: Vertex) -> bool:
        if u == v or not (self.has_vertex(u) and self.has_vertex(v)):
            return False
        cu, cv = u[:-1], v[:-1]
        return cu == cv or sum(abs(a - b) for a, b in zip(cu, cv)) == 1


@dataclass(frozen=True)
class PathSet:
    paths: tuple[tuple[Vertex, ...], ...]
    endpoints: tuple[tuple[Vertex, Vertex], ...]

    def __len__(self) -> int:
        return len(self.paths)


def verify_disjoint_paths(ps: PathSet, host, matching: Sequence[tuple[Vertex, Vertex]]
                          ) -> tuple[bool, str | None]:
    """Consecutive adjacency, pairwise vertex-disjointness, and endpoint
    correctness; returns the first violation if any."""
    seen: set[Vertex] = set()
    for idx, path in enumerate(ps.paths):
        if not path:
            return False, f"path {idx} is empty"
        for v in path:
            if not host.has_vertex(v):
                return False, f"path {idx} leaves the host at {v}"
            if v in seen:
                return False, f"vertex {v} used by more than one path"
            seen.add(v)
        for a, b in zip(path, path[1:]):
            if not host.adjacent(a, b):
                return False, f"path {idx} step {a} -> {b} not an edge"
    want = {(p, q) for p, q in matching}
    got = {(path[0], path[-1]) for path in ps.paths}
    if want != got:
        return False, f"endpoints mismatch: missing {want - got}, extra {got - want}"
    return True, None


# ---------------------------------------------------------------------------
# odd-even transposition scheduling


def _oet_schedule(sigma: Sequence[int]) -> list[list[int]]:
    """Rounds of disjoint adjacent swaps realizing sigma, trimmed when done.

    Sorting the destination array dest[p] = sigma(p) by alternating
    odd/even comparators moves the token starting at p to position sigma(p).
    """
    n = len(sigma)
    dest = list(sigma)
    target = sorted(dest)
    rounds: list[list[int]] = []
    r = 0
    while dest != target:
        swaps = []
        for p in range(r % 2, n - 1, 2):
            if dest[p] > dest[p + 1]:
                dest[p], dest[p + 1] = dest[p + 1], dest[p]
                swaps.append(p)
        rounds.append(swaps)
        r += 1
        if r > n + 1:
            raise AssertionError("odd-even transposition failed to converge")
    return rounds


class _Paths:
    """Per-token vertex lists with deduplication of repeated glue vertices."""

    def __init__(self, keys: Iterable):
        self.by_token: dict = {k: [] for k in keys}

    def extend(self, key, vertices: Iterable[Vertex]) -> None:
        path = self.by_token[key]
        for v in vertices:
            if not path or path[-1] != v:
                path.append(v)


def _swap_block_plane(left_base: list[int], right_base: list[int], axis: int,
                      detour: int, z: int) -> tuple[list[Vertex], list[Vertex]]:
    """Crossing of two adjacent tokens inside a 2-plane slab, 3 layers tall.

    The left token walks along its own plane one layer up; the right token
    sidesteps into the spare plane at the entry layer, walks, rises, and
    returns a layer below the exit.  The spare plane is never touched on the
    exit layer, so consecutive rounds do not contend for it.
    """
    x_left, x_right = left_base[axis], right_base[axis]
    lv: list[Vertex] = [tuple(left_base) + (z,)]
    b = list(left_base)
    for x in range(x_left, x_right + 1):
        b[axis] = x
        lv.append(tuple(b) + (z + 1,))
    lv.append(tuple(b) + (z + 2,))
    lv.append(tuple(b) + (z + 3,))

    rv: list[Vertex] = [tuple(right_base) + (z,)]
    b = list(right_base)
    b[detour] += 1
    for x in range(x_right, x_left - 1, -1):
        b[axis] = x
        rv.append(tuple(b) + (z,))
    rv.append(tuple(b) + (z + 1,))
    rv.append(tuple(b) + (z + 2,))
    b[detour] -= 1
    rv.append(tuple(b) + (z + 2,))
    rv.append(tuple(b) + (z + 3,))
    return lv, rv


def _swap_block_doubled(left_base: list[int], right_base: list[int], axis: int,
                        detour: int, z: int) -> tuple[list[Vertex], list[Vertex]]:
    """Crossing of two tokens on even columns 2p and 2p+2 via the odd column
    and the odd detour plane, touching the detour plane only on layers z and
    z+1 so consecutive rounds never contend for it."""
    x_left, x_right = left_base[axis], right_base[axis]
    assert x_right == x_left + 2
    mid = x_left + 1
    b = list(left_base)
    lv: list[Vertex] = [tuple(b) + (z,)]
    b[axis] = mid
    lv.append(tuple(b) + (z,))
    lv.append(tuple(b) + (z + 1,))
    b[axis] = x_right
    lv.append(tuple(b) + (z + 1,))
    lv.append(tuple(b) + (z + 2,))

    b = list(right_base)
    rv: list[Vertex] = [tuple(b) + (z,)]
    b[detour] += 1
    for x in (x_right, mid, x_left):
        b[axis] = x
        rv.append(tuple(b) + (z,))
    rv.append(tuple(b) + (z + 1,))
    b[detour] -= 1
    rv.append(tuple(b) + (z + 1,))
    rv.append(tuple(b) + (z + 2,))
    return lv, rv


def _run_oet_phase(paths: _Paths, positions: dict, schedules: dict,
                   axis: int, z0: int, height: int, to_physical,
                   block, layers_per_round: int = 2) -> None:
    """Advance all tokens through one axis-permutation phase.

    positions maps token -> logical facet coordinates; schedules maps a line
    key (coords without `axis`) to its swap rounds; to_physical maps logical
    facet coords to the physical coordinate vector; block(lp, rp, rnd, z)
    produces the two vertex lists of one swap.
    """
    max_rounds = max((len(s) for s in schedules.values()), default=0)
    assert layers_per_round * max_rounds <= height
    for rnd in range(max_rounds):
        z = z0 + layers_per_round * rnd
        occupant = {}
        for tok, coords in positions.items():
            line = tuple(c for i, c in enumerate(coords) if i != axis)
            occupant[(line, coords[axis])] = tok
        handled: set = set()
        for tok, coords in list(positions.items()):
            if tok in handled:
                continue
            line = tuple(c for i, c in enumerate(coords) if i != axis)
            schedule = schedules.get(line, [])
            swaps = schedule[rnd] if rnd < len(schedule) else []
            p = coords[axis]
            if p in swaps:
                other = occupant[(line, p + 1)]
                oc = positions[other]
                lv, rv = block(to_physical(coords), to_physical(oc), rnd, z)
                paths.extend(tok, lv)
                paths.extend(other, rv)
                positions[tok] = oc
                positions[other] = coords
                handled.add(tok)
                handled.add(other)
            elif p - 1 in swaps:
                continue  # right half; handled with its partner
            else:
                b = to_physical(coords)
                paths.extend(tok, [tuple(b) + (z + j,)
                                   for j in range(layers_per_round + 1)])
                handled.add(tok)
    z_end = z0 + height
    for tok, coords in positions.items():
        b = to_physical(coords)
        last_z = paths.by_token[tok][-1][-1]
        paths.extend(tok, [tuple(b) + (zz,) for zz in range(last_z + 1, z_end + 1)])


def route_line_min_height(n: int) -> int:
    """Each of the at most n comparator rounds spans three layers, plus entry
    and exit; a two-layer round cannot keep consecutive rounds off the shared
    spare plane in a 2-thick slab."""
    return 3 * n + 2


def route_line_permutation(sigma: Sequence[int], height: int) -> PathSet:
    """Route sigma with vertex-disjoint monotone paths in an [n] x [2] x [h] slab.

    Paths run from (i, 0, 0) to (sigma(i), 0, h-1); each comparator swap spans
    a 2-column, 3-layer block whose crossing detours into the spare plane.
    """
    n = len(sigma)
    if sorted(sigma) != list(range(n)):
        raise InvalidInput("sigma is not a permutation")
    if height < route_line_min_height(n):
        raise InvalidInput(f"height {height} < 3n+2 = {route_line_min_height(n)}")
    schedule = _oet_schedule(list(sigma))
    paths = _Paths(range(n))
    positions = {i: (i, 0) for i in range(n)}
    for i in range(n):
        paths.extend(i, [(i, 0, 0)])

    def block(lp, rp, rnd, z):
        return _swap_block_plane(lp, rp, axis=0, detour=1, z=z)

    _run_oet_phase(paths, positions, {(0,): schedule}, axis=0,
                   z0=0, height=height - 1, to_physical=list, block=block,
                   layers_per_round=3)
    out = tuple(tuple(paths.by_token[i]) for i in range(n))
    endpoints = tuple(((i, 0, 0), (sigma[i], 0, height - 1)) for i in range(n))
    return PathSet(out, endpoints)


# ---------------------------------------------------------------------------
# cube wiring


def cube_wiring_min_height(n: int, d: int) -> int:
    """Worst-case interior height: 2(d-1) fan stages of n layers plus 2d-3
    odd-even phases of at most 2n layers, plus the entry layer."""
    if n <= 1:
        return 2
    return 2 * (d - 1) * n + (2 * d - 3) * 2 * n + 1


def _pad_matching(points: list, matching: Sequence[tuple]) -> dict:
    """Extend a partial matching on `points` to a permutation, identity first."""
    dst_of = {}
    used_dst = set()
    for p, q in matching:
        p, q = tuple(p), tuple(q)
        if p in dst_of or q in used_dst:
            raise InvalidInput("matching endpoint reused")
        dst_of[p] = q
        used_dst.add(q)
    for p in points:
        if p not in dst_of and p not in used_dst:
            dst_of[p] = p
            used_dst.add(p)
    free = [q for q in points if q not in used_dst]
    for p in points:
        if p not in dst_of:
            dst_of[p] = free.pop(0)
    return dst_of


def _plan_phases(pi: GridPermutation, n: int, d: int):
    """Factor pi and build per-line odd-even schedules; returns
    (factor axes, schedules per factor, phase heights, total needed height)."""
    if pi.is_identity():
        return [], [], [], 2
    if d - 1 == 1:
        raise InvalidInput("facet must have at least 2 axes")
    factors = decompose_axes(pi)
    axes = _palindrome_axes(d - 1)
    schedules = []
    heights = []
    for f, axis in zip(factors, axes):
        per_line: dict = {}
        for line in itertools.product(*(range(n) for _ in range(d - 2))):
            sigma = []
            for p in range(n):
                coords = line[:axis] + (p,) + line[axis:]
                sigma.append(f(coords)[axis])
            if sigma != list(range(n)):
                per_line[line] = _oet_schedule(sigma)
        schedules.append(per_line)
        heights.append(2 * max((len(s) for s in per_line.values()), default=0))
    needed = 2 * (d - 1) * n + sum(heights) + 1
    return axes, schedules, heights, needed


def cube_wiring(matching: Sequence[tuple[tuple[int, ...], tuple[int, ...]]],
                n: int, d: int, height: int | None = None) -> PathSet:
    """Vertex-disjoint paths realizing a matching between opposite facets.

    Pairs facet tuples in [n]^(d-1): source (p, z=0) to target (q, z=height-1)
    inside the grid of dims (2n,)*(d-1) + (height,).  Tokens fan out to
    doubled coordinates so every odd-even swap has a spare odd plane, run the
    palindromic axis phases, and fan back in.  Unmatched facet points become
    identity dummies that route but are dropped from the result.
    """
    if d < 3:
        raise InvalidInput("cube wiring needs dimension >= 3")
    facet = list(itertools.product(*(range(n) for _ in range(d - 1))))
    dst_of = _pad_matching(facet, matching)
    pi = from_dict((n,) * (d - 1), dst_of)
    axes, schedules, heights, needed = _plan_phases(pi, n, d)
    if height is None:
        height = max(needed, 2)
    if height < needed:
        raise InvalidInput(f"height {height} below required {needed}")

    paths = _Paths(facet)
    endpoints = tuple((tuple(p) + (0,), tuple(q) + (height - 1,))
                      for p, q in matching)
    if pi.is_identity():
        for p, q in matching:
            assert tuple(p) == tuple(q)
        emitted = tuple(tuple(tuple(p) + (z,) for z in range(height))
                        for p, q in matching)
        return PathSet(emitted, endpoints)

    positions = {p: p for p in facet}
    doubled = [False] * (d - 1)

    def to_physical(coords) -> list[int]:
        return [2 * c if doubled[i] else c for i, c in enumerate(coords)]

    for p in facet:
        paths.extend(p, [p + (0,)])
    z = 0

    # Fan-out: walk layers descend with the coordinate so staircases in a
    # shared line never collide.
    for axis in range(d - 1):
        for tok, coords in positions.items():
            i = coords[axis]
            walk_z = z + (n - 1 - i)
            base = to_physical(coords)
            verts = [tuple(base) + (zz,) for zz in range(z, walk_z + 1)]
            for x in range(i, 2 * i + 1):
                b = list(base)
                b[axis] = x
                verts.append(tuple(b) + (walk_z,))
            b = list(base)
            b[axis] = 2 * i
            verts += [tuple(b) + (zz,) for zz in range(walk_z + 1, z + n + 1)]
            paths.extend(tok, verts)
        doubled[axis] = True
        z += n

    for axis, per_line, h_k in zip(axes, schedules, heights):
        if h_k == 0:
            continue
        detour = (axis + 1) % (d - 1)

        def block(lp, rp, rnd, zz, _detour=detour, _axis=axis):
            return _swap_block_doubled(lp, rp, _axis, _detour, zz)

        _run_oet_phase(paths, positions, per_line, axis, z, h_k,
                       to_physical, block)
        z += h_k

    # Fan-in: walk layers ascend with the target coordinate.
    for axis in range(d - 1):
        for tok, coords in positions.items():
            i = coords[axis]
            walk_z = z + i
            base = to_physical(coords)
            verts = [tuple(base) + (zz,) for zz in range(z, walk_z + 1)]
            for x in range(2 * i, i - 1, -1):
                b = list(base)
                b[axis] = x
                verts.append(tuple(b) + (walk_z,))
            b = list(base)
            b[axis] = i
            verts += [tuple(b) + (zz,) for zz in range(walk_z + 1, z + n + 1)]
            paths.extend(tok, verts)
        doubled[axis] = False
        z += n

    for tok, coords in positions.items():
        base = to_physical(coords)
        last_z = paths.by_token[tok][-1][-1]
        paths.extend(tok, [tuple(base) + (zz,)
                           for zz in range(last_z + 1, height)])

    emitted = tuple(tuple(paths.by_token[tuple(p)]) for p, _q in matching)
    for path, (src, dst) in zip(emitted, endpoints):
        assert path[0] == src and path[-1] == dst
    return PathSet(emitted, endpoints)


# ---------------------------------------------------------------------------
# blown-up cube wiring


def blown_cube_min_side(n: int, d: int) -> int:
    return max(2 * n, cube_wiring_min_height(n, d) + 2, 3)


def blown_cube_wiring(matching: Sequence[tuple[Vertex, Vertex]],
                      n: int, t: int, d: int,
                      side: int | None = None) -> tuple[PathSet, BlownCube]:
    """Embed a matching between bottom and top facets of a blown-up cube.

    Pairs (x_1..x_{d-1}, 0, i) with (y_1..y_{d-1}, side-1, j), where x, y lie
    in the [n]^(d-1) corner of the facet grid.  The padded permutation factors
    into intra-cell reindexings realized at the two boundary layers around
    per-index interior cube wirings.  With side=None the smallest side that
    fits the trimmed schedules is chosen.  Returns (paths, host).
    """
    if d < 3:
        raise InvalidInput("blown cube wiring needs d >= 3")
    if t < 1:
        raise InvalidInput("t must be positive")
    facet = list(itertools.product(*(range(n) for _ in range(d - 1))))
    rank = {x: i for i, x in enumerate(facet)}
    na = len(facet)

    pairs = []
    for p, q in matching:
        px, pz, pi_ = tuple(p[:-2]), p[-2], p[-1]
        qx, _qz, qi = tuple(q[:-2]), q[-2], q[-1]
        if pz != 0:
            raise InvalidInput("matching source must lie on the bottom facet")
        if px not in rank or qx not in rank or not (0 <= pi_ < t and 0 <= qi < t):
            raise InvalidInput("matching endpoint outside the wiring corner")
        pairs.append(((rank[px], pi_), (rank[qx], qi)))

    elems = list(itertools.product(range(na), range(t)))
    dst_of = _pad_matching(elems, pairs)
    pi = from_dict((na, t), dst_of)
    g_b1, g_a, g_b2 = decompose_rowcol(pi)

    # Interior need: the worst trimmed height over intra indices.
    interior_matchings = {}
    need = 2
    for i in range(t):
        full = {facet[a]: facet[g_a((a, i))[0]] for a in range(na)}
        interior_matchings[i] = full
        _axes, _sch, _h, needed = _plan_phases(
            from_dict((n,) * (d - 1), full), n, d)
        need = max(need, needed)
    min_side = max(2 * n, need + 2, 3)
    if side is None:
        side = min_side
    if side < min_side:
        raise InvalidInput(f"side {side} below required {min_side}")
    interior_h = side - 2

    cube_paths: dict[int, dict] = {}
    for i in range(t):
        full = [(x, y) for x, y in interior_matchings[i].items()]
        ps = cube_wiring(full, n, d, height=interior_h)
        cube_paths[i] = {p[0][:-1]: p for p in ps.paths}

    paths = []
    endpoints = []
    for (a, i), (a2, i2) in pairs:
        _, b_mid = g_b1((a, i))
        am, bm = g_a((a, b_mid))
        assert bm == b_mid and am == a2 and g_b2((am, bm)) == (a2, i2)
        interior = cube_paths[b_mid][facet[a]]
        assert interior[-1][:-1] == facet[a2]
        full_path = [facet[a] + (0, i)]
        full_path += [v[:-1] + (v[-1] + 1, b_mid) for v in interior]
        full_path.append(facet[a2] + (side - 1, i2))
        paths.append(tuple(full_path))
        endpoints.append((facet[a] + (0, i), facet[a2] + (side - 1, i2)))
    host = BlownCube(side=side, t=t, d=d)
    return PathSet(tuple(paths), tuple(endpoints)), host
