"""Realizing a degree-3 blown-cube subgraph as canonical 1 x .. x 1 x L boxes.

Every used cell gets a module around a vertical hub column at the module
center.  Station blocks (branching gadgets) sit at globally fixed heights,
one per attachment role; each cell's hub program is generated once with every
index row active, and each graph vertex replays the slice between its
attachments, so all rows share one mechanically verified gadget sequence.
Vertical edges continue the hub through a general matching gadget into the
neighbor's hub; horizontal and intra-cell edges leave a station sideways, run
a general matching gadget inside the role's height band, and meet the partner
cell's station conduit head on.  General matchings end sign-normalized, so
index-to-row maps at junctions are the identity and gadget permutations are
read off the edge matchings directly.

Each edge's chain carries one parity gadget; a second pass flips it to the
four-box variant wherever needed so every edge becomes a path of odd length,
making the emitted intersection graph an even subdivision of the input.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Sequence

from .bricks import (Brick, Index, basic_brick, index_range, make_adjustment,
                     make_advance, make_branching, make_closing_advance,
                     make_elbow, make_parallel_matching, make_parity_fix)
from .errors import InvalidInput
from .geometry import AxisBox
from .graphs import IntersectionGraph, build_intersection_graph
from .wiring import _palindrome_axes, decompose_axes, from_dict

logger = logging.getLogger(__name__)

Vertex = tuple  # (cell..., intra index q)
Edge = tuple[Vertex, Vertex]

# Module layout constants, in box lengths (one box length = L^2 scaled).
STATION_PITCH = 10
FIRST_STATION = 5
HUB_MERGE = 2
TAIL = 34
CORE_LANE = 28
STAGING = 3
MEET_DEPTH = 14   # how far into the minus-side module head-on meets happen
ROLE_DOWN = "down"
ROLE_UP = "up"


@dataclass(frozen=True)
class BoxInstanceWithProvenance:
    boxes: tuple[AxisBox, ...]
    L: int
    dim: int
    representatives: dict[Vertex, int]
    edge_paths: dict[Edge, tuple[int, ...]]
    mis_target: int
    double_subdivisions: int

    def graph(self) -> IntersectionGraph:
        return build_intersection_graph(self.boxes)


class _Conduit:
    """A multi-wire conduit under construction."""

    def __init__(self, brick: Brick, wire_of: dict[Index, object], sink: dict):
        self.brick = brick.with_indices(sorted(wire_of))
        self.wire_of = dict(wire_of)
        self.sink = sink
        self._needs_gap = False  # last piece was a half-length adjustment

    def _absorb(self, chains, remap=None):
        for idx, boxes in chains.items():
            self.sink.setdefault(self.wire_of[idx], []).extend(boxes)
        if remap:
            self.wire_of = {remap[i]: w for i, w in self.wire_of.items()}

    def emit_brick(self):
        self._absorb({i: [self.brick.box(i)] for i in self.brick.indices})

    def advance(self, distance: int):
        if distance:
            chains, self.brick = make_advance(self.brick, distance)
            self._absorb(chains)
            self._needs_gap = False

    def advance_to(self, axis_base: int):
        dist = (axis_base - self.brick.axis_base) * self.brick.direction
        if dist < 0:
            raise InvalidInput(f"cannot advance backwards by {dist}")
        self.advance(dist)

    def close_gap_to(self, axis_base: int):
        """Land exactly on a meeting face, using at most one short final step
        (safe because it directly follows a full-length step)."""
        dist = (axis_base - self.brick.axis_base) * self.brick.direction
        unit = self.brick.L ** 2
        if dist < 0:
            raise InvalidInput(f"meeting gap {dist} is negative")
        if dist == 0:
            return
        if unit // 2 + self.brick.L <= dist <= unit:
            self.advance(dist)
            return
        if self._needs_gap:
            if dist < unit + self.brick.L:
                raise InvalidInput(f"meeting gap {dist} after a half-length step")
            self.advance(unit)
            dist -= unit
        chains, self.brick = make_closing_advance(self.brick, dist)
        self._absorb(chains)
        self._needs_gap = False

    def adjust(self, dim: int, sign: int = 1):
        # Two half-length adjustments in a row would let the box before them
        # reach the second one; pad with a full step first.
        if self._needs_gap:
            self.advance(self.brick.L ** 2)
        chains, self.brick = make_adjustment(self.brick, dim, sign)
        self._absorb(chains)
        self._needs_gap = True

    def clear_perturbations(self, dim: int | None = None):
        if not self.brick.axis_delta and not self.brick.frac:
            return
        if dim is None:
            dim = next(v for v in range(self.brick.dim) if v != self.brick.axis)
        sign = 1
        for i in self.brick.indices:
            fr = self.brick.frac.get(i)
            if fr is not None and fr[dim] < 0:
                sign = -1
                break
        self.adjust(dim, sign)

    def elbow(self, new_axis: int, new_direction: int):
        try:
            chains, self.brick = make_elbow(self.brick, new_axis, new_direction)
        except InvalidInput:
            # Carried perturbations incompatible with the turn coupling:
            # reset to an unperturbed brick and retry.
            self.clear_perturbations()
            chains, self.brick = make_elbow(self.brick, new_axis, new_direction)
        self._absorb(chains)

    def parity(self, variants_by_wire: dict[object, int]):
        variants = {i: variants_by_wire.get(w, 3) for i, w in self.wire_of.items()}
        chains, self.brick = make_parity_fix(self.brick, variants)
        self._absorb(chains)

    def pm(self, position: int, perms: dict):
        chains, self.brick, remap = make_parallel_matching(self.brick, position, perms)
        self._absorb(chains, remap)
        self._needs_gap = True  # the crossing gadget ends with an adjustment

    def _dry(self) -> "_Conduit":
        return _Conduit(self.brick, {i: ("dry", i) for i in self.brick.indices}, {})

    def _min_row(self, dim: int) -> int:
        return min(self.brick.corner(i)[dim]
                   - self.brick.frac.get(i, (0,) * self.brick.dim)[dim]
                   for i in self.brick.indices)

    def _dogleg_once(self, dim: int, sign: int, leg: int):
        axis, direction = self.brick.axis, self.brick.direction
        self.elbow(dim, sign)
        self.advance(leg)
        self.elbow(axis, direction)
        self.clear_perturbations()

    def dogleg(self, dim: int, delta: int):
        """Translate the cross-section along a short dim by exactly delta via
        paired elbows; the elbow seatings are calibrated with a dry run, and
        an opposing pair realizes shifts below the minimum leg.  The paired
        turns cancel, so sign maps and rows-to-index are preserved."""
        if delta == 0:
            return
        self.clear_perturbations()
        unit = self.brick.L ** 2
        min_leg = unit // 2 + self.brick.L
        sign = 1 if delta > 0 else -1
        probe = self._dry()
        before = probe._min_row(dim)
        probe._dogleg_once(dim, sign, min_leg)
        drift = probe._min_row(dim) - before
        leg = min_leg + sign * (delta - drift)
        if leg >= min_leg:
            self._dogleg_once(dim, sign, leg)
            return
        # Too short for one pair: go the other way first, then come back.
        probe = self._dry()
        before = probe._min_row(dim)
        probe._dogleg_once(dim, -sign, min_leg + unit)
        overshoot = probe._min_row(dim) - before
        self._dogleg_once(dim, -sign, min_leg + unit)
        self.dogleg(dim, delta - overshoot)

    def normalize_signs(self):
        """Identity crossing gadgets until every short dim runs ascending."""
        for v in range(self.brick.dim):
            if v == self.brick.axis:
                continue
            if self.brick.sign_of_dim[v] != 1:
                self.clear_perturbations()
                self.pm(self.brick.pos_of_dim[v], {})

    def general_matching(self, pi: dict[Index, Index],
                         parity_by_wire: dict[object, int]):
        """Parity gadget, crossing gadgets per non-identity palindromic
        factor of pi (padded to a permutation), then sign normalization."""
        self.clear_perturbations()
        self.parity(parity_by_wire)
        m = self.brick.L // 8
        import itertools as _it
        domain = list(_it.product(*(range(m) for _ in range(self.brick.dim - 1))))
        full = dict(pi)
        used = set(full.values())
        for x in domain:
            if x not in full and x not in used:
                full[x] = x
                used.add(x)
        free = [x for x in domain if x not in used]
        for x in domain:
            if x not in full:
                full[x] = free.pop(0)
        grid = from_dict((m,) * (self.brick.dim - 1), full)
        if not grid.is_identity():
            for factor, position in zip(decompose_axes(grid),
                                        _palindrome_axes(self.brick.dim - 1)):
                if factor.is_identity():
                    continue
                perms: dict[tuple[int, ...], dict[int, int]] = {}
                for src in factor.domain():
                    dst = factor(src)
                    if dst != src:
                        col = tuple(x for p, x in enumerate(src) if p != position)
                        perms.setdefault(col, {})[src[position]] = dst[position]
                self.clear_perturbations()
                self.pm(position, perms)
        self.normalize_signs()

    def row_of(self, i: Index) -> tuple:
        c = self.brick.corner(i)
        fr = self.brick.frac.get(i, (0,) * self.brick.dim)
        return tuple(c[v] - fr[v] for v in range(self.brick.dim)
                     if v != self.brick.axis)

    def align_rows_to(self, target: Brick, pairing: dict[Index, Index]):
        """Shift this conduit until every index row coincides with its paired
        target row (up to fractional offsets)."""
        self.clear_perturbations()
        if target.axis != self.brick.axis:
            raise InvalidInput("row alignment needs a common axis")

        def target_row(j: Index):
            c = target.corner(j)
            fr = target.frac.get(j, (0,) * target.dim)
            return tuple(c[v] - fr[v] for v in range(target.dim)
                         if v != target.axis)

        short_dims = [v for v in range(self.brick.dim) if v != self.brick.axis]
        ref = self.brick.indices[0]
        # Doglegs and perturbation clears nudge other dims by whole units, so
        # sweep until a fixpoint; late sweeps use exact unit adjustments only.
        for _sweep in range(5):
            settled = True
            for pos, v in enumerate(short_dims):
                diff = target_row(pairing[ref])[pos] - self.row_of(ref)[pos]
                if diff % self.brick.L:
                    raise InvalidInput("row alignment needs a unit multiple")
                if diff:
                    settled = False
                if abs(diff) > 8 * self.brick.L:
                    self.dogleg(v, diff)
                    diff = target_row(pairing[ref])[pos] - self.row_of(ref)[pos]
                while diff:
                    step = 1 if diff > 0 else -1
                    self.adjust(v, step)
                    diff -= step * self.brick.L
            if settled:
                break
        rows = [self.row_of(ref)[pos] for pos in range(len(short_dims))]
        want = list(target_row(pairing[ref]))
        if rows != want:
            raise AssertionError(f"row alignment failed: {rows} != {want}")
        # End on a full-length step so a short closing step is always safe.
        self.advance(self.brick.L ** 2)

    def assert_pairing(self, target: Brick, expected: dict[Index, Index]):
        target_rows = {}
        for j in target.indices:
            c = target.corner(j)
            fr = target.frac.get(j, (0,) * target.dim)
            target_rows[tuple(c[v] - fr[v] for v in range(target.dim)
                              if v != target.axis)] = j
        for i in self.brick.indices:
            j = target_rows.get(self.row_of(i))
            if j is None or expected[i] != j:
                raise AssertionError(
                    f"junction pairing mismatch: {i} -> {j}, expected {expected[i]}")


def _cell_of(v: Vertex) -> tuple:
    return tuple(v[:-1])


def _index_of_q(q: int, m: int, d: int) -> Index:
    out = []
    for _ in range(d - 1):
        out.append(q % m)
        q //= m
    if q:
        raise InvalidInput("intra index out of range for this blowup")
    return tuple(reversed(out))


def build_instance(g_vertices: Sequence[Vertex], g_edges: Sequence[Edge],
                   L: int, d: int | None = None,
                   mis_target_of_g: int | None = None
                   ) -> BoxInstanceWithProvenance:
    """Realize an even subdivision of a cell graph with canonical boxes.

    g_vertices are (cell..., q) tuples with q below (L/8)^(d-1); edges join
    vertices of the same or adjacent cells, maximum degree three, no vertex
    with two neighbors in one cell.  Provenance records one representative
    box per vertex and one odd-length box path per edge; the MIS target is
    mis_target_of_g plus the number of double subdivisions performed.
    """
    variants: dict[Edge, int] = {}
    result = None
    for _pass in range(3):
        result = _Builder(g_vertices, g_edges, L, d, variants).run()
        new_variants, rebuild = {}, False
        for edge, path in result.edge_paths.items():
            if (len(path) - 1) % 2 == 0:
                new_variants[edge] = 4
                rebuild = True
            else:
                new_variants[edge] = variants.get(edge, 3)
        if not rebuild:
            break
        variants = new_variants
    for path in result.edge_paths.values():
        assert (len(path) - 1) % 2 == 1, "edge parity not fixed"
    subs = sum((len(p) - 2) // 2 for p in result.edge_paths.values())
    target = (mis_target_of_g + subs) if mis_target_of_g is not None else subs
    return replace(result, double_subdivisions=subs, mis_target=target)


class _HubProgram:
    """The recorded walk of one cell's virtual hub: ordered items of either
    ("plain", {index: [boxes]}) or ("station", rank, BranchingPieces)."""

    def __init__(self, items, top_brick, side_bricks, bottom_brick):
        self.items = items
        self.top_brick = top_brick
        self.side_bricks = side_bricks
        self.bottom_brick = bottom_brick

    def slice_for(self, idx: Index, start, end):
        """Boxes of one index row between two anchors ("bottom", "top" or a
        station rank), skipping the unused branch legs at the end stations.
        Returns (chain, center box positions per rank)."""
        if start == "top":
            return [self.top_brick.box(idx)], {}
        if end == "bottom":
            return [self.bottom_brick.box(idx)], {}
        chain: list[AxisBox] = []
        centers: dict[int, int] = {}
        active = start == "bottom"
        for item in self.items:
            if item[0] == "plain":
                if active:
                    chain.extend(item[1].get(idx, ()))
            else:
                _, rank, pieces = item
                entering = start == rank
                if entering:
                    active = True
                if active:
                    if not entering:
                        chain.append(pieces.rise[idx])
                    centers[rank] = len(chain)
                    chain.append(pieces.center[idx])
                    if end == rank:
                        active = False
                        break
                    chain.append(pieces.up[idx])
        return chain, centers


class _Builder:
    def __init__(self, g_vertices, g_edges, L, d, variants):
        if L < 16 or L % 8:
            raise InvalidInput("L must be a multiple of 8, at least 16")
        self.vertices = [tuple(v) for v in g_vertices]
        if d is None:
            if not self.vertices:
                raise InvalidInput("cannot infer dimension from an empty graph")
            d = len(self.vertices[0]) - 1
        if d < 3:
            raise InvalidInput("dimension must be at least 3")
        self.L, self.d = L, d
        self.m = L // 8
        self.t = self.m ** (d - 1)
        self.unit = L * L
        self.n_dir = 2 * (d - 1)
        self.ROLE_CORE_IN = self.n_dir
        self.ROLE_CORE_OUT = self.n_dir + 1
        self.n_roles = self.n_dir + 2
        self.pitch = (FIRST_STATION + STATION_PITCH * self.n_roles + TAIL) * self.unit
        self.variants = dict(variants)
        self.edges = [(tuple(u), tuple(v)) for u, v in g_edges]
        self.sink: dict[object, list[AxisBox]] = {}
        self._validate()

    def _validate(self):
        vset = set(self.vertices)
        if len(vset) != len(self.vertices):
            raise InvalidInput("duplicate vertices")
        self.adjacency = {v: [] for v in self.vertices}
        for u, v in self.edges:
            if u not in vset or v not in vset or u == v:
                raise InvalidInput(f"bad edge {u} {v}")
            self.adjacency[u].append(v)
            self.adjacency[v].append(u)
        self.attach: dict[Vertex, list] = {v: [] for v in self.vertices}
        self.edge_kind: dict[Edge, tuple] = {}
        for e in self.edges:
            u, v = e
            cu, cv = _cell_of(u), _cell_of(v)
            if cu == cv:
                self.attach[u].append((self.ROLE_CORE_IN, e))
                self.attach[v].append((self.ROLE_CORE_OUT, e))
                self.edge_kind[e] = ("core", None, u, v)
                continue
            diff = [b - a for a, b in zip(cu, cv)]
            if sum(map(abs, diff)) != 1:
                raise InvalidInput(f"edge {e} joins non-adjacent cells")
            axis = next(i for i, x in enumerate(diff) if x)
            lo, hi = (u, v) if diff[axis] > 0 else (v, u)
            if axis == self.d - 1:
                self.attach[lo].append((ROLE_UP, e))
                self.attach[hi].append((ROLE_DOWN, e))
                self.edge_kind[e] = ("vertical", axis, lo, hi)
            else:
                self.attach[lo].append((2 * axis, e))
                self.attach[hi].append((2 * axis + 1, e))
                self.edge_kind[e] = ("horizontal", axis, lo, hi)
        for v, roles in self.attach.items():
            if len(roles) > 3:
                raise InvalidInput(f"vertex {v} has degree {len(roles)}")
            kinds = [r for r, _ in roles]
            if len(set(kinds)) != len(kinds):
                raise InvalidInput(f"vertex {v} has two neighbors in one cell")
            if v[-1] >= self.t:
                raise InvalidInput(f"intra index of {v} exceeds blowup {self.t}")

    # ----- geometry anchors ----------------------------------------------

    def anchor(self, cell) -> list[int]:
        return [self.pitch * c for c in cell]

    def hub_origin(self, cell) -> list[int]:
        a = self.anchor(cell)
        origin = [a[v] + (self.pitch // 2) for v in range(self.d)]
        origin[self.d - 1] = a[self.d - 1] + HUB_MERGE * self.unit
        return origin

    def station_z(self, cell, rank: int) -> int:
        return (self.anchor(cell)[self.d - 1]
                + (FIRST_STATION + STATION_PITCH * rank) * self.unit)

    def hub_top_z(self, cell) -> int:
        return (self.anchor(cell)[self.d - 1]
                + (FIRST_STATION + STATION_PITCH * self.n_roles) * self.unit)

    def station_travel(self, rank: int) -> int:
        return (rank // 2) if rank < self.n_dir else 0

    # ----- hub program -----------------------------------------------------

    def hub_program(self, cell, used_ranks) -> _HubProgram:
        all_idx = index_range(self.L, self.d)
        scratch: dict[Index, list[AxisBox]] = {i: [] for i in all_idx}
        conduit = _Conduit(
            basic_brick(self.L, self.d, axis=self.d - 1,
                        origin=self.hub_origin(cell), indices=all_idx),
            {i: i for i in all_idx}, scratch)
        items: list = []
        marks = {i: 0 for i in all_idx}

        def flush():
            step = {}
            for i in all_idx:
                new = scratch[i][marks[i]:]
                if new:
                    step[i] = new
                    marks[i] = len(scratch[i])
            if step:
                items.append(("plain", step))

        conduit.emit_brick()
        bottom_brick = conduit.brick
        flush()
        side_bricks: dict[int, Brick] = {}
        for rank in sorted(used_ranks):
            conduit.clear_perturbations()
            conduit.advance_to(self.station_z(cell, rank) - self.unit)
            flush()
            position = conduit.brick.pos_of_dim[self.station_travel(rank)]
            pieces = make_branching(conduit.brick, position)
            items.append(("station", rank, pieces))
            side_bricks[rank] = pieces.side_brick
            conduit.brick = pieces.up_brick
        conduit.clear_perturbations()
        conduit.advance_to(self.hub_top_z(cell))
        flush()
        return _HubProgram(items, conduit.brick, side_bricks, bottom_brick)

    # ----- main build ------------------------------------------------------

    def run(self) -> BoxInstanceWithProvenance:
        order_key = {ROLE_DOWN: -1, ROLE_UP: 10 ** 9}
        cells = sorted({_cell_of(v) for v in self.vertices})
        programs: dict[tuple, _HubProgram] = {}
        for cell in cells:
            used = sorted({r for v in self.vertices if _cell_of(v) == cell
                           for r, _ in self.attach[v] if isinstance(r, int)})
            programs[cell] = self.hub_program(cell, used)

        rep_box: dict[Vertex, AxisBox] = {}
        tree_seg: dict[tuple[Vertex, object], list[AxisBox]] = {}
        for v in self.vertices:
            cell = _cell_of(v)
            idx = _index_of_q(v[-1], self.m, self.d)
            roles = sorted(self.attach[v], key=lambda ra: order_key.get(ra[0], ra[0]))
            prog = programs[cell]
            if not roles:
                box = prog.bottom_brick.box(idx)
                self.sink[("vertex", v)] = [box]
                rep_box[v] = box
                continue
            start = "bottom" if roles[0][0] is ROLE_DOWN else roles[0][0]
            end = "top" if roles[-1][0] is ROLE_UP else roles[-1][0]
            if start == "bottom" and all(r is ROLE_DOWN for r, _ in roles):
                end = "bottom"
            if roles[0][0] is ROLE_UP:
                start = "top"
            chain, centers = prog.slice_for(idx, start, end)
            self.sink[("vertex", v)] = chain
            if len(roles) == 3:
                rep_pos = centers[roles[1][0]]
            elif len(roles) == 1 and isinstance(roles[0][0], int):
                rep_pos = centers[roles[0][0]]
            else:
                rep_pos = len(chain) // 2
            rep_box[v] = chain[rep_pos]
            for role, e in roles:
                if isinstance(role, int):
                    pos = centers[role]
                elif role is ROLE_DOWN:
                    pos = 0
                else:
                    pos = len(chain) - 1
                if pos >= rep_pos:
                    seg = chain[rep_pos + 1: pos + 1]
                else:
                    seg = list(reversed(chain[pos: rep_pos]))
                tree_seg[(v, role)] = seg

        # ----- edge conduits ---------------------------------------------
        by_group: dict[tuple, list[Edge]] = {}
        for e in self.edges:
            kind, axis, lo, hi = self.edge_kind[e]
            if kind == "core":
                key = ("core", _cell_of(lo))
            else:
                key = (kind, axis, _cell_of(lo))
            by_group.setdefault(key, []).append(e)

        for key, group in sorted(by_group.items()):
            if key[0] == "vertical":
                self._build_vertical(key[2], group, programs)
            elif key[0] == "horizontal":
                self._build_horizontal(key[1], key[2], group, programs)
            else:
                self._build_core(key[1], group, programs)

        # ----- assemble paths ----------------------------------------------
        box_ids: dict[AxisBox, int] = {}
        boxes: list[AxisBox] = []

        def bid(b: AxisBox) -> int:
            got = box_ids.get(b)
            if got is None:
                got = len(boxes)
                box_ids[b] = got
                boxes.append(b)
            return got

        edge_paths: dict[Edge, tuple[int, ...]] = {}
        for e in self.edges:
            kind, axis, lo, hi = self.edge_kind[e]
            role_lo = {r for r, ee in self.attach[lo] if ee == e}.pop()
            role_hi = {r for r, ee in self.attach[hi] if ee == e}.pop()
            path = [rep_box[lo]]
            path += tree_seg[(lo, role_lo)]
            path += self.sink.get(("edge", e, "lo"), [])
            path += list(reversed(self.sink.get(("edge", e, "hi"), [])))
            path += list(reversed(tree_seg[(hi, role_hi)]))
            path.append(rep_box[hi])
            edge_paths[e] = tuple(bid(b) for b in path)
        representatives = {v: bid(rep_box[v]) for v in self.vertices}
        return BoxInstanceWithProvenance(
            boxes=tuple(boxes), L=self.L, dim=self.d,
            representatives=representatives, edge_paths=edge_paths,
            mis_target=0, double_subdivisions=0)

    # ----- edge kinds ----------------------------------------------------

    def _wires(self, group, side):
        out = {}
        for e in group:
            kind, axis, lo, hi = self.edge_kind[e]
            v = lo if side == "lo" else hi
            out[_index_of_q(v[-1], self.m, self.d)] = ("edge", e, side)
        if len(out) != len(group):
            raise InvalidInput("two edges of one interface share an index")
        return out

    def _matching(self, group):
        pi = {}
        for e in group:
            kind, axis, lo, hi = self.edge_kind[e]
            pi[_index_of_q(lo[-1], self.m, self.d)] = _index_of_q(hi[-1], self.m, self.d)
        return pi

    def _build_vertical(self, cell, group, programs):
        top = programs[cell].top_brick
        wires = self._wires(group, "lo")
        cond = _Conduit(top, wires, self.sink)
        parity = {("edge", e, "lo"): self.variants.get(e, 3) for e in group}
        cond.general_matching(self._matching(group), parity)
        up_cell = tuple(c + (1 if v == self.d - 1 else 0)
                        for v, c in enumerate(cell))
        target = programs[up_cell].bottom_brick
        expected = {i: i for i in cond.brick.indices}
        cond.align_rows_to(target, expected)
        cond.close_gap_to(target.axis_base - self.unit)
        cond.assert_pairing(target.with_indices(list(expected.values())), expected)

    def _build_horizontal(self, axis, cell, group, programs):
        hi_cell = tuple(c + (1 if v == axis else 0) for v, c in enumerate(cell))
        unit = self.unit
        e_h = next(v for v in range(self.d - 1) if v != axis)

        # Partner side: leave the station, U-turn off the hub lane, stage.
        hi_prog = programs[hi_cell]
        side = hi_prog.side_bricks[2 * axis + 1]
        hi_wires = self._wires(group, "hi")
        rec = _Conduit(side, hi_wires, self.sink)
        rec.emit_brick()
        rec.clear_perturbations()
        rec.dogleg(e_h, 4 * unit)
        rec.elbow(self.d - 1, 1)
        rec.advance(2 * unit)
        rec.elbow(axis, -1)
        rec.clear_perturbations()

        # Sending side: general matching toward the face; the receiver then
        # closes the remaining gap with one long run.
        lo_prog = programs[cell]
        cond = _Conduit(lo_prog.side_bricks[2 * axis], self._wires(group, "lo"),
                        self.sink)
        cond.emit_brick()
        parity = {("edge", e, "lo"): self.variants.get(e, 3) for e in group}
        cond.general_matching(self._matching(group), parity)
        expected = {i: i for i in cond.brick.indices}
        cond.align_rows_to(rec.brick, expected)
        rec.close_gap_to(cond.brick.axis_base + unit)
        cond.assert_pairing(rec.brick, expected)

    def _build_core(self, cell, group, programs):
        unit = self.unit
        prog = programs[cell]
        out_side = prog.side_bricks[self.ROLE_CORE_OUT]
        rec = _Conduit(out_side, self._wires(group, "hi"), self.sink)
        rec.emit_brick()
        rec.clear_perturbations()
        rec.normalize_signs()

        in_side = prog.side_bricks[self.ROLE_CORE_IN]
        cond = _Conduit(in_side, self._wires(group, "lo"), self.sink)
        cond.emit_brick()
        cond.clear_perturbations()
        lane = self.hub_origin(cell)[0] + CORE_LANE * unit
        cond.advance_to(lane)
        cond.elbow(self.d - 1, 1)
        parity = {("edge", e, "lo"): self.variants.get(e, 3) for e in group}
        cond.general_matching(self._matching(group), parity)
        cond.elbow(0, -1)
        expected = {i: i for i in cond.brick.indices}
        cond.align_rows_to(rec.brick, expected)
        rec.close_gap_to(cond.brick.axis_base - unit)
        cond.assert_pairing(rec.brick, expected)


def verify_even_subdivision(inst: BoxInstanceWithProvenance,
                            g_vertices: Sequence[Vertex],
                            g_edges: Sequence[Edge]) -> tuple[bool, str | None]:
    """The recorded provenance must exactly generate the intersection graph.

    Checks that every edge path is a genuine box path of odd length between
    the two representatives with no chords or repeats, that no intersections
    exist outside the recorded paths, and that every box is used exactly once
    (representatives shared only by their own incident paths).
    """
    n = len(inst.boxes)
    graph = inst.graph()
    allowed: set[frozenset[int]] = set()
    usage = {i: 0 for i in range(n)}
    reps = set(inst.representatives.values())
    rep_of = {v: r for v, r in inst.representatives.items()}
    edges = [(tuple(u), tuple(v)) for u, v in g_edges]
    if set(edges) != set(inst.edge_paths):
        return False, "edge path set does not match the graph edges"
    for v in g_vertices:
        if tuple(v) not in rep_of:
            return False, f"vertex {v} has no representative"
    for e, path in inst.edge_paths.items():
        u, v = e
        if path[0] != rep_of[tuple(u)] or path[-1] != rep_of[tuple(v)]:
            return False, f"path of {e} does not join its representatives"
        if len(set(path)) != len(path):
            return False, f"path of {e} repeats a box"
        if (len(path) - 1) % 2 == 0:
            return False, f"path of {e} has even length"
        for a, b in zip(path, path[1:]):
            if not graph.has_edge(a, b):
                return False, f"path of {e} breaks between boxes {a} and {b}"
            allowed.add(frozenset((a, b)))
        for b in path:
            usage[b] += 1
    for u in range(graph.n):
        for w in graph.neighbors[u]:
            if u < w and frozenset((u, w)) not in allowed:
                return False, f"stray intersection between boxes {u} and {w}"
    for i in range(n):
        expected = 1
        if i in reps:
            vertex = next(v for v, r in rep_of.items() if r == i)
            expected = max(1, len([e for e in edges if vertex in e]))
        if usage.get(i, 0) > expected:
            return False, f"box {i} used {usage[i]} times (expected <= {expected})"
        if usage.get(i, 0) == 0 and i not in reps:
            return False, f"box {i} belongs to no path or representative"
    return True, None


def check_canonical(inst: BoxInstanceWithProvenance) -> tuple[bool, str | None]:
    """Every box side multiset must be exactly {1, ..., 1, L} at denominator L."""
    for i, b in enumerate(inst.boxes):
        if b.denom != inst.L:
            return False, f"box {i} has denominator {b.denom}"
        sides = sorted(h - l for l, h in zip(b.lo, b.hi))
        want = [inst.L] * (inst.dim - 1) + [inst.L * inst.L]
        if sides != want:
            return False, f"box {i} has scaled sides {sides}"
    return True, None
