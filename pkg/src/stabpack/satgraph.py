"""Reduction from bounded-occurrence CNF to independence in blown-up grids.

A (3,3) formula (clauses of size at most three, each variable occurring at
most three times) turns into a gadget graph: every variable becomes a 6-cycle
whose odd/even halves encode the truth value, every clause a triangle or
single edge attached to parity-matching cycle vertices.  That graph, up to
double subdivisions of edges (each of which raises the maximum independent
set by exactly one), is then drawn inside a blown-up grid cube: cycles tile
the bottom facet, clause gadgets the top facet, and the variable-to-clause
connections are routed as vertex-disjoint wiring paths, with one extra edge
per even-length wire to force odd path parity.

The size-3 clause triangle is realized as a 5-cycle over a square of four
cells (one edge double-subdivided): a flat triangle on two cells would give
some vertex two neighbors in one cell, breaking the per-cell matching shape
that the box construction downstream relies on.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

from .errors import CapExceeded, InvalidInput
from .graphs import IntersectionGraph, graph_from_edges
from .wiring import BlownCube, blown_cube_wiring

Vertex = tuple  # (cell coords ..., layer, intra index) in the blown cube


@dataclass(frozen=True)
class CNF33:
    num_vars: int
    clauses: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        occurrences: dict[int, int] = {}
        for clause in self.clauses:
            if not clause:
                return  # empty clause allowed; formula is unsatisfiable
            if len(clause) > 3:
                raise InvalidInput(f"clause {clause} larger than 3")
            for lit in clause:
                var = abs(lit)
                if var == 0 or var > self.num_vars:
                    raise InvalidInput(f"literal {lit} out of range")
                occurrences[var] = occurrences.get(var, 0) + 1
        for var, cnt in occurrences.items():
            if cnt > 3:
                raise InvalidInput(f"variable {var} occurs {cnt} > 3 times")

    def active_vars(self) -> list[int]:
        return sorted({abs(lit) for cl in self.clauses for lit in cl})


def parse_dimacs(text: str) -> CNF33:
    num_vars = 0
    clauses: list[tuple[int, ...]] = []
    declared = None
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith(("c", "%")):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) < 4 or parts[1] != "cnf":
                raise InvalidInput(f"bad problem line: {line}")
            num_vars, declared = int(parts[2]), int(parts[3])
            continue
        lits = [int(x) for x in line.split()]
        if lits and lits[-1] == 0:
            lits = lits[:-1]
        if lits:
            clauses.append(tuple(lits))
            num_vars = max(num_vars, max(abs(x) for x in lits))
    if declared is not None and declared != len(clauses):
        pass  # tolerate miscounted headers; content wins
    return CNF33(num_vars, tuple(clauses))


def to_dimacs(phi: CNF33) -> str:
    lines = [f"p cnf {phi.num_vars} {len(phi.clauses)}"]
    lines += [" ".join(map(str, cl)) + " 0" for cl in phi.clauses]
    return "\n".join(lines) + "\n"


def sat_bruteforce(phi: CNF33, cap: int = 24) -> bool:
    """Exhaustive satisfiability over the active variables."""
    act = phi.active_vars()
    if len(act) > cap:
        raise CapExceeded(f"SAT brute-force cap {cap} exceeded: {len(act)} vars")
    pos = {v: i for i, v in enumerate(act)}
    for bits in range(1 << len(act)):
        ok = True
        for clause in phi.clauses:
            if not any((bits >> pos[abs(l)]) & 1 == (l > 0) for l in clause):
                ok = False
                break
        if ok:
            return True
    return not phi.clauses


def preprocess(phi: CNF33) -> tuple[CNF33 | None, bool | None]:
    """Unit propagation to fixpoint.

    Returns (formula, None) with all clauses of size 2 or 3, or (None, verdict)
    when propagation decides the formula outright.
    """
    clauses = [list(cl) for cl in phi.clauses]
    assignment: dict[int, bool] = {}
    changed = True
    while changed:
        changed = False
        units = [cl[0] for cl in clauses if len(cl) == 1]
        if not units:
            break
        for lit in units:
            var, val = abs(lit), lit > 0
            if assignment.get(var, val) != val:
                return None, False
            assignment[var] = val
        new_clauses = []
        for cl in clauses:
            out = []
            satisfied = False
            for lit in cl:
                var = abs(lit)
                if var in assignment:
                    if (lit > 0) == assignment[var]:
                        satisfied = True
                        break
                else:
                    out.append(lit)
            if satisfied:
                continue
            if not out:
                return None, False
            new_clauses.append(out)
        clauses = new_clauses
        changed = True
    if any(not cl for cl in clauses):
        return None, False
    if not clauses:
        return None, True
    return CNF33(phi.num_vars, tuple(tuple(cl) for cl in clauses)), None


@dataclass(frozen=True)
class GadgetGraph:
    """Variable 6-cycles plus clause gadgets plus connector edges."""

    graph: IntersectionGraph
    var_cycles: dict[int, tuple[int, ...]]       # var -> 6 cycle vertex ids
    clause_gadgets: tuple[tuple[int, ...], ...]  # per clause, gadget vertex ids
    connectors: tuple[tuple[int, int, int, int], ...]  # (cycle v, gadget v, clause, pos)
    mis_target: int                              # 3*nu + gamma


def build_gadget_graph(phi: CNF33) -> GadgetGraph:
    """6-cycle per variable, triangle or edge per clause; positive literal
    occurrences attach to distinct even cycle vertices, negative to odd."""
    if any(len(cl) < 2 for cl in phi.clauses):
        raise InvalidInput("clauses of size 1 must be removed by preprocessing")
    edges: list[tuple[int, int]] = []
    var_cycles: dict[int, tuple[int, ...]] = {}
    next_id = 0
    for var in phi.active_vars():
        ids = tuple(range(next_id, next_id + 6))
        next_id += 6
        var_cycles[var] = ids
        edges += [(ids[i], ids[(i + 1) % 6]) for i in range(6)]
    # Slot queues: 1-based cycle positions 2,4,6 for positive literals and
    # 1,3,5 for negative, i.e. 0-based offsets 1,3,5 and 0,2,4.
    pos_slots = {v: [1, 3, 5] for v in var_cycles}
    neg_slots = {v: [0, 2, 4] for v in var_cycles}
    gadgets: list[tuple[int, ...]] = []
    connectors: list[tuple[int, int, int, int]] = []
    for ci, clause in enumerate(phi.clauses):
        size = len(clause)
        ids = tuple(range(next_id, next_id + size))
        next_id += size
        gadgets.append(ids)
        if size == 3:
            edges += [(ids[0], ids[1]), (ids[1], ids[2]), (ids[0], ids[2])]
        else:
            edges.append((ids[0], ids[1]))
        for pos, lit in enumerate(clause):
            var = abs(lit)
            slots = pos_slots[var] if lit > 0 else neg_slots[var]
            if not slots:
                raise InvalidInput(f"variable {var} has too many occurrences")
            offset = slots.pop(0)
            cyc_vertex = var_cycles[var][offset]
            edges.append((cyc_vertex, ids[pos]))
            connectors.append((cyc_vertex, ids[pos], ci, pos))
    graph = graph_from_edges(next_id, edges)
    target = 3 * len(var_cycles) + len(phi.clauses)
    return GadgetGraph(graph, var_cycles, tuple(gadgets), tuple(connectors), target)


@dataclass(frozen=True)
class BlownCubeSubgraph:
    """A degree-<=3 subgraph of a blown-up grid cube with per-vertex neighbors
    in pairwise distinct cells, realizing an even subdivision of a gadget graph."""

    host: BlownCube
    vertices: tuple[Vertex, ...]
    edges: tuple[tuple[Vertex, Vertex], ...]
    mis_target: int
    double_subdivisions: int
    # Provenance: each connector edge's realized path, and the (possibly
    # parity-shifted) cycle vertex per variable slot.
    wire_paths: tuple[tuple[Vertex, ...], ...]
    cycle_vertices: dict[int, tuple[Vertex, ...]]
    gadget_vertices: tuple[tuple[Vertex, ...], ...]

    def to_graph(self) -> IntersectionGraph:
        index = {v: i for i, v in enumerate(self.vertices)}
        return graph_from_edges(
            len(self.vertices),
            [(index[u], index[v]) for u, v in self.edges],
            labels=self.vertices,
        )


def _capacities(n_w: int, t: int, d: int) -> tuple[int, int]:
    extra = n_w ** max(0, d - 3)
    var_cap = (n_w // 3) * (n_w // 2) * (t // 2) * extra
    clause_cap = (n_w // 2) * (n_w // 2) * (t // 2) * extra
    return var_cap, clause_cap


def embed_in_blown_cube(gadget_phi: CNF33, t: int, d: int = 3
                        ) -> BlownCubeSubgraph:
    """Place the gadget graph of a preprocessed formula inside a blown cube.

    Variable cycles sit on six-cell rings in the bottom facet at odd intra
    indices; clause gadgets sit in the top facet (single edges on cell
    dominoes; triangles as 5-cycles over cell squares, absorbing one double
    subdivision each).  Literal connections are routed by the blown-cube
    wiring; any even-length wire gets one extra same-cell edge at its
    variable end so every original edge becomes an odd path.
    """
    if t < 2:
        raise InvalidInput("blowup t must be at least 2")
    if d < 3:
        raise InvalidInput("dimension must be at least 3")
    gadget = build_gadget_graph(gadget_phi)
    phi = gadget_phi
    variables = sorted(gadget.var_cycles)
    nu, gamma = len(variables), len(phi.clauses)
    if nu == 0:
        host = BlownCube(3, t, d)
        return BlownCubeSubgraph(host, (), (), 0, 0, (), {}, ())

    n_w = 3
    while True:
        var_cap, clause_cap = _capacities(n_w, t, d)
        if var_cap >= nu and clause_cap >= gamma:
            break
        n_w += 1

    # Variable placements: 3x2 cell rings tiled over the first two facet axes.
    extra_axes = [range(n_w) for _ in range(d - 3)]
    var_slots = []
    for rest in itertools.product(*extra_axes):
        for a in range(n_w // 3):
            for b in range(n_w // 2):
                for m in range(t // 2):
                    var_slots.append((3 * a, 2 * b, rest, 2 * m + 1))
    clause_slots = []
    for rest in itertools.product(*extra_axes):
        for a in range(n_w // 2):
            for b in range(n_w // 2):
                for m in range(t // 2):
                    clause_slots.append((2 * a, 2 * b, rest, 2 * m))

    def ring_cells(slot) -> list[tuple[int, ...]]:
        g0, g1, rest, _q = slot
        ring = [(g0, g1), (g0 + 1, g1), (g0 + 2, g1),
                (g0 + 2, g1 + 1), (g0 + 1, g1 + 1), (g0, g1 + 1)]
        return [(x, y) + rest for x, y in ring]

    def square_cells(slot) -> list[tuple[int, ...]]:
        g0, g1, rest, _q = slot
        square = [(g0, g1), (g0 + 1, g1), (g0 + 1, g1 + 1), (g0, g1 + 1)]
        return [(x, y) + rest for x, y in square]

    var_slot_of = {v: var_slots[i] for i, v in enumerate(variables)}

    # Wire endpoints per connector.
    pos_offsets = {v: [1, 3, 5] for v in variables}
    neg_offsets = {v: [0, 2, 4] for v in variables}
    bottom_of: dict[tuple[int, int], Vertex] = {}  # (clause, pos) -> Var endpoint
    slot_offset_of: dict[tuple[int, int], tuple[int, int]] = {}
    for ci, clause in enumerate(phi.clauses):
        for pos, lit in enumerate(clause):
            var = abs(lit)
            offs = pos_offsets[var] if lit > 0 else neg_offsets[var]
            offset = offs.pop(0)
            slot = var_slot_of[var]
            cell = ring_cells(slot)[offset]
            bottom_of[(ci, pos)] = cell + (0, slot[3])
            slot_offset_of[(ci, pos)] = (var, offset)

    top_of: dict[tuple[int, int], Vertex] = {}
    clause_corner_cells: list[list[tuple[int, ...]]] = []
    for ci, clause in enumerate(phi.clauses):
        slot = clause_slots[ci]
        sq = square_cells(slot)
        q = slot[3]
        if len(clause) == 3:
            corners = [sq[0], sq[1], sq[2]]
        else:
            corners = [sq[0], sq[1]]
        clause_corner_cells.append(sq)
        for pos in range(len(clause)):
            top_of[(ci, pos)] = corners[pos] + (None, q)  # layer filled later

    matching = [(bottom_of[k], top_of[k][:-2] + (0, top_of[k][-1]))
                for k in sorted(bottom_of)]
    paths, host = blown_cube_wiring(matching, n_w, t, d, side=None)
    side = host.side

    edges: set[frozenset] = set()
    double_subs = 0

    def add_edge(u: Vertex, v: Vertex) -> None:
        assert u != v
        edges.add(frozenset((u, v)))

    # Wires, with parity fixes at the variable ends.
    wire_paths: list[tuple[Vertex, ...]] = []
    endpoint_of: dict[tuple[int, int], Vertex] = {}
    keys = sorted(bottom_of)
    for key, path in zip(keys, paths.paths):
        length = len(path) - 1
        path = tuple(path)
        if length % 2 == 0:
            start = path[0]
            shifted = start[:-1] + (start[-1] - 1,)
            path = (shifted,) + path
        for u, v in zip(path, path[1:]):
            add_edge(u, v)
        wire_paths.append(path)
        endpoint_of[key] = path[0]
        double_subs += (len(path) - 2) // 2
        assert (len(path) - 1) % 2 == 1

    # Variable cycles over the (possibly shifted) endpoints.
    cycle_vertices: dict[int, tuple[Vertex, ...]] = {}
    for var in variables:
        slot = var_slot_of[var]
        q = slot[3]
        cells = ring_cells(slot)
        verts = [cell + (0, q) for cell in cells]
        for (ci, pos), (v2, offset) in slot_offset_of.items():
            if v2 == var:
                verts[offset] = endpoint_of[(ci, pos)]
        for i in range(6):
            add_edge(verts[i], verts[(i + 1) % 6])
        cycle_vertices[var] = tuple(verts)

    # Clause gadgets in the top facet.
    gadget_vertices: list[tuple[Vertex, ...]] = []
    for ci, clause in enumerate(phi.clauses):
        slot = clause_slots[ci]
        q = slot[3]
        sq = [c + (side - 1, q) for c in clause_corner_cells[ci]]
        if len(clause) == 3:
            five = [sq[0], sq[1], sq[2], sq[3],
                    clause_corner_cells[ci][0] + (side - 1, q + 1)]
            for i in range(5):
                add_edge(five[i], five[(i + 1) % 5])
            double_subs += 1
            gadget_vertices.append(tuple(five))
        else:
            add_edge(sq[0], sq[1])
            gadget_vertices.append((sq[0], sq[1]))

    vertices = sorted({v for e in edges for v in e})
    edge_tuples = tuple(tuple(sorted(e)) for e in sorted(edges, key=sorted))
    target = gadget.mis_target + double_subs
    return BlownCubeSubgraph(
        host=host,
        vertices=tuple(vertices),
        edges=edge_tuples,
        mis_target=target,
        double_subdivisions=double_subs,
        wire_paths=tuple(wire_paths),
        cycle_vertices=cycle_vertices,
        gadget_vertices=tuple(gadget_vertices),
    )


def verify_cell_property(sub: BlownCubeSubgraph) -> tuple[bool, str | None]:
    """Max degree three, every edge a blown-cube edge, and each vertex's
    neighbors in pairwise distinct cells; reports the first violation."""
    adj: dict[Vertex, list[Vertex]] = {}
    for u, v in sub.edges:
        if not sub.host.adjacent(u, v):
            return False, f"edge {u} - {v} not in the blown cube"
        adj.setdefault(u, []).append(v)
        adj.setdefault(v, []).append(u)
    for v, nbrs in adj.items():
        if len(nbrs) > 3:
            return False, f"vertex {v} has degree {len(nbrs)}"
        cells = [u[:-1] for u in nbrs]
        if len(set(cells)) != len(cells):
            return False, f"vertex {v} has two neighbors in one cell"
    return True, None
