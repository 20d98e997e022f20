"""Exact MIS via balanced hypercube separators with weighted clique partitions.

The solver normalizes around an approximately minimal hypercube holding a
constant fraction of the objects, sweeps a family of concentric candidate
cubes, partitions each candidate's crossing objects (plus all large objects
near the outermost cube) into cliques via shared piercing points, picks the
candidate of least total clique weight, and enumerates that separator's
independent sets, recursing on the inside and outside of the cube.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from .errors import InvalidInput
from .geometry import (AxisBox, BoxClass, HyperCube, classify_against_hypercube,
                       common_denominator, diameter_sq)
from .graphs import IntersectionGraph, MISResult, build_intersection_graph, \
    is_independent_set, mis_bruteforce
from .stabbing import stab_greedy

BASE_CASE_N = 12
LARGE_DIAMETER = Fraction(1, 4)  # after normalization


@dataclass(frozen=True)
class Normalization:
    """Affine map sending the chosen hypercube to the unit cube at the origin."""

    translation: tuple[Fraction, ...]
    scale: Fraction


@dataclass(frozen=True)
class SeparatorCandidate:
    cube: HyperCube
    index: int
    crossed: frozenset[int]
    large_added: frozenset[int]
    cliques: tuple[tuple[int, ...], ...]
    stab_points: tuple[tuple[Fraction, ...], ...]
    weight: float

    def members(self) -> frozenset[int]:
        return self.crossed | self.large_added


def min_enclosing_hypercube(objects: Sequence[AxisBox], m: int) -> HyperCube:
    """A hypercube containing at least m objects, side at most twice minimal.

    Candidate centers are object centers; candidate sides are coordinate-extent
    differences and their doubles (the optimum side is such a difference, and a
    cube of twice that side centered at any contained object's center covers
    the optimal cube).  Binary search over the sorted side candidates.
    """
    n = len(objects)
    if not 1 <= m <= n:
        raise InvalidInput(f"need 1 <= m <= {n}, got {m}")
    denom = common_denominator(objects)
    d = objects[0].dim
    lo = np.array([b.lo for b in objects], dtype=np.int64)
    hi = np.array([b.hi for b in objects], dtype=np.int64)
    # Work at denominator 4*denom so centers and half-sides stay integral.
    lo4, hi4 = lo * 4, hi * 4
    centers4 = (lo + hi) * 2  # (n, d)

    diffs: set[int] = set()
    for t in range(d):
        his = np.unique(hi[:, t])
        los = np.unique(lo[:, t])
        pair = his[:, None] - los[None, :]
        diffs.update(int(x) for x in pair.ravel() if x > 0)
    sides = sorted(set(x * 4 for x in diffs) | set(x * 8 for x in diffs))

    def feasible(side4: int) -> int | None:
        half = side4 // 2 if side4 % 2 == 0 else None
        s4 = side4
        for ci in range(n):
            c = centers4[ci]
            ok = np.ones(n, dtype=bool)
            for t in range(d):
                cl = 2 * c[t] - s4  # doubled to avoid halves
                ch = 2 * c[t] + s4
                ok &= (2 * lo4[:, t] >= cl) & (2 * hi4[:, t] <= ch)
            if int(ok.sum()) >= m:
                return ci
        return None

    lo_i, hi_i = 0, len(sides) - 1
    if feasible(sides[hi_i]) is None:
        raise InvalidInput("no candidate hypercube covers the requested count")
    best = hi_i
    while lo_i <= hi_i:
        mid = (lo_i + hi_i) // 2
        if feasible(sides[mid]) is not None:
            best = mid
            hi_i = mid - 1
        else:
            lo_i = mid + 1
    side4 = sides[best]
    ci = feasible(side4)
    assert ci is not None
    center = tuple(Fraction(int(centers4[ci][t]), 4 * denom) for t in range(d))
    return HyperCube(center, Fraction(side4, 4 * denom))


def normalize_instance(objects: Sequence[AxisBox], cube: HyperCube
                       ) -> tuple[list[AxisBox], Normalization]:
    """Translate and rescale so the cube becomes the unit cube at the origin."""
    denom = common_denominator(objects)
    d = objects[0].dim
    norm = Normalization(translation=tuple(-c for c in cube.center),
                         scale=1 / cube.side)
    fracs: list[tuple[list[Fraction], list[Fraction]]] = []
    big = 1
    for b in objects:
        flo = [(Fraction(v, denom) - c) / cube.side for v, c in zip(b.lo, cube.center)]
        fhi = [(Fraction(v, denom) - c) / cube.side for v, c in zip(b.hi, cube.center)]
        fracs.append((flo, fhi))
        for x in flo + fhi:
            big = big * x.denominator // math.gcd(big, x.denominator)
    out = [
        AxisBox(tuple(int(x * big) for x in flo), tuple(int(x * big) for x in fhi), big)
        for flo, fhi in fracs
    ]
    return out, norm


def candidate_hypercubes(n: int, d: int) -> list[HyperCube]:
    """ceil(n^(1/d)) origin-centered cubes, the i-th of side 1 + 2i/m."""
    m = max(1, math.ceil(round(n ** (1 / d), 9)))
    zero = tuple(Fraction(0) for _ in range(d))
    return [HyperCube(zero, 1 + Fraction(2 * i, m)) for i in range(1, m + 1)]


def build_separator(cube: HyperCube, index: int, objects: Sequence[AxisBox],
                    outermost: HyperCube) -> SeparatorCandidate:
    """Crossing objects of this cube, plus all large objects meeting the
    outermost candidate, partitioned into cliques by greedy piercing."""
    crossed = frozenset(
        i for i, b in enumerate(objects)
        if classify_against_hypercube(b, cube) is BoxClass.CROSSING
    )
    threshold = LARGE_DIAMETER * LARGE_DIAMETER
    large = frozenset(
        i for i, b in enumerate(objects)
        if i not in crossed
        and diameter_sq(b) >= threshold
        and classify_against_hypercube(b, outermost) is not BoxClass.OUTSIDE
    )
    members = sorted(crossed | large)
    if not members:
        return SeparatorCandidate(cube, index, crossed, large, (), (), 0.0)
    stab = stab_greedy([objects[i] for i in members])
    assigned: set[int] = set()
    cliques: list[tuple[int, ...]] = []
    points: list[tuple[Fraction, ...]] = []
    for point, covered in zip(stab.points, stab.covered):
        group = tuple(members[j] for j in sorted(covered) if members[j] not in assigned)
        if group:
            assigned.update(group)
            cliques.append(group)
            points.append(point)
    assert len(assigned) == len(members)
    weight = sum(math.log2(len(c) + 1) for c in cliques)
    return SeparatorCandidate(cube, index, crossed, large, tuple(cliques),
                              tuple(points), weight)


def pick_best_separator(candidates: Sequence[SeparatorCandidate]) -> SeparatorCandidate:
    """Minimum weight; ties broken by smallest candidate index."""
    if not candidates:
        raise InvalidInput("no separator candidates")
    return min(candidates, key=lambda s: (s.weight, s.index))


def enumerate_clique_sets(sep: SeparatorCandidate, graph) -> Iterator[tuple[int, ...]]:
    """All independent subsets of the separator: an odometer over per-clique
    choices (skip, or one member), pruned to cross-clique independence.

    graph needs only a has_edge(u, v) method over the separator's index space.
    """
    cliques = sep.cliques

    def rec(k: int, chosen: list[int]) -> Iterator[tuple[int, ...]]:
        if k == len(cliques):
            yield tuple(chosen)
            return
        yield from rec(k + 1, chosen)
        for v in cliques[k]:
            if all(not graph.has_edge(v, u) for u in chosen):
                chosen.append(v)
                yield from rec(k + 1, chosen)
                chosen.pop()

    yield from rec(0, [])


@dataclass
class SeparatorStats:
    depth: int = 0
    candidates_tried: int = 0
    max_separator_weight: float = 0.0
    fallback_branches: int = 0
    balance_violations: int = 0


def solve_mis_separator(objects: Sequence[AxisBox], base_case: int = BASE_CASE_N,
                        ) -> tuple[MISResult, SeparatorStats]:
    """Exact maximum independent set by recursive hypercube separation."""
    graph = build_intersection_graph(objects)
    stats = SeparatorStats()
    d = objects[0].dim if objects else 1
    frac_cap = 6**d + 1
    neighbor_sets = [set(graph.neighbors[v]) for v in range(graph.n)]

    def brute(indices: list[int]) -> tuple[int, list[int]]:
        sub = {v: i for i, v in enumerate(indices)}
        edges = [(sub[u], sub[v]) for u in indices for v in neighbor_sets[u]
                 if v in sub and u < v]
        from .graphs import graph_from_edges
        res = mis_bruteforce(graph_from_edges(len(indices), edges))
        return res.size, [indices[i] for i in res.witness]

    def solve(indices: list[int], depth: int) -> tuple[int, list[int]]:
        stats.depth = max(stats.depth, depth)
        n = len(indices)
        if n == 0:
            return 0, []
        if n <= base_case:
            return brute(indices)
        boxes = [objects[i] for i in indices]
        h0 = min_enclosing_hypercube(boxes, max(1, math.ceil(n / frac_cap)))
        normed, _ = normalize_instance(boxes, h0)
        cubes = candidate_hypercubes(n, d)
        seps = [build_separator(c, i + 1, normed, cubes[-1])
                for i, c in enumerate(cubes)]
        stats.candidates_tried += len(seps)
        best = pick_best_separator(seps)
        stats.max_separator_weight = max(stats.max_separator_weight, best.weight)
        members = best.members()
        inside: list[int] = []
        outside: list[int] = []
        for local, b in enumerate(normed):
            if local in members:
                continue
            cls = classify_against_hypercube(b, best.cube)
            if cls is BoxClass.INSIDE:
                inside.append(local)
            else:
                # Only separator members can cross the chosen cube.
                assert cls is BoxClass.OUTSIDE
                outside.append(local)
        balance_cap = n * (frac_cap - 1) / frac_cap + len(members)
        if len(inside) > balance_cap or len(outside) > balance_cap:
            stats.balance_violations += 1
        if max(len(inside), len(outside)) >= n:
            # Degenerate separation: fall back to branching on a max-degree
            # vertex of the residual subgraph.
            stats.fallback_branches += 1
            sub = set(indices)
            v = max(indices, key=lambda u: (len(neighbor_sets[u] & sub), -u))
            rest = [u for u in indices if u != v]
            s_out, w_out = solve(rest, depth + 1)
            keep = [u for u in indices if u != v and u not in neighbor_sets[v]]
            s_in, w_in = solve(keep, depth + 1)
            if s_in + 1 >= s_out:
                return s_in + 1, w_in + [v]
            return s_out, w_out
        class _LocalGraph:
            @staticmethod
            def has_edge(u: int, v: int) -> bool:
                return indices[v] in neighbor_sets[indices[u]]

        best_size, best_witness = -1, []
        for choice in enumerate_clique_sets(best, _LocalGraph()):
            global_choice = [indices[c] for c in choice]
            removed = set()
            for g in global_choice:
                removed |= neighbor_sets[g]
            in_g = [indices[c] for c in inside if indices[c] not in removed]
            out_g = [indices[c] for c in outside if indices[c] not in removed]
            s_in, w_in = solve(in_g, depth + 1)
            s_out, w_out = solve(out_g, depth + 1)
            total = len(global_choice) + s_in + s_out
            if total > best_size:
                best_size = total
                best_witness = global_choice + w_in + w_out
        return best_size, best_witness

    size, witness = solve(list(range(graph.n)), 0)
    witness_t = tuple(sorted(witness))
    assert is_independent_set(graph, witness_t), "separator witness invalid"
    assert len(witness_t) == size
    return MISResult(size, witness_t), stats
