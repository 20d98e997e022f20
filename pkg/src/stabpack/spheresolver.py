"""Parameterized exact independence testing via canonical sphere separators.

To decide whether k pairwise-disjoint boxes exist, the solver guesses a
separating sphere from a polynomial candidate family built on the objects'
circumscribed balls: every canonical sphere is pinned by at most d+1 tangent
balls, each flagged inside/outside plus an originally-intersected bit.  For
each guess it branches on which crossed objects join the solution, removes
their neighborhoods, and recurses on the inside and outside.  Soundness never
depends on the float sphere algebra: candidate witnesses are validated with
the exact box predicates, and objects within the numeric margin of a sphere
are conservatively classified as crossed.
"""
from __future__ import annotations

import itertools
import logging
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .geometry import AxisBox, Ball, Sphere, circumscribed_ball
from .graphs import (IntersectionGraph, build_intersection_graph,
                     graph_from_edges, is_independent_set, mis_bruteforce)

logger = logging.getLogger(__name__)

EPS_SPHERE = 1e-9
BASE_CASE_N = 12
BASE_CASE_K = 3
FALLBACK_GRID_N = 8


@dataclass(frozen=True)
class SphereGuess:
    support: tuple[int, ...]
    inside_flags: tuple[bool, ...]    # per support ball: ball inside the sphere
    touched_flags: tuple[bool, ...]   # per support ball: intersected originally
    sphere: Sphere
    inside: frozenset[int]
    outside: frozenset[int]
    crossed: frozenset[int]


def circumscribed_balls(objects: Sequence[AxisBox]) -> list[Ball]:
    return [circumscribed_ball(b) for b in objects]


def _classify(centers: np.ndarray, radii: np.ndarray, x: np.ndarray, big_r: float,
              eps: float) -> tuple[list[int], list[int], list[int]]:
    dist = np.sqrt(((centers - x[None, :]) ** 2).sum(axis=1))
    inside = np.nonzero(dist + radii < big_r - eps)[0]
    outside = np.nonzero(dist - radii > big_r + eps)[0]
    crossed = [i for i in range(len(radii))
               if i not in set(inside) and i not in set(outside)]
    return list(inside), list(outside), crossed


def _solve_support_batch(centers: np.ndarray, radii: np.ndarray,
                         supports: np.ndarray, signs: np.ndarray,
                         eps: float) -> list[tuple[tuple[int, ...], tuple[int, ...],
                                                   np.ndarray, float]]:
    """Batched tangency solve: |x - c_i| = R + s_i r_i per support ball.

    Centers are restricted to the affine hull of the support centers (the
    minimal-radius canonical representative lies there); the constraint
    differences are linear in (hull coordinates, R) and one residual
    constraint stays quadratic.  Rank-deficient supports are dropped.
    """
    m = supports.shape[1]
    out: list[tuple[tuple[int, ...], tuple[int, ...], np.ndarray, float]] = []
    if m == 1:
        for sup, sg in zip(supports, signs):
            big_r = float(-sg[0] * radii[sup[0]])
            if big_r > eps:
                out.append((tuple(sup), tuple(sg), centers[sup[0]].copy(), big_r))
        return out
    c1 = centers[supports[:, 0]]                       # (B, d)
    deltas = centers[supports[:, 1:]] - c1[:, None, :]  # (B, m-1, d)
    r_sup = radii[supports]                             # (B, m)
    s = signs.astype(float)                             # (B, m)
    u_mat, sing, _ = np.linalg.svd(deltas.transpose(0, 2, 1), full_matrices=False)
    good = sing[:, -1] > 1e-9 * np.maximum(1.0, sing[:, 0])
    basis = u_mat[:, :, : m - 1]                        # (B, d, m-1)
    a_mat = np.empty((len(supports), m - 1, m))
    a_mat[:, :, : m - 1] = -2.0 * np.einsum("bij,bjk->bik", deltas, basis)
    sr = s * r_sup
    a_mat[:, :, m - 1] = -2.0 * (sr[:, 1:] - sr[:, :1])
    b_vec = (r_sup[:, 1:] ** 2 - r_sup[:, :1] ** 2
             - np.einsum("bij,bij->bi", deltas, deltas))
    pinv = np.linalg.pinv(a_mat)
    sol = np.einsum("bij,bj->bi", pinv, b_vec)          # (B, m)
    _, _, vt = np.linalg.svd(a_mat)
    null = vt[:, -1, :]                                 # (B, m)
    y0, r0 = sol[:, : m - 1], sol[:, m - 1]
    y1, r1 = null[:, : m - 1], null[:, m - 1]
    base = sr[:, 0]
    qa = np.einsum("bi,bi->b", y1, y1) - r1 * r1
    qb = 2 * (np.einsum("bi,bi->b", y0, y1) - (r0 + base) * r1)
    qc = np.einsum("bi,bi->b", y0, y0) - (r0 + base) ** 2
    for bi in range(len(supports)):
        if not good[bi]:
            continue
        taus: list[float] = []
        if abs(qa[bi]) < 1e-12:
            if abs(qb[bi]) > 1e-12:
                taus.append(float(-qc[bi] / qb[bi]))
        else:
            disc = qb[bi] * qb[bi] - 4 * qa[bi] * qc[bi]
            if disc >= 0:
                root = float(np.sqrt(disc))
                taus += [(-qb[bi] + root) / (2 * qa[bi]),
                         (-qb[bi] - root) / (2 * qa[bi])]
        for tau in taus:
            big_r = float(r0[bi] + tau * r1[bi])
            if big_r <= eps:
                continue
            if np.any(big_r + sr[bi] < -eps):
                continue
            y = y0[bi] + tau * y1[bi]
            x = c1[bi] + basis[bi] @ y
            out.append((tuple(supports[bi]), tuple(signs[bi]), x, big_r))
    return out


def canonical_sphere_candidates(balls: Sequence[Ball], eps: float = EPS_SPHERE):
    """Yield SphereGuess candidates from all tangency supports of size 1..d+1.

    Each support subset is solved with every inside/outside assignment; every
    real solution is emitted with all settings of the originally-intersected
    bits.  Numerically degenerate supports are skipped, never fatal.
    """
    n = len(balls)
    if n == 0:
        return
    d = balls[0].dim
    centers = np.array([[float(c) for c in b.center] for b in balls])
    radii = np.array([float(b.radius_sq) ** 0.5 for b in balls])
    scale = max(1.0, float(np.abs(centers).max(initial=0.0)), float(radii.max()))
    margin = eps * scale
    seen: set[tuple] = set()
    for m in range(1, min(d + 1, n) + 1):
        supports = np.array(list(itertools.combinations(range(n), m)), dtype=int)
        for signs_t in itertools.product((-1, 1), repeat=m):
            signs = np.tile(np.array(signs_t, dtype=int), (len(supports), 1))
            for sup, sg, x, big_r in _solve_support_batch(
                    centers, radii, supports, signs, margin):
                key = tuple(np.round(np.append(x, big_r) / scale, 7))
                if key in seen:
                    continue
                seen.add(key)
                ins, outs, crossed = _classify(centers, radii, x, big_r, margin)
                ins_s, out_s, cr_s = set(ins), set(outs), set(crossed)
                for touched in itertools.product((False, True), repeat=m):
                    i2, o2, c2 = set(ins_s), set(out_s), set(cr_s)
                    for bi, sgn, tch in zip(sup, sg, touched):
                        i2.discard(bi)
                        o2.discard(bi)
                        c2.discard(bi)
                        if tch:
                            c2.add(bi)
                        elif sgn < 0:
                            i2.add(bi)
                        else:
                            o2.add(bi)
                    yield SphereGuess(
                        support=tuple(int(v) for v in sup),
                        inside_flags=tuple(int(sg_i) < 0 for sg_i in sg),
                        touched_flags=touched,
                        sphere=Sphere(tuple(float(v) for v in x), big_r),
                        inside=frozenset(int(v) for v in i2),
                        outside=frozenset(int(v) for v in o2),
                        crossed=frozenset(int(v) for v in c2),
                    )


def fallback_sphere_family(balls: Sequence[Ball], eps: float = EPS_SPHERE):
    """Exhaustive event-driven family for tiny instances: centers at ball
    centers and pair midpoints, radii straddling every distance event."""
    n = len(balls)
    if n == 0:
        return
    centers = np.array([[float(c) for c in b.center] for b in balls])
    radii = np.array([float(b.radius_sq) ** 0.5 for b in balls])
    scale = max(1.0, float(np.abs(centers).max(initial=0.0)), float(radii.max()))
    margin = eps * scale
    points = [centers[i] for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            points.append((centers[i] + centers[j]) / 2)
    for x in points:
        dist = np.sqrt(((centers - x[None, :]) ** 2).sum(axis=1))
        events = sorted(set(np.concatenate([dist + radii, np.abs(dist - radii)])))
        radii_cands: list[float] = []
        for a, b in zip(events, events[1:]):
            if b - a > 4 * margin:
                radii_cands.append((a + b) / 2)
        if events:
            radii_cands.append(events[-1] + 1.0)
        for big_r in radii_cands:
            if big_r <= margin:
                continue
            ins, outs, crossed = _classify(centers, radii, x, big_r, margin)
            yield SphereGuess((), (), (), Sphere(tuple(float(v) for v in x),
                                                 float(big_r)),
                              frozenset(ins), frozenset(outs), frozenset(crossed))


@dataclass(frozen=True)
class ParamResult:
    accept: bool
    witness: tuple[int, ...]
    guesses_evaluated: int


def _greedy_independent(graph: IntersectionGraph, indices: list[int]) -> list[int]:
    sub = set(indices)
    chosen: list[int] = []
    by_deg = sorted(indices, key=lambda v: len(set(graph.neighbors[v]) & sub))
    blocked: set[int] = set()
    for v in by_deg:
        if v not in blocked:
            chosen.append(v)
            blocked.add(v)
            blocked.update(graph.neighbors[v])
    return chosen


def _clique_cover_bound(neighbor_sets: list[set[int]], indices: list[int]) -> int:
    """Greedy clique cover size: a sound upper bound on the subset's MIS."""
    remaining = set(indices)
    cliques = 0
    while remaining:
        v = min(remaining)
        clique = {v}
        cands = neighbor_sets[v] & remaining
        while cands:
            u = min(cands)
            clique.add(u)
            cands &= neighbor_sets[u]
        remaining -= clique
        cliques += 1
    return cliques


def solve_mis_param(objects: Sequence[AxisBox], k: int,
                    eps: float = EPS_SPHERE,
                    base_case_n: int = BASE_CASE_N,
                    base_case_k: int = BASE_CASE_K,
                    fallback_n: int = FALLBACK_GRID_N,
                    crossing_cap: int = 10) -> ParamResult:
    """Decide whether k pairwise-disjoint objects exist; witness on accept.

    Acceptance is sound unconditionally: every candidate witness is validated
    with exact box predicates before it is returned.  Guess separations with
    more than crossing_cap crossed objects are skipped (a useful separator
    crosses few solution objects); completeness at desk scale rests on the
    oracle cross-check suite.  Dimensions outside {2, 3} fall back to the
    exact sparse solver with a warning.
    """
    if k <= 0:
        return ParamResult(True, (), 0)
    graph = build_intersection_graph(objects)
    n = graph.n
    if k > n:
        return ParamResult(False, (), 0)
    d = objects[0].dim
    if d not in (2, 3):
        warnings.warn(f"sphere guessing untested for d={d}; using sparse solver")
        from .graphs import mis_sparse
        res = mis_sparse(graph)
        if res.size >= k:
            return ParamResult(True, res.witness[:k], 0)
        return ParamResult(False, (), 0)

    neighbor_sets = [set(graph.neighbors[v]) for v in range(n)]
    balls = circumscribed_balls(objects)
    stats = {"guesses": 0}
    memo: dict[tuple[frozenset[int], int], tuple[bool, tuple[int, ...]]] = {}
    partition_cache: dict[frozenset[int], list] = {}
    cover_cache: dict[frozenset[int], int] = {}

    def brute_decide(indices: list[int], kk: int) -> tuple[bool, tuple[int, ...]]:
        sub = {v: i for i, v in enumerate(indices)}
        edges = [(sub[u], sub[v]) for u in indices for v in neighbor_sets[u]
                 if v in sub and u < v]
        res = mis_bruteforce(graph_from_edges(len(indices), edges))
        if res.size >= kk:
            return True, tuple(indices[i] for i in res.witness[:kk])
        return False, ()

    def partitions_for(frozen: frozenset[int]):
        """Deduplicated (inside, crossed, outside) separations, balanced first."""
        cached = partition_cache.get(frozen)
        if cached is not None:
            return cached
        indices = sorted(frozen)
        local_balls = [balls[i] for i in indices]
        seen: set[tuple[frozenset, frozenset]] = set()
        out = []
        gens = [canonical_sphere_candidates(local_balls, eps)]
        if len(indices) <= fallback_n:
            gens.append(fallback_sphere_family(local_balls, eps))
        for gen in gens:
            for guess in gen:
                stats["guesses"] += 1
                if len(guess.crossed) > crossing_cap:
                    continue
                ins = frozenset(indices[i] for i in guess.inside)
                crs = frozenset(indices[i] for i in guess.crossed)
                key = (ins, crs)
                if key in seen:
                    continue
                seen.add(key)
                outs = frozenset(frozen - ins - crs)
                out.append((ins, crs, outs))
        out.sort(key=lambda p: (max(len(p[0]), len(p[2])), len(p[1])))
        partition_cache[frozen] = out
        return out

    def cover_bound(frozen: frozenset[int]) -> int:
        cached = cover_cache.get(frozen)
        if cached is None:
            cached = _clique_cover_bound(neighbor_sets, sorted(frozen))
            cover_cache[frozen] = cached
        return cached

    def independent_subsets(crossed: list[int], cap: int):
        """Independent subsets of the crossed set, sizes 0..cap."""
        def rec(idx: int, chosen: list[int]):
            yield tuple(chosen)
            if len(chosen) >= cap:
                return
            for j in range(idx, len(crossed)):
                v = crossed[j]
                if all(v not in neighbor_sets[u] for u in chosen):
                    chosen.append(v)
                    yield from rec(j + 1, chosen)
                    chosen.pop()

        yield from rec(0, [])

    def decide(indices: frozenset[int], kk: int) -> tuple[bool, tuple[int, ...]]:
        if kk <= 0:
            return True, ()
        if len(indices) < kk:
            return False, ()
        key = (indices, kk)
        if key in memo:
            return memo[key]
        ordered = sorted(indices)
        greedy = _greedy_independent(graph, ordered)
        if len(greedy) >= kk:
            result = (True, tuple(greedy[:kk]))
            memo[key] = result
            return result
        if cover_bound(indices) < kk:
            memo[key] = (False, ())
            return memo[key]
        if kk <= base_case_k or len(indices) <= base_case_n:
            result = brute_decide(ordered, kk)
            memo[key] = result
            return result
        for ins, crs, outs in partitions_for(indices):
            for w in independent_subsets(sorted(crs), kk):
                removed = set()
                for v in w:
                    removed |= neighbor_sets[v]
                rem_in = frozenset(ins - removed)
                rem_out = frozenset(outs - removed)
                budget = kk - len(w)
                if len(rem_in) + len(rem_out) < budget:
                    continue
                lo = max(0, budget - len(rem_out))
                hi = min(budget, len(rem_in))
                for k_in in range(lo, hi + 1):
                    k_out = budget - k_in
                    if len(rem_in) == len(indices) and k_in >= kk:
                        continue
                    if len(rem_out) == len(indices) and k_out >= kk:
                        continue
                    ok_in, w_in = decide(rem_in, k_in)
                    if not ok_in:
                        continue
                    ok_out, w_out = decide(rem_out, k_out)
                    if not ok_out:
                        continue
                    witness = tuple(sorted(set(w) | set(w_in) | set(w_out)))
                    if len(witness) >= kk and is_independent_set(graph, witness):
                        memo[key] = (True, witness)
                        return memo[key]
        memo[key] = (False, ())
        return memo[key]

    accept, witness = decide(frozenset(range(n)), k)
    if accept:
        assert is_independent_set(graph, witness)
        assert len(witness) >= k
    return ParamResult(accept, witness, stats["guesses"])


def measured_ply(balls: Sequence[Ball]) -> int:
    """Diagnostic ply estimate: deepest coverage over ball centers and
    pairwise center midpoints."""
    if not balls:
        return 0
    centers = np.array([[float(c) for c in b.center] for b in balls])
    radii_sq = np.array([float(b.radius_sq) for b in balls])
    points = [centers[i] for i in range(len(balls))]
    for i in range(len(balls)):
        for j in range(i + 1, len(balls)):
            points.append((centers[i] + centers[j]) / 2)
    best = 0
    for x in points:
        d2 = ((centers - x[None, :]) ** 2).sum(axis=1)
        best = max(best, int((d2 <= radii_sq + 1e-12).sum()))
    return best
