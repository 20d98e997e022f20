"""Benchmark harness and the end-to-end satisfiability pipeline."""
from __future__ import annotations

import csv
import io
import os
import time
from concurrent.futures import ProcessPoolExecutor, TimeoutError as FutureTimeout
from dataclasses import dataclass, field

from .errors import CapExceeded
from .geometry import AxisBox
from .graphs import build_intersection_graph, is_independent_set, mis_bruteforce, \
    mis_sparse
from .instances import gen_random_boxes
from .separator import solve_mis_separator
from .spheresolver import solve_mis_param
from .stabbing import estimate_stabbing_number
from .satgraph import CNF33, embed_in_blown_cube, preprocess, sat_bruteforce, \
    verify_cell_property
from .builder import build_instance, check_canonical, verify_even_subdivision

BENCH_FIELDS = ["n", "d", "shape", "long_side", "seed", "alpha_estimate",
                "algorithm", "status", "seconds", "size", "verified"]


@dataclass(frozen=True)
class BenchRecord:
    n: int
    d: int
    shape: str
    long_side: int
    seed: int
    alpha_estimate: float
    algorithm: str
    status: str
    seconds: float
    size: int | None
    verified: bool

    def row(self) -> dict:
        return {"n": self.n, "d": self.d, "shape": self.shape,
                "long_side": self.long_side, "seed": self.seed,
                "alpha_estimate": round(self.alpha_estimate, 4),
                "algorithm": self.algorithm, "status": self.status,
                "seconds": round(self.seconds, 4),
                "size": "" if self.size is None else self.size,
                "verified": int(self.verified)}


def _solve_one(args) -> tuple[str, float, int | None, bool]:
    boxes, algorithm = args
    start = time.perf_counter()
    try:
        if algorithm == "brute":
            res = mis_bruteforce(build_intersection_graph(boxes))
            size, witness = res.size, res.witness
        elif algorithm == "sparse":
            res = mis_sparse(build_intersection_graph(boxes))
            size, witness = res.size, res.witness
        elif algorithm == "separator":
            res, _stats = solve_mis_separator(boxes)
            size, witness = res.size, res.witness
        elif algorithm == "param":
            # Decision sweep: largest accepted k.
            size = 0
            witness = ()
            for k in range(len(boxes), -1, -1):
                out = solve_mis_param(boxes, k)
                if out.accept:
                    size, witness = k, out.witness
                    break
            return ("ok", time.perf_counter() - start, size,
                    is_independent_set(build_intersection_graph(boxes), witness))
        else:
            return ("error", time.perf_counter() - start, None, False)
    except CapExceeded:
        return ("cap", time.perf_counter() - start, None, False)
    verified = is_independent_set(build_intersection_graph(boxes), witness)
    return "ok", time.perf_counter() - start, size, verified


def run_benchmark(ns, algos, d: int = 3, shape: str = "unit", long_side: int = 16,
                  seed: int = 0, timeout: float = 60.0, out=None) -> list[BenchRecord]:
    """Run each solver over a family sweep; per-record timeouts are recorded,
    not fatal.  STABPACK_THREADS caps the worker pool."""
    workers = max(1, int(os.environ.get("STABPACK_THREADS", "1")))
    records: list[BenchRecord] = []
    writer = None
    if out is not None:
        writer = csv.DictWriter(out, fieldnames=BENCH_FIELDS)
        writer.writeheader()
    pool = ProcessPoolExecutor(max_workers=workers)
    try:
        for n in ns:
            inst = gen_random_boxes(n, d, shape, seed, long_side)
            alpha = estimate_stabbing_number(inst.boxes).alpha if n <= 400 else 0.0
            for algorithm in algos:
                future = pool.submit(_solve_one, (inst.boxes, algorithm))
                try:
                    status, seconds, size, verified = future.result(timeout=timeout)
                except FutureTimeout:
                    future.cancel()
                    pool.shutdown(wait=False, cancel_futures=True)
                    pool = ProcessPoolExecutor(max_workers=workers)
                    status, seconds, size, verified = "timeout", timeout, None, False
                rec = BenchRecord(n, d, shape, long_side, seed, alpha, algorithm,
                                  status, seconds, size, verified)
                records.append(rec)
                if writer is not None:
                    writer.writerow(rec.row())
    finally:
        pool.shutdown(wait=False, cancel_futures=True)
    return records


@dataclass(frozen=True)
class SatPipelineReport:
    satisfiable: bool
    decided_by_preprocessing: bool
    cell_graph_vertices: int
    cell_graph_target: int | None
    cell_graph_mis: int | None
    boxes: int | None
    box_target: int | None
    box_mis: int | None
    even_subdivision_ok: bool | None
    equivalence_holds: bool


def end_to_end_sat(phi: CNF33, long_side: int = 16, d: int = 3,
                   with_boxes: bool = True, t: int | None = None
                   ) -> SatPipelineReport:
    """Formula -> gadget graph -> blown-cube subgraph -> canonical boxes,
    reporting whether the achieved independence number matches the target
    exactly when the formula is satisfiable."""
    truth = sat_bruteforce(phi)
    pre, verdict = preprocess(phi)
    if pre is None:
        return SatPipelineReport(truth, True, 0, None, None, None, None, None,
                                 None, verdict == truth)
    blow = t if t is not None else (long_side // 8) ** (d - 1)
    sub = embed_in_blown_cube(pre, t=blow, d=d)
    ok_cells, why = verify_cell_property(sub)
    if not ok_cells:
        raise AssertionError(f"cell property violated: {why}")
    g_mis = mis_sparse(sub.to_graph()).size
    graph_equiv = (g_mis == sub.mis_target) == truth
    if not with_boxes:
        return SatPipelineReport(truth, False, len(sub.vertices), sub.mis_target,
                                 g_mis, None, None, None, None, graph_equiv)
    inst = build_instance(sub.vertices, sub.edges, long_side,
                          mis_target_of_g=sub.mis_target)
    ok_canon, why = check_canonical(inst)
    if not ok_canon:
        raise AssertionError(f"canonicality violated: {why}")
    ok_even, _why = verify_even_subdivision(inst, sub.vertices, sub.edges)
    box_mis = mis_sparse(inst.graph()).size
    equiv = graph_equiv and ((box_mis == inst.mis_target) == truth)
    return SatPipelineReport(truth, False, len(sub.vertices), sub.mis_target,
                             g_mis, len(inst.boxes), inst.mis_target, box_mis,
                             ok_even, equiv)
