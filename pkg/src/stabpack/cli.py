"""Command-line front end.

Subcommands: gen, solve, stab, reduce {sat2cube, cube2boxes, sat2boxes},
verify, bench.  All runs are reproducible from --seed; instance files are
integer-exact JSON.  Exit codes: 0 ok, 2 invalid input, 3 cap or timeout.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .bench import run_benchmark
from .builder import (BoxInstanceWithProvenance, build_instance, check_canonical,
                      verify_even_subdivision)
from .errors import CapExceeded, InvalidInput, StabpackError
from .geometry import AxisBox
from .graphs import build_intersection_graph, mis_bruteforce, mis_sparse
from .instances import InstanceFile, from_json, gen_random_boxes
from .satgraph import (embed_in_blown_cube, parse_dimacs, preprocess,
                       verify_cell_property)
from .separator import solve_mis_separator
from .spheresolver import solve_mis_param
from .stabbing import estimate_stabbing_number, stab_greedy


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text()


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _cmd_gen(args) -> int:
    inst = gen_random_boxes(args.n, args.d, args.shape, args.seed,
                            long_side=args.long_side, span=args.span)
    _write(args.output, inst.to_json())
    return 0


def _cmd_solve(args) -> int:
    inst = from_json(_read(args.instance))
    boxes = inst.boxes
    if args.algo == "brute":
        res = mis_bruteforce(build_intersection_graph(boxes))
        payload = {"size": res.size, "witness": list(res.witness)}
    elif args.algo == "sparse":
        res = mis_sparse(build_intersection_graph(boxes))
        payload = {"size": res.size, "witness": list(res.witness)}
    elif args.algo == "separator":
        res, stats = solve_mis_separator(boxes)
        payload = {"size": res.size, "witness": list(res.witness),
                   "stats": {"depth": stats.depth,
                             "candidates_tried": stats.candidates_tried,
                             "max_separator_weight": stats.max_separator_weight}}
    elif args.algo == "param":
        if args.k is None:
            raise InvalidInput("--algo param needs -k")
        out = solve_mis_param(boxes, args.k)
        payload = {"accept": out.accept, "witness": list(out.witness),
                   "guesses_evaluated": out.guesses_evaluated}
    else:  # pragma: no cover - argparse restricts choices
        raise InvalidInput(f"unknown algorithm {args.algo}")
    _write(args.output, json.dumps(payload, sort_keys=True) + "\n")
    return 0


def _cmd_stab(args) -> int:
    inst = from_json(_read(args.instance))
    stab = stab_greedy(inst.boxes)
    est = estimate_stabbing_number(inst.boxes)
    points = [[str(c) for c in p] for p in stab.points]
    _write(args.output, json.dumps({"points": points, "alpha": est.alpha},
                                   sort_keys=True) + "\n")
    lines = ["r,ball_id,points,alpha_class"]
    lines += [f"{r},{ball},{pts},{round(a, 6)}" for r, ball, pts, a in est.rows]
    _write(args.csv, "\n".join(lines) + "\n")
    if args.plot:
        from .report import render_scaling
        pts = [(float(r), float(p)) for r, _b, p, _a in est.rows]
        render_scaling(sorted(pts), "radius class", "piercing points",
                       "stabbing estimate", args.plot)
    return 0


def _subgraph_payload(sub) -> dict:
    return {
        "dim": sub.host.d,
        "side": sub.host.side,
        "t": sub.host.t,
        "vertices": [list(v) for v in sub.vertices],
        "edges": [[list(u), list(v)] for u, v in sub.edges],
        "target": sub.mis_target,
        "double_subdivisions": sub.double_subdivisions,
    }


def _cmd_sat2cube(args) -> int:
    phi = parse_dimacs(_read(args.dimacs))
    pre, verdict = preprocess(phi)
    if pre is None:
        _write(args.output, json.dumps({"decided": verdict}) + "\n")
        return 0
    sub = embed_in_blown_cube(pre, t=args.t, d=args.d)
    ok, why = verify_cell_property(sub)
    if not ok:
        raise StabpackError(f"cell property violated: {why}")
    _write(args.output, json.dumps(_subgraph_payload(sub), sort_keys=True) + "\n")
    return 0


def _instance_payload(inst: BoxInstanceWithProvenance,
                      g_vertices, g_edges) -> dict:
    return {
        "dim": inst.dim,
        "denominator": inst.L,
        "boxes": [{"lo": list(b.lo), "hi": list(b.hi)} for b in inst.boxes],
        "target": inst.mis_target,
        "provenance": {
            "double_subdivisions": inst.double_subdivisions,
            "representatives": [[list(v), i]
                                for v, i in sorted(inst.representatives.items())],
            "edge_paths": [[list(u), list(v), list(path)]
                           for (u, v), path in sorted(inst.edge_paths.items())],
            "g_vertices": [list(v) for v in g_vertices],
            "g_edges": [[list(u), list(v)] for u, v in g_edges],
        },
    }


def _cmd_cube2boxes(args) -> int:
    data = json.loads(_read(args.subgraph))
    if "decided" in data:
        _write(args.output, json.dumps(data) + "\n")
        return 0
    vertices = [tuple(v) for v in data["vertices"]]
    edges = [(tuple(u), tuple(v)) for u, v in data["edges"]]
    inst = build_instance(vertices, edges, args.long_side,
                          mis_target_of_g=data["target"])
    ok, why = check_canonical(inst)
    if not ok:
        raise StabpackError(f"canonicality violated: {why}")
    _write(args.output,
           json.dumps(_instance_payload(inst, vertices, edges), sort_keys=True) + "\n")
    return 0


def _cmd_sat2boxes(args) -> int:
    phi = parse_dimacs(_read(args.dimacs))
    pre, verdict = preprocess(phi)
    if pre is None:
        _write(args.output, json.dumps({"decided": verdict}) + "\n")
        return 0
    t = (args.long_side // 8) ** (args.d - 1)
    sub = embed_in_blown_cube(pre, t=t, d=args.d)
    inst = build_instance(sub.vertices, sub.edges, args.long_side,
                          mis_target_of_g=sub.mis_target)
    _write(args.output,
           json.dumps(_instance_payload(inst, sub.vertices, sub.edges),
                      sort_keys=True) + "\n")
    return 0


def _cmd_verify(args) -> int:
    data = json.loads(_read(args.instance))
    denom = int(data["denominator"])
    boxes = tuple(AxisBox(tuple(b["lo"]), tuple(b["hi"]), denom)
                  for b in data["boxes"])
    prov = data.get("provenance")
    report = {"boxes": len(boxes)}
    if prov is None:
        raise InvalidInput("instance has no provenance to verify")
    inst = BoxInstanceWithProvenance(
        boxes=boxes, L=denom, dim=int(data["dim"]),
        representatives={tuple(v): i for v, i in prov["representatives"]},
        edge_paths={(tuple(u), tuple(v)): tuple(path)
                    for u, v, path in prov["edge_paths"]},
        mis_target=int(data["target"]),
        double_subdivisions=int(prov["double_subdivisions"]))
    g_vertices = [tuple(v) for v in prov["g_vertices"]]
    g_edges = [(tuple(u), tuple(v)) for u, v in prov["g_edges"]]
    okc, whyc = check_canonical(inst)
    oke, whye = verify_even_subdivision(inst, g_vertices, g_edges)
    report["canonical"] = okc
    report["even_subdivision"] = oke
    if not okc:
        report["canonical_violation"] = whyc
    if not oke:
        report["even_subdivision_violation"] = whye
    if args.mis:
        size = mis_sparse(inst.graph()).size
        report["mis"] = size
        report["target"] = inst.mis_target
        report["achieves_target"] = size == inst.mis_target
    _write(args.output, json.dumps(report, sort_keys=True) + "\n")
    return 0 if (okc and oke) else 2


def _cmd_bench(args) -> int:
    ns = [int(x) for x in args.ns.split(",")]
    algos = args.algos.split(",")
    out_path = Path(args.output)
    with out_path.open("w", newline="") as fh:
        run_benchmark(ns, algos, d=args.d, shape=args.shape,
                      long_side=args.long_side, seed=args.seed,
                      timeout=args.timeout, out=fh)
    if args.plot:
        from .report import render_benchmark
        render_benchmark(out_path, args.plot)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stabpack",
        description="exact packing toolkit for grid-aligned boxes")
    parser.add_argument("--seed", type=int, default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a random instance")
    p.add_argument("-n", type=int, required=True)
    p.add_argument("-d", type=int, default=3)
    p.add_argument("--shape", choices=("unit", "canonical", "mixed"),
                   default="unit")
    p.add_argument("--long-side", type=int, default=16)
    p.add_argument("--span", type=int, default=None)
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("solve", help="solve maximum independent set")
    p.add_argument("instance")
    p.add_argument("--algo", choices=("brute", "sparse", "separator", "param"),
                   required=True)
    p.add_argument("-k", type=int, default=None)
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("stab", help="stabbing set and stabbing-number estimate")
    p.add_argument("instance")
    p.add_argument("-o", "--output", default="-")
    p.add_argument("--csv", default="-")
    p.add_argument("--plot", default=None)
    p.set_defaults(func=_cmd_stab)

    p = sub.add_parser("reduce", help="hardness-instance constructions")
    red = p.add_subparsers(dest="reduction", required=True)
    q = red.add_parser("sat2cube")
    q.add_argument("--dimacs", required=True)
    q.add_argument("-t", type=int, required=True)
    q.add_argument("-d", type=int, default=3)
    q.add_argument("-o", "--output", default="-")
    q.set_defaults(func=_cmd_sat2cube)
    q = red.add_parser("cube2boxes")
    q.add_argument("subgraph")
    q.add_argument("-L", "--long-side", type=int, default=16)
    q.add_argument("-o", "--output", default="-")
    q.set_defaults(func=_cmd_cube2boxes)
    q = red.add_parser("sat2boxes")
    q.add_argument("--dimacs", required=True)
    q.add_argument("-L", "--long-side", type=int, default=16)
    q.add_argument("-d", type=int, default=3)
    q.add_argument("-o", "--output", default="-")
    q.set_defaults(func=_cmd_sat2boxes)

    p = sub.add_parser("verify", help="verify a box instance with provenance")
    p.add_argument("instance")
    p.add_argument("--mis", action="store_true",
                   help="also solve the instance and compare to its target")
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("bench", help="benchmark solver sweep to CSV")
    p.add_argument("--ns", required=True, help="comma-separated sizes")
    p.add_argument("--algos", required=True,
                   help="comma-separated algorithms (brute,sparse,separator,param)")
    p.add_argument("-d", type=int, default=3)
    p.add_argument("--shape", choices=("unit", "canonical", "mixed"),
                   default="unit")
    p.add_argument("--long-side", type=int, default=16)
    p.add_argument("--timeout", type=float, default=60.0)
    p.add_argument("--plot", default=None,
                   help="also render the sweep to this image file")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CapExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (InvalidInput, FileNotFoundError, json.JSONDecodeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
