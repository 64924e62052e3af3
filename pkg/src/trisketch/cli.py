"""Command-line surface: generate, detect, certify, verify, audit, bench.

Exit codes are a stable CI contract: 0 success or accepted verification,
1 verification reject, 2 input or schema error, 3 internal invariant
violation (failed audit). Every command takes its randomness from
explicit flags; nothing reads environment entropy.
"""

from __future__ import annotations

import argparse
import sys
from typing import List, Optional

from . import metrics, pipeline
from .certificate import read_certificate, write_certificate
from .errors import SchemaError, TriSketchError
from .graphio import (
    gen_er_sparse,
    gen_planted_triangle,
    gen_triangle_free,
    orient,
    read_graph,
    write_graph,
)
from .seedrand import Params, with_overrides
from .verifier import verify_no

_PARAM_TYPES = {
    "c_m": int,
    "c_b": int,
    "c_t": int,
    "c_r": int,
    "c_g": int,
    "c_k": int,
    "kappa": int,
    "c0": int,
    "p_field": int,
    "groups_override": int,
    "flat_keep_rate": float,
    "coin_mode": str,
}


def _parse_params(n: int, preset: str, raw: Optional[List[str]]) -> Params:
    overrides = {}
    for item in raw or []:
        if "=" not in item:
            raise SchemaError("param", f"expected K=V, got {item!r}")
        key, value = item.split("=", 1)
        if key not in _PARAM_TYPES:
            raise SchemaError("param", f"unknown parameter {key!r}")
        overrides[key] = _PARAM_TYPES[key](value)
    params = Params.make(n, preset=preset)
    if overrides:
        params = with_overrides(params, **overrides)
    return params


def _dump_instrumentation(counters, dest: str) -> None:
    lines = ["i,r,classes,materialized,collisions"]
    for (i, r), (classes, mat, coll) in sorted(counters.per_level.items()):
        lines.append(f"{i},{r},{classes},{mat},{coll}")
    text = "\n".join(lines) + "\n"
    if dest == "-":
        sys.stdout.write(text)
    else:
        with open(dest, "w", encoding="utf-8") as fh:
            fh.write(text)


def _cmd_gen(args) -> int:
    if args.kind == "planted":
        g = gen_planted_triangle(args.n, int(args.size), args.gen_seed)
    elif args.kind == "bipartite":
        g = gen_triangle_free(args.n, int(args.size), args.gen_seed)
    elif args.kind == "er":
        g = gen_er_sparse(args.n, float(args.size), args.gen_seed)
    else:
        raise SchemaError("kind", f"unknown generator {args.kind!r}")
    write_graph(g, args.out)
    print(f"wrote {args.out}: n={g.n} m={g.m}" + (f" planted={g.planted}" if g.planted else ""))
    return 0


def _load_run(args, with_counters: bool = False, instrument: bool = False):
    g = orient(read_graph(args.graph))
    params = _parse_params(g.n, args.preset, args.param)
    return pipeline.run(
        g,
        args.seed,
        params,
        early_stop=not args.no_early_stop,
        with_counters=with_counters or args.instrument is not None,
        instrument=instrument,
    )


def _cmd_detect(args) -> int:
    result = _load_run(args, with_counters=args.instrument is not None)
    if result.outcome is None:
        print("NO")
    else:
        t = result.outcome
        print(f"YES {t.x} {t.v} {t.w}")
    if args.instrument is not None:
        _dump_instrumentation(result.counters, args.instrument)
    return 0


def _cmd_certify(args) -> int:
    result = _load_run(args, with_counters=args.instrument is not None)
    write_certificate(result.certificate, args.out)
    if result.outcome is None:
        print(f"NO; certificate written to {args.out}")
    else:
        t = result.outcome
        print(f"YES {t.x} {t.v} {t.w}; certificate written to {args.out}")
    if args.instrument is not None:
        _dump_instrumentation(result.counters, args.instrument)
    return 0


def _cmd_verify(args) -> int:
    g = orient(read_graph(args.graph))
    cert = read_certificate(args.cert)
    verdict = verify_no(g, cert)
    print(verdict.describe())
    return 0 if verdict.accepted else 1


def _cmd_audit(args) -> int:
    result = _load_run(args, with_counters=True)
    counters = result.counters
    if args.corrupt_counters:
        # Negative-control hook: inflate one executed-check counter so the
        # accounting audit must fail.
        key = next(iter(sorted(counters.per_level))) if counters.per_level else (1, 0)
        counters.level(*key)[2] += counters.level(*key)[0] * result.state.params.c0 * result.state.params.groups + 1
    acc = metrics.accounting_audit(counters, result.state.params)
    keep = metrics.keep_concentration_audit(counters, result.state.params)
    print(f"accounting: {'PASS' if acc.passed else 'FAIL'} max_ratio={acc.max_ratio:.3f} cap={acc.cap}")
    print(
        f"keep-concentration: {'PASS' if keep.passed else 'FAIL'} "
        f"max_stat={keep.max_stat:.3f} exceed_fraction={keep.exceed_fraction:.4f} max_k_e={keep.max_k_e}"
    )
    if args.out:
        rows = [
            [i, r, classes, mat, coll]
            for (i, r), (classes, mat, coll) in sorted(counters.per_level.items())
        ]
        metrics.write_csv(args.out, ["i", "r", "classes", "materialized", "collisions"], rows)
    return 0 if (acc.passed and keep.passed) else 3


def _cmd_bench(args) -> int:
    n_values = [int(v) for v in args.n_values.split(",")]
    rows = metrics.scaling_bench(n_values, preset=args.preset, avg_degree=args.avg_degree)
    header = ["n", "m", "build_time", "query_time", "verify_time", "peak_bytes", "time_norm", "bytes_norm"]
    table = [
        [r.n, r.m, f"{r.build_time:.6f}", f"{r.query_time:.6f}", f"{r.verify_time:.6f}", r.peak_bytes,
         f"{r.time_norm:.9f}", f"{r.bytes_norm:.3f}"]
        for r in rows
    ]
    if args.out:
        metrics.write_csv(args.out, header, table)
        print(f"wrote {args.out} ({len(table)} rows)")
    else:
        print(",".join(header))
        for row in table:
            print(",".join(str(v) for v in row))
    norms_t = [r.time_norm for r in rows]
    norms_b = [r.bytes_norm for r in rows]
    if norms_t and min(norms_t) > 0:
        spread_t = max(norms_t) / min(norms_t)
        spread_b = max(norms_b) / min(norms_b)
        print(f"time_norm spread: {spread_t:.2f}x; bytes_norm spread: {spread_b:.2f}x")
        if spread_t >= 2 or spread_b >= 2:
            print("warning: normalized envelope varies by >= 2x across the range")
    return 0


def _cmd_hitrate(args) -> int:
    n_values = [int(v) for v in args.n_values.split(",")]
    report = metrics.hit_rate_experiment(n_values, args.trials, preset=args.preset)
    header = [
        "n", "trials", "single_group_hits", "all_group_hits",
        "single_group_rate", "all_group_rate", "both_arcs_kept",
    ]
    table = [
        [r.n, r.trials, r.single_group_hits, r.all_group_hits,
         f"{r.single_group_rate:.6f}", f"{r.all_group_rate:.6f}", r.both_arcs_kept]
        for r in report.rows
    ]
    if args.out:
        metrics.write_csv(args.out, header, table)
        print(f"wrote {args.out} ({len(table)} rows)")
    else:
        print(",".join(header))
        for row in table:
            print(",".join(str(v) for v in row))
    print(f"fitted slope a (rate ~ a/log2 n): {report.slope:.6f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="trisketch")
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen", help="write a corpus graph file")
    p_gen.add_argument("kind", choices=["planted", "bipartite", "er"])
    p_gen.add_argument("n", type=int)
    p_gen.add_argument("size", help="edge count (planted/bipartite) or average degree (er)")
    p_gen.add_argument("gen_seed", type=int)
    p_gen.add_argument("--out", required=True)
    p_gen.set_defaults(func=_cmd_gen)

    def common_run_flags(p):
        p.add_argument("--graph", required=True)
        p.add_argument("--seed", required=True, help="master seed, hex")
        p.add_argument("--preset", choices=["full", "reduced"], default="full")
        p.add_argument("--param", action="append", metavar="K=V")
        p.add_argument("--no-early-stop", action="store_true")
        p.add_argument("--instrument", nargs="?", const="-", default=None, metavar="PATH")

    p_detect = sub.add_parser("detect", help="print YES x v w | NO")
    common_run_flags(p_detect)
    p_detect.set_defaults(func=_cmd_detect)

    p_certify = sub.add_parser("certify", help="run detection and write a certificate")
    common_run_flags(p_certify)
    p_certify.add_argument("--out", required=True)
    p_certify.set_defaults(func=_cmd_certify)

    p_verify = sub.add_parser("verify", help="verify a certificate against a graph")
    p_verify.add_argument("--graph", required=True)
    p_verify.add_argument("--cert", required=True)
    p_verify.set_defaults(func=_cmd_verify)

    p_audit = sub.add_parser("audit", help="run and check workload audits")
    common_run_flags(p_audit)
    p_audit.add_argument("--out", help="per-level counter CSV")
    p_audit.add_argument("--corrupt-counters", action="store_true", help=argparse.SUPPRESS)
    p_audit.set_defaults(func=_cmd_audit)

    p_bench = sub.add_parser("bench", help="scaling bench over a ladder of n")
    p_bench.add_argument("--n-values", default="256,512,1024,2048")
    p_bench.add_argument("--preset", choices=["full", "reduced"], default="reduced")
    p_bench.add_argument("--avg-degree", type=float, default=6.0)
    p_bench.add_argument("--out")
    p_bench.set_defaults(func=_cmd_bench)

    p_hit = sub.add_parser("hitrate", help="planted-triangle hit-rate experiment")
    p_hit.add_argument("--n-values", default="256,4096")
    p_hit.add_argument("--trials", type=int, default=500)
    p_hit.add_argument("--preset", choices=["full", "reduced"], default="reduced")
    p_hit.add_argument("--out")
    p_hit.set_defaults(func=_cmd_hitrate)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    except (TriSketchError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except AssertionError as exc:
        print(f"internal invariant violation: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
