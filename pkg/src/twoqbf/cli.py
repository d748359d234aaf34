"""Command line interface: gen, label, solve, eval, infer.

Exit codes: 0 success, 1 a ranked run disagreed with the unranked run on
satisfiability, 2 input or format errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .cegar import solve_ranked
from .datagen import GenSpec, emit_dataset, label_dataset
from .formula import parse_qdimacs
from .gnn import (
    SCORE_EXISTS,
    SCORE_FORALL,
    encode_graph,
    head_score_exists,
    head_score_forall,
    head_vote,
    head_witness,
    load_bundle,
    run_embedding,
)
from .harness import (
    HeuristicConfig,
    build_rankers,
    evaluate_split,
    format_table,
    parse_config,
)

MAX_ENUM_BLOCK = 12


def _add_ranking_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--candidate", default="none",
                   choices=("none", "maxsat", "hardness", "gnn"),
                   help="candidate ranking heuristic")
    p.add_argument("--counter", default="none",
                   choices=("none", "maxsat", "gnn"),
                   help="counterexample ranking heuristic")
    p.add_argument("--candidate-bundle", help="weights for --candidate gnn")
    p.add_argument("--counter-bundle", help="weights for --counter gnn")
    p.add_argument("--n-max", type=int, default=10,
                   help="models enumerated per ranking step")
    p.add_argument("--iters", type=int, default=16,
                   help="message passing iterations for gnn heuristics")


def _config_from_flags(args) -> HeuristicConfig:
    return HeuristicConfig(
        candidate=args.candidate,
        counterexample=args.counter,
        candidate_bundle=args.candidate_bundle,
        counterexample_bundle=args.counter_bundle,
        n_max=args.n_max,
        iterations=args.iters,
    )


def cmd_gen(args) -> int:
    spec = GenSpec(
        n_forall=args.n_forall,
        n_exists=args.n_exists,
        forall_per_clause=args.forall_per_clause,
        exists_per_clause=args.exists_per_clause,
        seed=args.seed,
    )
    counts = {
        "TrainU": args.unsat,
        "TrainS": args.sat,
        "TestU": args.test_unsat,
        "TestS": args.test_sat,
    }
    counts = {k: v for k, v in counts.items() if v > 0}
    manifest = emit_dataset(args.out, counts, spec, with_labels=args.labels)
    sizes = {k: len(v) for k, v in manifest["splits"].items()}
    print(f"wrote {sum(sizes.values())} instances to {args.out}: {sizes}")
    return 0


def cmd_label(args) -> int:
    done = label_dataset(args.dir, args.ids or None)
    print(f"labeled {len(done)} instances in {args.dir}")
    return 0


def cmd_solve(args) -> int:
    f = parse_qdimacs(Path(args.file).read_text())
    cfg = _config_from_flags(args)
    cand, counter = build_rankers(cfg)
    res = solve_ranked(f, cand, counter, n_max=cfg.n_max, seed=args.seed)
    if res.status == "unsat":
        print(f"unsat, witness {res.witness.bits(f.universals)}")
    else:
        print("sat")
    print(f"iterations {res.iterations}")
    return 0


def cmd_eval(args) -> int:
    if args.config:
        configs = [parse_config(c) for c in args.config]
    else:
        configs = [_config_from_flags(args)]
    report = evaluate_split(args.dir, args.split, configs,
                            seed=args.seed, jobs=args.jobs)
    print(format_table(report))
    out = args.report or f"eval-{args.split}.json"
    Path(out).write_text(json.dumps(report, indent=1, sort_keys=True) + "\n")
    print(f"report written to {out}")
    if report["disagreements"]:
        for d in report["disagreements"]:
            print(
                f"status disagreement on {d['instance']} ({d['config']}): "
                f"{d['got']} != {d['expected']}",
                file=sys.stderr,
            )
        return 1
    return 0


def cmd_infer(args) -> int:
    f = parse_qdimacs(Path(args.file).read_text())
    bundle = load_bundle(args.bundle)
    state = run_embedding(encode_graph(f), bundle, args.iters)
    if args.head == "vote":
        print(f"vote {head_vote(state, bundle):+.6f}")
    elif args.head == "witness":
        probs = head_witness(state, bundle)
        for v, row in zip(f.universals, probs):
            print(f"x{v} false {row[0]:.6f} true {row[1]:.6f}")
    else:
        order = f.universals if args.side == "forall" else f.existentials
        head = SCORE_FORALL if args.side == "forall" else SCORE_EXISTS
        if not bundle.has_head(head):
            raise ValueError(f"bundle has no {head} head")
        if len(order) > MAX_ENUM_BLOCK:
            raise ValueError(
                f"{args.side} block too large to enumerate: {len(order)}"
            )
        n = len(order)
        bits = np.array(
            [[(i >> (n - 1 - k)) & 1 for k in range(n)] for i in range(1 << n)],
            dtype=np.float32,
        )
        score_fn = head_score_forall if args.side == "forall" else head_score_exists
        scores = score_fn(state, bundle, bits)
        for i, s in enumerate(scores):
            print(f"{format(i, f'0{n}b')} {s:+.6f}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="twoqbf",
        description="2QBF toolkit: generate, label, solve, evaluate, infer",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a dataset directory")
    g.add_argument("--out", required=True, help="output directory")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--unsat", type=int, default=0, help="TrainU instances")
    g.add_argument("--sat", type=int, default=0, help="TrainS twins")
    g.add_argument("--test-unsat", type=int, default=0, help="TestU instances")
    g.add_argument("--test-sat", type=int, default=0, help="TestS twins")
    g.add_argument("--n-forall", type=int, default=8)
    g.add_argument("--n-exists", type=int, default=10)
    g.add_argument("--forall-per-clause", type=int, default=2)
    g.add_argument("--exists-per-clause", type=int, default=3)
    g.add_argument("--labels", action="store_true",
                   help="also write label files (slow at full size)")
    g.set_defaults(fn=cmd_gen)

    l = sub.add_parser("label", help="write label files for a dataset")
    l.add_argument("--dir", required=True)
    l.add_argument("--ids", nargs="*", help="label only these instance ids")
    l.set_defaults(fn=cmd_label)

    s = sub.add_parser("solve", help="solve one QDIMACS file")
    s.add_argument("file")
    _add_ranking_flags(s)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(fn=cmd_solve)

    e = sub.add_parser("eval", help="run ranking configs over a split")
    e.add_argument("--dir", required=True)
    e.add_argument("--split", required=True)
    e.add_argument("--config", action="append",
                   help="repeatable, e.g. cand=maxsat,counter=none")
    _add_ranking_flags(e)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--jobs", type=int, default=1)
    e.add_argument("--report", help="report JSON path (default eval-SPLIT.json)")
    e.set_defaults(fn=cmd_eval)

    i = sub.add_parser("infer", help="run bundle heads on one formula")
    i.add_argument("file")
    i.add_argument("--bundle", required=True)
    i.add_argument("--iters", type=int, default=16)
    i.add_argument("--head", default="vote",
                   choices=("vote", "witness", "score"))
    i.add_argument("--side", default="forall", choices=("forall", "exists"))
    i.set_defaults(fn=cmd_infer)
    return ap


def main(argv=None) -> int:
    ap = _build_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, OSError, KeyError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
