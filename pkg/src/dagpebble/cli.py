"""Command-line interface: build, dynamize, pebble, verify, hash, experiment.

Grammar is git-style: global flags before the subcommand, e.g.

    dagpebble --seed 7 --format csv tradeoff --family line --n 512 ...

The recurring flags (--seed, --threads, --format) are also accepted after
the subcommand and override the globals there.  Everything an invocation
writes is a pure function of its arguments: graphs in the DAGv1 container,
reports as canonical JSON (or flat CSV with the same numeric fields), no
timestamps anywhere, so re-running a command reproduces its outputs byte
for byte.

Exit codes: 0 ok; 1 usage or component error; 2 a verified property was
falsified (or an extracted pebbling is illegal); 3 an exact search refused
to run because its resource cap tripped.
"""

from __future__ import annotations

import argparse
import sys

from . import __version__
from .build import drsample, dynamize, egsample, grates, line_graph, load_spec, save_spec
from .errors import CapExceeded
from .experiments import (
    COMPONENTS,
    FAMILIES,
    VERSION,
    ExperimentConfig,
    lucky_rate_experiment,
    pipeline_build,
    resolve_thresholds,
    rows_to_csv,
    tradeoff_experiment,
    write_report,
)
from .graphs import read_dagv1, write_dagv1
from .labeling import OracleConfig, eval_dmhf, extract_pebbling, load_trace, save_trace
from .pebble import StrategyError, cost, run_dynamic, strategy_by_name
from .robust import (
    FALSIFIED,
    check_ancestral_robust,
    check_depth_robust,
    check_fractional_dr,
    check_local_expansion,
    good_nodes,
)
from .util import derive_rng, write_json

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_FALSIFIED = 2
EXIT_CAP = 3


def _eff(args, name: str, fallback):
    """Subcommand-local flag wins over the global one."""
    local = getattr(args, f"local_{name}", None)
    return fallback if local is None else local


def _head(seed: int) -> dict:
    return {"seed": seed, "version": VERSION, "components": dict(COMPONENTS)}


def _emit_any(report: dict, path: str, fmt: str) -> None:
    if fmt == "json":
        write_json(path, report)
    else:
        # generic key,value flattening for reports without a tabular core
        lines = ["key,value"]
        for key in sorted(report):
            val = report[key]
            if isinstance(val, (int, float, str, bool)) or val is None:
                lines.append(f"{key},{val}")
        with open(path, "w", encoding="ascii") as fh:
            fh.write("\n".join(lines) + "\n")


def _parse_value(text: str):
    """Param values: int, float, a/b ratio, or +-joined int list."""
    if "+" in text:
        return [int(x) for x in text.split("+")]
    if "/" in text:
        num, den = text.split("/", 1)
        return float(num) / float(den)
    try:
        return int(text)
    except ValueError:
        return float(text)


def _parse_params(text: str) -> dict:
    out = {}
    if not text:
        return out
    for item in text.split(","):
        if "=" not in item:
            raise ValueError(f"--params entries look like k=v, got {item!r}")
        key, val = item.split("=", 1)
        out[key.strip()] = _parse_value(val.strip())
    return out


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.split(",") if x)


# -- subcommands ----------------------------------------------------------------


def cmd_gen(args, seed: int, threads: int, fmt: str) -> int:
    rng = derive_rng(seed, "gen", args.family)
    if args.family == "line":
        g = line_graph(args.n)
    elif args.family == "drsample":
        g = drsample(args.n, rng)
    elif args.family == "grates":
        g = grates(args.n, args.grates_eps)
    else:
        g = egsample(args.n, args.grates_eps, rng)[0]
    write_dagv1(g, args.out)
    print(f"wrote {args.out}: {args.family} n={g.n} edges={g.m}")
    return EXIT_OK


def cmd_dynamize(args, seed: int, threads: int, fmt: str) -> int:
    base = read_dagv1(args.infile)
    spec = dynamize(base, args.chal, base_path=args.infile)
    save_spec(spec, args.out)
    print(f"wrote {args.out}: base n={spec.n_base} chain={spec.n_chal} "
          f"total={spec.n_total}")
    return EXIT_OK


def cmd_pebble(args, seed: int, threads: int, fmt: str) -> int:
    spec = load_spec(args.spec)
    strategy_by_name(args.strategy)  # validate before the loop
    ssc = _int_list(args.ssc) if args.ssc else resolve_thresholds(
        ExperimentConfig(), spec.n_base)["ssc"]
    per_trial = []
    for trial in range(args.trials):
        challenges = spec.sample_challenges(derive_rng(seed, "pebble", trial))
        run = run_dynamic(spec, strategy_by_name(args.strategy),
                          challenges=challenges)
        per_trial.append({
            "trial": trial,
            "cc": run.cc,
            "rounds": run.rounds,
            "max_space": run.max_space(),
            "ssc": {str(s): run.ssc(s) for s in ssc},
            "mean_recompute_latency": run.mean_latency(recompute_only=True),
            "challenges": [
                {"i": c.i, "s_i": c.s, "t_i": c.t, "r_i": c.r}
                for c in run.challenges
            ],
        })
    k = len(per_trial)
    summary = {
        "trials": k,
        "strategy": args.strategy,
        "mean_cc": sum(t["cc"] for t in per_trial) / k,
        "mean_rounds": sum(t["rounds"] for t in per_trial) / k,
        "mean_max_space": sum(t["max_space"] for t in per_trial) / k,
        "mean_ssc": {str(s): sum(t["ssc"][str(s)] for t in per_trial) / k
                     for s in ssc},
        "mean_recompute_latency": (
            sum(t["mean_recompute_latency"] for t in per_trial) / k),
    }
    report = _head(seed)
    report.update({"spec": args.spec, "strategy": args.strategy,
                   "ssc_thresholds": list(ssc),
                   "per_trial": per_trial, "summary": summary})
    if fmt == "csv" and args.report:
        rows = []
        for t in per_trial:
            row = {"trial": t["trial"], "cc": t["cc"], "rounds": t["rounds"],
                   "max_space": t["max_space"],
                   "mean_recompute_latency": t["mean_recompute_latency"]}
            for s in ssc:
                row[f"ssc_{s}"] = t["ssc"][str(s)]
            rows.append(row)
        names = ["trial", "cc", "rounds", "max_space", "mean_recompute_latency"]
        names += [f"ssc_{s}" for s in ssc]
        with open(args.report, "w", encoding="ascii") as fh:
            fh.write(rows_to_csv(names, rows))
    elif args.report:
        write_json(args.report, report)
    print(f"{args.strategy}: mean cc {summary['mean_cc']:.1f}, "
          f"mean rounds {summary['mean_rounds']:.1f}")
    return EXIT_OK


_VERIFY_PARAMS = {
    "dr": ("e", "d"),
    "fdr": ("e", "d", "f"),
    "ar": ("a", "C", "f"),
    "lexp": ("delta",),
    "good": ("c",),
}


def cmd_verify(args, seed: int, threads: int, fmt: str) -> int:
    g = read_dagv1(args.infile)
    params = _parse_params(args.params)
    required = _VERIFY_PARAMS[args.prop]
    allowed = set(required) | {"s", "s_size", "k_cap", "trials"}
    unknown = set(params) - allowed
    if unknown:
        raise ValueError(
            f"unknown params {sorted(unknown)} for {args.prop}; "
            f"required: {required}")
    missing = [k for k in required if k not in params]
    if missing:
        raise ValueError(f"--params missing {missing} for prop {args.prop}")
    trials = int(params.get("trials", args.trials))

    if args.prop == "good":
        c = params["c"]
        if "s" in params:
            s = set(params["s"]) if isinstance(params["s"], list) \
                else {int(params["s"])}
        elif "s_size" in params:
            s = set(derive_rng(seed, "verify", "good").sample(
                range(1, g.n + 1), int(params["s_size"])))
        else:
            raise ValueError("good needs s=v1+v2+... or s_size=k")
        good = good_nodes(g, s, c)
        floor = g.n - 2 * len(s)
        report = _head(seed)
        report.update({
            "prop": "good", "n": g.n, "c": c, "s": sorted(s),
            "count": len(good), "good": sorted(good),
            "floor_n_minus_2s": floor, "ok": len(good) >= floor,
        })
        if args.report:
            _emit_any(report, args.report, fmt)
        print(f"good nodes: {len(good)} of {g.n} (|S|={len(s)}, floor {floor})")
        return EXIT_OK

    if args.prop == "dr":
        rep = check_depth_robust(g, int(params["e"]), int(params["d"]),
                                 mode=args.mode, seed=seed, trials=trials)
    elif args.prop == "fdr":
        rep = check_fractional_dr(g, int(params["e"]), int(params["d"]),
                                  params["f"], mode=args.mode, seed=seed,
                                  trials=trials)
    elif args.prop == "ar":
        rep = check_ancestral_robust(g, int(params["a"]), int(params["C"]),
                                     params["f"], mode=args.mode, seed=seed,
                                     trials=trials)
    else:
        kw = {"k_cap": int(params["k_cap"])} if "k_cap" in params else {}
        rep = check_local_expansion(g, params["delta"], mode=args.mode,
                                    seed=seed, trials=trials, **kw)
    report = _head(seed)
    report.update(rep.to_dict())
    if args.report:
        _emit_any(report, args.report, fmt)
    print(f"{args.prop} {rep.params}: {rep.verdict} ({rep.method})")
    return EXIT_FALSIFIED if rep.verdict == FALSIFIED else EXIT_OK


def cmd_hash(args, seed: int, threads: int, fmt: str) -> int:
    spec = load_spec(args.spec)
    x = bytes.fromhex(args.input)
    cfg = OracleConfig(w=args.w, hash_name=args.hash_name)
    digest, trace = eval_dmhf(spec, x, cfg, low_memory=args.low_memory)
    if args.trace:
        save_trace(trace, args.trace)
    print(digest.hex())
    return EXIT_OK


def cmd_extract(args, seed: int, threads: int, fmt: str) -> int:
    trace = load_trace(args.trace)
    g = read_dagv1(args.graph)
    peb, legality = extract_pebbling(trace, g)
    rep = cost(peb)
    report = _head(seed)
    report.update({
        "trace": args.trace,
        "graph": args.graph,
        "legal": legality.ok,
        "complete": legality.complete,
        "violation_round": legality.violation_round,
        "violation_node": legality.violation_node,
        "missing_parent": legality.missing_parent,
        "rounds": rep.rounds,
        "cc": rep.cc,
        "max_space": rep.max_space,
        "sizes": list(rep.sizes),
    })
    if args.report:
        _emit_any(report, args.report, fmt)
    print(f"extracted {rep.rounds} rounds, cc={rep.cc}, "
          f"max space {rep.max_space}, legal={legality.ok}")
    return EXIT_OK if legality.ok else EXIT_FALSIFIED


def _experiment_config(args, seed: int, threads: int,
                       strategies: tuple[str, ...]) -> ExperimentConfig:
    return ExperimentConfig(
        family=args.family,
        n=args.n,
        n_chal=args.n_chal,
        grates_eps=args.grates_eps,
        m=getattr(args, "m", 16),
        strategies=strategies,
        trials=getattr(args, "trials", 1),
        seed=seed,
        ssc_thresholds=_int_list(args.ssc) if getattr(args, "ssc", "") else (),
        block_size=getattr(args, "block_size", 50),
        tail_eps=getattr(args, "tail_eps", 0.1),
        space_e=getattr(args, "space_e", 0),
        depth_d=getattr(args, "depth_d", 0),
        space_e2=getattr(args, "space_e2", 0),
        cc_C=getattr(args, "cc_C", 0),
        threads=threads,
        out_dir=getattr(args, "out_dir", None),
        report_path=getattr(args, "report", None),
    )


def cmd_tradeoff(args, seed: int, threads: int, fmt: str) -> int:
    cfg = _experiment_config(args, seed, threads,
                             tuple(args.strategies.split(",")))
    report = tradeoff_experiment(cfg)
    if args.report:
        write_report(report, args.report, fmt)
    for row in report["frontier"]:
        print(f"{row['strategy']}: mean cc {row['mean_cc']:.1f}, "
              f"mean rounds {row['mean_rounds']:.1f}, "
              f"ssc {row['mean_ssc']}")
    return EXIT_OK


def cmd_lucky(args, seed: int, threads: int, fmt: str) -> int:
    cfg = _experiment_config(args, seed, threads, (args.strategy,))
    report = lucky_rate_experiment(cfg)
    if args.report:
        write_report(report, args.report, fmt)
    print(f"unlucky rate {report['unlucky_rate']:.4f} over "
          f"{report['pairs']} pairs; cases {report['case_counts']}; "
          f"{report['blocks_below']}/{report['n_blocks']} blocks below "
          f"rate - {report['tail_eps']}")
    return EXIT_OK


def cmd_build_all(args, seed: int, threads: int, fmt: str) -> int:
    n_chal = args.n_chal if args.n_chal is not None else 2 * args.n
    cfg = ExperimentConfig(
        family="egsample", n=args.n, n_chal=n_chal,
        grates_eps=args.grates_eps, m=args.m, seed=seed,
        threads=threads, out_dir=args.out_dir,
    )
    manifest = pipeline_build(cfg)
    print(f"built {len(manifest['files'])} files under {args.out_dir} "
          f"(base n={manifest['n_base']}, total n={manifest['n_total']})")
    for name, info in sorted(manifest["files"].items()):
        print(f"  {info['sha256'][:16]}  {name}")
    return EXIT_OK


# -- parser ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dagpebble",
        description="Memory-hard DAGs, pebbling arenas, verifiers, "
                    "hash traces, experiments.",
    )
    parser.add_argument("--version", action="version", version=VERSION)
    parser.add_argument("--seed", type=int, default=0,
                        help="master seed; every derived stream is salted")
    parser.add_argument("--threads", type=int, default=1,
                        help="worker processes for experiment fan-out")
    parser.add_argument("--format", choices=("json", "csv"), default="json",
                        help="report file format")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, dest="local_seed",
                        help="override the global --seed")
    common.add_argument("--threads", type=int, default=None,
                        dest="local_threads")
    common.add_argument("--format", choices=("json", "csv"), default=None,
                        dest="local_format")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", parents=[common],
                       help="sample a base graph and write it as DAGv1")
    p.add_argument("--family", choices=FAMILIES, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--grates-eps", "--eps", type=float, default=0.5,
                   dest="grates_eps", help="layered-family exponent")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("dynamize", parents=[common],
                       help="attach a challenge chain to a base graph")
    p.add_argument("--in", dest="infile", required=True,
                   help="base graph (DAGv1)")
    p.add_argument("--chal", type=int, required=True,
                   help="challenge chain length")
    p.add_argument("--out", required=True, help="spec JSON path")
    p.set_defaults(func=cmd_dynamize)

    p = sub.add_parser("pebble", parents=[common],
                       help="referee a strategy over a dynamic spec")
    p.add_argument("--spec", required=True)
    p.add_argument("--strategy", required=True,
                   help="greedy | minimal | checkpoint:GAP")
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--ssc", default="",
                   help="comma-separated space thresholds")
    p.add_argument("--report", default=None)
    p.set_defaults(func=cmd_pebble)

    p = sub.add_parser("verify", parents=[common],
                       help="run a robustness verifier over a DAGv1 graph")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--prop", choices=sorted(_VERIFY_PARAMS), required=True)
    p.add_argument("--params", default="",
                   help="k=v,... e.g. e=8,d=4 or delta=0.3 or c=1/3,s_size=8")
    p.add_argument("--mode", default="exhaustive",
                   choices=("exhaustive", "greedy", "sampled", "bounded"))
    p.add_argument("--trials", type=int, default=200,
                   help="probe budget for sampled/greedy modes")
    p.add_argument("--report", default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("hash", parents=[common],
                       help="evaluate the hashed dynamic graph function")
    p.add_argument("--spec", required=True)
    p.add_argument("--input", required=True, help="input as hex")
    p.add_argument("--w", type=int, default=256, help="label width in bits")
    p.add_argument("--hash", default="sha256", dest="hash_name")
    p.add_argument("--low-memory", action="store_true",
                   help="recompute labels instead of storing the base")
    p.add_argument("--trace", default=None, help="write the query trace here")
    p.set_defaults(func=cmd_hash)

    p = sub.add_parser("extract", parents=[common],
                       help="pull a pebbling out of a trace and check it")
    p.add_argument("--trace", required=True)
    p.add_argument("--graph", required=True, help="realized graph (DAGv1)")
    p.add_argument("--report", default=None)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("tradeoff", parents=[common],
                       help="strategy sweep: cc vs sustained space")
    p.add_argument("--family", choices=FAMILIES, default="line")
    p.add_argument("--n", type=int, default=512)
    p.add_argument("--n-chal", type=int, default=512)
    p.add_argument("--grates-eps", type=float, default=0.5)
    p.add_argument("--strategies", default="greedy,checkpoint:16,minimal")
    p.add_argument("--trials", type=int, default=8)
    p.add_argument("--ssc", default="")
    p.add_argument("--report", default=None)
    p.set_defaults(func=cmd_tradeoff)

    p = sub.add_parser("lucky", parents=[common],
                       help="classify challenge pairs; estimate unlucky rate")
    p.add_argument("--family", choices=FAMILIES, default="egsample")
    p.add_argument("--n", type=int, default=256)
    p.add_argument("--n-chal", type=int, default=500)
    p.add_argument("--grates-eps", type=float, default=0.5)
    p.add_argument("--strategy", default="checkpoint:32")
    p.add_argument("--trials", type=int, default=40)
    p.add_argument("--block-size", type=int, default=50)
    p.add_argument("--tail-eps", type=float, default=0.1,
                   help="concentration epsilon for the block check")
    p.add_argument("--space-e", type=int, default=0,
                   help="case-1 space threshold (0: n_base/2)")
    p.add_argument("--depth-d", type=int, default=0,
                   help="case-2 depth threshold (0: 12)")
    p.add_argument("--space-e2", type=int, default=0,
                   help="low-space threshold (0: 4)")
    p.add_argument("--cc-C", type=int, default=0,
                   help="case-3 ancestor-count threshold (0: n_base/4)")
    p.add_argument("--report", default=None)
    p.set_defaults(func=cmd_lucky)

    p = sub.add_parser("build-all", parents=[common],
                       help="materialize base + spec + quotient + baselines")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--n", type=int, default=256)
    p.add_argument("--n-chal", type=int, default=None,
                   help="chain length (default 2n)")
    p.add_argument("--m", type=int, default=16,
                   help="quotient interval length")
    p.add_argument("--grates-eps", type=float, default=0.5)
    p.set_defaults(func=cmd_build_all)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    seed = _eff(args, "seed", args.seed)
    threads = _eff(args, "threads", args.threads)
    fmt = _eff(args, "format", args.format)
    try:
        return args.func(args, seed, threads, fmt)
    except CapExceeded as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (StrategyError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
