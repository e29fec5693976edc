"""Seeded experiment harness over the dynamic pebbling arena.

Three entry points, all driven by one serializable ExperimentConfig:

* `tradeoff_experiment` -- strategy sweep on dynamized specs: per-run cc,
  rounds, sustained-space counts, and challenge latencies, plus a
  per-strategy frontier summary (mean cc vs mean ssc at each threshold).
* `lucky_rate_experiment` -- instruments runs to classify every consecutive
  challenge pair by how it forces work (high space at reveal / deep
  recompute under sustained space / cheap-to-hold but expensive-to-rebuild
  ancestors) and checks block-level concentration of the unlucky rate.
* `pipeline_build` -- materializes a layered-union base, its dynamized spec,
  the interval quotient, and baseline verifier reports into a directory
  with a sha256 manifest.

Reports are plain dicts, reproducible byte-for-byte from (config, seed) on a
given install: they embed the config, a version string, and component tags,
and never contain wall-clock times.  Trials fan out over a process pool when
cfg.threads > 1; workers receive strategy *names* (a strategy itself is a
generator factory and does not pickle) and results are merged in sorted
(strategy, trial) order, so the pool size never changes the output bytes.
The embedded config copy drops the execution-only fields (threads and output
paths) for the same reason.

Pair classification conventions (see `classify_pair`): round indices are
1-based; P_j is the configuration after round j; sizes count the *full*
configuration including chain nodes (the chain head adds O(1)).  The phase-one
window of a pair is [s1, s1+t1] where s1 is the reveal round of the pair's
first dynamic parent and t1 the rounds until that parent was (re)pebbled.
Case 3 uses a node-count lower bound on the cc of the blocked ancestor
closure, evaluated once at the earliest minimum-space round of the window --
conservative in both choices, so unlucky pairs are never over-counted.
"""

from __future__ import annotations

import csv
import hashlib
import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields

from . import __version__, kernels
from .build import (
    SPEC_VERSION,
    DynamicGraphSpec,
    drsample,
    dynamize,
    egsample,
    grates,
    line_graph,
    save_spec,
)
from .graphs import Dag, ancestors, depths, metagraph, write_dagv1
from .pebble import ChallengeRecord, run_dynamic, strategy_by_name
from .robust import (
    check_depth_robust,
    check_fractional_dr,
    check_local_expansion,
    good_nodes,
)
from .util import derive_rng, write_json

VERSION = f"dagpebble-{__version__}"

#: Tags for every moving part whose change could shift report numbers.
COMPONENTS = {
    "package": __version__,
    "graph_format": "dagv1",
    "spec_format": SPEC_VERSION,
    "kernels": kernels.IMPLEMENTATION,
}

FAMILIES = ("line", "drsample", "grates", "egsample")

#: Config fields that steer execution, not the experiment itself.  They are
#: stripped from the embedded provenance copy so that e.g. a 1-worker and an
#: 8-worker run of the same experiment emit identical bytes.
_EXEC_FIELDS = ("threads", "out_dir", "report_path")


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a run needs; serializable and embedded in every report.

    `grates_eps` is the layered-family exponent (also used by the union
    family); `tail_eps` is the concentration epsilon of the lucky-rate
    check.  They are distinct knobs everywhere, including the CLI.

    `n_chal` is always the challenge-chain length.  Pair analysis consumes
    two chain nodes per pair, so lucky-rate runs and the pipeline's spec
    need it even (n_chal = 2 * number of pairs).

    The case thresholds (space_e, depth_d, space_e2, cc_C) default to 0,
    meaning "derive from the base size" -- see `resolve_thresholds`.
    """

    family: str = "egsample"
    n: int = 256
    n_chal: int = 256
    grates_eps: float = 0.5
    m: int = 16
    strategies: tuple[str, ...] = ("checkpoint:16",)
    trials: int = 8
    seed: int = 0
    ssc_thresholds: tuple[int, ...] = ()
    block_size: int = 50
    tail_eps: float = 0.1
    space_e: int = 0
    depth_d: int = 0
    space_e2: int = 0
    cc_C: int = 0
    threads: int = 1
    out_dir: str | None = None
    report_path: str | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; pick from {FAMILIES}")
        if self.n < 2:
            raise ValueError(f"need n >= 2, got {self.n}")
        if self.n_chal < 1:
            raise ValueError(f"need n_chal >= 1, got {self.n_chal}")
        if self.trials < 1:
            raise ValueError(f"need trials >= 1, got {self.trials}")
        if not self.strategies:
            raise ValueError("need at least one strategy")
        for name in self.strategies:
            strategy_by_name(name)  # fail fast on typos
        if not 0 < self.tail_eps < 1:
            raise ValueError(f"tail_eps must be in (0,1), got {self.tail_eps}")
        if self.block_size < 1:
            raise ValueError(f"need block_size >= 1, got {self.block_size}")
        if self.m < 1:
            raise ValueError(f"need m >= 1, got {self.m}")
        if self.threads < 1:
            raise ValueError(f"need threads >= 1, got {self.threads}")
        object.__setattr__(self, "strategies", tuple(self.strategies))
        object.__setattr__(self, "ssc_thresholds", tuple(self.ssc_thresholds))

    def to_dict(self, embed: bool = True) -> dict:
        """Plain-dict form; `embed=True` drops the execution-only fields."""
        out = {}
        for f in fields(self):
            if embed and f.name in _EXEC_FIELDS:
                continue
            val = getattr(self, f.name)
            out[f.name] = list(val) if isinstance(val, tuple) else val
        return out

    @classmethod
    def from_dict(cls, obj: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(obj) - known
        if unknown:
            raise ValueError(f"unknown config fields {sorted(unknown)}")
        kw = dict(obj)
        for key in ("strategies", "ssc_thresholds"):
            if key in kw:
                kw[key] = tuple(kw[key])
        return cls(**kw)


def _family_base(cfg: ExperimentConfig, rng) -> Dag:
    if cfg.family == "line":
        return line_graph(cfg.n)
    if cfg.family == "drsample":
        return drsample(cfg.n, rng)
    if cfg.family == "grates":
        return grates(cfg.n, cfg.grates_eps)
    return egsample(cfg.n, cfg.grates_eps, rng)[0]


def _trial_spec(cfg: ExperimentConfig, tag: str, trial: int) -> DynamicGraphSpec:
    """Base + spec for one trial; randomized families get a fresh base."""
    base = _family_base(cfg, derive_rng(cfg.seed, tag, "base", trial))
    return dynamize(base, cfg.n_chal)


def _trial_challenges(cfg: ExperimentConfig, tag: str, trial: int,
                      spec: DynamicGraphSpec) -> list[int]:
    return spec.sample_challenges(derive_rng(cfg.seed, tag, "chal", trial))


def resolve_thresholds(cfg: ExperimentConfig, n_base: int) -> dict:
    """Fill ssc thresholds and pair-case thresholds from the base size.

    Defaults: ssc at quarter/half/full base; case thresholds e = n/2 (a
    strategy parked on half the base is paying in space), e' = 4 (below
    this the run is carrying nothing reusable), d = 12 recompute depth,
    C = n/4 ancestor nodes.
    """
    ssc = tuple(cfg.ssc_thresholds) or (
        max(1, n_base // 4), max(1, n_base // 2), n_base)
    return {
        "ssc": ssc,
        "space_e": cfg.space_e or max(2, n_base // 2),
        "depth_d": cfg.depth_d or 12,
        "space_e2": cfg.space_e2 or 4,
        "cc_C": cfg.cc_C or max(4, n_base // 4),
    }


def _report_head(cfg: ExperimentConfig, kind: str) -> dict:
    return {
        "kind": kind,
        "config": cfg.to_dict(),
        "seed": cfg.seed,
        "version": VERSION,
        "components": dict(COMPONENTS),
    }


def _fan_out(worker, payloads: list, threads: int) -> list:
    if threads <= 1 or len(payloads) <= 1:
        return [worker(p) for p in payloads]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(worker, payloads))


# -- trade-off sweep -----------------------------------------------------------


def _tradeoff_worker(payload) -> dict:
    cfg_dict, strategy_name, trial, ssc = payload
    cfg = ExperimentConfig.from_dict(cfg_dict)
    spec = _trial_spec(cfg, "tradeoff", trial)
    challenges = _trial_challenges(cfg, "tradeoff", trial, spec)
    run = run_dynamic(spec, strategy_by_name(strategy_name), challenges=challenges)
    return {
        "strategy": strategy_name,
        "trial": trial,
        "cc": run.cc,
        "rounds": run.rounds,
        "max_space": run.max_space(),
        "ssc": {str(s): run.ssc(s) for s in ssc},
        "mean_latency": run.mean_latency(recompute_only=False),
        "mean_recompute_latency": run.mean_latency(recompute_only=True),
        "latencies": [c.t for c in run.challenges],
    }


def tradeoff_experiment(cfg: ExperimentConfig) -> dict:
    """Run every strategy x trial on shared specs and summarize the frontier.

    Within a trial all strategies see the same base and the same challenge
    sequence, so rows are paired and frontier differences are the
    strategies' own.  The frontier gives, per strategy, mean cc, mean
    rounds, mean ssc at each threshold, and mean recompute latency.
    """
    n_base = _family_base(cfg, derive_rng(cfg.seed, "tradeoff", "base", 0)).n
    ssc = resolve_thresholds(cfg, n_base)["ssc"]
    cfg_dict = cfg.to_dict()
    payloads = [
        (cfg_dict, name, trial, ssc)
        for name in cfg.strategies
        for trial in range(cfg.trials)
    ]
    rows = _fan_out(_tradeoff_worker, payloads, cfg.threads)
    order = {name: k for k, name in enumerate(cfg.strategies)}
    rows.sort(key=lambda r: (order[r["strategy"]], r["trial"]))

    frontier = []
    for name in cfg.strategies:
        mine = [r for r in rows if r["strategy"] == name]
        frontier.append({
            "strategy": name,
            "mean_cc": sum(r["cc"] for r in mine) / len(mine),
            "mean_rounds": sum(r["rounds"] for r in mine) / len(mine),
            "mean_max_space": sum(r["max_space"] for r in mine) / len(mine),
            "mean_ssc": {
                str(s): sum(r["ssc"][str(s)] for r in mine) / len(mine)
                for s in ssc
            },
            "mean_recompute_latency": (
                sum(r["mean_recompute_latency"] for r in mine) / len(mine)),
        })

    report = _report_head(cfg, "tradeoff")
    report.update({
        "n_base": n_base,
        "ssc_thresholds": list(ssc),
        "runs": rows,
        "frontier": frontier,
    })
    return report


# -- lucky-rate estimation -----------------------------------------------------


def classify_pair(
    base: Dag,
    rec1: ChallengeRecord,
    rec2: ChallengeRecord,
    sizes: list[int],
    configs,
    e: int,
    d: int,
    e2: int,
    C: int,
) -> dict:
    """Classify one challenge pair; returns case 0 (lucky) or 1/2/3.

    sizes[j-1] / configs[j-1] hold P_j.  Cases, checked in order:

    1. high space: |P_{s1}| >= e at the reveal of the first parent.
    2. deep recompute: depth(r1, base - P_{s1}) >= d and the config never
       dips below e2 pebbles during [s1, s1+t1] -- the strategy paid for
       the whole recompute at sustained space.
    3. cheap space, expensive ancestors: at the earliest minimum-space
       round j* of the window, |P_{j*}| < e2 while the blocked ancestor
       closure of the *second* parent still has >= C nodes -- whatever the
       strategy kept, rebuilding r2 costs at least C placements.

    Case 3 checks the single round j* rather than every low round, and
    counts closure nodes rather than pebbling cost, so it only ever
    under-reports.
    """
    s1, t1 = rec1.s, rec1.t
    window = sizes[s1 - 1: s1 + t1]
    space_s1 = window[0]
    min_space = min(window)
    out = {
        "case": 0,
        "s1": s1, "t1": t1, "s2": rec2.s, "t2": rec2.t,
        "space_s1": space_s1, "min_space": min_space,
        "depth_r1": -1, "cc_lb": -1,
    }
    if space_s1 >= e:
        out["case"] = 1
        return out
    blocked_s1 = {v for v in configs[s1 - 1] if v <= base.n}
    depth_r1 = depths(base, blocked_s1)[rec1.r]
    out["depth_r1"] = depth_r1
    if depth_r1 >= d and min_space >= e2:
        out["case"] = 2
        return out
    if min_space < e2:
        j_star = s1 + window.index(min_space)  # earliest minimum
        blocked = {v for v in configs[j_star - 1] if v <= base.n}
        if rec2.r in blocked:
            cc_lb = 0
        else:
            cc_lb = len(ancestors(base, rec2.r, blocked)) + 1
        out["cc_lb"] = cc_lb
        if cc_lb >= C:
            out["case"] = 3
    return out


def _lucky_worker(payload) -> dict:
    cfg_dict, trial, th = payload
    cfg = ExperimentConfig.from_dict(cfg_dict)
    # One fixed base across all trials: the unlucky rate is a per-graph
    # quantity (the concentration statement conditions on the graph), and
    # mixing bases smears block rates with base-to-base variation.
    spec = dynamize(_family_base(cfg, derive_rng(cfg.seed, "lucky", "base")),
                    cfg.n_chal)
    challenges = _trial_challenges(cfg, "lucky", trial, spec)
    run = run_dynamic(
        spec, strategy_by_name(cfg.strategies[0]),
        challenges=challenges, record_configs=True,
    )
    recs = run.challenges
    pairs = []
    for k in range(len(recs) // 2):
        info = classify_pair(
            spec.base, recs[2 * k], recs[2 * k + 1], run.sizes, run.configs,
            th["space_e"], th["depth_d"], th["space_e2"], th["cc_C"],
        )
        pairs.append([
            info["case"], info["s1"], info["t1"],
            info["space_s1"], info["min_space"],
            info["depth_r1"], info["cc_lb"],
        ])
    return {
        "trial": trial,
        "rounds": run.rounds,
        "cc": run.cc,
        "max_space": run.max_space(),
        "pairs": pairs,
    }


def lucky_rate_experiment(cfg: ExperimentConfig) -> dict:
    """Estimate the unlucky-pair rate and check block-level concentration.

    Runs cfg.trials runs of cfg.strategies[0] -- all on one base sampled
    from the seed, each with a fresh challenge stream -- classifies the
    n_chal/2 pairs of each via `classify_pair`, pools everything into one
    rate estimate, and then chops the pair stream (trial order) into blocks
    of cfg.block_size.  A sum of conditionally-bounded indicators stays
    near its floor: at most an exp(-2 eps^2 Q) fraction of blocks should
    fall below (pooled rate - eps).  The report carries both the observed
    low-block fraction and that bound; callers decide what to make of it.
    """
    if cfg.n_chal % 2:
        raise ValueError("pair analysis needs an even n_chal")
    n_base = _family_base(cfg, derive_rng(cfg.seed, "lucky", "base")).n
    th = resolve_thresholds(cfg, n_base)
    cfg_dict = cfg.to_dict()
    payloads = [(cfg_dict, trial, th) for trial in range(cfg.trials)]
    trials = _fan_out(_lucky_worker, payloads, cfg.threads)
    trials.sort(key=lambda t: t["trial"])

    cases = [row[0] for t in trials for row in t["pairs"]]
    total = len(cases)
    unlucky = sum(1 for c in cases if c != 0)
    rate = unlucky / total if total else 0.0
    case_counts = {str(c): cases.count(c) for c in (0, 1, 2, 3)}

    q = cfg.block_size
    n_blocks = total // q
    blocks = []
    for b in range(n_blocks):
        chunk = cases[b * q: (b + 1) * q]
        blocks.append(sum(1 for c in chunk if c != 0) / q)
    floor = rate - cfg.tail_eps
    below = sum(1 for r in blocks if r < floor)
    frac_below = below / n_blocks if n_blocks else 0.0

    report = _report_head(cfg, "lucky_rate")
    report.update({
        "n_base": n_base,
        "strategy": cfg.strategies[0],
        "thresholds": {k: v for k, v in th.items() if k != "ssc"},
        "pairs": total,
        "unlucky": unlucky,
        "unlucky_rate": rate,
        "case_counts": case_counts,
        "block_size": q,
        "n_blocks": n_blocks,
        "unblocked_pairs": total - n_blocks * q,
        "block_rates": blocks,
        "tail_eps": cfg.tail_eps,
        "blocks_below": below,
        "frac_blocks_below": frac_below,
        "hoeffding_bound": math.exp(-2 * cfg.tail_eps ** 2 * q),
        "trials": trials,
    })
    return report


# -- artifact pipeline ---------------------------------------------------------


def _sha256_file(path: str) -> tuple[str, int]:
    h = hashlib.sha256()
    size = 0
    with open(path, "rb") as fh:
        while True:
            chunk = fh.read(1 << 16)
            if not chunk:
                break
            h.update(chunk)
            size += len(chunk)
    return h.hexdigest(), size


def pipeline_build(cfg: ExperimentConfig) -> dict:
    """Materialize base + spec + quotient + baseline reports under cfg.out_dir.

    Writes, all derived from cfg.seed:

      egs_base.dag      layered-union base on 3*cfg.n nodes
      degs_spec.json    that base dynamized with an n_chal challenge chain
      metagraph.dag     interval quotient of the base, intervals of cfg.m
      report_dr.json    sampled depth-robustness probe of the base
      report_fdr.json   sampled fractional variant
      report_lexp.json  sampled local-expansion probe of the quotient
      report_good.json  good-node count against a random eighth of the base
      manifest.json     sha256 + size of every file above, plus provenance

    The reports record whatever the verifiers actually conclude -- a
    falsified probe is a true fact about the artifact, not a build error.
    Rebuilding with the same config reproduces every hash.
    """
    if cfg.out_dir is None:
        raise ValueError("pipeline_build needs cfg.out_dir")
    if cfg.n_chal % 2:
        raise ValueError("the dynamized spec pairs challenges; use an even n_chal")
    out = cfg.out_dir
    os.makedirs(out, exist_ok=True)

    def p(name: str) -> str:
        return os.path.join(out, name)

    base, _ = egsample(cfg.n, cfg.grates_eps, derive_rng(cfg.seed, "pipeline", "egs"))
    write_dagv1(base, p("egs_base.dag"))

    spec = dynamize(base, cfg.n_chal, base_path=p("egs_base.dag"))
    save_spec(spec, p("degs_spec.json"))

    meta, params = metagraph(base, cfg.m)
    write_dagv1(meta, p("metagraph.dag"))

    n = base.n
    rep_dr = check_depth_robust(
        base, n // 4, n // 16, mode="sampled",
        seed=derive_rng(cfg.seed, "pipeline", "dr"), trials=64)
    write_json(p("report_dr.json"), rep_dr.to_dict())
    rep_fdr = check_fractional_dr(
        base, n // 4, n // 16, 0.25, mode="sampled",
        seed=derive_rng(cfg.seed, "pipeline", "fdr"), trials=64)
    write_json(p("report_fdr.json"), rep_fdr.to_dict())
    rep_lexp = check_local_expansion(
        meta, 0.3, mode="sampled",
        seed=derive_rng(cfg.seed, "pipeline", "lexp"), trials=2000)
    write_json(p("report_lexp.json"), rep_lexp.to_dict())

    s_rng = derive_rng(cfg.seed, "pipeline", "good")
    s_set = sorted(s_rng.sample(range(1, n + 1), n // 8))
    good = good_nodes(base, set(s_set), 1 / 3)
    good_report = {
        "prop": "good_nodes",
        "params": {"n": n, "s_size": len(s_set), "c": 1 / 3},
        "s": s_set,
        "count": len(good),
        "floor_n_minus_2s": n - 2 * len(s_set),
        "ok": len(good) >= n - 2 * len(s_set),
    }
    write_json(p("report_good.json"), good_report)

    names = [
        "egs_base.dag", "degs_spec.json", "metagraph.dag",
        "report_dr.json", "report_fdr.json", "report_lexp.json",
        "report_good.json",
    ]
    files = {}
    for name in names:
        digest, size = _sha256_file(p(name))
        files[name] = {"sha256": digest, "bytes": size}

    manifest = _report_head(cfg, "pipeline")
    manifest.update({
        "n_base": n,
        "n_total": spec.n_total,
        "n_pairs": cfg.n_chal // 2,
        "n_meta": params.n_meta,
        "files": files,
    })
    write_json(p("manifest.json"), manifest)
    return manifest


# -- tabular emission ----------------------------------------------------------


def rows_to_csv(fieldnames: list[str], rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=fieldnames, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow(row)
    return buf.getvalue()


def report_to_csv(report: dict) -> str:
    """Flatten a report's tabular core; scalar fields match the JSON exactly."""
    kind = report.get("kind")
    if kind == "tradeoff":
        ssc = report["ssc_thresholds"]
        rows = []
        for r in report["runs"]:
            row = {k: r[k] for k in (
                "strategy", "trial", "cc", "rounds", "max_space",
                "mean_latency", "mean_recompute_latency")}
            for s in ssc:
                row[f"ssc_{s}"] = r["ssc"][str(s)]
            rows.append(row)
        names = ["strategy", "trial", "cc", "rounds", "max_space",
                 "mean_latency", "mean_recompute_latency"]
        names += [f"ssc_{s}" for s in ssc]
        return rows_to_csv(names, rows)
    if kind == "lucky_rate":
        rows = [
            {"block": b, "rate": rate, "size": report["block_size"]}
            for b, rate in enumerate(report["block_rates"])
        ]
        return rows_to_csv(["block", "rate", "size"], rows)
    if kind == "pipeline":
        rows = [
            {"file": name, "sha256": info["sha256"], "bytes": info["bytes"]}
            for name, info in sorted(report["files"].items())
        ]
        return rows_to_csv(["file", "sha256", "bytes"], rows)
    raise ValueError(f"no tabular form for report kind {kind!r}")


def write_report(report: dict, path: str, fmt: str = "json") -> None:
    if fmt == "json":
        write_json(path, report)
    elif fmt == "csv":
        with open(path, "w", encoding="ascii", newline="") as fh:
            fh.write(report_to_csv(report))
    else:
        raise ValueError(f"unknown format {fmt!r}")
