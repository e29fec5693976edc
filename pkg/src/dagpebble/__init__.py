"""dagpebble: memory-hard DAG constructions, pebbling games, and hash traces.

The package covers four layers that build on each other:

* `graphs` / `build` -- DAG families (line, random back-edge, layered
  bit-reversal, indegree-reduced unions), metagraph quotients, and dynamic
  graph specs with an appended challenge chain;
* `pebble` -- parallel black pebbling: legality, cc/ssc accounting, exact
  minimum-cc search, and referee'd strategy runs on dynamic specs;
* `robust` -- combinatorial certificates at desk scale: depth robustness
  (plain, fractional, ancestral), local expansion, and good-node counting;
* `labeling` -- hash-instantiated evaluation of the static and dynamic graph
  functions, with ex-post-facto graph and pebbling extraction from traces;
* `experiments` -- seeded batch experiments (space/time trade-off sweeps,
  unlucky-challenge rate estimation) and a reproducible artifact pipeline.

`cli` ties these together; `kernels` selects compiled or pure search cores.
"""

__version__ = "0.1.0"

from .build import (
    DynamicGraphSpec,
    drsample,
    dynamize,
    egsample,
    grates,
    line_graph,
    load_spec,
    sample_dynamic,
    save_spec,
    scrypt_spec,
)
from .errors import CapExceeded
from .experiments import (
    ExperimentConfig,
    classify_pair,
    lucky_rate_experiment,
    pipeline_build,
    report_to_csv,
    resolve_thresholds,
    tradeoff_experiment,
    write_report,
)
from .graphs import (
    Dag,
    MetaParams,
    ReduceMap,
    ancestors,
    ancestors_subgraph,
    depth,
    depth_of,
    depths,
    detach_nodes,
    dumps_dagv1,
    induced_subgraph,
    loads_dagv1,
    metagraph,
    read_dagv1,
    reduce_indegree,
    remove_nodes,
    to_meta,
    union_graphs,
    write_dagv1,
)
from .labeling import (
    EvaluationOrderError,
    LabelCollisionError,
    OracleConfig,
    PebblingAbort,
    Trace,
    TraceCost,
    eval_dmhf,
    eval_imhf,
    ex_post_facto_graph,
    extract_pebbling,
    load_trace,
    pebbling_driven_eval,
    resolve_challenges,
    save_trace,
    trace_cost,
)
from .pebble import (
    ChallengeRecord,
    CostReport,
    DynamicRunResult,
    Pebbling,
    cc_exact,
    check_legal,
    checkpoint,
    cost,
    greedy_full,
    minimal_line,
    run_dynamic,
    strategy_by_name,
)
from .robust import (
    CERTIFIED,
    FALSIFIED,
    INCONCLUSIVE,
    RobustnessReport,
    cc_lower_bound,
    check_ancestral_robust,
    check_depth_robust,
    check_fractional_dr,
    check_local_expansion,
    depth_frontier,
    good_nodes,
    greedy_depth_adversary,
    sampled_interval_hardness,
    validate_expansion_witness,
)

__all__ = [name for name in dir() if not name.startswith("_")]
