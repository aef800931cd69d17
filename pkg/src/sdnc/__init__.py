"""Self-directed node classification on graphs.

Learners that pick their own query order and predict each node label once,
hypothesis families built on geodesic convexity and homophily, adaptive
adversaries realizing the matching lower bounds, and a harness that checks
every mistake bound on generated instances.
"""

from ._kernels import BACKEND
from .baselines import (
    BipartiteLearner,
    ConstantLearner,
    GridSpec,
    GridWalkerLearner,
    HalvingLearner,
    TraverseLearner,
    VersionSpace,
    build_gridspec,
    enumerate_convex_bipartitions,
    run_bipartite,
    run_gridwalker,
    run_halving,
    run_traverse,
)
from .good4 import (
    BoundReport,
    FdlState,
    Good4Learner,
    MulticlassGood4Learner,
    RoundTrace,
    bounds,
    build_tables,
    find_distinct_label,
    round_ledger_violations,
    run_good4,
    run_good4_nearconvex,
    run_multiclass_good4,
    witness_violations,
)
from .graphs import (
    DistanceTable,
    Graph,
    IntervalTable,
    Labeling,
    NodeSet,
    all_pairs_distances,
    build_graph,
    clique_number_chordal,
    convex_hull,
    cut_border,
    interval,
    interval_table,
    is_convex_labeling,
    is_convex_set,
    min_flips_to_convex,
)
from .generators import (
    FamilyInstance,
    LabeledInstance,
    Provenance,
    StripPartition,
    flip_labels,
    gen_convex_bipartition,
    gen_graph,
    gen_homophilic,
    gen_strip_partition,
)
from .protocol import (
    NOT_FOUND,
    FixedSource,
    LabelSource,
    Learner,
    Step,
    Transcript,
    clique_path_adversary,
    grid_permutation_source,
    merging_degree,
    merging_degree_adversary,
    run_session,
)
from .quadruples import (
    Quadruple,
    QuadrupleStats,
    is_good,
    iter_quadruples,
    naive_stats,
    pair_good_counts,
    partners,
    per_node_good_counts,
    stats,
    total_quadruples,
    triple_good_counts,
)

__version__ = "0.1.0"
