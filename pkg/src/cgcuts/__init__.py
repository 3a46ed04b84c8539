"""Parallel conflict-graph cut generation for mixed-integer programs."""

from .cliques import Clique, CliqueHarvest, detect_cliques, detect_cliques_parallel
from .extend import ExtensionResult, common_neighbors, extend_clique, extend_parallel
from .graph import (
    ConflictGraph,
    build_graph,
    build_graph_parallel,
    or_merge,
    trivial_conflicts,
)
from .literals import Literal, VarMap
from .merge import MergeOutcome, dominates, merge_parallel
from .model_io import (
    CutPool,
    CutRecord,
    MipModel,
    MpsError,
    export_cut_pool,
    parse_mps,
    parse_mps_file,
    write_augmented_mps,
    write_mps,
)
from .pipeline import Limits, RunStats, run_pipeline, run_pipeline_model
from .presolve import (
    Classification,
    DetectionResult,
    InfeasibleError,
    PureBinaryConstraint,
    classify,
    detect,
    strengthen_bounds_once,
    to_pbc,
)
from .bench import BenchConfig, BenchReport, generate_cliques, run_bench, shifted_geomean
from .triage import TriagePlan, triage

__version__ = "0.1.0"
