"""Solver execution, outcome parsing and the improvement metric."""

from .evaluate import DefaultEntry, DefaultsCache, Evaluator, Job, evaluate, make_runner, run_batch, run_solve
from .logs import ParsedLog, parse_gurobi_log, parse_scip_log
from .metrics import Summary, gap_comparison, improvement, mean_time, quantile, summarize
from .runners import Runner, SubprocessRunner, control_settings, resolve_binary
from .stub import StubSolver, StubTable, config_key, load_stub_table
from .types import EvalRecord, Instance, InstanceSet, RunPlan, SolveOutcome, SolveStatus, instance_id

__all__ = [
    "DefaultEntry",
    "DefaultsCache",
    "EvalRecord",
    "Evaluator",
    "Instance",
    "InstanceSet",
    "Job",
    "ParsedLog",
    "RunPlan",
    "Runner",
    "SolveOutcome",
    "SolveStatus",
    "StubSolver",
    "StubTable",
    "SubprocessRunner",
    "Summary",
    "config_key",
    "control_settings",
    "evaluate",
    "gap_comparison",
    "improvement",
    "instance_id",
    "load_stub_table",
    "make_runner",
    "mean_time",
    "parse_gurobi_log",
    "parse_scip_log",
    "quantile",
    "resolve_binary",
    "run_batch",
    "run_solve",
    "summarize",
]
