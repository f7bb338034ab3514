"""``sepconf`` command line.

Every command writes one artifact to the store and prints its path. Exit
codes: 0 success, 1 other failure, 2 usage or invalid input, 3 partial
result (artifact still written), 4 environment (solver or LLM missing).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import math
import os
import sys
from pathlib import Path
from typing import Any, Sequence

import yaml

from . import __version__
from .baselines import SeparatorUsage, gather_usage, pruning_outcome, search
from .catalog import (
    Configuration,
    SeparatorCatalog,
    Solver,
    default_configuration,
    resolve_catalog,
)
from .ensemble import (
    SelectionOutcome,
    Strategy,
    ensemble_average,
    ensemble_mode,
    ensemble_smallest,
    kmedoids,
    select_cold_start,
    validate_medoids,
)
from .errors import (
    CatalogMismatch,
    IllegalLevel,
    KTooLarge,
    MissingValidationSet,
    NoCommonUnsolved,
    ParseError,
    PoolIncomplete,
    ReplayMiss,
    SchemaMismatch,
    SepconfError,
    SolverNotFound,
    UnknownSeparator,
    UnknownSeparatorInStats,
    ValidationError,
)
from .harness import (
    DefaultsCache,
    EvalRecord,
    Evaluator,
    Instance,
    InstanceSet,
    instance_id,
    RunPlan,
    StubSolver,
    StubTable,
    SubprocessRunner,
    gap_comparison,
    load_stub_table,
    parse_gurobi_log,
    parse_scip_log,
    summarize,
)
from .llm import (
    FixtureStore,
    HttpChatClient,
    LlmUnavailable,
    PromptFlags,
    RecordingClient,
    ReplayClient,
    generate_pool,
    load_card,
)
from .store import (
    ArtifactStore,
    config_from_dict,
    config_to_dict,
    content_hash,
    pool_from_dict,
    pool_to_dict,
    records_csv,
)
from .textfree import TextFreePlan, textfree_configure

log = logging.getLogger("sepconf")

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_PARTIAL, EXIT_ENV = 0, 1, 2, 3, 4

ENV_CONFIG = "SEPCONF_CONFIG"
ENV_STORE = "SEPCONF_STORE"
ENV_THREAD_BUDGET = "SEPCONF_THREAD_BUDGET"

DEFAULTS: dict[str, Any] = {
    "store": "sepconf-store",
    "pool_size": 100,
    "k": 5,
    "seeds": 10,
    "limit_multiplier": 2.5,
    "gap_target": 0.0,
    "threads": 4,
    "workers": 1,
    "thread_budget": None,
    "retry_budget": 3,
    "max_workers": 8,
    "temperature": 1.0,
    "model_id": "gpt-4o",
    "commands": {},
    "binaries": {},
}

USAGE_ERRORS = (FileNotFoundError, IsADirectoryError, ValueError, ParseError, ValidationError,
                CatalogMismatch, UnknownSeparator, IllegalLevel, KTooLarge, MissingValidationSet,
                SchemaMismatch, UnknownSeparatorInStats)
ENV_ERRORS = (SolverNotFound, LlmUnavailable, ReplayMiss)

CSV_COLUMNS = ("instance", "t_default", "t_config", "improvement", "censored", "solved",
               "gap_config", "gap_default", "n_runs", "n_errors", "error")


class UsageError(Exception):
    pass


def load_settings(path: str | None) -> dict:
    """Built-in defaults, overlaid by the config file, overlaid by environment variables."""
    settings = dict(DEFAULTS)
    path = path or os.environ.get(ENV_CONFIG)
    if path is None and Path("sepconf.yaml").is_file():
        path = "sepconf.yaml"
    if path is not None:
        p = Path(path)
        if not p.is_file():
            raise FileNotFoundError(f"config file not found: {p}")
        doc = yaml.safe_load(p.read_text()) or {}
        if not isinstance(doc, dict):
            raise ParseError("config file must be a mapping", path=str(p))
        unknown = sorted(set(doc) - set(DEFAULTS))
        if unknown:
            raise ParseError(f"unknown config keys: {', '.join(unknown)}", path=str(p))
        settings.update(doc)
    if ENV_STORE in os.environ:
        settings["store"] = os.environ[ENV_STORE]
    if ENV_THREAD_BUDGET in os.environ:
        settings["thread_budget"] = int(os.environ[ENV_THREAD_BUDGET])
    return settings


def _opt(args, settings: dict, name: str):
    value = getattr(args, name, None)
    return settings[name] if value is None else value


def file_hash(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


# -- shared construction ----------------------------------------------------------


def make_client(args, settings: dict):
    kind = args.client
    if kind in ("replay", "record") and not args.fixtures:
        raise UsageError(f"--client {kind} needs --fixtures DIR")
    if kind == "replay":
        if not Path(args.fixtures).is_dir():
            raise FileNotFoundError(f"fixture directory not found: {args.fixtures}")
        return ReplayClient(FixtureStore(args.fixtures))
    live = HttpChatClient(model_id=_opt(args, settings, "model_id"))
    if not live.api_key:
        raise LlmUnavailable("no API key; set SEPCONF_LLM_API_KEY or use --client replay")
    return RecordingClient(live, FixtureStore(args.fixtures)) if kind == "record" else live


def load_instances(ref: str | None, name: str) -> InstanceSet:
    """A directory of instance files, or a text file listing one id (or path) per line."""
    if ref is None:
        raise MissingValidationSet(f"no {name} instances given")
    p = Path(ref)
    if p.is_dir():
        inst = InstanceSet.from_dir(p, name)
    elif p.is_file():
        items = []
        for line in p.read_text().splitlines():
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            q = p.parent / line
            items.append(Instance(instance_id(q), q) if q.is_file() else Instance(line))
        inst = InstanceSet(name, tuple(items))
    else:
        raise FileNotFoundError(f"instances not found: {ref}")
    if not len(inst):
        raise ValidationError(f"{ref}: no instances")
    return inst


def instance_manifest(instances: InstanceSet) -> list[dict]:
    return [{"id": i.id, "hash": i.content_hash} for i in instances]


def make_plan(args, settings: dict, catalog: SeparatorCatalog, instances: InstanceSet | None = None,
              role: str = "eval") -> RunPlan:
    ids = instances.ids if instances is not None else ()
    return RunPlan(
        solver=catalog.solver,
        catalog_hash=catalog.content_hash,
        val_set=ids if role == "val" else (),
        eval_set=ids if role == "eval" else (),
        seeds=_opt(args, settings, "seeds"),
        limit_multiplier=_opt(args, settings, "limit_multiplier"),
        gap_target=_opt(args, settings, "gap_target"),
        threads=_opt(args, settings, "threads"),
        workers=_opt(args, settings, "workers"),
        thread_budget=settings.get("thread_budget"),
    )


def plan_inputs(plan: RunPlan) -> dict:
    # worker counts change scheduling only, never results
    doc = plan.to_dict()
    doc.pop("workers")
    doc.pop("thread_budget")
    return doc


def make_runner(args, settings: dict, catalog: SeparatorCatalog, store: ArtifactStore):
    """Returns the runner and a fingerprint of whatever scripts it (stub table or binary)."""
    if catalog.solver is Solver.STUB:
        table = load_stub_table(args.stub_table) if args.stub_table else StubTable()
        return StubSolver(catalog, table), {"stub_table": content_hash(table.to_dict())}
    if args.stub_table:
        raise UsageError("--stub-table only applies to the stub catalog")
    solver = catalog.solver.value
    runner = SubprocessRunner(
        catalog,
        args.solver_bin or settings["binaries"].get(solver),
        command=settings["commands"].get(solver),
        threads=_opt(args, settings, "threads"),
        log_dir=store.root / "logs",
    )
    return runner, {"binary": Path(runner.binary).name}


def defaults_cache(store: ArtifactStore) -> DefaultsCache:
    return DefaultsCache(store.root / "cache" / "defaults.json")


def outcome_outputs(outcome: SelectionOutcome) -> dict:
    doc = {
        "final": config_to_dict(outcome.final),
        "strategy": outcome.strategy.value,
        "pool_index": outcome.pool_index,
        "solve_count": outcome.solve_count,
        "candidates_tested": [
            {"config": config_to_dict(c), "median": m} for c, m in outcome.candidates_tested
        ],
    }
    if outcome.clustering is not None:
        doc["clustering"] = outcome.clustering.to_dict()
    return doc


def records_outputs(records: Sequence[EvalRecord]) -> list[dict]:
    return [r.to_dict() for r in records]


def summary_or_none(records: Sequence[EvalRecord]) -> dict | None:
    try:
        return summarize(records).to_dict()
    except SepconfError:
        return None


def emit(store: ArtifactStore, kind: str, inputs: dict, outputs: dict, *, csv_text: str | None = None) -> Path:
    art, run_id = store.put(kind, inputs, outputs, csv_text)
    path = store.path(kind, art.hash)
    print(f"artifact: {path}")
    print(f"run id: {run_id}")
    return path


# -- commands ---------------------------------------------------------------------


def cmd_generate(args, settings: dict, store: ArtifactStore) -> int:
    card_path = Path(args.card)
    if not card_path.is_file():
        raise FileNotFoundError(f"card file not found: {card_path}")
    card = load_card(card_path)
    catalog = resolve_catalog(args.catalog)
    off = [name for flag, name in (("no_descriptions", "separator_descriptions"),
                                   ("no_text", "problem_text"), ("no_latex", "latex_model"))
           if getattr(args, flag)]
    flags = PromptFlags.from_names(off)
    size = _opt(args, settings, "pool_size")
    temperature = _opt(args, settings, "temperature")
    model_id = _opt(args, settings, "model_id")
    retry = _opt(args, settings, "retry_budget")
    client = make_client(args, settings)
    status = EXIT_OK
    try:
        result = generate_pool(card, catalog, client, size, flags, retry,
                               max_workers=settings["max_workers"], temperature=temperature, model_id=model_id)
    except PoolIncomplete as exc:
        log.error("%s", exc)
        result = exc.pool
        status = EXIT_PARTIAL
    inputs = {
        "catalog": catalog.ref.to_dict(),
        "card": {"digest": card.digest, "title": card.title},
        "flags": flags.to_dict(),
        "pool_size": size,
        "retry_budget": retry,
        "temperature": temperature,
        "model_id": model_id,
        "prompt_digest": result.prompt.digest,
    }
    outputs = {
        "pool": pool_to_dict(result.pool),
        "complete": status == EXIT_OK,
        "completions": result.completions,
        "failures": [f.to_dict() for f in result.failures],
    }
    emit(store, "pool", inputs, outputs)
    print(f"pool: {len(result.pool)} of {size} configurations, {result.completions} completions")
    return status


def _load_pool(store: ArtifactStore, ref: str, catalog_name: str | None):
    art = store.load(ref, "pool")
    catalog = resolve_catalog(catalog_name) if catalog_name else _catalog_for(art.outputs["pool"]["catalog"])
    return art, catalog, pool_from_dict(art.outputs["pool"], catalog)


def _catalog_for(ref_doc: dict) -> SeparatorCatalog:
    catalog = resolve_catalog(ref_doc["solver"])
    if catalog.content_hash != ref_doc["content_hash"]:
        raise CatalogMismatch("artifact was built with a catalog file other than the built-in; pass --catalog")
    return catalog


def cmd_ensemble(args, settings: dict, store: ArtifactStore) -> int:
    pool_art, catalog, pool = _load_pool(store, args.pool, args.catalog)
    k = _opt(args, settings, "k")
    mode = args.mode
    inputs: dict = {"pool": pool_art.hash, "mode": mode, "seed": args.seed}
    records = None
    if mode in ("llm0", "llmk"):
        inputs["k"] = k
    if mode == "llm0":
        outcome = select_cold_start(kmedoids(pool, k, seed=args.seed), pool)
        method = "LLM(0)"
    elif mode == "llmk":
        if not args.val:
            raise MissingValidationSet("mode llmk needs a validation set (--val)")
        val = load_instances(args.val, "val")
        plan = make_plan(args, settings, catalog, val, role="val")
        runner, fingerprint = make_runner(args, settings, catalog, store)
        evaluator = Evaluator(runner, catalog, plan, defaults_cache(store))
        outcome, records = validate_medoids(pool, k, evaluator, list(val), seed=args.seed)
        inputs.update(plan=plan_inputs(plan), instances=instance_manifest(val), solver=fingerprint)
        method = f"LLM({k})"
    else:
        fn = {"average": ensemble_average, "mode": ensemble_mode, "smallest": ensemble_smallest}[mode]
        strategy = {"average": Strategy.AVERAGE, "mode": Strategy.MODE, "smallest": Strategy.SMALLEST}[mode]
        final = fn(pool)
        idx = next((i for i, c in enumerate(pool) if c == final), None)
        outcome = SelectionOutcome(final, strategy, pool_index=idx)
        method = mode.capitalize()
    outputs = outcome_outputs(outcome)
    outputs["method"] = method
    outputs["catalog"] = catalog.ref.to_dict()
    if records is not None:
        outputs["validation_records"] = [records_outputs(r) for r in records]
    emit(store, "selection", inputs, outputs)
    print(f"{method}: {outcome.final.short()}")
    return EXIT_OK


def _target_config(store: ArtifactStore, ref: str, catalog_name: str | None
                   ) -> tuple[Configuration, SeparatorCatalog, dict, str]:
    if ref == "default":
        if not catalog_name:
            raise UsageError("--config default needs --catalog")
        catalog = resolve_catalog(catalog_name)
        return default_configuration(catalog), catalog, {"config": "default"}, "Default"
    art = store.load(ref)
    if art.kind not in ("selection", "textfree"):
        raise SchemaMismatch(f"{ref}: expected a selection artifact, found {art.kind}")
    catalog = resolve_catalog(catalog_name) if catalog_name else _catalog_for(art.outputs["catalog"])
    cfg = config_from_dict(art.outputs["final"], catalog)
    return cfg, catalog, {"config": art.hash}, art.outputs.get("method", art.outputs["strategy"])


def cmd_evaluate(args, settings: dict, store: ArtifactStore) -> int:
    cfg, catalog, source, method = _target_config(store, args.config, args.catalog)
    instances = load_instances(args.instances, "eval")
    plan = make_plan(args, settings, catalog, instances, role="eval")
    runner, fingerprint = make_runner(args, settings, catalog, store)
    evaluator = Evaluator(runner, catalog, plan, defaults_cache(store))
    records = evaluator.evaluate(cfg, instances)
    method = args.label or method
    inputs = {
        **source,
        "levels": config_to_dict(cfg)["levels"],
        "catalog": catalog.ref.to_dict(),
        "plan": plan_inputs(plan),
        "instances": instance_manifest(instances),
        "solver": fingerprint,
    }
    summary = summary_or_none(records)
    outputs = {
        "method": method,
        "records": records_outputs(records),
        "summary": summary,
        "config_solves": evaluator.config_solves,
    }
    csv_text = records_csv((r.to_dict() for r in records), CSV_COLUMNS)
    path = emit(store, "eval", inputs, outputs, csv_text=csv_text)
    print(f"csv: {path.with_suffix('.csv')}")
    n_err = sum(not r.ok for r in records)
    if summary is not None:
        print(f"{method}: median (IQR) {summarize(records).cell()}, "
              f"solved {summary['n_solved']}/{summary['n']}, censored {summary['n_censored']}")
    if n_err:
        log.error("%d of %d instances had errors", n_err, len(records))
        return EXIT_PARTIAL
    return EXIT_OK


def _usage_from_file(path: Path) -> list[SeparatorUsage]:
    doc = json.loads(path.read_text()) if path.suffix == ".json" else yaml.safe_load(path.read_text())
    if isinstance(doc, dict):
        doc = [{"instance": k, "counts": v} for k, v in doc.items()]
    return [SeparatorUsage.from_dict(u) for u in doc]


def _usage_from_logs(directory: Path, catalog: SeparatorCatalog, gap_target: float) -> list[SeparatorUsage]:
    usage = []
    for p in sorted(directory.glob("*.log")):
        text = p.read_text(errors="replace")
        parsed = parse_gurobi_log(text, gap_target) if catalog.solver is Solver.GUROBI else parse_scip_log(text)
        usage.append(SeparatorUsage(p.stem, dict(parsed.cut_stats)))
    return usage


def cmd_baseline(args, settings: dict, store: ArtifactStore) -> int:
    catalog = resolve_catalog(args.catalog)
    inputs: dict = {"kind": args.kind, "catalog": catalog.ref.to_dict()}
    if args.kind == "pruning":
        if args.usage:
            usage, solves = _usage_from_file(Path(args.usage)), 0
            inputs["usage"] = file_hash(Path(args.usage))
        elif args.logs:
            usage, solves = _usage_from_logs(Path(args.logs), catalog, _opt(args, settings, "gap_target")), 0
            inputs["logs"] = sorted(u.instance for u in usage)
        else:
            val = load_instances(args.val, "val")
            plan = make_plan(args, settings, catalog, val, role="val")
            runner, fingerprint = make_runner(args, settings, catalog, store)
            usage, solves = gather_usage(runner, catalog, list(val), plan)
            inputs.update(plan=plan_inputs(plan), instances=instance_manifest(val), solver=fingerprint)
        outcome = pruning_outcome(usage, catalog, solves, ignore_unknown=args.ignore_unknown)
        outputs = outcome_outputs(outcome)
        outputs["usage"] = [u.to_dict() for u in usage]
        method = "Pruning"
    else:
        val = load_instances(args.val, "val")
        plan = make_plan(args, settings, catalog, val, role="val")
        runner, fingerprint = make_runner(args, settings, catalog, store)
        evaluator = Evaluator(runner, catalog, plan, defaults_cache(store))
        outcome = search(args.d, catalog, list(val), plan, args.seed, evaluator=evaluator)
        inputs.update(d=args.d, seed=args.seed, plan=plan_inputs(plan),
                      instances=instance_manifest(val), solver=fingerprint)
        outputs = outcome_outputs(outcome)
        method = f"Search({args.d})"
    outputs["method"] = method
    outputs["catalog"] = catalog.ref.to_dict()
    emit(store, "selection", inputs, outputs)
    print(f"{method}: {outcome.final.short()} ({outcome.solve_count} solves)")
    return EXIT_OK


def cmd_textfree(args, settings: dict, store: ArtifactStore) -> int:
    path = Path(args.instance)
    if not path.is_file():
        raise FileNotFoundError(f"instance not found: {path}")
    catalog = resolve_catalog(args.catalog)
    plan = TextFreePlan(
        k_desc=args.k_desc,
        configs_per_desc=args.per_desc,
        k_clusters=_opt(args, settings, "k"),
        retry_budget=_opt(args, settings, "retry_budget"),
        temperature=_opt(args, settings, "temperature"),
        model_id=_opt(args, settings, "model_id"),
    )
    client = make_client(args, settings)
    result = textfree_configure(path, catalog, client, plan, max_workers=settings["max_workers"])
    inputs = {"instance": {"id": path.name, "hash": file_hash(path)},
              "catalog": catalog.ref.to_dict(), "plan": plan.to_dict()}
    outputs = outcome_outputs(result.outcome)
    outputs.update(
        method="Text-free",
        catalog=catalog.ref.to_dict(),
        histogram=result.histogram.to_dict(),
        cards=[c.to_dict() for c in result.cards],
        pool=pool_to_dict(result.pool),
        k_used=result.k_used,
        failures=[f.to_dict() for f in result.failures],
    )
    emit(store, "textfree", inputs, outputs)
    print(f"Text-free: {result.outcome.final.short()} (pool {len(result.pool)}, k={result.k_used})")
    return EXIT_PARTIAL if len(result.pool) < plan.pool_size else EXIT_OK


def _fmt(x: float, digits: int = 2) -> str:
    return "n/a" if x is None or (isinstance(x, float) and math.isnan(x)) else f"{x:.{digits}f}"


def build_report(arts: Sequence, labels: Sequence[str], gap_reference: str | None = None) -> tuple[str, str, dict]:
    """Table text, per-instance CSV and a structured summary for eval artifacts."""
    columns = []
    for art, label in zip(arts, labels):
        records = [EvalRecord.from_dict(r) for r in art.outputs["records"]]
        columns.append((label, records))
    ids = [r.instance for r in columns[0][1]]
    for label, records in columns[1:]:
        if sorted(r.instance for r in records) != sorted(ids):
            raise SchemaMismatch(f"{label!r} was evaluated on a different instance set")
    if gap_reference is not None and gap_reference not in labels:
        raise UsageError(f"gap reference {gap_reference!r} is not one of the labels")

    rows: list[tuple[str, list[str]]] = []
    summary: dict = {}
    cells, solved, censored, errors, gaps = [], [], [], [], []
    ref_records = dict(columns)[gap_reference] if gap_reference else None
    for label, records in columns:
        try:
            s = summarize(records)
        except SepconfError:
            s = None
        cells.append(s.cell() if s else "n/a")
        solved.append(f"{s.n_solved}/{len(records)}" if s else f"0/{len(records)}")
        censored.append(str(s.n_censored) if s else "n/a")
        errors.append(str(sum(not r.ok for r in records)))
        entry = {"summary": s.to_dict() if s else None}
        if ref_records is not None:
            if label == gap_reference:
                gaps.append("-")
            else:
                try:
                    g = gap_comparison(ref_records, records)
                except NoCommonUnsolved:
                    g = None
                entry["gap_difference"] = g
                gaps.append(_fmt(g))
        summary[label] = entry
    rows.append(("Improvement (%)", cells))
    if ref_records is not None:
        rows.append(("MIP gap difference (%)", gaps))
    rows += [("Solved", solved), ("Censored", censored), ("Errors", errors)]

    head = [""] + list(labels)
    body = [[name] + vals for name, vals in rows]
    widths = [max(len(r[i]) for r in [head] + body) for i in range(len(head))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in [head] + body]
    table = "\n".join(lines) + "\n"

    by_label = [{r.instance: r for r in records} for _, records in columns]
    fields = []
    for label in labels:
        fields += [f"{label}:improvement", f"{label}:censored", f"{label}:solved",
                   f"{label}:t_config", f"{label}:gap_config"]
    out_rows = []
    for inst in ids:
        row = {"instance": inst}
        for label, recs in zip(labels, by_label):
            r = recs[inst]
            row.update({f"{label}:improvement": r.improvement, f"{label}:censored": r.censored,
                        f"{label}:solved": r.solved, f"{label}:t_config": r.t_config,
                        f"{label}:gap_config": r.gap_config})
        out_rows.append(row)
    csv_text = records_csv(out_rows, ["instance"] + fields)
    return table, csv_text, summary


def cmd_report(args, settings: dict, store: ArtifactStore) -> int:
    arts = [store.load(ref, "eval") for ref in args.artifacts]
    labels = args.labels.split(",") if args.labels else [a.outputs.get("method", a.hash[:8]) for a in arts]
    if len(labels) != len(arts):
        raise UsageError("--labels must name every artifact")
    if len(set(labels)) != len(labels):
        raise UsageError(f"duplicate column labels {labels}; pass --labels")
    table, csv_text, summary = build_report(arts, labels, args.gap_reference)
    inputs = {"artifacts": [a.hash for a in arts], "labels": labels, "gap_reference": args.gap_reference}
    path = emit(store, "report", inputs, {"table": table, "columns": summary}, csv_text=csv_text)
    if args.csv:
        Path(args.csv).write_text(csv_text)
    print(f"csv: {args.csv or path.with_suffix('.csv')}")
    sys.stdout.write("\n" + table)
    return EXIT_OK


# -- argument parsing -------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--store", help="artifact store directory (env SEPCONF_STORE)")
    common.add_argument("--config-file", help="YAML file of defaults (env SEPCONF_CONFIG, else ./sepconf.yaml)")
    common.add_argument("-v", "--verbose", action="count", default=0)

    llm = argparse.ArgumentParser(add_help=False)
    llm.add_argument("--client", choices=["live", "replay", "record"], default="live")
    llm.add_argument("--fixtures", help="recorded-completion directory for replay/record")
    llm.add_argument("--temperature", type=float)
    llm.add_argument("--model-id", dest="model_id")
    llm.add_argument("--retry-budget", dest="retry_budget", type=int)

    solve = argparse.ArgumentParser(add_help=False)
    solve.add_argument("--seeds", type=int)
    solve.add_argument("--limit-multiplier", dest="limit_multiplier", type=float)
    solve.add_argument("--gap-target", dest="gap_target", type=float)
    solve.add_argument("--threads", type=int)
    solve.add_argument("--workers", type=int)
    solve.add_argument("--stub-table", dest="stub_table", help="scripted times for the stub catalog")
    solve.add_argument("--solver-bin", dest="solver_bin", help="solver executable")

    p = argparse.ArgumentParser(prog="sepconf", description="Cold-start separator configuration for MILP solvers.")
    p.add_argument("--version", action="version", version=f"sepconf {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", parents=[common, llm], help="sample a configuration pool from a problem card")
    g.add_argument("--card", required=True)
    g.add_argument("--catalog", required=True, help="built-in name (scip, gurobi, stub) or YAML path")
    g.add_argument("--pool-size", dest="pool_size", type=int)
    g.add_argument("--no-descriptions", action="store_true", help="omit separator descriptions")
    g.add_argument("--no-text", action="store_true", help="omit the problem description")
    g.add_argument("--no-latex", action="store_true", help="omit the LaTeX formulation")
    g.set_defaults(func=cmd_generate)

    e = sub.add_parser("ensemble", parents=[common, solve], help="reduce a pool to one configuration")
    e.add_argument("--pool", required=True, help="pool artifact path or hash prefix")
    e.add_argument("--mode", required=True, choices=["llm0", "llmk", "average", "mode", "smallest"])
    e.add_argument("--k", type=int)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--val", help="validation instances (directory or id list)")
    e.add_argument("--catalog")
    e.set_defaults(func=cmd_ensemble)

    v = sub.add_parser("evaluate", parents=[common, solve], help="measure improvement over the default")
    v.add_argument("--config", required=True, help="selection artifact, or 'default'")
    v.add_argument("--instances", required=True, help="directory or id list")
    v.add_argument("--catalog")
    v.add_argument("--label", help="column name used by report")
    v.set_defaults(func=cmd_evaluate)

    b = sub.add_parser("baseline", parents=[common, solve], help="pruning or random search")
    b.add_argument("kind", choices=["pruning", "search"])
    b.add_argument("--catalog", required=True)
    b.add_argument("--val")
    b.add_argument("--d", type=int, default=5)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--usage", help="pruning: JSON/YAML cut counts per instance")
    b.add_argument("--logs", help="pruning: directory of solver logs")
    b.add_argument("--ignore-unknown", action="store_true", help="pruning: skip statistics rows not in the catalog")
    b.set_defaults(func=cmd_baseline)

    t = sub.add_parser("textfree", parents=[common, llm], help="configure from an MPS file alone")
    t.add_argument("--instance", required=True)
    t.add_argument("--catalog", required=True)
    t.add_argument("--k", type=int)
    t.add_argument("--k-desc", dest="k_desc", type=int, default=5)
    t.add_argument("--per-desc", dest="per_desc", type=int, default=20)
    t.set_defaults(func=cmd_textfree)

    r = sub.add_parser("report", parents=[common], help="table and per-instance CSV from eval artifacts")
    r.add_argument("artifacts", nargs="+")
    r.add_argument("--labels", help="comma-separated column names")
    r.add_argument("--gap-reference", dest="gap_reference", help="label whose gaps the others are compared to")
    r.add_argument("--csv", help="also write the per-instance CSV here")
    r.set_defaults(func=cmd_report)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        settings = load_settings(args.config_file)
        store = ArtifactStore(args.store or settings["store"])
        return args.func(args, settings, store)
    except UsageError as exc:
        parser.error(str(exc))  # exits with 2
    except ENV_ERRORS as exc:
        print(f"sepconf: {exc}", file=sys.stderr)
        return EXIT_ENV
    except USAGE_ERRORS as exc:
        print(f"sepconf: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SepconfError as exc:
        print(f"sepconf: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
