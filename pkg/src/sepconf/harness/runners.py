"""Run external solvers as subprocesses.

Command lines are templates so a point release that changes flags only
needs a config change. Placeholders: ``{binary}``, ``{settings}``,
``{instance}``, ``{seed}``, ``{threads}``, and ``{params}``, which expands
in place to one ``Name=value`` argument per settings line (Gurobi style).
"""

from __future__ import annotations

import functools
import logging
import os
import queue
import shutil
import subprocess
import tempfile
from pathlib import Path
from typing import Protocol, Sequence

from ..catalog import (
    Configuration,
    SeparatorCatalog,
    Solver,
    format_setting,
    render_settings,
    require_same_catalog,
)
from ..errors import LaunchError, LogParseError, SolverNotFound
from .logs import ParsedLog, parse_gurobi_log, parse_scip_log
from .types import Instance, SolveOutcome, SolveStatus

log = logging.getLogger(__name__)

ENV_BINARY = {Solver.SCIP: "SEPCONF_SCIP_BIN", Solver.GUROBI: "SEPCONF_GUROBI_BIN"}
DEFAULT_BINARY = {Solver.SCIP: "scip", Solver.GUROBI: "gurobi_cl"}
DEFAULT_COMMAND = {
    Solver.SCIP: ["{binary}", "-s", "{settings}", "-c",
                  "read {instance} optimize display statistics quit"],
    Solver.GUROBI: ["{binary}", "{params}", "{instance}"],
}
SETTINGS_SUFFIX = {Solver.SCIP: ".set", Solver.GUROBI: ".prm"}


class Runner(Protocol):
    def solve(self, instance: Instance, config: Configuration, seed: int,
              time_limit: float | None = None, gap_target: float = 0.0) -> SolveOutcome: ...


def control_settings(solver: Solver, seed: int, time_limit: float | None, gap_target: float,
                     threads: int) -> list[str]:
    """Seed, limits and thread cap in the solver's settings syntax."""
    if solver is Solver.SCIP:
        pairs = [("randomization/randomseedshift", seed)]
        if time_limit is not None:
            pairs.append(("limits/time", time_limit))
        if gap_target > 0:
            pairs.append(("limits/gap", gap_target))
        pairs += [("lp/threads", threads), ("parallel/maxnthreads", threads)]
    elif solver is Solver.GUROBI:
        pairs = [("Seed", seed)]
        if time_limit is not None:
            # times are work units, so the limit is a work limit
            pairs.append(("WorkLimit", time_limit))
        if gap_target > 0:
            pairs.append(("MIPGap", gap_target))
        pairs.append(("Threads", threads))
    else:
        raise ValueError(f"no settings syntax for solver {solver.value}")
    return [format_setting(solver, k, v) for k, v in pairs]


def resolve_binary(solver: Solver, binary: str | None = None) -> str:
    candidate = binary or os.environ.get(ENV_BINARY[solver]) or DEFAULT_BINARY[solver]
    found = shutil.which(candidate)
    if found is None:
        raise SolverNotFound(
            f"{solver.value} executable {candidate!r} not found; set {ENV_BINARY[solver]}"
        )
    return found


class SubprocessRunner:
    """Launch one solver process per solve and parse its log.

    Logs are always written to ``log_dir``. An unreadable log gives an
    Error outcome that points at the saved log rather than an exception.
    """

    def __init__(
        self,
        catalog: SeparatorCatalog,
        binary: str | None = None,
        *,
        command: Sequence[str] | None = None,
        threads: int = 4,
        log_dir: str | Path | None = None,
        pin_cpus: bool = False,
        watchdog_factor: float = 2.0,
        watchdog_slack: float = 60.0,
    ):
        if catalog.solver not in (Solver.SCIP, Solver.GUROBI):
            raise ValueError(f"catalog targets {catalog.solver.value}, not an external solver")
        self.catalog = catalog
        self.solver = catalog.solver
        self.binary = resolve_binary(self.solver, binary)
        self.command = list(command or DEFAULT_COMMAND[self.solver])
        self.threads = threads
        self.log_dir = Path(log_dir) if log_dir else Path(tempfile.mkdtemp(prefix="sepconf-logs-"))
        self.watchdog_factor = watchdog_factor
        self.watchdog_slack = watchdog_slack
        self._cpu_slots: queue.Queue | None = None
        if pin_cpus and hasattr(os, "sched_setaffinity"):
            cpus = sorted(os.sched_getaffinity(0))
            slots = [cpus[i:i + threads] for i in range(0, len(cpus) - threads + 1, threads)]
            if slots:
                self._cpu_slots = queue.Queue()
                for s in slots:
                    self._cpu_slots.put(s)

    def parse(self, text: str, gap_target: float) -> ParsedLog:
        if self.solver is Solver.SCIP:
            return parse_scip_log(text)
        return parse_gurobi_log(text, gap_target)

    def _argv(self, settings_path: Path, settings_lines: list[str], instance: Path, seed: int) -> list[str]:
        params = [line.replace(" ", "=", 1) for line in settings_lines]
        values = {
            "binary": self.binary,
            "settings": str(settings_path),
            "instance": str(instance),
            "seed": str(seed),
            "threads": str(self.threads),
        }
        argv = []
        for part in self.command:
            if part == "{params}":
                argv.extend(params)
            else:
                argv.append(part.format(**values))
        return argv

    def solve(self, instance: Instance, config: Configuration, seed: int,
              time_limit: float | None = None, gap_target: float = 0.0) -> SolveOutcome:
        require_same_catalog(config.catalog_ref, self.catalog.ref)
        if instance.path is None:
            raise LaunchError(f"instance {instance.id!r} has no file")
        stem = f"{instance.id}__{config.digest[:12]}__s{seed}"
        self.log_dir.mkdir(parents=True, exist_ok=True)
        settings_path = self.log_dir / (stem + SETTINGS_SUFFIX[self.solver])
        lines = render_settings(config, self.catalog).splitlines()
        lines += control_settings(self.solver, seed, time_limit, gap_target, self.threads)
        settings_path.write_text("".join(line + "\n" for line in lines))
        log_path = self.log_dir / (stem + ".log")
        argv = self._argv(settings_path, lines, Path(instance.path), seed)

        watchdog = None
        if time_limit is not None:
            watchdog = time_limit * self.watchdog_factor + self.watchdog_slack
        slot = self._cpu_slots.get() if self._cpu_slots is not None else None
        preexec = functools.partial(os.sched_setaffinity, 0, tuple(slot)) if slot is not None else None
        try:
            proc = subprocess.run(argv, capture_output=True, text=True, timeout=watchdog,
                                  preexec_fn=preexec)
        except FileNotFoundError as exc:
            raise SolverNotFound(str(exc)) from None
        except subprocess.TimeoutExpired as exc:
            out = exc.stdout or ""
            if isinstance(out, bytes):
                out = out.decode(errors="replace")
            log_path.write_text(out)
            return SolveOutcome.error(instance.id, config.digest, seed,
                                      f"killed by watchdog after {watchdog:.0f}s",
                                      str(log_path), time_limit)
        except OSError as exc:
            raise LaunchError(f"cannot launch {argv[0]}: {exc}") from None
        finally:
            if slot is not None:
                self._cpu_slots.put(slot)

        log_path.write_text(proc.stdout + (("\n--- stderr ---\n" + proc.stderr) if proc.stderr else ""))
        try:
            parsed = self.parse(proc.stdout, gap_target)
        except LogParseError as exc:
            msg = f"{exc} (exit code {proc.returncode})"
            log.warning("%s: %s", stem, msg)
            return SolveOutcome.error(instance.id, config.digest, seed, msg, str(log_path), time_limit)
        time = parsed.time
        if time_limit is not None and parsed.status is SolveStatus.TIME_LIMIT:
            # solvers overshoot by a hair; the metric counts the run at the limit
            time = float(time_limit)
        if parsed.status is SolveStatus.ERROR:
            return SolveOutcome.error(instance.id, config.digest, seed, parsed.message,
                                      str(log_path), time_limit)
        return SolveOutcome(instance.id, config.digest, seed, parsed.status, time, parsed.gap,
                            str(log_path), time_limit, parsed.cut_stats, parsed.message)
