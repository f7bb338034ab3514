"""Regular grammars for the parts of SCIP and Gurobi logs we read.

SCIP (interactive shell, ``display statistics`` output)::

    SCIP Status        : problem is solved [optimal solution found]
    Solving Time (sec) : 12.34
    Gap                : 0.00 %
    Separators         :   ExecTime  SetupTime      Calls ...    Applied ...
      cut pool         :       0.00          -         12 ...          - ...
      gomory           :       0.03       0.00          9 ...          2 ...

Gurobi (``gurobi_cl``)::

    Cutting planes:
      Gomory: 5
      Implied bound: 12
    Explored 1 nodes (123 simplex iterations) in 0.05 seconds (0.04 work units)
    Optimal solution found (tolerance 1.00e-04)
    Best objective 1.2e+01, best bound 1.2e+01, gap 0.0000%
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

from ..errors import LogParseError
from .types import SolveStatus

# Gurobi's default MIPGap; a reported gap above this means a looser target stopped the run
GUROBI_OPT_TOL = 1e-4


@dataclass(frozen=True)
class ParsedLog:
    status: SolveStatus
    time: float
    gap: float
    cut_stats: dict[str, int] = field(default_factory=dict)
    message: str = ""


_SCIP_STATUS = re.compile(r"^SCIP Status\s*:\s*(.*?)\s*\[(.+?)\]\s*$", re.M)
_SCIP_TIME = re.compile(r"^Solving Time \(sec\)\s*:\s*([0-9.eE+-]+)\s*$", re.M)
_SCIP_GAP = re.compile(r"^Gap\s*:\s*(infinite|[0-9.eE+-]+\s*%)\s*$", re.M)

_SCIP_STATUS_MAP = {
    "optimal solution found": SolveStatus.OPTIMAL,
    "gap limit reached": SolveStatus.GAP_LIMIT,
    "time limit reached": SolveStatus.TIME_LIMIT,
}


def _scip_separators(text: str) -> dict[str, int]:
    lines = text.splitlines()
    for i, line in enumerate(lines):
        if line.startswith("Separators") and ":" in line:
            header = line.split(":", 1)[1].split()
            break
    else:
        return {}
    if "Applied" not in header:
        raise LogParseError("separator table has no Applied column")
    col = header.index("Applied")
    stats = {}
    for line in lines[i + 1:]:
        if not line.startswith(" ") or ":" not in line:
            break
        name, _, rest = line.partition(":")
        name = name.strip()
        if name == "cut pool":
            continue
        cells = rest.split()
        if len(cells) <= col:
            raise LogParseError(f"short separator row for {name!r}")
        cell = cells[col]
        stats[name] = 0 if cell == "-" else int(cell)
    return stats


def parse_scip_log(text: str) -> ParsedLog:
    m_status = _SCIP_STATUS.search(text)
    m_time = _SCIP_TIME.search(text)
    if m_status is None or m_time is None:
        raise LogParseError("SCIP log lacks the status or solving time line")
    reason = m_status.group(2).strip()
    time = float(m_time.group(1))
    m_gap = _SCIP_GAP.search(text)
    if m_gap is None:
        gap = math.inf
    else:
        raw = m_gap.group(1)
        gap = math.inf if raw == "infinite" else float(raw.rstrip("% ").strip()) / 100.0
    status = _SCIP_STATUS_MAP.get(reason)
    cuts = _scip_separators(text)
    if status is None:
        return ParsedLog(SolveStatus.ERROR, time, gap, cuts, f"SCIP stopped: {reason}")
    if status is SolveStatus.OPTIMAL:
        gap = 0.0
    return ParsedLog(status, time, gap, cuts)


_GRB_EXPLORED = re.compile(
    r"^Explored \d+ nodes \(\d+ simplex iterations\) in ([0-9.eE+-]+) seconds"
    r"(?: \(([0-9.eE+-]+) work units\))?",
    re.M,
)
_GRB_BEST = re.compile(r"^Best objective (\S+), best bound (\S+), gap (\S+?)%?\s*$", re.M)
_GRB_OPTIMAL = re.compile(r"^Optimal solution found", re.M)
_GRB_LIMIT = re.compile(r"^(Time|Work) limit reached", re.M)
_GRB_INFEASIBLE = re.compile(r"^(Model is infeasible|Model is unbounded|Infeasible or unbounded)", re.M)
_GRB_CUT_LINE = re.compile(r"^\s+([A-Za-z][A-Za-z -]*?):\s*(\d+)\s*$")


def _gurobi_cuts(text: str) -> dict[str, int]:
    stats: dict[str, int] = {}
    lines = text.splitlines()
    for i, line in enumerate(lines):
        if line.strip() == "Cutting planes:":
            for row in lines[i + 1:]:
                m = _GRB_CUT_LINE.match(row)
                if m is None:
                    break
                stats[m.group(1)] = stats.get(m.group(1), 0) + int(m.group(2))
    return stats


def parse_gurobi_log(text: str, gap_target: float = 0.0) -> ParsedLog:
    """Parse a gurobi_cl log; time is reported in work units."""
    explored = list(_GRB_EXPLORED.finditer(text))
    if not explored:
        raise LogParseError("Gurobi log lacks the 'Explored ... work units' line")
    last = explored[-1]
    if last.group(2) is None:
        raise LogParseError("Gurobi log reports no work units; version too old?")
    work = float(last.group(2))
    best = list(_GRB_BEST.finditer(text))
    gap = math.inf
    if best:
        raw = best[-1].group(3)
        gap = math.inf if raw in ("-", "inf") else float(raw) / 100.0
    cuts = _gurobi_cuts(text)
    if _GRB_INFEASIBLE.search(text):
        return ParsedLog(SolveStatus.ERROR, work, gap, cuts, "Gurobi: model infeasible or unbounded")
    if _GRB_LIMIT.search(text):
        return ParsedLog(SolveStatus.TIME_LIMIT, work, gap, cuts)
    if _GRB_OPTIMAL.search(text):
        if gap_target > 0 and gap > GUROBI_OPT_TOL:
            return ParsedLog(SolveStatus.GAP_LIMIT, work, gap, cuts)
        return ParsedLog(SolveStatus.OPTIMAL, work, 0.0, cuts)
    raise LogParseError("Gurobi log has no recognised termination line")
