"""MPS reader producing an exact-rational instance representation.

Handles free and fixed MPS (auto-detected per line), gzip input, OBJSENSE,
MARKER integrality, RANGES, and all standard BOUNDS types. Coefficients are
kept as :class:`fractions.Fraction` so that classification never has to
compare floats.
"""

from __future__ import annotations

import enum
import gzip
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Union

from ..errors import ParseError, UnsupportedSection

log = logging.getLogger(__name__)

Number = Union[Fraction, float]  # float only for +-inf
INF = math.inf
INFINITY_THRESHOLD = Fraction(10) ** 20

SECTIONS = {"NAME", "OBJSENSE", "OBJSENSE MAX", "OBJSENSE MIN", "OBJNAME", "ROWS", "COLUMNS",
            "RHS", "RANGES", "BOUNDS", "ENDATA"}
UNSUPPORTED = {"SOS", "SETS", "QUADOBJ", "QMATRIX", "QSECTION", "QCMATRIX", "INDICATORS",
               "CSECTION", "GENCONS", "PWLOBJ", "PWLNAM", "PWLCON", "BRANCH", "LAZYCONS",
               "USERCUTS"}


class VarKind(str, enum.Enum):
    CONTINUOUS = "continuous"
    INTEGER = "integer"
    BINARY = "binary"


class Sense(str, enum.Enum):
    LE = "<="
    GE = ">="
    EQ = "="


@dataclass(frozen=True)
class Variable:
    name: str
    kind: VarKind
    lower: Number
    upper: Number


@dataclass(frozen=True)
class Constraint:
    """A linear row ``lower <= sum(coef * x[var]) <= upper``.

    ``sense`` and ``rhs`` keep the row as declared in the file; ``lower`` and
    ``upper`` are the resolved sides after RANGES. Rows of type N other than
    the objective are kept as free rows (both sides infinite).
    """

    name: str
    sense: Sense
    rhs: Number
    terms: tuple[tuple[int, Fraction], ...]
    lower: Number
    upper: Number

    @property
    def is_ranged(self) -> bool:
        return self.lower != self.upper and not math.isinf(self.lower) and not math.isinf(self.upper)


@dataclass(frozen=True)
class MilpInstance:
    name: str
    variables: tuple[Variable, ...]
    constraints: tuple[Constraint, ...]
    objective_sense: str  # "min" | "max"
    objective: tuple[tuple[int, Fraction], ...]
    objective_offset: Fraction = Fraction(0)
    skipped_sections: tuple[str, ...] = field(default=(), compare=False)

    @property
    def n(self) -> int:
        return len(self.variables)

    @property
    def m(self) -> int:
        return len(self.constraints)

    def canonical(self):
        """Representation used for reader/writer round-trip checks."""
        return (
            self.name,
            tuple((v.name, v.kind, v.lower, v.upper) for v in self.variables),
            tuple((c.name, c.lower, c.upper, c.terms) for c in self.constraints),
            self.objective_sense,
            self.objective,
            self.objective_offset,
        )


def parse_number(token: str, *, line: int, path: str, allow_inf: bool = False) -> Number:
    t = token.strip()
    low = t.lower().lstrip("+")
    if allow_inf and low in ("inf", "infinity", "1e+30", "1e30", "1.0e+30", "1.0e30"):
        return INF
    if allow_inf and low in ("-inf", "-infinity"):
        return -INF
    try:
        value = Fraction(t)
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"bad number {token!r}", line=line, path=path) from None
    if allow_inf and abs(value) >= INFINITY_THRESHOLD:
        return INF if value > 0 else -INF
    return value


def _open_text(path: Path) -> list[str]:
    raw = path.read_bytes()
    if raw[:2] == b"\x1f\x8b":
        raw = gzip.decompress(raw)
    return raw.decode("utf-8", errors="replace").splitlines()


def _fixed_fields(line: str) -> list[str]:
    # fixed MPS columns 2-3, 5-12, 15-22, 25-36, 40-47, 50-61 (1-based)
    spans = [(1, 3), (4, 12), (14, 22), (24, 36), (39, 47), (49, 61)]
    out = [line[a:b].strip() for a, b in spans]
    while out and not out[-1]:
        out.pop()
    return out


class _Reader:
    def __init__(self, path: Path, fmt: str, strict: bool):
        self.path = str(path)
        self.fmt = fmt
        self.strict = strict
        self.name = path.name.split(".")[0]
        self.obj_sense = "min"
        self.obj_row: str | None = None
        self.rows: dict[str, dict] = {}
        self.row_order: list[str] = []
        self.cols: dict[str, dict] = {}
        self.col_order: list[str] = []
        self.obj_terms: dict[str, Fraction] = {}
        self.obj_offset = Fraction(0)
        self.rhs_set: str | None = None
        self.range_set: str | None = None
        self.bound_set: str | None = None
        self.skipped: list[str] = []
        self.rhs_given: set[str] = set()
        self.integer_marker = False
        self.obj_declared = False

    def err(self, msg: str, lineno: int):
        return ParseError(msg, line=lineno, path=self.path)

    # ------------------------------------------------------------------
    def run(self, lines: list[str]) -> MilpInstance:
        section = None
        seen = set()
        for lineno, line in enumerate(lines, start=1):
            if not line.strip() or line.lstrip().startswith("*"):
                continue
            if not line[0].isspace():
                head = line.split()
                key = head[0].upper()
                if key in UNSUPPORTED:
                    if self.strict:
                        raise UnsupportedSection(f"unsupported MPS section {key}", line=lineno,
                                                 path=self.path)
                    log.warning("%s: skipping unsupported section %s", self.path, key)
                    self.skipped.append(key)
                    section = "SKIP"
                    continue
                if key not in SECTIONS:
                    raise self.err(f"unknown section {head[0]!r}", lineno)
                section = key
                seen.add(key)
                if key == "NAME":
                    if len(head) > 1:
                        self.name = head[1]
                elif key == "OBJSENSE" and len(head) > 1:
                    self._objsense(head[1], lineno)
                    section = None
                elif key == "ENDATA":
                    break
                continue
            if section is None:
                raise self.err("data line outside of a section", lineno)
            if section == "SKIP":
                continue
            handler = getattr(self, "_sec_" + section.lower(), None)
            if handler is None:
                raise self.err(f"unexpected data in section {section}", lineno)
            handler(line, lineno)
        for required in ("ROWS", "COLUMNS"):
            if required not in seen:
                raise ParseError(f"missing {required} section", path=self.path)
        if "RHS" not in seen:
            raise ParseError("missing RHS section", path=self.path)
        return self._build()

    # ------------------------------------------------------------------
    def _objsense(self, token: str, lineno: int):
        t = token.upper()
        if t in ("MAX", "MAXIMIZE"):
            self.obj_sense = "max"
        elif t in ("MIN", "MINIMIZE"):
            self.obj_sense = "min"
        else:
            raise self.err(f"bad OBJSENSE {token!r}", lineno)

    def _sec_objsense(self, line, lineno):
        self._objsense(line.split()[0], lineno)

    def _sec_objname(self, line, lineno):
        self.obj_row = line.split()[0]

    def _sec_name(self, line, lineno):
        raise self.err("data line in NAME section", lineno)

    def _sec_rows(self, line, lineno):
        toks = line.split()
        if len(toks) != 2 and self.fmt != "free":
            toks = _fixed_fields(line)[:2]
        if len(toks) != 2:
            raise self.err("ROWS entries need a type and a name", lineno)
        kind, name = toks[0].upper(), toks[1]
        if kind not in ("N", "L", "G", "E"):
            raise self.err(f"bad row type {toks[0]!r}", lineno)
        if name in self.rows or (name == self.obj_row and self.obj_declared):
            raise self.err(f"duplicate row {name!r}", lineno)
        if kind == "N" and (self.obj_row is None or name == self.obj_row):
            self.obj_row = name
            self.obj_declared = True
            return
        self.rows[name] = {"type": kind, "rhs": Fraction(0), "range": None, "terms": {}}
        self.row_order.append(name)

    def _known_row(self, name):
        return name in self.rows or name == self.obj_row

    def _pairs(self, toks, start, lineno):
        rest = toks[start:]
        if len(rest) not in (2, 4):
            raise self.err("expected one or two (name, value) pairs", lineno)
        return [(rest[i], rest[i + 1]) for i in range(0, len(rest), 2)]

    def _sec_columns(self, line, lineno):
        toks = line.split()
        if len(toks) >= 3 and toks[1].strip("'\"").upper() == "MARKER":
            marker = toks[2].strip("'\"").upper()
            if marker == "INTORG":
                self.integer_marker = True
            elif marker == "INTEND":
                self.integer_marker = False
            else:
                raise self.err(f"unknown marker {toks[2]!r}", lineno)
            return
        if self.fmt == "fixed" or (
            self.fmt == "auto"
            and (len(toks) not in (3, 5) or not all(self._known_row(t) for t in toks[1::2]))
        ):
            fixed = _fixed_fields(line)
            if len(fixed) in (4, 6) and all(self._known_row(t) for t in fixed[2::2]):
                toks = fixed[1:]
        if len(toks) not in (3, 5):
            raise self.err("COLUMNS entries are: column row value [row value]", lineno)
        col = toks[0]
        if col not in self.cols:
            self.cols[col] = {
                "integer": self.integer_marker,
                "lower": Fraction(0),
                "upper": INF,
                "binary_hint": False,
                "upper_set": False,
            }
            self.col_order.append(col)
        for row, value in self._pairs(toks, 1, lineno):
            val = parse_number(value, line=lineno, path=self.path)
            if row == self.obj_row:
                if col in self.obj_terms:
                    raise self.err(f"duplicate objective entry for {col!r}", lineno)
                if val != 0:
                    self.obj_terms[col] = val
                continue
            if row not in self.rows:
                raise self.err(f"unknown row {row!r}", lineno)
            terms = self.rows[row]["terms"]
            if col in terms:
                raise self.err(f"duplicate entry for ({col!r}, {row!r})", lineno)
            if val != 0:
                terms[col] = val

    def _set_pairs(self, line, lineno):
        toks = line.split()
        if self.fmt == "fixed" or (self.fmt == "auto" and len(toks) not in (2, 3, 4, 5)):
            fixed = _fixed_fields(line)
            toks = fixed[1:]
        if len(toks) % 2 == 1:
            set_name, rest = toks[0], toks[1:]
        else:
            set_name, rest = "", toks
        if len(rest) not in (2, 4):
            raise self.err("expected [set] row value [row value]", lineno)
        return set_name, [(rest[i], rest[i + 1]) for i in range(0, len(rest), 2)]

    def _sec_rhs(self, line, lineno):
        set_name, pairs = self._set_pairs(line, lineno)
        if self.rhs_set is None:
            self.rhs_set = set_name
        elif set_name != self.rhs_set:
            log.warning("%s:%d: ignoring RHS set %r", self.path, lineno, set_name)
            return
        for row, value in pairs:
            val = parse_number(value, line=lineno, path=self.path, allow_inf=True)
            if row == self.obj_row:
                self.obj_offset = -Fraction(val)
                continue
            if row not in self.rows:
                raise self.err(f"unknown row {row!r} in RHS", lineno)
            if row in self.rhs_given:
                raise self.err(f"duplicate RHS entry for {row!r}", lineno)
            self.rhs_given.add(row)
            self.rows[row]["rhs"] = val

    def _sec_ranges(self, line, lineno):
        set_name, pairs = self._set_pairs(line, lineno)
        if self.range_set is None:
            self.range_set = set_name
        elif set_name != self.range_set:
            log.warning("%s:%d: ignoring RANGES set %r", self.path, lineno, set_name)
            return
        for row, value in pairs:
            if row not in self.rows:
                raise self.err(f"unknown row {row!r} in RANGES", lineno)
            if self.rows[row]["range"] is not None:
                raise self.err(f"duplicate RANGES entry for {row!r}", lineno)
            self.rows[row]["range"] = parse_number(value, line=lineno, path=self.path,
                                                   allow_inf=True)

    def _sec_bounds(self, line, lineno):
        toks = line.split()
        kind = toks[0].upper()
        valueless = kind in ("FR", "MI", "PL", "BV")
        # layouts: TYPE [SET] COL [VALUE]
        if len(toks) >= 3 and toks[2] in self.cols and (valueless or len(toks) >= 4):
            set_name, col, rest = toks[1], toks[2], toks[3:]
        elif len(toks) >= 2 and toks[1] in self.cols:
            set_name, col, rest = "", toks[1], toks[2:]
        else:
            fixed = _fixed_fields(line)
            if len(fixed) >= 3 and fixed[2] in self.cols:
                set_name, col, rest = fixed[1], fixed[2], fixed[3:4]
            else:
                raise self.err(f"BOUNDS entry names an unknown column: {line.strip()!r}", lineno)
        if self.bound_set is None:
            self.bound_set = set_name
        elif set_name != self.bound_set:
            log.warning("%s:%d: ignoring BOUNDS set %r", self.path, lineno, set_name)
            return
        if not valueless and not rest:
            raise self.err(f"{kind} bound needs a value", lineno)
        value = parse_number(rest[0], line=lineno, path=self.path, allow_inf=True) if rest else None
        c = self.cols[col]
        if kind == "UP":
            if value < 0 and c["lower"] == 0:
                log.warning("%s:%d: negative UP bound on %s with zero lower bound; "
                            "lower bound set to -inf", self.path, lineno, col)
                c["lower"] = -INF
            c["upper"] = value
            c["upper_set"] = True
        elif kind == "LO":
            c["lower"] = value
        elif kind == "FX":
            c["lower"] = c["upper"] = value
            c["upper_set"] = True
        elif kind == "FR":
            c["lower"], c["upper"] = -INF, INF
        elif kind == "MI":
            c["lower"] = -INF
        elif kind == "PL":
            c["upper"] = INF
        elif kind == "BV":
            c["integer"] = True
            c["lower"], c["upper"] = Fraction(0), Fraction(1)
            c["upper_set"] = True
        elif kind == "LI":
            c["integer"] = True
            c["lower"] = value
        elif kind == "UI":
            c["integer"] = True
            c["upper"] = value
            c["upper_set"] = True
        elif kind == "SC":
            if self.strict:
                raise UnsupportedSection("semi-continuous (SC) bounds are not supported",
                                         line=lineno, path=self.path)
            log.warning("%s:%d: SC bound on %s read as a plain upper bound", self.path, lineno, col)
            self.skipped.append("SC")
            c["upper"] = INF if value is None else value
        else:
            raise self.err(f"unknown bound type {toks[0]!r}", lineno)

    # ------------------------------------------------------------------
    def _build(self) -> MilpInstance:
        index = {name: i for i, name in enumerate(self.col_order)}
        variables = []
        for name in self.col_order:
            c = self.cols[name]
            lo, up = c["lower"], c["upper"]
            if lo > up:
                raise ParseError(f"column {name!r} has lower bound {lo} > upper bound {up}",
                                 path=self.path)
            if c["integer"]:
                kind = VarKind.BINARY if (lo == 0 and up == 1) else VarKind.INTEGER
            else:
                kind = VarKind.CONTINUOUS
            variables.append(Variable(name, kind, lo, up))

        constraints = []
        for name in self.row_order:
            r = self.rows[name]
            terms = tuple(sorted((index[col], val) for col, val in r["terms"].items()))
            kind, rhs, rng = r["type"], r["rhs"], r["range"]
            if kind == "N":
                constraints.append(Constraint(name, Sense.LE, INF, terms, -INF, INF))
                continue
            sense = {"L": Sense.LE, "G": Sense.GE, "E": Sense.EQ}[kind]
            lower, upper = _sides(sense, rhs, rng)
            constraints.append(Constraint(name, sense, rhs, terms, lower, upper))

        objective = tuple(sorted((index[col], val) for col, val in self.obj_terms.items()))
        return MilpInstance(
            name=self.name,
            variables=tuple(variables),
            constraints=tuple(constraints),
            objective_sense=self.obj_sense,
            objective=objective,
            objective_offset=self.obj_offset,
            skipped_sections=tuple(self.skipped),
        )


def _sides(sense: Sense, rhs: Number, rng: Number | None) -> tuple[Number, Number]:
    if rng is None:
        if sense is Sense.LE:
            return -INF, rhs
        if sense is Sense.GE:
            return rhs, INF
        return rhs, rhs
    width = abs(rng)
    if sense is Sense.LE:
        return rhs - width, rhs
    if sense is Sense.GE:
        return rhs, rhs + width
    if rng >= 0:
        return rhs, rhs + width
    return rhs - width, rhs


def parse_mps(path: str | Path, *, fmt: str = "auto", strict: bool = True) -> MilpInstance:
    """Parse an MPS file (optionally gzip-compressed).

    ``fmt`` is ``"auto"``, ``"free"`` or ``"fixed"``. With ``strict=False``
    unsupported sections (SOS, quadratic, indicator, ...) are skipped with a
    warning and listed in ``MilpInstance.skipped_sections``.
    """
    if fmt not in ("auto", "free", "fixed"):
        raise ValueError(f"fmt must be auto, free or fixed, not {fmt!r}")
    path = Path(path)
    return _Reader(path, fmt, strict).run(_open_text(path))


# --------------------------------------------------------------------------
# Writer (free MPS). Used by tests and fixture generation.
# --------------------------------------------------------------------------


def _num(value: Number) -> str:
    if isinstance(value, float):
        if math.isinf(value):
            return "1e+30" if value > 0 else "-1e+30"
        return repr(value)
    if value.denominator == 1:
        return str(value.numerator)
    d = value.denominator
    for p in (2, 5):
        while d % p == 0:
            d //= p
    if d == 1:
        # terminating decimal: exact
        from decimal import Decimal, getcontext

        getcontext().prec = 60
        text = format(Decimal(value.numerator) / Decimal(value.denominator), "f")
        return text.rstrip("0").rstrip(".") if "." in text else text
    return repr(float(value))


def write_mps(instance: MilpInstance) -> str:
    out = [f"NAME {instance.name}"]
    if instance.objective_sense == "max":
        out += ["OBJSENSE", "    MAX"]
    out.append("ROWS")
    out.append(" N  __obj__")
    rhs_lines, range_lines = [], []
    for c in instance.constraints:
        lo, up = c.lower, c.upper
        if math.isinf(lo) and math.isinf(up):
            out.append(f" N  {c.name}")
            continue
        if lo == up:
            out.append(f" E  {c.name}")
            rhs = lo
        elif math.isinf(lo):
            out.append(f" L  {c.name}")
            rhs = up
        elif math.isinf(up):
            out.append(f" G  {c.name}")
            rhs = lo
        else:
            out.append(f" L  {c.name}")
            rhs = up
            range_lines.append(f"    RNG  {c.name}  {_num(up - lo)}")
        if rhs != 0:
            rhs_lines.append(f"    RHS  {c.name}  {_num(rhs)}")
    if instance.objective_offset != 0:
        rhs_lines.append(f"    RHS  __obj__  {_num(-instance.objective_offset)}")

    by_col: dict[int, list[tuple[str, Fraction]]] = {i: [] for i in range(instance.n)}
    for j, val in instance.objective:
        by_col[j].append(("__obj__", val))
    for c in instance.constraints:
        for j, val in c.terms:
            by_col[j].append((c.name, val))
    out.append("COLUMNS")
    in_int = False
    marker = 0
    for j, var in enumerate(instance.variables):
        want_int = var.kind is not VarKind.CONTINUOUS
        if want_int != in_int:
            tag = "INTORG" if want_int else "INTEND"
            out.append(f"    M{marker}  'MARKER'  '{tag}'")
            marker += 1
            in_int = want_int
        entries = by_col[j] or [("__obj__", Fraction(0))]
        for row, val in entries:
            out.append(f"    {var.name}  {row}  {_num(val)}")
    if in_int:
        out.append(f"    M{marker}  'MARKER'  'INTEND'")
    out.append("RHS")
    out += rhs_lines
    if range_lines:
        out.append("RANGES")
        out += range_lines
    bounds = []
    for var in instance.variables:
        lo, up = var.lower, var.upper
        if math.isinf(lo) and math.isinf(up):
            bounds.append(f" FR BND  {var.name}")
            continue
        if lo == up:
            bounds.append(f" FX BND  {var.name}  {_num(lo)}")
            continue
        if math.isinf(lo):
            bounds.append(f" MI BND  {var.name}")
        elif lo != 0:
            bounds.append(f" LO BND  {var.name}  {_num(lo)}")
        if not math.isinf(up):
            bounds.append(f" UP BND  {var.name}  {_num(up)}")
        elif var.kind is not VarKind.CONTINUOUS:
            bounds.append(f" PL BND  {var.name}")
    if bounds:
        out.append("BOUNDS")
        out += bounds
    out.append("ENDATA")
    return "\n".join(out) + "\n"
