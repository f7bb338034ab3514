"""Constraint classification into the MIPLIB 2017 structural categories.

Every row is reduced to its primitive integer form (coefficients and
right-hand side scaled by the smallest positive rational that makes them
coprime integers) before the rules run, so the assigned tag does not depend
on how a row happens to be scaled in the file.

Rules are tried in a fixed order and the first match wins::

    Empty, Free, Singleton, Aggregation, Precedence, VariableBound,
    SetPartitioning, SetPacking, SetCovering, Cardinality,
    InvariantKnapsack, EquationKnapsack, BinPacking, Knapsack,
    IntegerKnapsack, MixedBinary, GeneralLinear

Set-type rules follow the usual complementation convention: a row over
binaries with +-1 coefficients is a packing row when its right-hand side
equals ``1 - (number of negative coefficients)``. Knapsack-type rules work
on the ``<=`` form with binaries complemented so all weights are
non-negative. A two-sided (ranged) row gets a special tag only when both of
its one-sided rows get that same tag.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Mapping, Sequence

from .reader import Constraint, MilpInstance, Sense, Variable, VarKind


class ConstraintType(str, enum.Enum):
    EMPTY = "empty"
    FREE = "free"
    SINGLETON = "singleton"
    AGGREGATION = "aggregation"
    PRECEDENCE = "precedence"
    VARIABLE_BOUND = "variable_bound"
    SET_PARTITIONING = "set_partitioning"
    SET_PACKING = "set_packing"
    SET_COVERING = "set_covering"
    CARDINALITY = "cardinality"
    INVARIANT_KNAPSACK = "invariant_knapsack"
    EQUATION_KNAPSACK = "equation_knapsack"
    BIN_PACKING = "bin_packing"
    KNAPSACK = "knapsack"
    INTEGER_KNAPSACK = "integer_knapsack"
    MIXED_BINARY = "mixed_binary"
    GENERAL_LINEAR = "general_linear"

    @property
    def title(self) -> str:
        return self.value.replace("_", " ")


def _lcm(a: int, b: int) -> int:
    return a * b // math.gcd(a, b)


def _primitive(coefs: Sequence[Fraction], rhs: Fraction) -> tuple[list[int], int]:
    values = list(coefs) + [rhs]
    denom = reduce(_lcm, (v.denominator for v in values), 1)
    ints = [int(v * denom) for v in values]
    g = reduce(math.gcd, (abs(v) for v in ints), 0) or 1
    ints = [v // g for v in ints]
    return ints[:-1], ints[-1]


def _set_type(coefs: list[int], sense: Sense, b: int) -> ConstraintType | None:
    """Partitioning/packing/covering test on a +-1 row over binaries.

    With ``p`` negative coefficients, ``sum <= 1 - p`` is a packing row and
    ``sum >= 1 - p`` a covering row. Covering is only recognised on rows
    declared ``>=``: otherwise every ``x1 + ... + xn <= n - 1`` would count as
    a cover of complemented literals. A ``>=`` row whose negation is a packing
    row (``-x1 - x2 - x3 >= -1``) is a packing row.
    """
    nneg = sum(1 for a in coefs if a < 0)
    npos = len(coefs) - nneg
    if sense is Sense.EQ:
        return ConstraintType.SET_PARTITIONING if b == 1 - nneg else None
    if sense is Sense.LE:
        return ConstraintType.SET_PACKING if b == 1 - nneg else None
    if b == 1 - nneg:
        return ConstraintType.SET_COVERING
    if -b == 1 - npos:
        return ConstraintType.SET_PACKING
    return None


def _classify_side(coefs: list[int], kinds: list[VarKind], sense: Sense, b: int) -> ConstraintType:
    n = len(coefs)
    if n == 1:
        return ConstraintType.SINGLETON

    if sense is Sense.EQ:
        negatives = sum(1 for a in coefs if a < 0)
        if b < 0 or (b == 0 and 2 * negatives > n):
            coefs, b = [-a for a in coefs], -b

    if n == 2:
        if sense is Sense.EQ:
            return ConstraintType.AGGREGATION
        if kinds[0] == kinds[1] and coefs[0] == -coefs[1]:
            return ConstraintType.PRECEDENCE
        if kinds.count(VarKind.BINARY) == 1:
            return ConstraintType.VARIABLE_BOUND

    all_binary = all(k is VarKind.BINARY for k in kinds)
    if all_binary and all(abs(a) == 1 for a in coefs):
        tag = _set_type(coefs, sense, b)
        if tag is not None:
            return tag

    # knapsack family: <= (or =) form with binaries complemented
    if sense is Sense.GE:
        coefs, b, sense = [-a for a in coefs], -b, Sense.LE
    comp_b = b
    weights = []
    for a, k in zip(coefs, kinds):
        if a < 0 and k is VarKind.BINARY:
            comp_b -= a
            weights.append(-a)
        else:
            weights.append(a)

    if all_binary:
        unit = all(w == 1 for w in weights)
        if sense is Sense.EQ:
            if unit and comp_b >= 2:
                return ConstraintType.CARDINALITY
            if comp_b >= 2:
                return ConstraintType.EQUATION_KNAPSACK
        else:
            if unit and comp_b >= 2:
                return ConstraintType.INVARIANT_KNAPSACK
            if comp_b >= 2 and comp_b in weights:
                return ConstraintType.BIN_PACKING
            if comp_b >= 2:
                return ConstraintType.KNAPSACK

    n_bin = kinds.count(VarKind.BINARY)
    n_cont = kinds.count(VarKind.CONTINUOUS)
    if n_cont == 0 and sense is Sense.LE and comp_b >= 0 and min(weights) >= 0:
        return ConstraintType.INTEGER_KNAPSACK
    if n_cont and n_bin and n_bin + n_cont == n:
        return ConstraintType.MIXED_BINARY
    return ConstraintType.GENERAL_LINEAR


def classify_constraint(
    c: Constraint, variables: Sequence[Variable] | Mapping[int, Variable]
) -> ConstraintType:
    """Assign one structural tag to a row. Total: never raises for parsed rows."""
    if not c.terms:
        return ConstraintType.EMPTY
    lo, up = c.lower, c.upper
    if math.isinf(lo) and math.isinf(up):
        return ConstraintType.FREE
    if len(c.terms) == 1:
        return ConstraintType.SINGLETON

    kinds = [variables[j].kind for j, _ in c.terms]
    raw = [a for _, a in c.terms]

    def side(sense: Sense, rhs) -> ConstraintType:
        coefs, b = _primitive(raw, Fraction(rhs))
        return _classify_side(coefs, kinds, sense, b)

    if lo == up:
        return side(Sense.EQ, up)
    if math.isinf(lo):
        return side(Sense.LE, up)
    if math.isinf(up):
        return side(Sense.GE, lo)
    upper_tag = side(Sense.LE, up)
    lower_tag = side(Sense.GE, lo)
    return upper_tag if upper_tag == lower_tag else ConstraintType.GENERAL_LINEAR


@dataclass(frozen=True)
class StructureHistogram:
    counts: dict[ConstraintType, int]
    n_vars: int
    n_constrs: int
    n_binary: int
    n_integer: int
    n_continuous: int
    name: str = ""

    def present(self) -> list[tuple[ConstraintType, int]]:
        """Non-zero buckets in canonical type order."""
        return [(t, self.counts.get(t, 0)) for t in ConstraintType if self.counts.get(t, 0)]

    def report(self) -> str:
        lines = [
            f"instance: {self.name}",
            f"variables: {self.n_vars} (binary {self.n_binary}, integer {self.n_integer}, "
            f"continuous {self.n_continuous})",
            f"constraints: {self.n_constrs}",
        ]
        for t, count in self.present():
            lines.append(f"  {t.value:<20} {count}")
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "n_vars": self.n_vars,
            "n_constrs": self.n_constrs,
            "n_binary": self.n_binary,
            "n_integer": self.n_integer,
            "n_continuous": self.n_continuous,
            "counts": {t.value: self.counts.get(t, 0) for t in ConstraintType},
        }

    def csv_row(self) -> list:
        return [self.name, self.n_vars, self.n_constrs] + [self.counts.get(t, 0) for t in ConstraintType]

    @staticmethod
    def csv_header() -> list[str]:
        return ["instance", "n", "m"] + [t.value for t in ConstraintType]


def histogram(instance: MilpInstance) -> StructureHistogram:
    counts = {t: 0 for t in ConstraintType}
    for c in instance.constraints:
        counts[classify_constraint(c, instance.variables)] += 1
    kinds = [v.kind for v in instance.variables]
    return StructureHistogram(
        counts={t: k for t, k in counts.items() if k},
        n_vars=instance.n,
        n_constrs=instance.m,
        n_binary=kinds.count(VarKind.BINARY),
        n_integer=kinds.count(VarKind.INTEGER),
        n_continuous=kinds.count(VarKind.CONTINUOUS),
        name=instance.name,
    )
