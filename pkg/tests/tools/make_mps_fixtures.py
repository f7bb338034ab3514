"""Regenerate the hand-labelled MPS fixtures under tests/fixtures/mps.

Each row carries a tag assigned by hand from the MIPLIB 2017 category
definitions. The manifest maps file -> row -> tag and is the test oracle.
"""

import gzip
import json
from pathlib import Path

OUT = Path(__file__).resolve().parents[1] / "fixtures" / "mps"

BIN = ["B1", "B2", "B3", "B4", "B5"]
INT = ["I1", "I2", "I3"]
CONT = ["X1", "X2", "X3"]
BOUNDS = {**{b: (0, 1) for b in BIN}, **{i: (0, 10) for i in INT}, **{x: (0, 100) for x in CONT}}

# (row, sense, {var: coef}, rhs, range, tag)
MIX_A = [
    ("sing_a", "L", {"B1": "3"}, "2", None, "singleton"),
    ("agg_a", "E", {"X1": "1", "X2": "2"}, "3", None, "aggregation"),
    ("prec_a", "L", {"B1": "1", "B2": "-1"}, "0", None, "precedence"),
    ("vb_a", "L", {"X1": "1", "B1": "-10"}, "0", None, "variable_bound"),
    ("part_a", "E", {"B1": "1", "B2": "1", "B3": "1"}, "1", None, "set_partitioning"),
    ("pack_a", "L", {"B1": "1", "B2": "1", "B3": "1"}, "1", None, "set_packing"),
    ("cov_a", "G", {"B1": "1", "B2": "1", "B3": "1"}, "1", None, "set_covering"),
    ("card_a", "E", {"B1": "1", "B2": "1", "B3": "1", "B4": "1"}, "2", None, "cardinality"),
    ("invk_a", "L", {"B1": "1", "B2": "1", "B3": "1", "B4": "1"}, "3", None, "invariant_knapsack"),
    ("eqk_a", "E", {"B1": "2", "B2": "3", "B3": "4"}, "5", None, "equation_knapsack"),
    ("binp_a", "L", {"B1": "5", "B2": "2", "B3": "3"}, "5", None, "bin_packing"),
    ("knap_a", "L", {"B1": "3", "B2": "4", "B3": "5"}, "8", None, "knapsack"),
    ("ik_a", "L", {"I1": "2", "I2": "3", "B1": "1"}, "12", None, "integer_knapsack"),
    ("mb_a", "L", {"X1": "1", "X2": "1", "B1": "-4"}, "3", None, "mixed_binary"),
    ("gl_a", "L", {"X1": "1", "I1": "1", "B1": "1"}, "5", None, "general_linear"),
    ("empty_a", "L", {}, "4", None, "empty"),
    ("free_a", "N", {"X1": "1", "X2": "1"}, None, None, "free"),
]

MIX_B = [
    ("sing_b", "G", {"X1": "0.5"}, "1", None, "singleton"),
    ("agg_b", "E", {"I1": "1", "B1": "-1"}, "0", None, "aggregation"),
    ("prec_b", "L", {"X1": "3", "X2": "-3"}, "4", None, "precedence"),
    ("prec_b2", "G", {"I1": "0.5", "I2": "-0.5"}, "-1", None, "precedence"),
    ("vb_b", "G", {"I1": "1", "B2": "-5"}, "0", None, "variable_bound"),
    ("part_b", "E", {"B1": "2", "B2": "2", "B3": "2", "B4": "2"}, "2", None, "set_partitioning"),
    ("part_b2", "E", {"B1": "1", "B2": "-1", "B3": "-1"}, "0", None, "set_partitioning"),
    ("pack_b", "L", {"B1": "1", "B2": "1"}, "1", None, "set_packing"),
    ("pack_b2", "G", {"B1": "-1", "B2": "-1", "B3": "-1"}, "-1", None, "set_packing"),
    ("cov_b", "G", {"B1": "0.5", "B2": "0.5", "B3": "0.5", "B4": "0.5"}, "0.5", None, "set_covering"),
    ("cov_b2", "G", {"B1": "1", "B2": "-1", "B3": "1"}, "0", None, "set_covering"),
    ("card_b", "E", {b: "-1" for b in BIN}, "-3", None, "cardinality"),
    ("invk_b", "G", {"B1": "-1", "B2": "-1", "B3": "-1", "B4": "-1"}, "-2", None, "invariant_knapsack"),
    ("eqk_b", "E", {"B1": "1.5", "B2": "2.5", "B3": "1"}, "2.5", None, "equation_knapsack"),
    ("binp_b", "L", {"B1": "0.7", "B2": "0.3", "B3": "0.4"}, "0.7", None, "bin_packing"),
    ("knap_b", "L", {"B1": "3", "B2": "-4", "B3": "5"}, "4", None, "knapsack"),
    ("ik_b", "L", {"I1": "1", "I2": "1", "I3": "1"}, "7", None, "integer_knapsack"),
    ("mb_b", "G", {"X1": "2", "B1": "-3", "X2": "1"}, "1", None, "mixed_binary"),
    ("gl_b", "L", {"I1": "1", "I2": "-1", "I3": "1"}, "3", None, "general_linear"),
    ("gl_b2", "G", {"X1": "1", "X2": "1", "X3": "1"}, "2", None, "general_linear"),
    ("empty_b", "G", {}, "0", None, "empty"),
    ("free_b", "N", {"I1": "1", "B2": "2"}, None, None, "free"),
]

RANGED = [
    ("r_pack", "L", {"B1": "1", "B2": "1", "B3": "1"}, "1", "1", "general_linear"),
    ("r_eq", "E", {"B1": "1", "B2": "1", "B3": "1"}, "1", "0", "set_partitioning"),
    ("r_sing", "G", {"I1": "2"}, "1", "4", "singleton"),
    ("r_prec", "L", {"X1": "1", "X2": "-1"}, "1", "2", "precedence"),
    ("r_vb", "G", {"X1": "1", "B1": "-10"}, "-5", "5", "variable_bound"),
    ("r_ik", "L", {"I1": "1", "I2": "2"}, "9", "3", "general_linear"),
    ("r_mb", "E", {"X1": "1", "X2": "1", "B1": "-3"}, "1", "-2", "mixed_binary"),
]

SETCOVER = [(f"c{k}", "G", {BIN[k % 5]: "1", BIN[(k + 1) % 5]: "1", BIN[(k + 3) % 5]: "1"}, "1", None,
             "set_covering") for k in range(5)]

SINGLETONS = [
    ("s1", "L", {"X1": "1"}, "7", None, "singleton"),
    ("s2", "G", {"I2": "-2"}, "-9", None, "singleton"),
    ("s3", "E", {"B3": "1"}, "1", None, "singleton"),
]

MIXED = [
    ("k1", "L", {"B1": "6", "B2": "4", "B3": "3", "B4": "2"}, "9", None, "knapsack"),
    ("k2", "G", {"B2": "-5", "B3": "-5", "B4": "-1"}, "-7", None, "knapsack"),
    ("m1", "L", {"X1": "1", "X2": "-1", "B5": "20"}, "25", None, "mixed_binary"),
]


def _vars_used(rows):
    used = []
    for _, _, terms, *_ in rows:
        for v in terms:
            if v not in used:
                used.append(v)
    return sorted(used, key=lambda v: (v[0] != "B", v[0] != "I", v))


def free_text(name, rows, objsense=None):
    out = [f"NAME {name}"]
    if objsense:
        out += ["OBJSENSE", f"    {objsense}"]
    out.append("ROWS")
    out.append(" N obj")
    for r, sense, *_ in rows:
        out.append(f" {sense} {r}")
    out.append("COLUMNS")
    used = _vars_used(rows)
    in_int = False
    for k, v in enumerate(used):
        integer = v[0] in "BI"
        if integer and not in_int:
            out.append("    MARKER 'MARKER' 'INTORG'")
            in_int = True
        if not integer and in_int:
            out.append("    MARKER 'MARKER' 'INTEND'")
            in_int = False
        out.append(f"    {v} obj {k + 1}")
        for r, _, terms, *_ in rows:
            if v in terms:
                out.append(f"    {v} {r} {terms[v]}")
    if in_int:
        out.append("    MARKER 'MARKER' 'INTEND'")
    out.append("RHS")
    for r, sense, _, rhs, *_ in rows:
        if rhs is not None and rhs != "0":
            out.append(f"    RHS {r} {rhs}")
    if any(row[4] is not None for row in rows):
        out.append("RANGES")
        for r, _, _, _, rng, _ in rows:
            if rng is not None:
                out.append(f"    RNG {r} {rng}")
    out.append("BOUNDS")
    for v in used:
        lo, up = BOUNDS[v]
        out.append(f" UP BND {v} {up}")
    out.append("ENDATA")
    return "\n".join(out) + "\n"


def _fixed(f1="", f2="", f3="", f4="", f5="", f6=""):
    line = " " + f1.ljust(2) + " " + f2.ljust(8) + "  " + f3.ljust(8) + "  " + f4.ljust(12)
    if f5:
        line += "   " + f5.ljust(8) + "  " + f6
    return line.rstrip()


def fixed_text(name, rows):
    out = [f"NAME          {name}", "ROWS", _fixed("N", "obj")]
    for r, sense, *_ in rows:
        out.append(_fixed(sense, r))
    out.append("COLUMNS")
    used = _vars_used(rows)
    in_int = False
    for k, v in enumerate(used):
        integer = v[0] in "BI"
        if integer and not in_int:
            out.append(_fixed("", "MARKER", "'MARKER'", "", "'INTORG'"))
            in_int = True
        if not integer and in_int:
            out.append(_fixed("", "MARKER", "'MARKER'", "", "'INTEND'"))
            in_int = False
        out.append(_fixed("", v, "obj", str(k + 1)))
        for r, _, terms, *_ in rows:
            if v in terms:
                out.append(_fixed("", v, r, terms[v]))
    if in_int:
        out.append(_fixed("", "MARKER", "'MARKER'", "", "'INTEND'"))
    out.append("RHS")
    for r, sense, _, rhs, *_ in rows:
        if rhs is not None and rhs != "0":
            out.append(_fixed("", "RHS", r, rhs))
    out.append("BOUNDS")
    for v in used:
        out.append(_fixed("UP", "BND", v, str(BOUNDS[v][1])))
    out.append("ENDATA")
    return "\n".join(out) + "\n"


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    manifest = {}
    files = [
        ("mix_a.mps", free_text("mix_a", MIX_A), MIX_A),
        ("mix_b.mps", fixed_text("mix_b", MIX_B), MIX_B),
        ("ranged.mps", free_text("ranged", RANGED, objsense="MAX"), RANGED),
        ("setcover.mps.gz", free_text("setcover", SETCOVER), SETCOVER),
        ("singletons.mps", free_text("singletons", SINGLETONS), SINGLETONS),
        ("knapmix.mps", free_text("knapmix", MIXED), MIXED),
    ]
    for fname, text, rows in files:
        data = text.encode()
        path = OUT / fname
        if fname.endswith(".gz"):
            path.write_bytes(gzip.compress(data, mtime=0))
        else:
            path.write_bytes(data)
        manifest[fname] = {r[0]: r[5] for r in rows}
    (OUT / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")


if __name__ == "__main__":
    main()
