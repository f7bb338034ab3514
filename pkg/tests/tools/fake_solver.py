#!/usr/bin/env python3
"""Stand-in for the scip / gurobi_cl executables in tests.

Behaviour comes from the environment:
  FAKE_SOLVER_TIMES   JSON {instance stem: seconds}; default 2.0
  FAKE_SOLVER_MODE    "ok" (default), "garbage" (unparseable log), "crash"
  FAKE_SOLVER_ARGV    file to append the received argv (JSON line) to
"""

import json
import os
import sys
from pathlib import Path


def stem(path):
    name = Path(path).name
    return name.split(".")[0]


def scripted_time(instance):
    times = json.loads(os.environ.get("FAKE_SOLVER_TIMES", "{}"))
    return float(times.get(stem(instance), 2.0))


def scip(argv):
    settings = argv[argv.index("-s") + 1]
    command = argv[argv.index("-c") + 1].split()
    instance = command[command.index("read") + 1]
    params = {}
    for line in Path(settings).read_text().splitlines():
        key, _, value = line.partition("=")
        params[key.strip()] = value.strip()
    t = scripted_time(instance)
    limit = float(params.get("limits/time", "1e20"))
    if t > limit:
        status, t, gap = "solving was interrupted [time limit reached]", limit + 0.01, "12.50 %"
    else:
        status, gap = "problem is solved [optimal solution found]", "0.00 %"
    applied = 0 if params.get("separating/gomory/freq") == "-1" else 7
    print(f"SCIP> read {instance}")
    print(f"seed shift {params.get('randomization/randomseedshift')}")
    print(f"SCIP Status        : {status}")
    print(f"Solving Time (sec) : {t:.2f}")
    print(f"Gap                : {gap}")
    print("Separators         :   ExecTime  SetupTime      Calls  RootCalls    Cutoffs    DomReds  FoundCuts ViaPoolAdd  DirectAdd    Applied ViaPoolApp  DirectApp      Conss")
    print("  cut pool         :       0.01          -         38          9          -          -        110          -          -          -          -          -          -")
    print(f"  gomory           :       0.20       0.00          9          9          0          0         40         40          0 {applied:10d}          7          0          0")
    print("  clique           :       0.02       0.00         12          9          0          0         31         31          0          0         18          0          0")
    print("Cutselectors       :   ExecTime")


def gurobi(argv):
    params = dict(a.split("=", 1) for a in argv if "=" in a)
    instance = [a for a in argv if "=" not in a][-1]
    t = scripted_time(instance)
    limit = float(params.get("WorkLimit", "1e20"))
    print("Gurobi Optimizer version 13.0.0")
    print("")
    print("Cutting planes:")
    print(f"  Gomory: {0 if params.get('GomoryPasses') == '0' else 4}")
    print("")
    if t > limit:
        print(f"Explored 10 nodes (100 simplex iterations) in {limit:.2f} seconds ({limit:.2f} work units)")
        print("Work limit reached")
        print("Best objective 1.0e+01, best bound 9.0e+00, gap 10.0000%")
    else:
        print(f"Explored 10 nodes (100 simplex iterations) in {t:.2f} seconds ({t:.2f} work units)")
        print("Optimal solution found (tolerance 1.00e-04)")
        print("Best objective 1.0e+01, best bound 1.0e+01, gap 0.0000%")


def main():
    argv = sys.argv[1:]
    log = os.environ.get("FAKE_SOLVER_ARGV")
    if log:
        with open(log, "a") as fh:
            fh.write(json.dumps([Path(sys.argv[0]).name] + argv) + "\n")
    mode = os.environ.get("FAKE_SOLVER_MODE", "ok")
    if mode == "garbage":
        print("segmentation fault (core dumped)")
        return 139
    if mode == "crash":
        return 1
    if Path(sys.argv[0]).name.startswith("gurobi"):
        gurobi(argv)
    else:
        scip(argv)
    return 0


if __name__ == "__main__":
    sys.exit(main())
