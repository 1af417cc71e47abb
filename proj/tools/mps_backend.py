#!/usr/bin/env python3
"""Mixed-integer solver backend over fixed-format MPS, built on scipy.

Reads one MPS file (the subset the rvpp exporter writes: N/L/G/E rows,
INTORG/INTEND integer markers, an optional RHS entry on the objective row
carrying the source model's additive constant, and FX/FR/MI/LO/UP/BV bounds),
solves the minimization with scipy's branch-and-bound, and prints a JSON
object on stdout:

    {"status": "optimal", "objective": <min c.x>,
     "maximize_equivalent": <-(min c.x) + objective constant>,
     "values": {"X1": ..., ...}}

The exporter negates objective coefficients, so `maximize_equivalent` is the
objective of the original maximization and is what callers compare against.
Exit code 0 with status "optimal", 1 otherwise.
"""

import json
import sys

import numpy as np
from scipy import optimize, sparse

INF = float("inf")


def parse_mps(path):
    rows = []  # (name, sense) with sense in {L, G, E}
    row_index = {}
    obj_row = None
    cols = []  # name in declaration order
    col_index = {}
    integrality = {}
    obj = {}
    entries = []  # (row, col, value)
    rhs = {}
    obj_constant = 0.0
    bounds = {}  # col -> [lo, hi]
    integer_block = False
    section = None

    with open(path) as f:
        for raw in f:
            line = raw.rstrip("\n")
            if not line or line.startswith("*"):
                continue
            if not line[0].isspace():
                section = line.split()[0]
                continue
            fields = line.split()
            if section == "ROWS":
                sense, name = fields
                if sense == "N":
                    obj_row = name
                else:
                    row_index[name] = len(rows)
                    rows.append((name, sense))
            elif section == "COLUMNS":
                if len(fields) >= 3 and fields[1] == "'MARKER'":
                    integer_block = fields[2] == "'INTORG'"
                    continue
                col = fields[0]
                if col not in col_index:
                    col_index[col] = len(cols)
                    cols.append(col)
                    integrality[col] = 1 if integer_block else 0
                for i in range(1, len(fields), 2):
                    row, value = fields[i], float(fields[i + 1])
                    if row == obj_row:
                        obj[col] = obj.get(col, 0.0) + value
                    else:
                        entries.append((row_index[row], col_index[col], value))
            elif section == "RHS":
                for i in range(1, len(fields), 2):
                    row, value = fields[i], float(fields[i + 1])
                    if row == obj_row:
                        obj_constant = value
                    else:
                        rhs[row_index[row]] = value
            elif section == "BOUNDS":
                kind, _, col = fields[0], fields[1], fields[2]
                value = float(fields[3]) if len(fields) > 3 else 0.0
                b = bounds.setdefault(col, [0.0, INF])
                if kind == "BV":
                    b[0], b[1] = 0.0, 1.0
                elif kind == "FX":
                    b[0], b[1] = value, value
                elif kind == "FR":
                    b[0], b[1] = -INF, INF
                elif kind == "MI":
                    b[0] = -INF
                elif kind == "LO":
                    b[0] = value
                elif kind == "UP":
                    b[1] = value
                else:
                    raise ValueError(f"unsupported bound type {kind}")
            elif section == "RANGES":
                raise ValueError("RANGES section not supported")

    n = len(cols)
    c = np.zeros(n)
    for col, value in obj.items():
        c[col_index[col]] = value
    lb = np.zeros(n)
    ub = np.full(n, INF)
    for col, (lo, hi) in bounds.items():
        lb[col_index[col]], ub[col_index[col]] = lo, hi
    integ = np.array([integrality[c_] for c_ in cols])

    m = len(rows)
    if m:
        r, col, val = zip(*entries)
        a = sparse.csr_matrix((val, (r, col)), shape=(m, n))
    else:
        a = sparse.csr_matrix((0, n))
    con_lo = np.full(m, -INF)
    con_hi = np.full(m, INF)
    for i, (_, sense) in enumerate(rows):
        b = rhs.get(i, 0.0)
        if sense in ("G", "E"):
            con_lo[i] = b
        if sense in ("L", "E"):
            con_hi[i] = b
    return cols, c, obj_constant, integ, lb, ub, a, con_lo, con_hi


def main():
    if len(sys.argv) != 2:
        print(json.dumps({"status": "usage", "error": "expected one MPS path"}))
        return 1
    cols, c, obj_constant, integ, lb, ub, a, con_lo, con_hi = parse_mps(sys.argv[1])
    constraints = optimize.LinearConstraint(a, con_lo, con_hi) if a.shape[0] else ()
    res = optimize.milp(
        c,
        integrality=integ,
        bounds=optimize.Bounds(lb, ub),
        constraints=constraints,
    )
    if not res.success:
        print(json.dumps({"status": "infeasible_or_failed", "message": res.message}))
        return 1
    print(
        json.dumps(
            {
                "status": "optimal",
                "objective": res.fun,
                "maximize_equivalent": -res.fun + obj_constant,
                "values": {name: res.x[i] for i, name in enumerate(cols)},
            }
        )
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
