#!/usr/bin/env python3
"""Solve a pure-integer MPS model and write a '<name> <value>' solution file.

Exit codes: 0 proven optimal, 2 stopped with an incumbent, 3 infeasible,
4 solver stack unavailable, 1 anything else.
"""

import argparse
import sys


def parse_mps(path):
    rows = []  # (name, sense)
    row_index = {}
    cols = {}  # name -> list[(row_idx_or_-1_for_cost, coef)]
    col_order = []
    rhs = {}
    bounds = {}
    obj_row = None
    section = None
    with open(path) as fh:
        for raw in fh:
            line = raw.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("*"):
                continue
            if not line[0].isspace():
                section = line.split()[0].upper()
                continue
            tok = line.split()
            if section == "ROWS":
                sense, name = tok[0].upper(), tok[1]
                if sense == "N":
                    if obj_row is None:
                        obj_row = name
                    continue
                row_index[name] = len(rows)
                rows.append((name, sense))
            elif section == "COLUMNS":
                if len(tok) >= 3 and tok[1].strip("'") == "MARKER":
                    continue
                if "'MARKER'" in line:
                    continue
                name = tok[0]
                if name not in cols:
                    cols[name] = []
                    col_order.append(name)
                for k in range(1, len(tok) - 1, 2):
                    row, val = tok[k], float(tok[k + 1])
                    cols[name].append((-1 if row == obj_row else row_index[row], val))
            elif section == "RHS":
                for k in range(1, len(tok) - 1, 2):
                    row, val = tok[k], float(tok[k + 1])
                    rhs[-1 if row == obj_row else row_index[row]] = val
            elif section == "BOUNDS":
                kind, var = tok[0].upper(), tok[2]
                lo, hi = bounds.get(var, (0.0, None))
                if kind == "FX":
                    lo = hi = float(tok[3])
                elif kind == "LO":
                    lo = float(tok[3])
                elif kind == "UP":
                    hi = float(tok[3])
                elif kind == "BV":
                    lo, hi = 0.0, 1.0
                else:
                    raise ValueError("unsupported bound kind " + kind)
                bounds[var] = (lo, hi)
            elif section == "RANGES":
                raise ValueError("RANGES not supported")
    return rows, cols, col_order, rhs, bounds


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("mps")
    ap.add_argument("--timelimit", type=float, default=0.0)
    ap.add_argument("--sol", required=True)
    args = ap.parse_args()

    try:
        import numpy as np
        from scipy import sparse
        from scipy.optimize import Bounds, LinearConstraint, milp
    except ImportError as exc:
        print("solver stack unavailable:", exc, file=sys.stderr)
        return 4

    rows, cols, col_order, rhs, bounds = parse_mps(args.mps)
    n = len(col_order)
    col_pos = {name: i for i, name in enumerate(col_order)}

    c = np.zeros(n)
    data, ri, ci = [], [], []
    for name, entries in cols.items():
        j = col_pos[name]
        for row, val in entries:
            if row == -1:
                c[j] += val
            else:
                data.append(val)
                ri.append(row)
                ci.append(j)
    a = sparse.csc_array((data, (ri, ci)), shape=(len(rows), n))
    constant = -rhs.get(-1, 0.0)

    lo = np.full(len(rows), -np.inf)
    hi = np.full(len(rows), np.inf)
    for i, (_, sense) in enumerate(rows):
        b = rhs.get(i, 0.0)
        if sense in ("L", "E"):
            hi[i] = b
        if sense in ("G", "E"):
            lo[i] = b

    vlo = np.zeros(n)
    vhi = np.full(n, np.inf)
    for name, (blo, bhi) in bounds.items():
        j = col_pos[name]
        vlo[j] = blo
        if bhi is not None:
            vhi[j] = bhi

    options = {}
    if args.timelimit > 0:
        options["time_limit"] = args.timelimit
    res = milp(
        c,
        constraints=[LinearConstraint(a, lo, hi)] if len(rows) else [],
        integrality=np.ones(n),
        bounds=Bounds(vlo, vhi),
        options=options,
    )

    if res.status == 2:
        print("infeasible", file=sys.stderr)
        return 3
    if res.x is None:
        print("no solution:", res.message, file=sys.stderr)
        return 1

    with open(args.sol, "w") as out:
        out.write("# objective %.17g\n" % (float(c @ res.x) + constant))
        for name in col_order:
            out.write("%s %.17g\n" % (name, float(res.x[col_pos[name]])))
    return 0 if res.status == 0 else 2


if __name__ == "__main__":
    sys.exit(main())
