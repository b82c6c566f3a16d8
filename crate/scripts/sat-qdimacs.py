#!/usr/bin/env python3
"""External-solver adapter for purely existential QDIMACS.

Usage: sat-qdimacs.py FILE. Exits 10 when satisfiable, 20 when not, 1 on
input it cannot decide (any universal block). Needs python-sat.
"""
import sys

from pysat.solvers import Glucose4


def main(path):
    clauses = []
    with open(path) as f:
        for line in f:
            tok = line.split()
            if not tok or tok[0] in ("c", "p"):
                continue
            if tok[0] == "a":
                print("universal block: not a SAT instance", file=sys.stderr)
                return 1
            if tok[0] == "e":
                continue
            lits = [int(t) for t in tok]
            assert lits[-1] == 0, "clause must end in 0"
            clauses.append(lits[:-1])
    with Glucose4(bootstrap_with=clauses) as s:
        return 10 if s.solve() else 20


if __name__ == "__main__":
    sys.exit(main(sys.argv[1]))
