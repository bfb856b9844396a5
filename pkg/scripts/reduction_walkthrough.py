#!/usr/bin/env python3
"""Walk through the reduction of a redundant 3-variable map, step by step.

The example map has full-rank exponents but a rank-2 coefficient matrix, so
one coordinate is conserved.  The walkthrough prints the transform, the
decoupled coordinate, the per-quasimonomial initial-value factors, the merged
matrices, and then verifies the extracted constant along a simulated orbit.

Run:  python scripts/reduction_walkthrough.py [--initial X1,X2,X3]
"""

import argparse
from fractions import Fraction

from qpmaps import (
    QPMap,
    State,
    evaluate_constant,
    iterate,
    mmatrix,
    rank,
    reduce,
)
from qpmaps.linalg import RationalMatrix

M = RationalMatrix.from_rows


def fmt(mat: RationalMatrix) -> str:
    rows = [[str(mat[i, j]) for j in range(mat.cols)] for i in range(mat.rows)]
    width = max((len(e) for r in rows for e in r), default=1)
    return "\n".join("  [" + "  ".join(e.rjust(width) for e in r) + "]"
                     for r in rows)


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--initial", default="1.2,0.9,2.0",
                        help="comma-separated positive start state")
    parser.add_argument("--steps", type=int, default=40)
    args = parser.parse_args()
    x0 = State(tuple(float(v) for v in args.initial.split(",")))

    qp = QPMap(lam=(Fraction(1, 4), Fraction(1, 4), 0),
               A=M([[Fraction(-1, 4), 0, 0], [0, Fraction(-1, 4), 0],
                    [0, 0, 0]]),
               B=M([[1, 1, 1], [1, 1, 0], [1, 0, 0]]))
    print("input map: n=3, m=3")
    print("B =")
    print(fmt(qp.B))
    print("(lam|A) =")
    print(fmt(mmatrix(qp)))
    print(f"rank B = {rank(qp.B)},  rank (lam|A) = {rank(mmatrix(qp))}  "
          "-> one conserved coordinate\n")

    report = reduce(qp, x0)
    for idx, rec in enumerate(report.steps):
        print(f"step {idx + 1}: {rec.kind.value}")
        print("transform C =")
        print(fmt(rec.transform.C))
        print(f"decoupled coordinate indices: {list(rec.decoupled_indices)}")
        if rec.q_factors:
            print(f"initial-value factors q: "
                  f"{[str(q) for q in rec.q_factors]}")
        print()

    final = report.final
    print(f"non-redundant form: n={final.n}, m={final.m}")
    print("B =")
    print(fmt(final.B))
    print("(lam|A) =")
    print(fmt(mmatrix(final)))
    print()

    traj = iterate(qp, x0, args.steps)
    for c in report.constants:
        values = [evaluate_constant(c, s) for s in traj]
        drift = max(values) - min(values)
        exps = "*".join(f"x{k + 1}^{e}" for k, e in enumerate(c.exponents) if e)
        print(f"constant of motion {exps}: value {values[0]:.12g}, "
              f"drift over {args.steps} steps {drift:.3e}")


if __name__ == "__main__":
    main()
