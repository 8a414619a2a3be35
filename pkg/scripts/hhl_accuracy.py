"""Accuracy of the simulated linear-system solver against register width.

Draws seeded random Hermitian problems with bounded condition number and
reports, per register width, the median and maximum absolute error of the
normalized estimate against the classical solution. Output is CSV.

    python scripts/hhl_accuracy.py --problems 50 --mbits 3,4,5,6,7,8,9,10
"""

import argparse
import sys
from dataclasses import replace

import numpy as np

from qsimkit.hhl import classical_solve, random_problem, solve


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--problems", type=int, default=20)
    ap.add_argument("--qubits", type=int, default=2)
    ap.add_argument("--kappa", type=float, default=10.0)
    ap.add_argument("--mbits", default="4,6,8,10")
    ap.add_argument("--seed", type=int, default=20240611)
    ap.add_argument("--positive", action="store_true", help="positive-definite A only")
    args = ap.parse_args()

    g = np.random.default_rng(args.seed)
    problems = [
        random_problem(args.qubits, g, kappa=args.kappa, signs=not args.positive)
        for _ in range(args.problems)
    ]
    truth = [classical_solve(p.A, p.b, p.M).normalized for p in problems]
    print(f"# seed={args.seed} problems={args.problems} qubits={args.qubits} kappa={args.kappa}")
    print("mbits,median_err,max_err,mean_success_prob")
    for m in (int(x) for x in args.mbits.split(",")):
        results = [solve(replace(p, m_bits=m)) for p in problems]
        errs = np.abs([r.estimate - x for r, x in zip(results, truth)])
        succ = np.mean([r.success_probability for r in results])
        print(f"{m},{np.median(errs):.6e},{errs.max():.6e},{succ:.6e}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
