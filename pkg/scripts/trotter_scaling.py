"""Product-formula error against slice count for a chosen Hamiltonian.

Writes the sweep CSV (one row per order/r point, fitted slopes as trailing
comments) and prints the slopes.

    python scripts/trotter_scaling.py --model ising --n 4 --B 0.7 --orders 1,2,4
    python scripts/trotter_scaling.py --random-d 3 --n 5 --seed 3 --out sparse.csv
"""

import argparse
import sys

from qsimkit import cli


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    src = ap.add_mutually_exclusive_group()
    src.add_argument("--model", choices=("ising", "xy", "heisenberg"))
    src.add_argument("--pauli", help="inline Pauli sum, e.g. '1 X;1 Z'")
    src.add_argument("--random-d", type=int)
    ap.add_argument("--n", type=int, default=3)
    ap.add_argument("--B", type=float, default=0.5)
    ap.add_argument("--t", type=float, default=1.0)
    ap.add_argument("--r", default="8,16,32,64,128,256,512,1024")
    ap.add_argument("--orders", default="1,2,4")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out")
    args = ap.parse_args()

    argv = ["sweep", "--t", str(args.t), "--r", args.r, "--order", args.orders, "--seed", str(args.seed)]
    if args.random_d is not None:
        argv += ["--random-d", str(args.random_d), "--n", str(args.n)]
    elif args.pauli:
        argv += ["--pauli", args.pauli]
    else:
        argv += ["--model", args.model or "ising", "--n", str(args.n), "--B", str(args.B)]
    text = cli.execute(cli.config_from_args(argv))
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    _, slopes = cli.parse_sweep_csv(text)
    for (order, k), value in slopes.items():
        print(f"order={order} k={k} slope={value:+.4f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
