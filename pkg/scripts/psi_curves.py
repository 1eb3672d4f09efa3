"""Tabulate the scalar functionals psi1/psi2/psi3 and the location maps
Lambda, F over a mu grid for one processing function.

Writes a CSV that plots directly with gnuplot/matplotlib, e.g.

    python3 scripts/psi_curves.py --func star --delta 3 --out psi_star_d3.csv
"""

import argparse
import csv

import numpy as np

from orthospec import f_of_mu, lambda_of_mu, make_function, mu_bar, mu_hat, psi


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--func", default="star")
    ap.add_argument("--delta", type=float, default=3.0)
    ap.add_argument("--points", type=int, default=200)
    ap.add_argument("--out", default="psi_curves.csv")
    args = ap.parse_args()

    func = make_function(args.func)
    delta = args.delta
    kappa = delta / (delta - 1.0)
    mb = mu_bar(func, delta)
    mh = mu_hat(func, delta)
    print(f"{func.label()} delta={delta:g}: mu_bar={mb.mu:.6f} "
          f"mu_hat={mh.mu if mh.found else float('nan'):.6f} kappa={kappa:.6f}")

    mus = np.linspace(0.01, 0.99, args.points)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["mu", "psi1", "psi2", "psi3", "lambda", "f"])
        for mu in mus:
            p = psi(func, float(mu), delta)
            lam = lambda_of_mu(func, float(mu), delta)
            fv = f_of_mu(func, float(mu), delta)
            w.writerow([f"{mu:.6f}", f"{p.psi1:.8f}", f"{p.psi2:.8f}",
                        f"{p.psi3:.8f}", f"{lam:.8f}", f"{fv:.8f}"])
    print(f"wrote {args.out} ({args.points} rows)")


if __name__ == "__main__":
    main()
