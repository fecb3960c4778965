"""Realised vs predicted quadratic variation of a binary bond price.

Along each simulated information path the bond price is a semimartingale
whose diffusion coefficient is the discounted posterior variance of the
terminal value divided by the time left. Summing squared price increments
and regressing against the time-integral of the squared coefficient gives
a slope that should sit at 1 when both the sampler and the coefficient
formula are right.
"""

import argparse
import csv

import numpy as np

from levybridge import (
    BrownianKernel,
    LRBSpec,
    RateCurve,
    TerminalLaw,
    binary_bond_posterior,
    price_many,
    sde_coefficients,
    simulate_paths,
)

LOW, HIGH = 0.0, 1.0


def diffusion_row(spec, curve, t, xi):
    # vectorised version of the sde_coefficients diffusion for a two-point
    # terminal law: posterior variance is (high-low)^2 * rho0 * rho1
    rho0, rho1 = binary_bond_posterior(spec, t, xi)
    var = (HIGH - LOW) ** 2 * rho0 * rho1
    df = curve.discount(t, spec.horizon)
    return df * var / (spec.horizon - t)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--paths", type=int, default=400)
    ap.add_argument("--steps", type=int, default=180, help="grid steps over [0, 0.9]")
    ap.add_argument("--seed", type=int, default=99)
    ap.add_argument("--out", help="write per-path realised/predicted pairs as CSV")
    args = ap.parse_args()

    spec = LRBSpec(BrownianKernel(), 1.0, TerminalLaw.binary(LOW, HIGH, 0.5))
    curve = RateCurve.flat(0.05)
    times = np.linspace(0.0, 0.9, args.steps + 1)

    # sampling grids exclude t=0; every path starts there at state 0
    values = simulate_paths(spec, times[1:], args.paths, args.seed)
    values = np.hstack([np.zeros((args.paths, 1)), values])
    prices = np.empty_like(values)
    diffusion = np.empty_like(values)
    for j, t in enumerate(times):
        prices[:, j] = price_many(spec, curve, t, values[:, j])
        diffusion[:, j] = diffusion_row(spec, curve, t, values[:, j])

    realised = np.sum(np.diff(prices, axis=1) ** 2, axis=1)
    dt = np.diff(times)
    predicted = np.sum(diffusion[:, :-1] ** 2 * dt, axis=1)

    slope = float(np.sum(realised * predicted) / np.sum(predicted**2))
    ratio = float(realised.mean() / predicted.mean())
    print(f"paths {args.paths}, steps {args.steps}, seed {args.seed}")
    print(f"mean realised QV   {realised.mean():.6f}")
    print(f"mean predicted QV  {predicted.mean():.6f}")
    print(f"through-origin slope {slope:.4f}, ratio of means {ratio:.4f}")

    # spot-check the vectorised coefficient against the scalar route
    err = 0.0
    for t, xi in ((0.2, 0.1), (0.5, 0.25), (0.8, 0.7)):
        _, d = sde_coefficients(spec, curve, t, xi)
        v = float(diffusion_row(spec, curve, t, np.array([xi]))[0])
        err = max(err, abs(d - v) / d)
    print(f"coefficient spot-check max rel err {err:.2e}")

    if args.out:
        with open(args.out, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["path_id", "realised", "predicted"])
            for i in range(args.paths):
                w.writerow([i, f"{realised[i]:.17g}", f"{predicted[i]:.17g}"])
        print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
