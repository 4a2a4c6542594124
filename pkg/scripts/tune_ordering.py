"""Grid search for the GFEGplus/GAEGplus step constants used in the minimax configs.

Runs on a seed that the experiments never use (100 by default) and only
visits constants inside each scheme's certified window, so every candidate
passes schedule validation.  Prints the final relative FB residual per
candidate, best first.

    python3 scripts/tune_ordering.py [--seed 100] [--d-low 0.1] [--iters 5000]
"""

import argparse
import itertools
import math

import numpy as np

from eglab.operators import fb_residual
from eglab.problems import MinimaxSpec, gen_quadratic_minimax
from eglab.schedules import GAEG_PLUS, GFEG_PLUS, gaeg_plus_schedule, gfeg_plus_schedule
from eglab.schemes import run


def final_rel(problem, scheme, schedule, iters):
    tr = run(problem, scheme, schedule, max_iter=iters, x0=np.full(problem.dim, 0.01))
    fb = tr.column("fb_residual")
    return fb[-1] / fb[0]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=100)
    ap.add_argument("--d-low", type=float, default=0.1)
    ap.add_argument("--iters", type=int, default=5000)
    args = ap.parse_args()
    problem = gen_quadratic_minimax(MinimaxSpec(50, 50, args.d_low, args.seed))
    L, rho = problem.lipschitz_L, problem.rho

    rows = []
    for mu, extra in itertools.product((0.2, 0.3, 0.45, 0.6), (0, 1, 3)):
        r = math.ceil(1 / mu) + extra
        s = gfeg_plus_schedule(L, rho, regime="exact", mu=mu, r=r)
        rows.append((final_rel(problem, GFEG_PLUS, s, args.iters), f"GFEGplus mu={mu} r={r}"))
    for frac, r in itertools.product((0.65, 0.75, 0.85, 0.95), (3, 5, 10)):
        eta = frac / L
        beta = 2 * rho + 0.02 * (eta - 2 * rho)
        s = gaeg_plus_schedule(L, rho, regime="aeg", eta=eta, beta=beta, r=r)
        rows.append((final_rel(problem, GAEG_PLUS, s, args.iters), f"GAEGplus eta={frac}/L r={r}"))
    for value, label in sorted(rows):
        print(f"{value:.3e}  {label}")


if __name__ == "__main__":
    main()
